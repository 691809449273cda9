//! Brownian-dynamics simulation of a point release toward a reflecting
//! sphere that absorbs only on circular receptor patches.
//!
//! Molecules are independent. Each one draws from its own ChaCha8 stream
//! keyed by `(seed, molecule index)`, so a run is bit-identical for any
//! worker count.

mod boundary;
mod engine;
mod layout;
pub mod vec3;

pub use boundary::{resolve_boundary, BoundaryOutcome, ReflectionRule};
pub use engine::{
    molecule_rng, run, step, Absorption, MoleculeRng, SimConfig, SimCounters, SimResult,
    StepControl,
};
pub use layout::{fibonacci_sphere, place_receptors, ReceptorLayout};
