//! Channel characterization for molecular communication via diffusion with a
//! spherical receiver whose surface carries `n` circular absorbing receptors.
//!
//! * [`specfun`]: `erf`, `erfc` and the scaled `erfcx` used by every closed form.
//! * [`analytic`]: hitting rate and cumulative hitting fraction, for the
//!   perfect absorber and for the receptor-covered sphere.
//! * [`design`]: minimum receptor count for a target fraction and
//!   surface-coverage sweeps.
//! * [`sim`]: 3-D Brownian-dynamics particle simulator used as the empirical
//!   check of the closed forms.

pub mod analytic;
pub mod design;
pub mod error;
pub mod sim;
pub mod specfun;

pub use analytic::{
    AbsorptionSeries, ChannelGeometry, Medium, ReactionBoundary, ReceptorSpec,
};
pub use design::{DesignQuery, DesignResult, EvalTime};
pub use error::{Error, Result};
