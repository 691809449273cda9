//! Closed-form hitting rate and cumulative hitting fraction.
//!
//! Units are fixed at the API boundary: lengths in μm, times in s, diffusion
//! coefficients in μm²/s, reaction rates in μm/s.
//!
//! Every `exp(a) * erfc(b)` product in the radiation-boundary solution has
//! `a - b^2 = -(r0 - rr)^2 / (4 D t)` and is evaluated as
//! `erfcx(b) * exp(-(r0 - rr)^2 / (4 D t))`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{erfc, erfcx};

/// Fluid medium, characterized by the messenger's diffusion coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Medium {
    /// μm²/s
    pub diffusion: f64,
}

impl Medium {
    pub fn new(diffusion: f64) -> Result<Self> {
        if !(diffusion.is_finite() && diffusion > 0.0) {
            return Err(Error::param("D", format!("must be finite and > 0, got {diffusion}")));
        }
        Ok(Self { diffusion })
    }
}

/// Point emitter at distance `emitter_distance` from the center of a
/// spherical receiver of radius `receiver_radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelGeometry {
    /// r0, μm
    pub emitter_distance: f64,
    /// rr, μm
    pub receiver_radius: f64,
}

impl ChannelGeometry {
    pub fn new(emitter_distance: f64, receiver_radius: f64) -> Result<Self> {
        if !(receiver_radius.is_finite() && receiver_radius > 0.0) {
            return Err(Error::param("rr", format!("must be finite and > 0, got {receiver_radius}")));
        }
        if !(emitter_distance.is_finite() && emitter_distance > receiver_radius) {
            return Err(Error::param(
                "r0",
                format!("must exceed rr = {receiver_radius}, got {emitter_distance}"),
            ));
        }
        Ok(Self {
            emitter_distance,
            receiver_radius,
        })
    }

    /// Emitter placed `gap` μm from the receiver surface.
    pub fn with_gap(receiver_radius: f64, gap: f64) -> Result<Self> {
        Self::new(receiver_radius + gap, receiver_radius)
    }

    /// Surface-to-emitter distance `r0 - rr`.
    pub fn gap(&self) -> f64 {
        self.emitter_distance - self.receiver_radius
    }
}

/// `count` circular receptors of radius `radius` on the receiver surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReceptorSpec {
    /// rs, μm
    pub radius: f64,
    pub count: u64,
}

impl ReceptorSpec {
    pub fn new(radius: f64, count: u64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::param("rs", format!("must be finite and > 0, got {radius}")));
        }
        Ok(Self { radius, count })
    }

    /// The patch homogenization assumes `rs << rr`; this is `false` once
    /// `rs >= rr / 10`. Not enforced.
    pub fn within_small_patch_regime(&self, receiver_radius: f64) -> bool {
        self.radius < receiver_radius / 10.0
    }

    /// Total patch area `n * pi * rs^2`, μm².
    pub fn total_area(&self) -> f64 {
        self.count as f64 * PI * self.radius * self.radius
    }
}

/// Radiation boundary `D dp/dr = w p` at the receiver surface.
///
/// `w = +inf` is the perfect absorber and is handled by separate closed
/// forms rather than by a large finite rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReactionBoundary {
    w: f64,
    beta: f64,
}

impl ReactionBoundary {
    /// `beta = (w rr + D) / (D rr)`.
    pub fn from_rate(w: f64, geometry: &ChannelGeometry, medium: &Medium) -> Result<Self> {
        if w.is_nan() || w < 0.0 {
            return Err(Error::param("w", format!("must be >= 0, got {w}")));
        }
        if w.is_infinite() {
            return Ok(Self::perfect());
        }
        let rr = geometry.receiver_radius;
        let d = medium.diffusion;
        Ok(Self {
            w,
            beta: (w * rr + d) / (d * rr),
        })
    }

    pub fn perfect() -> Self {
        Self {
            w: f64::INFINITY,
            beta: f64::INFINITY,
        }
    }

    pub fn is_perfect(&self) -> bool {
        self.w.is_infinite()
    }

    /// Reaction rate, μm/s.
    pub fn w(&self) -> f64 {
        self.w
    }

    /// 1/μm
    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Cumulative absorbed fraction sampled on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionSeries {
    pub times: Vec<f64>,
    pub cumulative: Vec<f64>,
    /// Per-point standard error; only empirical series carry it.
    pub stderr: Option<Vec<f64>>,
}

impl AbsorptionSeries {
    pub fn new(times: Vec<f64>, cumulative: Vec<f64>, stderr: Option<Vec<f64>>) -> Result<Self> {
        if times.len() != cumulative.len() {
            return Err(Error::param("cumulative", "length differs from time grid"));
        }
        if let Some(se) = &stderr {
            if se.len() != times.len() {
                return Err(Error::param("stderr", "length differs from time grid"));
            }
        }
        if times.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
            return Err(Error::param("times", "must be strictly increasing"));
        }
        if cumulative.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(Error::param("cumulative", "values must lie in [0, 1]"));
        }
        if cumulative.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::param("cumulative", "must be nondecreasing"));
        }
        Ok(Self {
            times,
            cumulative,
            stderr,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Expected received counts per time bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSeries {
    /// Bin `k` covers `[edges[k], edges[k + 1])`.
    pub edges: Vec<f64>,
    pub counts: Vec<f64>,
}

impl SignalSeries {
    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    /// Start time of the bin with the largest expected count.
    pub fn peak_time(&self) -> Option<f64> {
        self.counts
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| self.edges[k])
    }
}

/// `(r0 - rr) / sqrt(4 D t)`
#[inline]
fn scaled_gap(geometry: &ChannelGeometry, medium: &Medium, t: f64) -> f64 {
    geometry.gap() / (4.0 * medium.diffusion * t).sqrt()
}

/// Boundary for `n` patches of radius `rs`:
/// `w = n rs D / (pi rr^2)`, `beta = (n rs + pi rr) / (pi rr^2)`.
pub fn effective_boundary(
    spec: &ReceptorSpec,
    geometry: &ChannelGeometry,
    medium: &Medium,
) -> ReactionBoundary {
    let rr = geometry.receiver_radius;
    let nrs = spec.count as f64 * spec.radius;
    ReactionBoundary {
        w: nrs * medium.diffusion / (PI * rr * rr),
        beta: (nrs + PI * rr) / (PI * rr * rr),
    }
}

/// `t -> inf` limit of the cumulative fraction, `(rr beta - 1) / (r0 beta)`.
pub fn steady_state_fraction(boundary: &ReactionBoundary, geometry: &ChannelGeometry) -> f64 {
    let rr = geometry.receiver_radius;
    let r0 = geometry.emitter_distance;
    if boundary.is_perfect() {
        return rr / r0;
    }
    let beta = boundary.beta;
    ((rr * beta - 1.0) / (r0 * beta)).max(0.0)
}

/// Steady-state fraction for the patch-covered sphere,
/// `(rr / r0) * rs n / (rs n + pi rr)`.
pub fn steady_state_fraction_receptors(spec: &ReceptorSpec, geometry: &ChannelGeometry) -> f64 {
    let rr = geometry.receiver_radius;
    let nrs = spec.count as f64 * spec.radius;
    rr / geometry.emitter_distance * nrs / (nrs + PI * rr)
}

/// Perfect-absorber first-passage density
/// `(rr / r0) (r0 - rr) / sqrt(4 pi D t^3) exp(-(r0 - rr)^2 / (4 D t))`.
pub fn perfect_hitting_rate(geometry: &ChannelGeometry, medium: &Medium, t: f64) -> Result<f64> {
    check_positive_time(t)?;
    let x = scaled_gap(geometry, medium, t);
    let rr = geometry.receiver_radius;
    let r0 = geometry.emitter_distance;
    Ok(rr / r0 * geometry.gap() / (4.0 * PI * medium.diffusion * t * t * t).sqrt() * (-x * x).exp())
}

/// Perfect-absorber cumulative fraction `(rr / r0) erfc((r0 - rr) / sqrt(4 D t))`.
pub fn perfect_cumulative_fraction(geometry: &ChannelGeometry, medium: &Medium, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    geometry.receiver_radius / geometry.emitter_distance * erfc(scaled_gap(geometry, medium, t))
}

fn check_positive_time(t: f64) -> Result<()> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::Domain(format!("time must be > 0, got {t}")));
    }
    Ok(())
}

/// Hitting rate `f_hit(t)` in 1/s for a radiation boundary.
pub fn hitting_rate(
    geometry: &ChannelGeometry,
    medium: &Medium,
    boundary: &ReactionBoundary,
    t: f64,
) -> Result<f64> {
    check_positive_time(t)?;
    if boundary.is_perfect() {
        return perfect_hitting_rate(geometry, medium, t);
    }
    if boundary.w == 0.0 {
        return Ok(0.0);
    }
    let d = medium.diffusion;
    let rr = geometry.receiver_radius;
    let r0 = geometry.emitter_distance;
    let beta = boundary.beta;
    let x = scaled_gap(geometry, medium, t);
    let b = x + beta * (d * t).sqrt();
    let bracket = 1.0 / (PI * d * t).sqrt() - beta * erfcx(b);
    Ok((rr * boundary.w / r0 * (-x * x).exp() * bracket).max(0.0))
}

/// Fraction absorbed by time `t` for a radiation boundary. Zero for `t <= 0`.
pub fn cumulative_fraction(
    geometry: &ChannelGeometry,
    medium: &Medium,
    boundary: &ReactionBoundary,
    t: f64,
) -> f64 {
    if boundary.is_perfect() {
        return perfect_cumulative_fraction(geometry, medium, t);
    }
    if t <= 0.0 {
        return 0.0;
    }
    let prefactor = steady_state_fraction(boundary, geometry);
    radiation_profile(geometry, medium, boundary.beta, t, prefactor)
}

/// `prefactor * (erfc(x) - exp(-x^2) erfcx(x + beta sqrt(D t)))`.
#[inline]
fn radiation_profile(
    geometry: &ChannelGeometry,
    medium: &Medium,
    beta: f64,
    t: f64,
    prefactor: f64,
) -> f64 {
    if prefactor == 0.0 {
        return 0.0;
    }
    let x = scaled_gap(geometry, medium, t);
    let b = x + beta * (medium.diffusion * t).sqrt();
    let value = prefactor * (erfc(x) - (-x * x).exp() * erfcx(b));
    value.clamp(0.0, 1.0)
}

/// Fraction absorbed by time `t` for `n` receptors of radius `rs`.
pub fn cumulative_fraction_receptors(
    geometry: &ChannelGeometry,
    medium: &Medium,
    spec: &ReceptorSpec,
    t: f64,
) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let rr = geometry.receiver_radius;
    let nrs = spec.count as f64 * spec.radius;
    let beta = (nrs + PI * rr) / (PI * rr * rr);
    radiation_profile(
        geometry,
        medium,
        beta,
        t,
        steady_state_fraction_receptors(spec, geometry),
    )
}

/// Fraction received in `[t1, t2]`.
pub fn interval_fraction(
    geometry: &ChannelGeometry,
    medium: &Medium,
    spec: &ReceptorSpec,
    t1: f64,
    t2: f64,
) -> Result<f64> {
    if t1.is_nan() || t2.is_nan() || t1 < 0.0 {
        return Err(Error::Domain(format!("interval start must be >= 0, got {t1}")));
    }
    if t1 > t2 {
        return Err(Error::Domain(format!("interval [{t1}, {t2}] is reversed")));
    }
    let upper = cumulative_fraction_receptors(geometry, medium, spec, t2);
    let lower = cumulative_fraction_receptors(geometry, medium, spec, t1);
    Ok((upper - lower).max(0.0))
}

/// Expected number of the `ntx` emitted molecules absorbed in `[t1, t2]`.
pub fn expected_received(
    ntx: u64,
    geometry: &ChannelGeometry,
    medium: &Medium,
    spec: &ReceptorSpec,
    t1: f64,
    t2: f64,
) -> Result<f64> {
    Ok(ntx as f64 * interval_fraction(geometry, medium, spec, t1, t2)?)
}

/// Expected counts in consecutive bins of width `dt` up to `t_end`; a
/// trailing partial bin ends exactly at `t_end`.
pub fn signal_series(
    ntx: u64,
    geometry: &ChannelGeometry,
    medium: &Medium,
    spec: &ReceptorSpec,
    t_end: f64,
    dt: f64,
) -> Result<SignalSeries> {
    let edges = bin_edges(t_end, dt)?;
    let cumulative: Vec<f64> = edges
        .iter()
        .map(|&t| cumulative_fraction_receptors(geometry, medium, spec, t))
        .collect();
    let counts = cumulative
        .windows(2)
        .map(|w| ntx as f64 * (w[1] - w[0]).max(0.0))
        .collect();
    Ok(SignalSeries { edges, counts })
}

/// `0, dt, 2 dt, ..., t_end`. The final edge is `t_end` itself.
pub fn bin_edges(t_end: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::param("dt", format!("must be finite and > 0, got {dt}")));
    }
    if !(t_end.is_finite() && t_end >= dt) {
        return Err(Error::param("t_end", format!("must be >= dt = {dt}, got {t_end}")));
    }
    // tolerate t_end = k * dt up to rounding
    let bins = ((t_end / dt) * (1.0 - 1e-12)).ceil() as usize;
    let mut edges: Vec<f64> = (0..bins).map(|k| k as f64 * dt).collect();
    edges.push(t_end);
    Ok(edges)
}

/// Cumulative fraction for `spec` on an arbitrary increasing time grid.
pub fn receptor_series(
    geometry: &ChannelGeometry,
    medium: &Medium,
    spec: &ReceptorSpec,
    times: Vec<f64>,
) -> Result<AbsorptionSeries> {
    let cumulative = times
        .iter()
        .map(|&t| cumulative_fraction_receptors(geometry, medium, spec, t))
        .collect();
    AbsorptionSeries::new(times, cumulative, None)
}

/// Same as [`receptor_series`] for an arbitrary [`ReactionBoundary`].
pub fn boundary_series(
    geometry: &ChannelGeometry,
    medium: &Medium,
    boundary: &ReactionBoundary,
    times: Vec<f64>,
) -> Result<AbsorptionSeries> {
    let cumulative = times
        .iter()
        .map(|&t| cumulative_fraction(geometry, medium, boundary, t))
        .collect();
    AbsorptionSeries::new(times, cumulative, None)
}
