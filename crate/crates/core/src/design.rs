//! Inverse receptor design: smallest receptor count reaching a target
//! hitting fraction, and the surface coverage that count implies.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{
    cumulative_fraction_receptors, expected_received, perfect_cumulative_fraction,
    steady_state_fraction_receptors, ChannelGeometry, Medium, ReceptorSpec,
};
use crate::error::{Error, Result};

/// Largest receptor count the bracketing search will try.
pub const MAX_RECEPTORS: u64 = 1 << 53;

/// Evaluation time for the hitting fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EvalTime {
    Finite(f64),
    /// Steady state, through the closed-form `t -> inf` limit.
    Infinite,
}

impl EvalTime {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "Inf" | "INF" => Ok(EvalTime::Infinite),
            other => {
                let t: f64 = other
                    .parse()
                    .map_err(|_| Error::param("t", format!("expected a number or `inf`, got `{other}`")))?;
                if t.is_infinite() && t > 0.0 {
                    Ok(EvalTime::Infinite)
                } else if t.is_finite() && t > 0.0 {
                    Ok(EvalTime::Finite(t))
                } else {
                    Err(Error::param("t", format!("must be > 0, got {t}")))
                }
            }
        }
    }
}

impl std::fmt::Display for EvalTime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EvalTime::Finite(t) => write!(f, "{t}"),
            EvalTime::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignQuery {
    pub alpha: f64,
    pub geometry: ChannelGeometry,
    pub medium: Medium,
    /// rs, μm
    pub receptor_radius: f64,
    pub time: EvalTime,
}

impl DesignQuery {
    /// Hitting fraction with `n` receptors.
    pub fn fraction(&self, n: u64) -> f64 {
        let spec = ReceptorSpec {
            radius: self.receptor_radius,
            count: n,
        };
        match self.time {
            EvalTime::Finite(t) => cumulative_fraction_receptors(&self.geometry, &self.medium, &spec, t),
            EvalTime::Infinite => steady_state_fraction_receptors(&spec, &self.geometry),
        }
    }

    /// Limit of [`fraction`](Self::fraction) as `n -> inf`: the perfect absorber.
    pub fn supremum(&self) -> f64 {
        match self.time {
            EvalTime::Finite(t) => perfect_cumulative_fraction(&self.geometry, &self.medium, t),
            EvalTime::Infinite => self.geometry.receiver_radius / self.geometry.emitter_distance,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::param("alpha", format!("must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.receptor_radius.is_finite() && self.receptor_radius > 0.0) {
            return Err(Error::param("rs", format!("must be > 0, got {}", self.receptor_radius)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignResult {
    pub n_alpha: u64,
    pub achieved_fraction: f64,
    pub area_ratio: f64,
}

/// Receptor-covered share of the receiver surface, `n (rs / (2 rr))^2`.
pub fn area_ratio(spec: &ReceptorSpec, receiver_radius: f64) -> f64 {
    let q = spec.radius / (2.0 * receiver_radius);
    spec.count as f64 * q * q
}

/// Smallest `n` with `F(n) >= alpha`.
///
/// `F` is strictly increasing in `n`, so the count is bracketed by doubling
/// from 1 and then located by integer bisection.
pub fn find_n_alpha(query: &DesignQuery) -> Result<DesignResult> {
    query.validate()?;
    let supremum = query.supremum();
    if query.alpha >= supremum {
        return Err(Error::Unattainable {
            alpha: query.alpha,
            supremum,
        });
    }

    // invariant: F(lo) < alpha <= F(hi)
    let mut lo = 0u64;
    let mut hi = 1u64;
    while query.fraction(hi) < query.alpha {
        if hi >= MAX_RECEPTORS {
            // alpha sits within rounding of the supremum
            return Err(Error::Unattainable {
                alpha: query.alpha,
                supremum,
            });
        }
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if query.fraction(mid) >= query.alpha {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    let spec = ReceptorSpec {
        radius: query.receptor_radius,
        count: hi,
    };
    Ok(DesignResult {
        n_alpha: hi,
        achieved_fraction: query.fraction(hi),
        area_ratio: area_ratio(&spec, query.geometry.receiver_radius),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaRow {
    pub alpha: f64,
    /// `Err` carries the unattainability (or validation) reason.
    pub result: std::result::Result<DesignResult, Error>,
}

impl AlphaRow {
    pub fn is_feasible(&self) -> bool {
        self.result.is_ok()
    }
}

/// [`find_n_alpha`] over a grid of targets; rows keep the grid order.
pub fn sweep_alpha(base: &DesignQuery, alphas: &[f64]) -> Vec<AlphaRow> {
    alphas
        .par_iter()
        .map(|&alpha| {
            let q = DesignQuery { alpha, ..*base };
            AlphaRow {
                alpha,
                result: find_n_alpha(&q),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceRow {
    /// Surface-to-emitter distance `r0 - rr`, μm.
    pub gap: f64,
    /// Expected counts, one per receptor pair, in input order.
    pub counts: Vec<f64>,
}

/// Expected received counts over `[0, t]` versus emitter distance for
/// receptor configurations sharing the same total patch area.
pub fn sweep_distance(
    ntx: u64,
    receiver_radius: f64,
    gaps: &[f64],
    medium: &Medium,
    total_area: f64,
    pairs: &[ReceptorSpec],
    t: f64,
) -> Result<Vec<DistanceRow>> {
    if !(total_area.is_finite() && total_area > 0.0) {
        return Err(Error::param("total_area", format!("must be > 0, got {total_area}")));
    }
    for p in pairs {
        let area = p.total_area();
        if ((area - total_area) / total_area).abs() > 1e-9 {
            return Err(Error::param(
                "pairs",
                format!(
                    "(rs = {}, n = {}) covers {area} μm², expected {total_area} μm²",
                    p.radius, p.count
                ),
            ));
        }
    }
    gaps.par_iter()
        .map(|&gap| {
            let g = ChannelGeometry::with_gap(receiver_radius, gap)?;
            let counts = pairs
                .iter()
                .map(|p| expected_received(ntx, &g, medium, p, 0.0, t))
                .collect::<Result<Vec<_>>>()?;
            Ok(DistanceRow { gap, counts })
        })
        .collect()
}

/// Receptor count giving total patch area `total_area` at radius `rs`,
/// rounded to the nearest integer.
pub fn count_for_area(total_area: f64, receptor_radius: f64) -> u64 {
    (total_area / (PI * receptor_radius * receptor_radius)).round() as u64
}
