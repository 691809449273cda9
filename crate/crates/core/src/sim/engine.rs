use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{AbsorptionSeries, ChannelGeometry, Medium};
use crate::error::{Error, Result};

use super::boundary::{resolve_boundary, BoundaryOutcome, ReflectionRule};
use super::layout::ReceptorLayout;
use super::vec3::{self, Vec3};

pub type MoleculeRng = ChaCha8Rng;

/// Molecules handed to the worker pool per batch; bounds peak memory.
const BATCH: u64 = 1 << 16;

/// How step lengths are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum StepControl {
    /// Every step lasts `dt`.
    Fixed,
    /// Steps last at most `dt`; near the absorbing set the step's standard
    /// deviation is capped at `accuracy` times the distance to it, with a
    /// floor of `accuracy * floor_fraction` patch radii.
    Adaptive { accuracy: f64, floor_fraction: f64 },
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl::Adaptive {
            accuracy: 0.1,
            floor_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Step length, s.
    pub dt: f64,
    /// Horizon, s.
    pub t_end: f64,
    /// Number of emitted molecules.
    pub trials: u64,
    pub seed: u64,
    #[serde(default)]
    pub reflection: ReflectionRule,
    #[serde(default)]
    pub stepping: StepControl,
    /// Worker threads; `None` uses the global rayon pool. Does not affect
    /// results.
    #[serde(default)]
    pub threads: Option<usize>,
}

impl SimConfig {
    pub fn new(dt: f64, t_end: f64, trials: u64, seed: u64) -> Result<Self> {
        let cfg = Self {
            dt,
            t_end,
            trials,
            seed,
            reflection: ReflectionRule::Specular,
            stepping: StepControl::default(),
            threads: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::param("dt", format!("must be finite and > 0, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end >= self.dt) {
            return Err(Error::param("t_end", format!("must be >= dt, got {}", self.t_end)));
        }
        if self.trials < 1 {
            return Err(Error::param("trials", "must be >= 1"));
        }
        if let StepControl::Adaptive {
            accuracy,
            floor_fraction,
        } = self.stepping
        {
            if !(accuracy > 0.0 && accuracy <= 1.0) {
                return Err(Error::param("accuracy", format!("must lie in (0, 1], got {accuracy}")));
            }
            if !(floor_fraction > 0.0 && floor_fraction <= 1.0) {
                return Err(Error::param(
                    "floor_fraction",
                    format!("must lie in (0, 1], got {floor_fraction}"),
                ));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::param("threads", "must be >= 1"));
        }
        Ok(())
    }

    /// Steps needed to reach `t_end`.
    pub fn steps(&self) -> u64 {
        ((self.t_end / self.dt) * (1.0 - 1e-12)).ceil() as u64
    }
}

/// One absorption event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Absorption {
    pub molecule: u64,
    /// s
    pub time: f64,
    /// μm, on the receiver surface
    pub point: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SimCounters {
    pub reflections: u64,
    pub absorbed: u64,
    pub survived: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub trials: u64,
    pub t_end: f64,
    /// In molecule order.
    pub absorptions: Vec<Absorption>,
    pub counters: SimCounters,
}

impl SimResult {
    pub fn absorption_times(&self) -> Vec<f64> {
        self.absorptions.iter().map(|a| a.time).collect()
    }

    /// Fraction of all emitted molecules absorbed by `t`.
    pub fn cumulative_at(&self, t: f64) -> f64 {
        let hits = self.absorptions.iter().filter(|a| a.time <= t).count();
        hits as f64 / self.trials as f64
    }

    /// Empirical cumulative fraction on `times` with binomial standard error
    /// `sqrt(F (1 - F) / trials)`.
    pub fn empirical_series(&self, times: Vec<f64>) -> Result<AbsorptionSeries> {
        let mut sorted = self.absorption_times();
        sorted.sort_by(f64::total_cmp);
        let n = self.trials as f64;
        let cumulative: Vec<f64> = times
            .iter()
            .map(|&t| sorted.partition_point(|&h| h <= t) as f64 / n)
            .collect();
        let stderr = cumulative.iter().map(|&f| (f * (1.0 - f) / n).sqrt()).collect();
        AbsorptionSeries::new(times, cumulative, Some(stderr))
    }
}

/// Random stream for molecule `index` under `seed`.
pub fn molecule_rng(seed: u64, index: u64) -> MoleculeRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One Brownian step: each coordinate moves by an independent
/// `N(0, 2 D dt)` draw.
#[inline]
pub fn step<R: rand::Rng + ?Sized>(position: Vec3, medium: &Medium, dt: f64, rng: &mut R) -> Vec3 {
    let sigma = (2.0 * medium.diffusion * dt).sqrt();
    let mut out = position;
    for x in out.iter_mut() {
        let z: f64 = StandardNormal.sample(rng);
        *x += sigma * z;
    }
    out
}

struct Trajectory {
    hit: Option<(f64, Vec3)>,
    reflections: u64,
}

fn simulate_molecule(
    index: u64,
    geometry: &ChannelGeometry,
    medium: &Medium,
    layout: &ReceptorLayout,
    cfg: &SimConfig,
    steps: u64,
) -> Result<Trajectory> {
    match cfg.stepping {
        StepControl::Fixed => fixed_steps(index, geometry, medium, layout, cfg, steps),
        StepControl::Adaptive {
            accuracy,
            floor_fraction,
        } => adaptive_steps(index, geometry, medium, layout, cfg, accuracy, floor_fraction),
    }
}

fn fixed_steps(
    index: u64,
    geometry: &ChannelGeometry,
    medium: &Medium,
    layout: &ReceptorLayout,
    cfg: &SimConfig,
    steps: u64,
) -> Result<Trajectory> {
    let rr = geometry.receiver_radius;
    let mut rng = molecule_rng(cfg.seed, index);
    let mut pos: Vec3 = [0.0, 0.0, geometry.emitter_distance];
    let mut reflections = 0;
    for k in 0..steps {
        let next = step(pos, medium, cfg.dt, &mut rng);
        match resolve_boundary(pos, next, layout, rr, cfg.reflection)? {
            BoundaryOutcome::Free => pos = next,
            BoundaryOutcome::Reflected { position } => {
                reflections += 1;
                pos = position;
            }
            BoundaryOutcome::Absorbed { fraction, point, .. } => {
                let time = (k as f64 + fraction) * cfg.dt;
                let hit = (time <= cfg.t_end).then_some((time, point));
                return Ok(Trajectory { hit, reflections });
            }
        }
    }
    Ok(Trajectory {
        hit: None,
        reflections,
    })
}

/// Distance from `pos` (outside the sphere) to the nearest absorbing cap.
fn distance_to_absorber(pos: Vec3, rr: f64, layout: &ReceptorLayout) -> f64 {
    let rho = vec3::norm(pos);
    let u = vec3::scale(pos, 1.0 / rho);
    match layout.nearest(u) {
        None => f64::INFINITY,
        Some((_, gamma)) => {
            let off = (gamma - layout.theta_s()).max(0.0);
            // law of cosines, written to stay accurate for small `off`
            let h = rho - rr;
            let s = (0.5 * off).sin();
            (h * h + 4.0 * rho * rr * s * s).sqrt()
        }
    }
}

fn adaptive_steps(
    index: u64,
    geometry: &ChannelGeometry,
    medium: &Medium,
    layout: &ReceptorLayout,
    cfg: &SimConfig,
    accuracy: f64,
    floor_fraction: f64,
) -> Result<Trajectory> {
    let rr = geometry.receiver_radius;
    let two_d = 2.0 * medium.diffusion;
    let sigma_max = (two_d * cfg.dt).sqrt();
    let patch = (layout.theta_s() * rr).min(sigma_max);
    let sigma_min = accuracy * floor_fraction * patch;
    // beyond this distance the full step is already fine
    let reach = sigma_max / accuracy;

    let mut rng = molecule_rng(cfg.seed, index);
    let mut pos: Vec3 = [0.0, 0.0, geometry.emitter_distance];
    let mut t = 0.0;
    let mut reflections = 0;
    while t < cfg.t_end {
        let height = vec3::norm(pos) - rr;
        let sigma = if height >= reach || layout.is_empty() {
            sigma_max
        } else {
            let d = distance_to_absorber(pos, rr, layout);
            (accuracy * d).clamp(sigma_min, sigma_max)
        };
        let h = (sigma * sigma / two_d).min(cfg.t_end - t);
        let next = step(pos, medium, h, &mut rng);
        match resolve_boundary(pos, next, layout, rr, cfg.reflection)? {
            BoundaryOutcome::Free => pos = next,
            BoundaryOutcome::Reflected { position } => {
                reflections += 1;
                pos = position;
            }
            BoundaryOutcome::Absorbed { fraction, point, .. } => {
                let time = (t + fraction * h).min(cfg.t_end);
                return Ok(Trajectory {
                    hit: Some((time, point)),
                    reflections,
                });
            }
        }
        t += h;
    }
    Ok(Trajectory {
        hit: None,
        reflections,
    })
}

/// Releases `cfg.trials` molecules at `(0, 0, r0)` and follows each until
/// absorption or `t_end`. Absorption times are interpolated within the step.
///
/// With [`StepControl::Fixed`] a molecule absorbed during step `k` is
/// stamped `(k + fraction) * dt`.
pub fn run(
    geometry: &ChannelGeometry,
    medium: &Medium,
    layout: &ReceptorLayout,
    cfg: &SimConfig,
) -> Result<SimResult> {
    cfg.validate()?;
    match cfg.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::Invariant(format!("thread pool: {e}")))?
            .install(|| run_batches(geometry, medium, layout, cfg)),
        None => run_batches(geometry, medium, layout, cfg),
    }
}

fn run_batches(
    geometry: &ChannelGeometry,
    medium: &Medium,
    layout: &ReceptorLayout,
    cfg: &SimConfig,
) -> Result<SimResult> {
    let steps = cfg.steps();
    let mut absorptions = Vec::new();
    let mut counters = SimCounters::default();
    let mut start = 0u64;
    while start < cfg.trials {
        let end = (start + BATCH).min(cfg.trials);
        let batch: Vec<Trajectory> = (start..end)
            .into_par_iter()
            .map(|i| simulate_molecule(i, geometry, medium, layout, cfg, steps))
            .collect::<Result<_>>()?;
        for (offset, traj) in batch.into_iter().enumerate() {
            counters.reflections += traj.reflections;
            match traj.hit {
                Some((time, point)) => {
                    counters.absorbed += 1;
                    absorptions.push(Absorption {
                        molecule: start + offset as u64,
                        time,
                        point,
                    });
                }
                None => counters.survived += 1,
            }
        }
        start = end;
    }
    Ok(SimResult {
        trials: cfg.trials,
        t_end: cfg.t_end,
        absorptions,
        counters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::layout::place_receptors;

    #[test]
    fn zero_diffusion_does_not_move() {
        let m = Medium { diffusion: 0.0 };
        let mut rng = molecule_rng(1, 0);
        let p = [1.0, 2.0, 3.0];
        assert_eq!(step(p, &m, 0.001, &mut rng), p);
    }

    #[test]
    fn increments_have_expected_variance() {
        let m = Medium::new(79.4).unwrap();
        let dt = 0.001;
        let mut rng = molecule_rng(42, 0);
        let n = 1_000_000;
        let (mut sx, mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let d = step([0.0; 3], &m, dt, &mut rng);
            sx += d[0];
            sxx += d[0] * d[0];
            sxy += d[0] * d[1];
            syy += d[1] * d[1];
        }
        let nf = n as f64;
        let var = sxx / nf - (sx / nf).powi(2);
        assert!((var / (2.0 * 79.4 * dt) - 1.0).abs() < 0.01, "{var}");
        let corr = sxy / (sxx * syy).sqrt();
        assert!(corr.abs() < 0.01);
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(0.0, 1.0, 1, 0).is_err());
        assert!(SimConfig::new(0.1, 0.01, 1, 0).is_err());
        assert!(SimConfig::new(0.1, 1.0, 0, 0).is_err());
        let cfg = SimConfig::new(0.001, 0.2, 1, 0).unwrap();
        assert_eq!(cfg.steps(), 200);
        assert_eq!(SimConfig::new(0.001, 0.0015, 1, 0).unwrap().steps(), 2);
    }

    #[test]
    fn deterministic_and_consistent() {
        let g = ChannelGeometry::new(11.0, 10.0).unwrap();
        let m = Medium::new(79.4).unwrap();
        let layout = place_receptors(1250, 0.004).unwrap();
        let mut cfg = SimConfig::new(0.001, 0.1, 3000, 99).unwrap();
        let a = run(&g, &m, &layout, &cfg).unwrap();
        cfg.threads = Some(1);
        let b = run(&g, &m, &layout, &cfg).unwrap();
        cfg.threads = Some(3);
        let c = run(&g, &m, &layout, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_eq!(a.counters.absorbed + a.counters.survived, 3000);
        assert_eq!(a.counters.absorbed as usize, a.absorptions.len());
        assert!(a.counters.reflections > 0);
        assert!(a.absorptions.iter().all(|h| h.time > 0.0 && h.time <= 0.1));
        assert!(a.absorptions.iter().all(|h| (crate::sim::vec3::norm(h.point) - 10.0).abs() < 1e-9));
        assert!(a.absorptions.windows(2).all(|w| w[0].molecule < w[1].molecule));

        let s = a.empirical_series(vec![0.02, 0.05, 0.1]).unwrap();
        assert!(s.cumulative.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(s.cumulative[2], a.cumulative_at(0.1));
        cfg.seed = 100;
        assert_ne!(run(&g, &m, &layout, &cfg).unwrap(), a);
    }
}
