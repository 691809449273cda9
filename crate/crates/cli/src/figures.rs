//! Figure recipes: named bundles of jobs with overridable defaults.

use std::f64::consts::PI;

use clap::ValueEnum;
use mcvd::design::{count_for_area, EvalTime};
use mcvd::sim::{ReflectionRule, StepControl};

use crate::jobs::{Channel, CountSweepJob, DesignJob, DistanceJob, Job, Receptors, SimulateJob};

pub const RR: f64 = 10.0;
pub const R0: f64 = 11.0;
pub const DIFFUSION: f64 = 79.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    /// Cumulative fraction versus time, analytic and simulated, per distance.
    Fig2,
    /// Received count by 0.2 s versus distance at fixed total receptor area.
    Fig3,
    /// Steady-state fraction versus receptor count, per receptor radius.
    Fig4,
    /// Coverage ratio needed for a target fraction, per receptor radius.
    Fig5,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
        }
    }
}

/// Values left `None` take the recipe default.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub dt_sim: Option<f64>,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub t: Option<EvalTime>,
    pub ntx: Option<u64>,
    pub gaps: Option<Vec<f64>>,
    pub rs_values: Option<Vec<f64>>,
    pub counts: Option<Vec<u64>>,
    pub alphas: Option<Vec<f64>>,
    pub reflection: Option<ReflectionRule>,
    pub stepping: Option<StepControl>,
}

fn channel(gap: f64) -> Channel {
    Channel {
        rr: RR,
        r0: RR + gap,
        diffusion: DIFFUSION,
    }
}

/// `1, 2, ..., 10^6` at ten points per decade, deduplicated after rounding.
fn log_counts() -> Vec<u64> {
    let mut counts: Vec<u64> = (0..=60).map(|k| 10f64.powf(k as f64 / 10.0).round() as u64).collect();
    counts.dedup();
    counts
}

fn label(v: f64) -> String {
    format!("{v}")
}

/// `(file name, job)` for every curve of `figure`.
pub fn expand(figure: Figure, o: &Overrides) -> Vec<(String, Job)> {
    let rs_values = o.rs_values.clone().unwrap_or_else(|| vec![0.005, 0.01, 0.02, 0.04]);
    match figure {
        Figure::Fig2 => o
            .gaps
            .clone()
            .unwrap_or_else(|| vec![1.0, 3.0])
            .into_iter()
            .map(|gap| {
                let job = Job::Simulate(SimulateJob {
                    channel: channel(gap),
                    receptors: Receptors { rs: 0.04, n: 1250 },
                    t_end: o.t_end.unwrap_or(0.4),
                    dt: o.dt.unwrap_or(0.005),
                    trials: o.trials.unwrap_or(100_000),
                    seed: o.seed.unwrap_or(1),
                    dt_sim: o.dt_sim.unwrap_or(0.001),
                    reflection: o.reflection.unwrap_or_default(),
                    stepping: o.stepping.unwrap_or_default(),
                });
                (format!("fig2_d{}.csv", label(gap)), job)
            })
            .collect(),
        Figure::Fig3 => {
            let total_area = 2.0 * PI;
            let gaps = o
                .gaps
                .clone()
                .unwrap_or_else(|| (1..=20).map(|k| k as f64 * 0.5).collect());
            let t = match o.t {
                Some(EvalTime::Finite(t)) => t,
                _ => 0.2,
            };
            o.rs_values
                .clone()
                .unwrap_or_else(|| vec![0.04, 0.02, 0.01])
                .into_iter()
                .map(|rs| {
                    let n = count_for_area(total_area, rs);
                    let job = Job::Distance(DistanceJob {
                        rr: RR,
                        diffusion: DIFFUSION,
                        ntx: o.ntx.unwrap_or(100_000),
                        t,
                        total_area,
                        receptors: Receptors { rs, n },
                        gaps: gaps.clone(),
                    });
                    (format!("fig3_rs{}_n{n}.csv", label(rs)), job)
                })
                .collect()
        }
        Figure::Fig4 => rs_values
            .into_iter()
            .map(|rs| {
                let job = Job::CountSweep(CountSweepJob {
                    channel: channel(R0 - RR),
                    rs,
                    counts: o.counts.clone().unwrap_or_else(log_counts),
                    time: o.t.unwrap_or(EvalTime::Infinite),
                });
                (format!("fig4_rs{}.csv", label(rs)), job)
            })
            .collect(),
        Figure::Fig5 => rs_values
            .into_iter()
            .map(|rs| {
                let job = Job::Design(DesignJob {
                    channel: channel(R0 - RR),
                    rs,
                    alphas: o
                        .alphas
                        .clone()
                        .unwrap_or_else(|| (1..=15).map(|k| k as f64 * 0.05).collect()),
                    time: o.t.unwrap_or(EvalTime::Finite(0.2)),
                });
                (format!("fig5_rs{}.csv", label(rs)), job)
            })
            .collect(),
    }
}
