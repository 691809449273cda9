//! Fully resolved units of work. Each job renders exactly one CSV table and
//! is what a manifest stores for replay.

use mcvd::analytic::{
    bin_edges, cumulative_fraction_receptors, perfect_cumulative_fraction, steady_state_fraction_receptors,
    ChannelGeometry, Medium, ReceptorSpec,
};
use mcvd::design::{sweep_alpha, sweep_distance, DesignQuery, EvalTime};
use mcvd::sim::{self, place_receptors, ReflectionRule, SimConfig, StepControl};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::output::{Cell, Table};

/// Largest receptor count the simulator will lay out.
pub const MAX_SIM_RECEPTORS: u64 = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    /// μm
    pub rr: f64,
    /// μm
    pub r0: f64,
    /// μm²/s
    pub diffusion: f64,
}

impl Channel {
    fn resolve(&self) -> Result<(ChannelGeometry, Medium), CliError> {
        Ok((ChannelGeometry::new(self.r0, self.rr)?, Medium::new(self.diffusion)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Receptors {
    /// μm
    pub rs: f64,
    pub n: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComputeJob {
    pub channel: Channel,
    /// `None` is the perfectly absorbing receiver.
    pub receptors: Option<Receptors>,
    pub t_end: f64,
    pub dt: f64,
    pub ntx: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateJob {
    pub channel: Channel,
    pub receptors: Receptors,
    /// Output horizon and row spacing, s.
    pub t_end: f64,
    pub dt: f64,
    pub trials: u64,
    pub seed: u64,
    /// Simulator step ceiling, s.
    pub dt_sim: f64,
    pub reflection: ReflectionRule,
    pub stepping: StepControl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignJob {
    pub channel: Channel,
    pub rs: f64,
    pub alphas: Vec<f64>,
    pub time: EvalTime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceJob {
    pub rr: f64,
    pub diffusion: f64,
    pub ntx: u64,
    /// Counting window `[0, t]`, s.
    pub t: f64,
    /// μm²
    pub total_area: f64,
    pub receptors: Receptors,
    /// `r0 - rr`, μm
    pub gaps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountSweepJob {
    pub channel: Channel,
    pub rs: f64,
    pub counts: Vec<u64>,
    pub time: EvalTime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Job {
    Compute(ComputeJob),
    Simulate(SimulateJob),
    Design(DesignJob),
    Distance(DistanceJob),
    CountSweep(CountSweepJob),
}

pub struct Rendered {
    pub table: Table,
    /// Design rows whose target is above the attainable supremum.
    pub infeasible: usize,
}

impl From<Table> for Rendered {
    fn from(table: Table) -> Self {
        Rendered { table, infeasible: 0 }
    }
}

impl Job {
    pub fn seed(&self) -> Option<u64> {
        match self {
            Job::Simulate(s) => Some(s.seed),
            _ => None,
        }
    }

    /// Parameter warnings that do not stop the run.
    pub fn warnings(&self) -> Vec<String> {
        let (rr, rs) = match self {
            Job::Compute(ComputeJob {
                channel,
                receptors: Some(r),
                ..
            }) => (channel.rr, r.rs),
            Job::Simulate(s) => (s.channel.rr, s.receptors.rs),
            Job::Design(d) => (d.channel.rr, d.rs),
            Job::Distance(d) => (d.rr, d.receptors.rs),
            Job::CountSweep(c) => (c.channel.rr, c.rs),
            Job::Compute(_) => return Vec::new(),
        };
        if rs < rr / 10.0 {
            Vec::new()
        } else {
            vec![format!(
                "rs = {rs} μm is not small against rr = {rr} μm (rs < rr/10); the receptor model loses accuracy"
            )]
        }
    }

    /// `threads` only affects scheduling, never the output.
    pub fn render(&self, threads: Option<usize>) -> Result<Rendered, CliError> {
        match self {
            Job::Compute(j) => compute(j).map(Into::into),
            Job::Simulate(j) => simulate(j, threads).map(Into::into),
            Job::Design(j) => design(j),
            Job::Distance(j) => distance(j).map(Into::into),
            Job::CountSweep(j) => count_sweep(j).map(Into::into),
        }
    }
}

fn compute(job: &ComputeJob) -> Result<Table, CliError> {
    let (g, m) = job.channel.resolve()?;
    let spec = job.receptors.map(|r| ReceptorSpec::new(r.rs, r.n)).transpose()?;
    let f = |t: f64| match &spec {
        Some(s) => cumulative_fraction_receptors(&g, &m, s, t),
        None => perfect_cumulative_fraction(&g, &m, t),
    };
    let edges = bin_edges(job.t_end, job.dt)?;
    let mut header = vec!["t_s", "F_analytic"];
    if job.ntx.is_some() {
        header.push("expected_count_bin");
    }
    let mut table = Table::new(header);
    let mut prev = 0.0;
    for &t in &edges[1..] {
        let value = f(t);
        let mut row = vec![Cell::Num(t), Cell::Num(value)];
        if let Some(ntx) = job.ntx {
            row.push(Cell::Num(ntx as f64 * (value - prev).max(0.0)));
        }
        prev = value;
        table.push(row);
    }
    Ok(table)
}

fn simulate(job: &SimulateJob, threads: Option<usize>) -> Result<Table, CliError> {
    let (g, m) = job.channel.resolve()?;
    let Receptors { rs, n } = job.receptors;
    let spec = ReceptorSpec::new(rs, n)?;
    if n > MAX_SIM_RECEPTORS {
        return Err(CliError::Usage(format!(
            "--n {n} exceeds the simulator limit of {MAX_SIM_RECEPTORS} receptors"
        )));
    }
    let layout = place_receptors(n as usize, rs / job.channel.rr)?;
    let cfg = SimConfig {
        dt: job.dt_sim,
        t_end: job.t_end,
        trials: job.trials,
        seed: job.seed,
        reflection: job.reflection,
        stepping: job.stepping,
        threads,
    };
    let edges = bin_edges(job.t_end, job.dt)?;
    let result = sim::run(&g, &m, &layout, &cfg)?;
    let series = result.empirical_series(edges[1..].to_vec())?;
    let stderr = series.stderr.unwrap_or_default();
    let mut table = Table::new(vec!["t_s", "F_analytic", "F_empirical", "stderr"]);
    for (i, &t) in series.times.iter().enumerate() {
        table.push(vec![
            Cell::Num(t),
            Cell::Num(cumulative_fraction_receptors(&g, &m, &spec, t)),
            Cell::Num(series.cumulative[i]),
            Cell::Num(stderr[i]),
        ]);
    }
    Ok(table)
}

fn design(job: &DesignJob) -> Result<Rendered, CliError> {
    let (geometry, medium) = job.channel.resolve()?;
    if let Some(bad) = job.alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
        return Err(CliError::Usage(format!("alpha must lie in (0, 1), got {bad}")));
    }
    let base = DesignQuery {
        alpha: job.alphas.first().copied().unwrap_or(0.5),
        geometry,
        medium,
        receptor_radius: job.rs,
        time: job.time,
    };
    base.validate()?;
    let mut table = Table::new(vec!["alpha", "n_alpha", "achieved_F", "area_ratio", "feasible"]);
    let mut infeasible = 0;
    for row in sweep_alpha(&base, &job.alphas) {
        match row.result {
            Ok(r) => table.push(vec![
                Cell::Num(row.alpha),
                Cell::Int(r.n_alpha),
                Cell::Num(r.achieved_fraction),
                Cell::Num(r.area_ratio),
                Cell::Flag(true),
            ]),
            Err(mcvd::Error::Unattainable { .. }) => {
                infeasible += 1;
                table.push(vec![Cell::Num(row.alpha), Cell::Empty, Cell::Empty, Cell::Empty, Cell::Flag(false)]);
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Rendered { table, infeasible })
}

fn distance(job: &DistanceJob) -> Result<Table, CliError> {
    let medium = Medium::new(job.diffusion)?;
    let spec = ReceptorSpec::new(job.receptors.rs, job.receptors.n)?;
    let rows = sweep_distance(job.ntx, job.rr, &job.gaps, &medium, job.total_area, &[spec], job.t)?;
    let mut table = Table::new(vec!["d_um", "expected_received"]);
    for row in rows {
        table.push(vec![Cell::Num(row.gap), Cell::Num(row.counts[0])]);
    }
    Ok(table)
}

fn count_sweep(job: &CountSweepJob) -> Result<Table, CliError> {
    let (g, m) = job.channel.resolve()?;
    let mut table = Table::new(vec!["n", "F_analytic"]);
    for &n in &job.counts {
        let spec = ReceptorSpec::new(job.rs, n)?;
        let f = match job.time {
            EvalTime::Infinite => steady_state_fraction_receptors(&spec, &g),
            EvalTime::Finite(t) => cumulative_fraction_receptors(&g, &m, &spec, t),
        };
        table.push(vec![Cell::Int(n), Cell::Num(f)]);
    }
    Ok(table)
}
