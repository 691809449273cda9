//! `mcvd`: analytic curves, Monte Carlo runs, receptor design and figure
//! data for a point emitter and a receptor-covered spherical receiver.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage, 3 infeasible design,
//! 4 internal invariant violation.

mod error;
mod figures;
mod jobs;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mcvd::design::EvalTime;
use mcvd::sim::{ReflectionRule, StepControl};

use error::CliError;
use figures::{Figure, Overrides};
use jobs::{Channel, ComputeJob, DesignJob, Job, Receptors, SimulateJob};

#[derive(Parser)]
#[command(name = "mcvd", version, about = "Diffusive molecular channel toolkit")]
struct Cli {
    /// Worker threads for simulations; results do not depend on it.
    #[arg(long, global = true, env = "MCVD_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form cumulative fraction on a time grid.
    Compute(ComputeArgs),
    /// Monte Carlo run against the closed form.
    Simulate(SimulateArgs),
    /// Minimum receptor count for target fractions.
    Design(DesignArgs),
    /// Data for one of the standard figures.
    Figure(FigureArgs),
    /// Re-run a manifest and check the output checksum.
    Replay(ReplayArgs),
}

#[derive(Args, Clone, Copy)]
struct ChannelArgs {
    /// Receiver radius, μm.
    #[arg(long)]
    rr: f64,
    /// Emitter distance from the receiver center, μm.
    #[arg(long)]
    r0: f64,
    /// Diffusion coefficient, μm²/s.
    #[arg(long = "D", value_name = "D")]
    diffusion: f64,
}

impl From<ChannelArgs> for Channel {
    fn from(c: ChannelArgs) -> Self {
        Channel {
            rr: c.rr,
            r0: c.r0,
            diffusion: c.diffusion,
        }
    }
}

#[derive(Args)]
struct ComputeArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    /// Receptor radius, μm.
    #[arg(long, required_unless_present = "perfect", conflicts_with = "perfect")]
    rs: Option<f64>,
    /// Receptor count.
    #[arg(long, required_unless_present = "perfect", conflicts_with = "perfect")]
    n: Option<u64>,
    /// Perfectly absorbing receiver instead of receptors.
    #[arg(long)]
    perfect: bool,
    /// Last time, s.
    #[arg(long)]
    t_end: f64,
    /// Row spacing, s.
    #[arg(long)]
    dt: f64,
    /// Emitted molecules; adds expected counts per bin.
    #[arg(long)]
    ntx: Option<u64>,
    /// Output CSV; a manifest is written beside it. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StepMode {
    Adaptive,
    Fixed,
}

#[derive(Args, Clone, Copy)]
struct StepArgs {
    /// Step control.
    #[arg(long, value_enum)]
    stepping: Option<StepMode>,
    /// Adaptive steps: step deviation over distance to the nearest receptor.
    #[arg(long)]
    accuracy: Option<f64>,
    /// Adaptive steps: smallest step as a fraction of `accuracy` times the receptor radius.
    #[arg(long)]
    floor_fraction: Option<f64>,
    /// Handling of steps that hit the bare membrane.
    #[arg(long, value_parser = parse_reflection)]
    reflection: Option<ReflectionRule>,
}

impl StepArgs {
    fn stepping(&self) -> Option<StepControl> {
        let StepControl::Adaptive {
            accuracy,
            floor_fraction,
        } = StepControl::default()
        else {
            unreachable!()
        };
        match self.stepping {
            Some(StepMode::Fixed) => Some(StepControl::Fixed),
            None if self.accuracy.is_none() && self.floor_fraction.is_none() => None,
            _ => Some(StepControl::Adaptive {
                accuracy: self.accuracy.unwrap_or(accuracy),
                floor_fraction: self.floor_fraction.unwrap_or(floor_fraction),
            }),
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long)]
    rs: f64,
    #[arg(long)]
    n: u64,
    #[arg(long)]
    t_end: f64,
    /// Row spacing of the output, s.
    #[arg(long)]
    dt: f64,
    /// Emitted molecules.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Simulator step, s.
    #[arg(long, default_value_t = 0.001)]
    dt_sim: f64,
    #[command(flatten)]
    steps: StepArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DesignArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long)]
    rs: f64,
    /// Target fraction in (0, 1).
    #[arg(long, required_unless_present = "alpha_grid", conflicts_with = "alpha_grid")]
    alpha: Option<f64>,
    /// Targets as `a,b,c` or `start:stop:step`.
    #[arg(long, value_parser = parse_grid)]
    alpha_grid: Option<Grid>,
    /// Evaluation time in s, or `inf` for steady state.
    #[arg(long, value_parser = parse_time)]
    t: EvalTime,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FigureArgs {
    #[arg(value_enum)]
    name: Figure,
    /// Directory for the CSV and manifest files.
    #[arg(long, default_value = "figures")]
    out_dir: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dt_sim: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Evaluation time in s, or `inf`.
    #[arg(long, value_parser = parse_time)]
    t: Option<EvalTime>,
    #[arg(long)]
    ntx: Option<u64>,
    /// Emitter-to-surface distances, μm.
    #[arg(long, value_parser = parse_grid)]
    gaps: Option<Grid>,
    /// Receptor radii, μm.
    #[arg(long, value_parser = parse_grid)]
    rs_values: Option<Grid>,
    /// Receptor counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    counts: Option<Vec<u64>>,
    #[arg(long, value_parser = parse_grid)]
    alpha_grid: Option<Grid>,
    #[command(flatten)]
    steps: StepArgs,
}

#[derive(Args)]
struct ReplayArgs {
    manifest: PathBuf,
    /// Also write the regenerated output here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_time(s: &str) -> Result<EvalTime, String> {
    EvalTime::parse(s).map_err(|e| e.to_string())
}

fn parse_reflection(s: &str) -> Result<ReflectionRule, String> {
    s.parse().map_err(|e: mcvd::Error| e.to_string())
}

/// A list of values from one flag.
#[derive(Debug, Clone, PartialEq)]
struct Grid(Vec<f64>);

/// `a,b,c` or inclusive `start:stop:step`.
fn parse_grid(s: &str) -> Result<Grid, String> {
    let number = |p: &str| p.trim().parse::<f64>().map_err(|_| format!("`{p}` is not a number"));
    let parts: Vec<&str> = s.split(':').collect();
    let values = match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (number(start)?, number(stop)?, number(step)?);
            if !(step > 0.0 && stop >= start) {
                return Err(format!("`{s}` needs step > 0 and stop >= start"));
            }
            let count = ((stop - start) / step * (1.0 + 1e-12)).floor() as usize;
            (0..=count).map(|k| start + k as f64 * step).collect()
        }
        [_] => s.split(',').map(number).collect::<Result<Vec<_>, _>>()?,
        _ => return Err(format!("`{s}` is neither `a,b,c` nor `start:stop:step`")),
    };
    if values.is_empty() {
        return Err("empty grid".to_string());
    }
    Ok(Grid(values))
}

/// Renders `job`, writes it (or prints it), and returns the infeasible-row count.
fn emit(command: &str, job: &Job, out: Option<&Path>, threads: Option<usize>) -> Result<usize, CliError> {
    for w in job.warnings() {
        eprintln!("warning: {w}");
    }
    let rendered = job.render(threads)?;
    let csv = rendered.table.to_csv();
    match out {
        Some(path) => {
            output::write_with_manifest(path, command, job, &csv)?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(rendered.infeasible)
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let threads = cli.threads;
    let infeasible = match cli.command {
        Command::Compute(a) => {
            let receptors = match (a.perfect, a.rs, a.n) {
                (true, _, _) => None,
                (false, Some(rs), Some(n)) => Some(Receptors { rs, n }),
                _ => return Err(CliError::Usage("--rs and --n are required without --perfect".into())),
            };
            let job = Job::Compute(ComputeJob {
                channel: a.channel.into(),
                receptors,
                t_end: a.t_end,
                dt: a.dt,
                ntx: a.ntx,
            });
            emit("compute", &job, a.out.as_deref(), threads)?
        }
        Command::Simulate(a) => {
            let job = Job::Simulate(SimulateJob {
                channel: a.channel.into(),
                receptors: Receptors { rs: a.rs, n: a.n },
                t_end: a.t_end,
                dt: a.dt,
                trials: a.trials,
                seed: a.seed,
                dt_sim: a.dt_sim,
                reflection: a.steps.reflection.unwrap_or_default(),
                stepping: a.steps.stepping().unwrap_or_default(),
            });
            emit("simulate", &job, a.out.as_deref(), threads)?
        }
        Command::Design(a) => {
            let alphas = a.alpha_grid.map(|g| g.0).unwrap_or_else(|| a.alpha.into_iter().collect());
            let job = Job::Design(DesignJob {
                channel: a.channel.into(),
                rs: a.rs,
                alphas,
                time: a.t,
            });
            emit("design", &job, a.out.as_deref(), threads)?
        }
        Command::Figure(a) => {
            let overrides = Overrides {
                trials: a.trials,
                seed: a.seed,
                dt_sim: a.dt_sim,
                t_end: a.t_end,
                dt: a.dt,
                t: a.t,
                ntx: a.ntx,
                gaps: a.gaps.map(|g| g.0),
                rs_values: a.rs_values.map(|g| g.0),
                counts: a.counts,
                alphas: a.alpha_grid.map(|g| g.0),
                reflection: a.steps.reflection,
                stepping: a.steps.stepping(),
            };
            let command = format!("figure {}", a.name.name());
            let mut infeasible = 0;
            for (file, job) in figures::expand(a.name, &overrides) {
                infeasible += emit(&command, &job, Some(&a.out_dir.join(file)), threads)?;
            }
            infeasible
        }
        Command::Replay(a) => {
            let manifest = output::read_manifest(&a.manifest)?;
            let csv = manifest.job.render(threads)?.table.to_csv();
            let digest = output::sha256_hex(csv.as_bytes());
            if let Some(path) = &a.out {
                output::write_with_manifest(path, &manifest.command, &manifest.job, &csv)?;
            }
            if digest != manifest.sha256 {
                return Err(CliError::Internal(format!(
                    "replay of {} produced sha256 {digest}, manifest records {}",
                    manifest.output, manifest.sha256
                )));
            }
            eprintln!("replay of {} matches sha256 {digest}", manifest.output);
            0
        }
    };
    if infeasible > 0 {
        eprintln!("{infeasible} target(s) exceed the attainable fraction; rows flagged feasible=false");
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0.1,0.2").unwrap(), Grid(vec![0.1, 0.2]));
        let g = parse_grid("0.1:0.7:0.1").unwrap().0;
        assert_eq!(g.len(), 7);
        assert!((g[6] - 0.7).abs() < 1e-12);
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("a,b").is_err());
        assert!(parse_grid("1:2").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
