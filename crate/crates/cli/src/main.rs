//! `ecosched` command-line front end.
//!
//! Every command writes JSON (or LP text for `lp-dump`) to stdout and
//! diagnostics to stderr. Solver tolerances can be overridden through the
//! `ECOSCHED_FEASIBILITY_TOL`, `ECOSCHED_OPTIMALITY_TOL` and
//! `ECOSCHED_MAX_ITERATIONS` environment variables.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ecosched::generate::{generate, EnergyKind, GeneratorConfig};
use ecosched::oracle::{brute_force, OracleLimits};
use ecosched::pipeline::{self, BenchConfig, PipelineOptions};
use ecosched::{build_lp, Instance, Objective, SolverConfig, TimeGrid};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "ecosched", version, about = "Energy-aware single-machine scheduling")]
struct Cli {
    /// Indent JSON output.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance.
    Gen(GenArgs),
    /// Solve an instance: LP relaxation, rounding, evaluation.
    Solve(SolveArgs),
    /// Exact optimum by enumeration (small instances only).
    Oracle(OracleArgs),
    /// Solve a seeded batch of random instances and report ratios.
    Bench(BenchArgs),
    /// Write the LP relaxation in LP text format.
    LpDump(DumpArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Completion,
    Tardiness,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Completion => Objective::Completion,
            ObjectiveArg::Tardiness => Objective::Tardiness,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EnergyArg {
    Poly,
    Table,
}

#[derive(Args)]
struct GeneratorArgs {
    #[arg(long, value_enum, default_value = "completion")]
    objective: ObjectiveArg,
    #[arg(long, value_enum, default_value = "poly")]
    energy: EnergyArg,
    /// Releases drawn up to this fraction of the total work at the slowest speed.
    #[arg(long, default_value_t = 0.0)]
    releases: f64,
    /// Probability of each precedence edge.
    #[arg(long, default_value_t = 0.3)]
    density: f64,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    /// Extend the speed ladder to this multiple of its top speed
    /// (defaults to what the tardiness rounding needs for that objective).
    #[arg(long)]
    headroom: Option<f64>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    m: usize,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[command(flatten)]
    generator: GeneratorArgs,
    /// Write to a file instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct Overrides {
    /// Formulation to use (defaults to the instance's objective).
    #[arg(long, value_enum)]
    objective: Option<ObjectiveArg>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
    /// Also compute the exact optimum and the ratio against it.
    #[arg(long)]
    oracle: bool,
}

#[derive(Args)]
struct OracleArgs {
    instance: PathBuf,
    #[arg(long, value_enum)]
    objective: Option<ObjectiveArg>,
    #[arg(long, default_value_t = OracleLimits::default().max_jobs)]
    max_jobs: usize,
    #[arg(long, default_value_t = OracleLimits::default().max_speeds)]
    max_speeds: usize,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    m: usize,
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    #[arg(long)]
    alpha: Option<f64>,
    #[command(flatten)]
    generator: GeneratorArgs,
    /// Compare against the exact optimum (small n only).
    #[arg(long)]
    oracle: bool,
}

#[derive(Args)]
struct DumpArgs {
    instance: PathBuf,
    #[arg(long, value_enum)]
    objective: Option<ObjectiveArg>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn generator_config(args: &GeneratorArgs, epsilon: f64, alpha: Option<f64>) -> GeneratorConfig {
    let mut config = GeneratorConfig {
        objective: args.objective.into(),
        energy: match args.energy {
            EnergyArg::Poly => EnergyKind::Polynomial,
            EnergyArg::Table => EnergyKind::Table,
        },
        release_factor: args.releases,
        edge_density: args.density,
        delta: args.delta,
        epsilon,
        beta: args.beta,
        alpha,
        ..Default::default()
    };
    config.speed_headroom = match (args.headroom, config.objective) {
        (Some(h), _) => h,
        (None, Objective::Tardiness) => config.tardiness_headroom(),
        (None, Objective::Completion) => 1.0,
    };
    config
}

fn emit<T: Serialize>(value: &T, pretty: bool) -> Result<()> {
    let text = if pretty {
        serde_json::to_string_pretty(value)?
    } else {
        serde_json::to_string(value)?
    };
    println!("{text}");
    Ok(())
}

fn load(path: &PathBuf) -> Result<Instance> {
    Instance::load(path).with_context(|| format!("cannot load instance {}", path.display()))
}

fn solver_config() -> Result<SolverConfig> {
    SolverConfig::from_env().map_err(|e| anyhow!(e))
}

fn run(cli: Cli) -> Result<ExitCode> {
    let pretty = cli.pretty;
    match cli.command {
        Command::Gen(args) => {
            let config = generator_config(&args.generator, args.epsilon.unwrap_or(1.0), args.alpha);
            let instance = generate(args.seed, args.n, args.m, &config)?;
            match args.output {
                Some(path) => instance.save(&path)?,
                None => println!("{}", instance.to_json_string(pretty)),
            }
        }
        Command::Solve(args) => {
            let instance = load(&args.instance)?;
            let options = PipelineOptions {
                alpha: args.overrides.alpha,
                epsilon: args.overrides.epsilon,
                objective: args.overrides.objective.map(Into::into),
                solver: solver_config()?,
                oracle: args.oracle.then(OracleLimits::default),
            };
            let report = pipeline::solve(&instance, &options)?;
            emit(&report, pretty)?;
            if !report.feasible {
                eprintln!("error: rounded schedule failed the feasibility check");
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Oracle(args) => {
            let mut instance = load(&args.instance)?;
            if let Some(o) = args.objective {
                instance.objective = o.into();
                instance.ensure_valid()?;
            }
            let limits = OracleLimits {
                max_jobs: args.max_jobs,
                max_speeds: args.max_speeds,
            };
            emit(&brute_force(&instance, limits)?, pretty)?;
        }
        Command::Bench(args) => {
            let config = BenchConfig {
                jobs: args.n,
                speeds: args.m,
                count: args.count,
                seed: args.seed,
                generator: generator_config(&args.generator, args.epsilon, args.alpha),
                options: PipelineOptions {
                    solver: solver_config()?,
                    oracle: args.oracle.then(|| OracleLimits {
                        max_jobs: OracleLimits::default().max_jobs,
                        max_speeds: usize::MAX,
                    }),
                    ..Default::default()
                },
            };
            let report = pipeline::run_batch(&config)?;
            emit(&report, pretty)?;
            let agg = &report.aggregate;
            if agg.failures > 0 || agg.bound_violations > 0 {
                eprintln!(
                    "error: {} failed instances, {} bound violations",
                    agg.failures, agg.bound_violations
                );
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::LpDump(args) => {
            let mut instance = load(&args.instance)?;
            if let Some(o) = args.objective {
                instance.objective = o.into();
            }
            if let Some(e) = args.epsilon {
                instance.epsilon = e;
            }
            instance.ensure_valid()?;
            let grid = TimeGrid::build(&instance);
            let text = build_lp(&instance, &grid)?.to_lp_text();
            match args.output {
                Some(path) => {
                    std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?
                }
                None => print!("{text}"),
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
