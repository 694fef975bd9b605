//! End-to-end runs: grid, LP, simplex, rounding, evaluation, and optionally
//! the exact oracle, plus seeded batches of such runs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluate::{check_feasible, Schedule};
use crate::generate::{generate, GeneratorConfig};
use crate::instance::{Instance, Objective};
use crate::lp::{build_lp, LpSolution};
use crate::oracle::{brute_force, OracleLimits};
use crate::rounding::{gamma, saias_t_traced, saias_traced, RoundingTrace};
use crate::simplex::{LpSolver, PrimalSimplex, SolverConfig};
use crate::timegrid::TimeGrid;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions {
    pub alpha: Option<f64>,
    pub epsilon: Option<f64>,
    pub objective: Option<Objective>,
    pub solver: SolverConfig,
    /// Also compute the exact optimum with these limits.
    pub oracle: Option<OracleLimits>,
}

/// Worst-case factor between the algorithm's cost and the optimum.
///
/// Completion time: `(1+eps)(1+delta) / (alpha(1-alpha))`, times `(1+alpha)`
/// with release dates. Tardiness:
/// `((1+eps)(1+delta))^(beta-1) / (alpha(1-alpha))^beta`.
pub fn theoretical_bound(
    objective: Objective,
    alpha: f64,
    epsilon: f64,
    delta: f64,
    beta: f64,
    has_releases: bool,
) -> f64 {
    let spread = alpha * (1.0 - alpha);
    match objective {
        Objective::Completion => {
            let base = (1.0 + epsilon) * (1.0 + delta) / spread;
            if has_releases {
                base * (1.0 + alpha)
            } else {
                base
            }
        }
        Objective::Tardiness => ((1.0 + epsilon) * (1.0 + delta)).powf(beta - 1.0) / spread.powf(beta),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioEntry {
    pub lp_bound: f64,
    pub algorithm_cost: f64,
    pub oracle_cost: Option<f64>,
    pub ratio_vs_lp: f64,
    pub ratio_vs_oracle: Option<f64>,
    pub theoretical_bound: f64,
}

impl RatioEntry {
    /// Ratio against the best available lower bound on the optimum.
    pub fn ratio(&self) -> f64 {
        self.ratio_vs_oracle.unwrap_or(self.ratio_vs_lp)
    }

    pub fn within_bound(&self) -> bool {
        self.ratio() <= self.theoretical_bound * (1.0 + 1e-9)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpStats {
    pub columns: usize,
    pub rows: usize,
    pub intervals: usize,
    pub iterations: usize,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub objective: Objective,
    pub alpha: f64,
    pub epsilon: f64,
    pub delta: f64,
    /// Speed scale factor, tardiness only.
    pub gamma: Option<f64>,
    pub schedule: Schedule,
    pub feasible: bool,
    pub lp: LpStats,
    pub ratio: RatioEntry,
}

/// Full output of one run, including intermediate results.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    /// The instance after option overrides.
    pub instance: Instance,
    pub solution: LpSolution,
    pub trace: RoundingTrace,
    pub report: SolveReport,
}

/// Applies the option overrides and validates the result.
pub fn prepare(instance: &Instance, options: &PipelineOptions) -> Result<Instance> {
    let mut inst = instance.clone();
    if let Some(objective) = options.objective {
        inst.objective = objective;
    }
    if let Some(alpha) = options.alpha {
        inst.alpha = Some(alpha);
    }
    if let Some(epsilon) = options.epsilon {
        inst.epsilon = epsilon;
    }
    inst.ensure_valid()?;
    options.solver.check().map_err(Error::InvalidConfig)?;
    Ok(inst)
}

pub fn run(instance: &Instance, options: &PipelineOptions) -> Result<PipelineRun> {
    run_with(instance, options, &PrimalSimplex::new(options.solver))
}

/// As [`run`], with a caller-supplied LP solver.
pub fn run_with(instance: &Instance, options: &PipelineOptions, solver: &dyn LpSolver) -> Result<PipelineRun> {
    let inst = prepare(instance, options)?;
    let grid = TimeGrid::build(&inst);
    let model = build_lp(&inst, &grid)?;
    let solution = model.solve(solver)?;
    let trace = match inst.objective {
        Objective::Completion => saias_traced(&inst, &solution)?,
        Objective::Tardiness => saias_t_traced(&inst, &solution)?,
    };
    let feasible = check_feasible(&inst, &trace.schedule).is_feasible();
    let oracle_cost = match options.oracle {
        Some(limits) => Some(brute_force(&inst, limits)?.cost.total),
        None => None,
    };

    let alpha = inst.alpha();
    let lp_bound = solution.lower_bound();
    let algorithm_cost = trace.schedule.cost.total;
    let ratio = RatioEntry {
        lp_bound,
        algorithm_cost,
        oracle_cost,
        ratio_vs_lp: algorithm_cost / lp_bound,
        ratio_vs_oracle: oracle_cost.map(|o| algorithm_cost / o),
        theoretical_bound: theoretical_bound(
            inst.objective,
            alpha,
            inst.epsilon,
            inst.delta(),
            inst.beta,
            inst.has_releases(),
        ),
    };
    let report = SolveReport {
        objective: inst.objective,
        alpha,
        epsilon: inst.epsilon,
        delta: inst.delta(),
        gamma: (inst.objective == Objective::Tardiness).then(|| gamma(alpha, inst.epsilon)),
        schedule: trace.schedule.clone(),
        feasible,
        lp: LpStats {
            columns: model.num_columns(),
            rows: model.num_rows(),
            intervals: grid.horizon_index(),
            iterations: solution.iterations,
            max_residual: solution.max_residual,
        },
        ratio,
    };
    Ok(PipelineRun {
        instance: inst,
        solution,
        trace,
        report,
    })
}

pub fn solve(instance: &Instance, options: &PipelineOptions) -> Result<SolveReport> {
    run(instance, options).map(|r| r.report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub jobs: usize,
    pub speeds: usize,
    pub count: usize,
    pub seed: u64,
    pub generator: GeneratorConfig,
    pub options: PipelineOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchEntry {
    pub index: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<RatioEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub instances: usize,
    pub failures: usize,
    pub bound_violations: usize,
    pub max_ratio_vs_lp: f64,
    pub mean_ratio_vs_lp: f64,
    pub max_ratio_vs_oracle: Option<f64>,
    pub mean_ratio_vs_oracle: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub entries: Vec<BenchEntry>,
    pub aggregate: Aggregate,
}

/// Per-instance seeds derived deterministically from the batch seed.
pub fn child_seeds(seed: u64, count: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.random()).collect()
}

pub fn run_batch(config: &BenchConfig) -> Result<BenchReport> {
    if config.count == 0 {
        return Err(Error::InvalidConfig("count must be >= 1".into()));
    }
    let seeds = child_seeds(config.seed, config.count);
    let entries: Vec<BenchEntry> = seeds
        .par_iter()
        .enumerate()
        .map(|(index, &seed)| {
            let outcome = generate(seed, config.jobs, config.speeds, &config.generator)
                .and_then(|inst| solve(&inst, &config.options))
                .and_then(|report| {
                    if report.feasible {
                        Ok(report.ratio)
                    } else {
                        Err(Error::InvalidConfig("rounded schedule failed the feasibility check".into()))
                    }
                });
            match outcome {
                Ok(ratio) => BenchEntry {
                    index,
                    seed,
                    ratio: Some(ratio),
                    error: None,
                },
                Err(e) => BenchEntry {
                    index,
                    seed,
                    ratio: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let aggregate = aggregate(&entries);
    Ok(BenchReport {
        config: config.clone(),
        entries,
        aggregate,
    })
}

fn aggregate(entries: &[BenchEntry]) -> Aggregate {
    let ok: Vec<&RatioEntry> = entries.iter().filter_map(|e| e.ratio.as_ref()).collect();
    let stats = |values: Vec<f64>| -> Option<(f64, f64)> {
        if values.is_empty() {
            None
        } else {
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Some((max, values.iter().sum::<f64>() / values.len() as f64))
        }
    };
    let lp = stats(ok.iter().map(|r| r.ratio_vs_lp).collect());
    let oracle = stats(ok.iter().filter_map(|r| r.ratio_vs_oracle).collect());
    Aggregate {
        instances: entries.len(),
        failures: entries.len() - ok.len(),
        bound_violations: ok.iter().filter(|r| !r.within_bound()).count(),
        max_ratio_vs_lp: lp.map_or(f64::NAN, |s| s.0),
        mean_ratio_vs_lp: lp.map_or(f64::NAN, |s| s.1),
        max_ratio_vs_oracle: oracle.map(|s| s.0),
        mean_ratio_vs_oracle: oracle.map(|s| s.1),
    }
}
