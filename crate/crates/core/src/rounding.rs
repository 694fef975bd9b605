//! Rounding an LP solution into a schedule via alpha-intervals and
//! alpha-speeds.
//!
//! For each job the alpha-interval is the first interval by which an `alpha`
//! fraction of its LP mass has completed. The mass up to that interval is
//! truncated to exactly `alpha`, renormalized into a distribution `mu` over
//! speeds, and the job's alpha-speed is `1 / sum_j mu_j / sigma_j`. Jobs run
//! in order of alpha-interval; the completion-time variant rounds the
//! alpha-speed onto the speed set, the tardiness variant first scales it by
//! `gamma = (1 + eps) / (alpha (1 - alpha))` and rounds up.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::energy::{check_growth_condition, JobEnergy, DEFAULT_PROBE_GAMMAS};
use crate::error::{Error, Result};
use crate::evaluate::{assemble, Schedule};
use crate::instance::{Instance, Objective, PrecedenceDag, SpeedSet};
use crate::lp::LpSolution;

const MASS_TOL: f64 = 1e-9;
const SPEED_TOL: f64 = 1e-9;

/// Per-job quantities derived from the LP solution for a given alpha.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaJob {
    /// Alpha-interval index (1-based).
    pub interval: usize,
    /// LP mass completed strictly before the alpha-interval.
    pub mass_before: f64,
    /// Truncated solution, `truncated[j][u - 1]` for `u` up to `interval`.
    pub truncated: Vec<Vec<f64>>,
    /// Distribution over speed indices.
    pub mu: Vec<f64>,
    pub alpha_speed: f64,
}

impl AlphaJob {
    pub fn truncated_mass(&self) -> f64 {
        self.truncated.iter().flatten().sum()
    }
}

/// Everything the rounding computed on its way to the schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundingTrace {
    pub alpha: f64,
    pub jobs: Vec<AlphaJob>,
    pub order: Vec<usize>,
    /// Speed the rounding step started from: the alpha-speed, or
    /// `gamma` times it for tardiness.
    pub target_speeds: Vec<f64>,
    /// Index into the speed set chosen for each job.
    pub speed_index: Vec<usize>,
    /// Completion times at the unrounded target speeds (tardiness only).
    pub pre_rounding_completion: Option<Vec<f64>>,
    pub schedule: Schedule,
}

/// `tau_i^alpha` for every job.
pub fn alpha_intervals(solution: &LpSolution, alpha: f64) -> Result<Vec<usize>> {
    (0..solution.index.jobs)
        .map(|i| alpha_interval(solution, i, alpha))
        .collect()
}

fn alpha_interval(solution: &LpSolution, i: usize, alpha: f64) -> Result<usize> {
    let mut cumulative = 0.0;
    for t in 1..=solution.index.intervals {
        cumulative += solution.interval_mass(i, t);
        if cumulative >= alpha - MASS_TOL {
            return Ok(t);
        }
    }
    Err(Error::CorruptSolution {
        job: i,
        mass: cumulative,
        alpha,
    })
}

/// Truncates job `i` at interval `tau`: full LP mass before `tau`, and at
/// `tau` speeds are filled in increasing index order until the total is
/// `alpha`. Returns the mass before `tau` and the truncated values.
pub fn truncate(solution: &LpSolution, i: usize, alpha: f64, tau: usize) -> (f64, Vec<Vec<f64>>) {
    let m = solution.index.speeds;
    let mass_before: f64 = (1..tau).map(|u| solution.interval_mass(i, u)).sum();
    let mut truncated = vec![vec![0.0; tau]; m];
    let mut prefix = 0.0;
    for (j, row) in truncated.iter_mut().enumerate() {
        for (u, v) in row.iter_mut().enumerate().take(tau - 1) {
            *v = solution.value(i, j, u + 1);
        }
        let x = solution.value(i, j, tau);
        row[tau - 1] = x.min(alpha - prefix - mass_before).max(0.0);
        prefix += x;
    }
    (mass_before, truncated)
}

/// `mu_j = (1 / alpha) sum_u x~_{j,u}`.
pub fn speed_distribution(truncated: &[Vec<f64>], alpha: f64) -> Vec<f64> {
    truncated.iter().map(|row| row.iter().sum::<f64>() / alpha).collect()
}

/// Weighted harmonic mean `1 / sum_j mu_j / sigma_j`, clamped to the speed
/// range against rounding in `mu`.
pub fn alpha_speed(mu: &[f64], speeds: &SpeedSet) -> f64 {
    let inverse: f64 = mu.iter().zip(speeds.speeds()).map(|(p, s)| p / s).sum();
    (1.0 / inverse).clamp(speeds.min(), speeds.max())
}

pub fn alpha_data(solution: &LpSolution, alpha: f64, speeds: &SpeedSet) -> Result<Vec<AlphaJob>> {
    let taus = alpha_intervals(solution, alpha)?;
    Ok(taus
        .into_iter()
        .enumerate()
        .map(|(i, interval)| {
            let (mass_before, truncated) = truncate(solution, i, alpha, interval);
            let mu = speed_distribution(&truncated, alpha);
            let alpha_speed = alpha_speed(&mu, speeds);
            AlphaJob {
                interval,
                mass_before,
                truncated,
                mu,
                alpha_speed,
            }
        })
        .collect())
}

/// Jobs sorted by alpha-interval; inside an interval, topological order of
/// the induced sub-DAG with the smallest ready id first.
pub fn order_jobs(taus: &[usize], precedence: &PrecedenceDag) -> Result<Vec<usize>> {
    for &(a, b) in precedence.edges() {
        if taus[a] > taus[b] {
            return Err(Error::PrecedenceViolation { before: a, after: b });
        }
    }
    let n = taus.len();
    let mut buckets: Vec<usize> = taus.to_vec();
    buckets.sort_unstable();
    buckets.dedup();

    let mut order = Vec::with_capacity(n);
    for tau in buckets {
        let members: Vec<usize> = (0..n).filter(|&i| taus[i] == tau).collect();
        let mut indegree = vec![0usize; n];
        for &(a, b) in precedence.edges() {
            if taus[a] == tau && taus[b] == tau {
                indegree[b] += 1;
            }
        }
        let mut ready: BTreeSet<usize> = members.iter().copied().filter(|&i| indegree[i] == 0).collect();
        while let Some(i) = ready.pop_first() {
            order.push(i);
            for &(a, b) in precedence.edges() {
                if a == i && taus[b] == tau {
                    indegree[b] -= 1;
                    if indegree[b] == 0 {
                        ready.insert(b);
                    }
                }
            }
        }
    }
    Ok(order)
}

/// Largest speed index with `sigma_j <= s`.
pub fn round_speed_down(s: f64, speeds: &SpeedSet) -> usize {
    let limit = s * (1.0 + SPEED_TOL);
    speeds.speeds().iter().rposition(|&v| v <= limit).unwrap_or(0)
}

/// Smallest speed index with `sigma_j >= s`, if any.
pub fn round_speed_up(s: f64, speeds: &SpeedSet) -> Option<usize> {
    let limit = s * (1.0 - SPEED_TOL);
    speeds.speeds().iter().position(|&v| v >= limit)
}

/// The neighbour of `s` on the speed grid with the lower envelope cost
/// (floor on ties). The envelope is linear between the two, so the chosen
/// endpoint never costs more than `s` itself.
pub fn round_speed_energy_aware(s: f64, speeds: &SpeedSet, energy: &JobEnergy) -> usize {
    let floor = round_speed_down(s, speeds);
    let Some(ceil) = round_speed_up(s, speeds) else {
        return floor;
    };
    if ceil <= floor {
        return ceil;
    }
    if energy.at_grid(speeds, ceil) < energy.at_grid(speeds, floor) {
        ceil
    } else {
        floor
    }
}

fn completion_speed(s: f64, speeds: &SpeedSet, energy: &JobEnergy) -> usize {
    match energy {
        JobEnergy::Polynomial { .. } => round_speed_down(s, speeds),
        JobEnergy::Envelope(_) => round_speed_energy_aware(s, speeds, energy),
    }
}

/// `gamma = (1 + eps) / (alpha (1 - alpha))`.
pub fn gamma(alpha: f64, epsilon: f64) -> f64 {
    (1.0 + epsilon) / (alpha * (1.0 - alpha))
}

/// Completion-time rounding.
pub fn saias(instance: &Instance, solution: &LpSolution) -> Result<Schedule> {
    saias_traced(instance, solution).map(|t| t.schedule)
}

pub fn saias_traced(instance: &Instance, solution: &LpSolution) -> Result<RoundingTrace> {
    if instance.objective != Objective::Completion {
        return Err(Error::ObjectiveMismatch {
            expected: Objective::Completion.to_string(),
            found: instance.objective.to_string(),
        });
    }
    let alpha = instance.alpha();
    let jobs = alpha_data(solution, alpha, &instance.speeds)?;
    let taus: Vec<usize> = jobs.iter().map(|a| a.interval).collect();
    let order = order_jobs(&taus, &instance.precedence)?;
    let target_speeds: Vec<f64> = jobs.iter().map(|a| a.alpha_speed).collect();
    let speed_index: Vec<usize> = target_speeds
        .iter()
        .enumerate()
        .map(|(i, &s)| completion_speed(s, &instance.speeds, &instance.job_energy(i)))
        .collect();
    let speeds = speed_index.iter().map(|&j| instance.speeds.speed(j)).collect();
    let schedule = assemble(instance, order.clone(), speeds)?;
    Ok(RoundingTrace {
        alpha,
        jobs,
        order,
        target_speeds,
        speed_index,
        pre_rounding_completion: None,
        schedule,
    })
}

/// Tardiness rounding.
pub fn saias_t(instance: &Instance, solution: &LpSolution) -> Result<Schedule> {
    saias_t_traced(instance, solution).map(|t| t.schedule)
}

pub fn saias_t_traced(instance: &Instance, solution: &LpSolution) -> Result<RoundingTrace> {
    if instance.objective != Objective::Tardiness {
        return Err(Error::ObjectiveMismatch {
            expected: Objective::Tardiness.to_string(),
            found: instance.objective.to_string(),
        });
    }
    instance.ensure_valid()?;
    for i in 0..instance.n() {
        let energy = instance.job_energy(i);
        if !check_growth_condition(&energy, instance.beta, &instance.speeds, &DEFAULT_PROBE_GAMMAS) {
            return Err(Error::GrowthCondition {
                job: i,
                beta: instance.beta,
            });
        }
    }
    let alpha = instance.alpha();
    let gamma = gamma(alpha, instance.epsilon);
    let jobs = alpha_data(solution, alpha, &instance.speeds)?;
    let taus: Vec<usize> = jobs.iter().map(|a| a.interval).collect();
    let order = order_jobs(&taus, &instance.precedence)?;
    let target_speeds: Vec<f64> = jobs.iter().map(|a| gamma * a.alpha_speed).collect();
    let speed_index = target_speeds
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            round_speed_up(s, &instance.speeds).ok_or(Error::SpeedOverflow {
                job: i,
                required: s,
                max: instance.speeds.max(),
            })
        })
        .collect::<Result<Vec<usize>>>()?;

    let mut pre = vec![0.0; instance.n()];
    let mut now = 0.0;
    for &i in &order {
        now += instance.jobs[i].work() / target_speeds[i];
        pre[i] = now;
    }
    let speeds = speed_index.iter().map(|&j| instance.speeds.speed(j)).collect();
    let schedule = assemble(instance, order.clone(), speeds)?;
    Ok(RoundingTrace {
        alpha,
        jobs,
        order,
        target_speeds,
        speed_index,
        pre_rounding_completion: Some(pre),
        schedule,
    })
}
