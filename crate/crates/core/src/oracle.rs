//! Exact optima for small instances, and the closed-form continuous-speed
//! cost used to study optimal orders.

use serde::{Deserialize, Serialize};

use crate::energy::EnergyCost;
use crate::error::{Error, Result};
use crate::evaluate::{assemble, CostBreakdown};
use crate::instance::{Instance, Job, Objective};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleLimits {
    pub max_jobs: usize,
    pub max_speeds: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_jobs: 7,
            max_speeds: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    BruteForce,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactResult {
    pub cost: CostBreakdown,
    pub order: Vec<usize>,
    /// Speed per job id, a member of the speed set.
    pub speeds: Vec<f64>,
    pub method: Method,
}

struct Search<'a> {
    instance: &'a Instance,
    /// `energy[i][j]`.
    energy: Vec<Vec<f64>>,
    /// `duration[i][j] = rho_i / sigma_j`.
    duration: Vec<Vec<f64>>,
    predecessors: Vec<u64>,
    order: Vec<usize>,
    speed: Vec<usize>,
    best: f64,
    best_order: Vec<usize>,
    best_speed: Vec<usize>,
}

impl Search<'_> {
    fn descend(&mut self, placed: u64, now: f64, partial: f64) {
        let n = self.instance.n();
        if self.order.len() == n {
            if partial < self.best {
                self.best = partial;
                self.best_order.clone_from(&self.order);
                self.best_speed.clone_from(&self.speed);
            }
            return;
        }
        for i in 0..n {
            let bit = 1u64 << i;
            if placed & bit != 0 || self.predecessors[i] & !placed != 0 {
                continue;
            }
            let job = &self.instance.jobs[i];
            let start = now.max(job.release);
            for j in 0..self.instance.m() {
                let completion = start + self.duration[i][j];
                let time_cost = match self.instance.objective {
                    Objective::Completion => completion,
                    Objective::Tardiness => (completion - job.deadline).max(0.0),
                };
                let cost = partial + self.energy[i][j] + job.weight * time_cost;
                // all remaining terms are non-negative
                if cost >= self.best {
                    continue;
                }
                self.order.push(i);
                self.speed[i] = j;
                self.descend(placed | bit, completion, cost);
                self.order.pop();
            }
        }
    }
}

/// Minimum over every precedence-feasible order and every speed assignment.
pub fn brute_force(instance: &Instance, limits: OracleLimits) -> Result<ExactResult> {
    instance.ensure_valid()?;
    let (n, m) = (instance.n(), instance.m());
    if n > limits.max_jobs || m > limits.max_speeds {
        return Err(Error::OracleTooLarge {
            n,
            m,
            max_n: limits.max_jobs,
            max_m: limits.max_speeds,
        });
    }
    let energy = (0..n)
        .map(|i| {
            let e = instance.job_energy(i);
            (0..m).map(|j| e.at_grid(&instance.speeds, j)).collect()
        })
        .collect();
    let duration = instance
        .jobs
        .iter()
        .map(|job| instance.speeds.speeds().iter().map(|s| job.work() / s).collect())
        .collect();
    let mut search = Search {
        instance,
        energy,
        duration,
        predecessors: instance.precedence.predecessor_masks(n),
        order: Vec::with_capacity(n),
        speed: vec![0; n],
        best: f64::INFINITY,
        best_order: Vec::new(),
        best_speed: Vec::new(),
    };
    search.descend(0, 0.0, 0.0);

    let speeds: Vec<f64> = search.best_speed.iter().map(|&j| instance.speeds.speed(j)).collect();
    let schedule = assemble(instance, search.best_order.clone(), speeds.clone())?;
    Ok(ExactResult {
        cost: schedule.cost,
        order: search.best_order,
        speeds,
        method: Method::BruteForce,
    })
}

/// Constants of the continuous-speed cost
/// `F(pi) = sum_i K xi_pi(i) (sum_{k >= i} w_pi(k))^q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualCostParams {
    pub q: f64,
    pub k: f64,
    /// `xi_i = rho_i v_i^(1/beta)`.
    pub xi: Vec<f64>,
}

impl DualCostParams {
    /// Requires polynomial energy on every job.
    pub fn new(jobs: &[Job], beta: f64) -> Result<Self> {
        if beta.is_nan() || beta < 2.0 {
            return Err(Error::InvalidConfig(format!("beta must be >= 2, got {beta}")));
        }
        let xi = jobs
            .iter()
            .map(|job| match job.energy {
                EnergyCost::Polynomial { v, .. } => Ok(job.work() * v.powf(1.0 / beta)),
                EnergyCost::Table { .. } => Err(Error::InvalidConfig(format!(
                    "job {} has tabulated energy; the continuous-speed cost needs polynomial energy",
                    job.id
                ))),
            })
            .collect::<Result<_>>()?;
        Ok(DualCostParams {
            q: (beta - 1.0) / beta,
            k: beta / (beta - 1.0).powf((beta - 1.0) / beta),
            xi,
        })
    }
}

/// Cost of `order` when every job runs at its optimal continuous speed.
pub fn dual_cost(order: &[usize], jobs: &[Job], beta: f64) -> Result<f64> {
    let p = DualCostParams::new(jobs, beta)?;
    let mut suffix = 0.0;
    let mut total = 0.0;
    for &i in order.iter().rev() {
        suffix += jobs[i].weight;
        total += p.k * p.xi[i] * suffix.powf(p.q);
    }
    Ok(total)
}

fn all_equal(values: impl Iterator<Item = f64> + Clone) -> bool {
    let first = values.clone().next().unwrap_or(0.0);
    values.into_iter().all(|v| (v - first).abs() <= 1e-12 * first.abs().max(1.0))
}

/// Order by non-increasing `w_i / xi_i` (ties by id), optimal for the
/// continuous-speed cost when all weights or all `xi_i` are equal.
pub fn special_case_order(jobs: &[Job], beta: f64) -> Result<Vec<usize>> {
    let p = DualCostParams::new(jobs, beta)?;
    let equal_weights = all_equal(jobs.iter().map(|j| j.weight));
    let equal_xi = all_equal(p.xi.iter().copied());
    if !equal_weights && !equal_xi {
        return Err(Error::NotSpecialCase(
            "needs equal weights or equal rho * v^(1/beta) across jobs".into(),
        ));
    }
    let mut order: Vec<usize> = (0..jobs.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = jobs[a].weight / p.xi[a];
        let rb = jobs[b].weight / p.xi[b];
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{PrecedenceDag, SpeedSet};

    fn poly(id: usize, rho: i64, w: f64, v: f64, beta: f64) -> Job {
        Job::new(id, rho, w, EnergyCost::polynomial(v, beta))
    }

    fn instance(jobs: Vec<Job>, speeds: Vec<f64>, edges: Vec<(usize, usize)>, beta: f64) -> Instance {
        Instance {
            jobs,
            speeds: SpeedSet::new(speeds, 1.0).unwrap(),
            precedence: PrecedenceDag::new(edges),
            objective: Objective::Completion,
            alpha: None,
            epsilon: 1.0,
            beta,
        }
    }

    #[test]
    fn single_job_picks_cheaper_speed() {
        // speed 1: energy 2 + completion 2 = 4; speed 2: 8 + 1 = 9
        let inst = instance(vec![poly(0, 2, 1.0, 1.0, 3.0)], vec![1.0, 2.0], vec![], 3.0);
        let r = brute_force(&inst, OracleLimits::default()).unwrap();
        assert_eq!(r.cost.total, 4.0);
        assert_eq!(r.speeds, vec![1.0]);
    }

    #[test]
    fn identical_jobs_are_symmetric() {
        let inst = instance(
            vec![poly(0, 2, 1.0, 1.0, 2.0), poly(1, 2, 1.0, 1.0, 2.0)],
            vec![1.0, 2.0],
            vec![],
            2.0,
        );
        let r = brute_force(&inst, OracleLimits::default()).unwrap();
        let mut swapped = r.speeds.clone();
        swapped.swap(0, 1);
        let other = assemble(&inst, vec![r.order[1], r.order[0]], swapped).unwrap();
        assert_eq!(other.cost.total, r.cost.total);
    }

    #[test]
    fn respects_edges() {
        // job 1 is short and heavy, but must follow job 0
        let inst = instance(
            vec![poly(0, 5, 1.0, 1.0, 2.0), poly(1, 1, 10.0, 1.0, 2.0)],
            vec![1.0],
            vec![(0, 1)],
            2.0,
        );
        assert_eq!(brute_force(&inst, OracleLimits::default()).unwrap().order, vec![0, 1]);
    }

    #[test]
    fn size_cap() {
        let jobs = (0..8).map(|i| poly(i, 1, 1.0, 1.0, 2.0)).collect();
        let inst = instance(jobs, vec![1.0], vec![], 2.0);
        assert!(matches!(
            brute_force(&inst, OracleLimits::default()),
            Err(Error::OracleTooLarge { n: 8, .. })
        ));
    }

    #[test]
    fn dual_cost_single_job() {
        // min_s s + 1/s = 2
        let jobs = [poly(0, 1, 1.0, 1.0, 2.0)];
        assert!((dual_cost(&[0], &jobs, 2.0).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn special_case_examples() {
        // equal weights, xi = (3, 1, 2)
        let jobs = [poly(0, 3, 1.0, 1.0, 2.0), poly(1, 1, 1.0, 1.0, 2.0), poly(2, 2, 1.0, 1.0, 2.0)];
        assert_eq!(special_case_order(&jobs, 2.0).unwrap(), vec![1, 2, 0]);
        // equal xi, w = (1, 5)
        let jobs = [poly(0, 1, 1.0, 1.0, 2.0), poly(1, 1, 5.0, 1.0, 2.0)];
        assert_eq!(special_case_order(&jobs, 2.0).unwrap(), vec![1, 0]);
        let jobs = [poly(0, 1, 1.0, 1.0, 2.0), poly(1, 2, 5.0, 1.0, 2.0)];
        assert!(matches!(special_case_order(&jobs, 2.0), Err(Error::NotSpecialCase(_))));
    }
}
