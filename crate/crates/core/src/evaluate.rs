//! Schedule assembly, feasibility checking and exact cost evaluation.
//!
//! Every cost reported anywhere in the crate (rounding, oracle, pipeline)
//! goes through [`cost`], so ratios are never computed from two different
//! bookkeeping paths.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Instance, Objective};

const TIME_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduledJob {
    pub speed: f64,
    pub start: f64,
    pub completion: f64,
    /// `(completion - deadline)^+`; only meaningful for the tardiness objective.
    pub tardiness: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub energy_total: f64,
    /// `sum w_i C_i` or `sum w_i T_i`, depending on the objective.
    pub scheduling_total: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    /// Processing order; `order[k]` is the job in position `k`.
    pub order: Vec<usize>,
    /// Indexed by job id.
    pub jobs: Vec<ScheduledJob>,
    pub cost: CostBreakdown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FeasibilityViolation {
    JobCount { expected: usize, found: usize },
    NotPermutation,
    SpeedNotInSet { job: usize, speed: f64 },
    StartBeforeRelease { job: usize, start: f64, release: f64 },
    Overlap { job: usize, start: f64, previous_completion: f64 },
    Recurrence { job: usize, expected: f64, found: f64 },
    Precedence { before: usize, after: usize },
}

impl fmt::Display for FeasibilityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use FeasibilityViolation::*;
        match self {
            JobCount { expected, found } => write!(f, "expected {expected} jobs, found {found}"),
            NotPermutation => f.write_str("order is not a permutation of the jobs"),
            SpeedNotInSet { job, speed } => write!(f, "job {job} runs at {speed}, not in the speed set"),
            StartBeforeRelease { job, start, release } => {
                write!(f, "job {job} starts at {start} before its release {release}")
            }
            Overlap {
                job,
                start,
                previous_completion,
            } => write!(
                f,
                "job {job} starts at {start} before the previous job completes at {previous_completion}"
            ),
            Recurrence { job, expected, found } => {
                write!(f, "job {job}: expected time {expected}, found {found}")
            }
            Precedence { before, after } => write!(f, "job {after} is scheduled before its predecessor {before}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub violations: Vec<FeasibilityViolation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIME_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Runs jobs back to back in `order` at `speeds` (indexed by job id), starting
/// each as soon as it is released and the machine is free, and evaluates it.
pub fn assemble(instance: &Instance, order: Vec<usize>, speeds: Vec<f64>) -> Result<Schedule> {
    let n = instance.n();
    let mut jobs = vec![
        ScheduledJob {
            speed: f64::NAN,
            start: f64::NAN,
            completion: f64::NAN,
            tardiness: f64::NAN,
        };
        n
    ];
    let mut now = 0.0f64;
    for &i in &order {
        if i >= n || i >= speeds.len() {
            return Err(Error::InfeasibleSchedule(FeasibilityReport {
                violations: vec![FeasibilityViolation::NotPermutation],
            }));
        }
        let job = &instance.jobs[i];
        let start = now.max(job.release);
        let completion = start + job.work() / speeds[i];
        jobs[i] = ScheduledJob {
            speed: speeds[i],
            start,
            completion,
            tardiness: (completion - job.deadline).max(0.0),
        };
        now = completion;
    }
    let mut schedule = Schedule {
        order,
        jobs,
        cost: CostBreakdown::default(),
    };
    schedule.cost = cost(instance, &schedule)?;
    Ok(schedule)
}

pub fn check_feasible(instance: &Instance, schedule: &Schedule) -> FeasibilityReport {
    use FeasibilityViolation::*;
    let n = instance.n();
    let mut v = Vec::new();
    if schedule.jobs.len() != n || schedule.order.len() != n {
        v.push(JobCount {
            expected: n,
            found: schedule.order.len().min(schedule.jobs.len()),
        });
        return FeasibilityReport { violations: v };
    }
    let mut position = vec![usize::MAX; n];
    for (k, &i) in schedule.order.iter().enumerate() {
        if i >= n || position[i] != usize::MAX {
            v.push(NotPermutation);
            return FeasibilityReport { violations: v };
        }
        position[i] = k;
    }

    let mut previous: Option<f64> = None;
    for &i in &schedule.order {
        let job = &instance.jobs[i];
        let s = &schedule.jobs[i];
        if instance.speeds.index_of(s.speed).is_none() {
            v.push(SpeedNotInSet { job: i, speed: s.speed });
        }
        if s.start < job.release - TIME_TOL * job.release.max(1.0) {
            v.push(StartBeforeRelease {
                job: i,
                start: s.start,
                release: job.release,
            });
        }
        let free = previous.unwrap_or(0.0);
        if previous.is_some() && s.start < free - TIME_TOL * free.max(1.0) {
            v.push(Overlap {
                job: i,
                start: s.start,
                previous_completion: free,
            });
        }
        let expected_start = free.max(job.release);
        if !close(s.start, expected_start) {
            v.push(Recurrence {
                job: i,
                expected: expected_start,
                found: s.start,
            });
        }
        let expected_completion = s.start + job.work() / s.speed;
        if !close(s.completion, expected_completion) {
            v.push(Recurrence {
                job: i,
                expected: expected_completion,
                found: s.completion,
            });
        }
        previous = Some(s.completion);
    }
    for &(a, b) in instance.precedence.edges() {
        if a < n && b < n && position[a] > position[b] {
            v.push(Precedence { before: a, after: b });
        }
    }
    FeasibilityReport { violations: v }
}

/// Total energy plus weighted completion time (or weighted tardiness).
pub fn cost(instance: &Instance, schedule: &Schedule) -> Result<CostBreakdown> {
    let report = check_feasible(instance, schedule);
    if !report.is_feasible() {
        return Err(Error::InfeasibleSchedule(report));
    }
    let mut energy_total = 0.0;
    let mut scheduling_total = 0.0;
    for (i, job) in instance.jobs.iter().enumerate() {
        let s = &schedule.jobs[i];
        energy_total += instance.job_energy(i).cost(s.speed)?;
        scheduling_total += job.weight
            * match instance.objective {
                Objective::Completion => s.completion,
                Objective::Tardiness => (s.completion - job.deadline).max(0.0),
            };
    }
    Ok(CostBreakdown {
        energy_total,
        scheduling_total,
        total: energy_total + scheduling_total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::EnergyCost;
    use crate::instance::{Job, PrecedenceDag, SpeedSet};

    fn instance(objective: Objective) -> Instance {
        Instance {
            jobs: vec![
                Job::new(0, 2, 1.0, EnergyCost::polynomial(1.0, 3.0)).with_deadline(3.0),
                Job::new(1, 1, 2.0, EnergyCost::polynomial(1.0, 3.0))
                    .with_release(if objective == Objective::Completion { 5.0 } else { 0.0 })
                    .with_deadline(10.0),
            ],
            speeds: SpeedSet::new(vec![1.0, 2.0], 1.0).unwrap(),
            precedence: PrecedenceDag::new(vec![(0, 1)]),
            objective,
            alpha: None,
            epsilon: 1.0,
            beta: 3.0,
        }
    }

    #[test]
    fn single_job_cost() {
        let mut inst = instance(Objective::Completion);
        inst.jobs.truncate(1);
        inst.precedence = PrecedenceDag::default();
        let s = assemble(&inst, vec![0], vec![1.0]).unwrap();
        // energy 1 * 2 * 1^2 = 2, completion 2
        assert_eq!(s.cost.energy_total, 2.0);
        assert_eq!(s.cost.scheduling_total, 2.0);
        assert_eq!(s.cost.total, 4.0);
    }

    #[test]
    fn idle_until_release() {
        let inst = instance(Objective::Completion);
        let s = assemble(&inst, vec![0, 1], vec![2.0, 1.0]).unwrap();
        assert_eq!(s.jobs[0].completion, 1.0);
        assert_eq!(s.jobs[1].start, 5.0);
        assert_eq!(s.jobs[1].completion, 6.0);
        assert!(check_feasible(&inst, &s).is_feasible());
    }

    #[test]
    fn reports_violations() {
        let inst = instance(Objective::Completion);
        let good = assemble(&inst, vec![0, 1], vec![1.0, 1.0]).unwrap();

        let mut early = good.clone();
        early.jobs[1].start = 2.0;
        early.jobs[1].completion = 3.0;
        let r = check_feasible(&inst, &early);
        assert!(r
            .violations
            .iter()
            .any(|v| matches!(v, FeasibilityViolation::StartBeforeRelease { job: 1, .. })));

        let mut swapped = good.clone();
        swapped.order = vec![1, 0];
        let r = check_feasible(&inst, &swapped);
        assert!(r
            .violations
            .contains(&FeasibilityViolation::Precedence { before: 0, after: 1 }));

        let mut off_grid = good;
        off_grid.jobs[0].speed = 1.5;
        assert!(!check_feasible(&inst, &off_grid).is_feasible());
        assert!(matches!(cost(&inst, &off_grid), Err(Error::InfeasibleSchedule(_))));
    }

    #[test]
    fn tardiness_on_time_is_free() {
        let inst = instance(Objective::Tardiness);
        let s = assemble(&inst, vec![0, 1], vec![1.0, 1.0]).unwrap();
        assert_eq!(s.cost.scheduling_total, 0.0);
        assert_eq!(s.jobs[0].tardiness, 0.0);
    }

    #[test]
    fn doubling_weights_doubles_scheduling_cost() {
        let inst = instance(Objective::Completion);
        let mut heavy = inst.clone();
        for j in &mut heavy.jobs {
            j.weight *= 2.0;
        }
        let a = assemble(&inst, vec![0, 1], vec![2.0, 1.0]).unwrap();
        let b = assemble(&heavy, vec![0, 1], vec![2.0, 1.0]).unwrap();
        assert_eq!(b.cost.scheduling_total, 2.0 * a.cost.scheduling_total);
        assert_eq!(b.cost.energy_total, a.cost.energy_total);
    }
}
