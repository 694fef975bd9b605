//! Geometric time grid for the interval-indexed formulation.
//!
//! Boundaries are `tau_0 = kappa` and `tau_t = kappa (1 + eps)^(t - 1)` for
//! `t >= 1`, where `kappa = rho_min / sigma_max` is the shortest possible
//! processing time. Interval `t` is `(tau_{t-1}, tau_t]`; interval 1 collapses
//! to the single point `kappa`, which is where any completion at `kappa` lands.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::Instance;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeGrid {
    kappa: f64,
    epsilon: f64,
    /// `tau[0..=T]`.
    tau: Vec<f64>,
}

/// Latest completion time any non-idling schedule can reach:
/// `max_i r_i + sum_i rho_i / sigma_1`.
pub fn horizon_bound(instance: &Instance) -> f64 {
    let slowest = instance.speeds.min();
    let latest_release = instance.jobs.iter().map(|j| j.release).fold(0.0, f64::max);
    latest_release + instance.jobs.iter().map(|j| j.work() / slowest).sum::<f64>()
}

impl TimeGrid {
    /// Grid with the smallest `T` such that `tau_T` covers [`horizon_bound`].
    pub fn build(instance: &Instance) -> Self {
        let rho_min = instance.jobs.iter().map(|j| j.work()).fold(f64::INFINITY, f64::min);
        let kappa = rho_min / instance.speeds.max();
        let horizon = horizon_bound(instance);
        let epsilon = instance.epsilon;

        let mut t = 1;
        while boundary(kappa, epsilon, t) < horizon {
            t += 1;
        }
        Self::with_horizon_index(kappa, epsilon, t)
    }

    /// Grid with an explicit horizon index `T >= 1`.
    pub fn with_horizon_index(kappa: f64, epsilon: f64, horizon_index: usize) -> Self {
        assert!(kappa > 0.0 && epsilon > 0.0 && horizon_index >= 1);
        let tau = (0..=horizon_index).map(|t| boundary(kappa, epsilon, t)).collect();
        TimeGrid {
            kappa,
            epsilon,
            tau,
        }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `T`, the number of intervals.
    pub fn horizon_index(&self) -> usize {
        self.tau.len() - 1
    }

    pub fn tau(&self, t: usize) -> f64 {
        self.tau[t]
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.tau
    }

    /// Lower end `tau_{t-1}` of interval `t`; the completion-time proxy used
    /// by the LP objective.
    pub fn lower(&self, t: usize) -> f64 {
        self.tau[t - 1]
    }

    pub fn end(&self) -> f64 {
        *self.tau.last().unwrap()
    }

    /// Interval `t` with `time` in `(tau_{t-1}, tau_t]`; `kappa` maps to 1.
    pub fn interval_of(&self, time: f64) -> Result<usize> {
        if !(time >= self.kappa && time <= self.end()) {
            return Err(Error::TimeOutOfRange {
                time,
                min: self.kappa,
                max: self.end(),
            });
        }
        // first t >= 1 with tau_t >= time
        Ok(1 + self.tau[1..].partition_point(|&b| b < time))
    }
}

fn boundary(kappa: f64, epsilon: f64, t: usize) -> f64 {
    if t == 0 {
        kappa
    } else {
        kappa * (1.0 + epsilon).powi(t as i32 - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::EnergyCost;
    use crate::instance::{Job, Objective, PrecedenceDag, SpeedSet};

    fn instance(rhos: &[i64], speeds: &[f64], epsilon: f64) -> Instance {
        Instance {
            jobs: rhos
                .iter()
                .enumerate()
                .map(|(i, &r)| Job::new(i, r, 1.0, EnergyCost::polynomial(1.0, 2.0)))
                .collect(),
            speeds: SpeedSet::new(speeds.to_vec(), 1.0).unwrap(),
            precedence: PrecedenceDag::default(),
            objective: Objective::Completion,
            alpha: None,
            epsilon,
            beta: 2.0,
        }
    }

    #[test]
    fn one_job_two_speeds() {
        // kappa = 2/2 = 1, horizon = 2/1 = 2, boundaries 1, 1, 2
        let g = TimeGrid::build(&instance(&[2], &[1.0, 2.0], 1.0));
        assert_eq!(g.kappa(), 1.0);
        assert_eq!(g.boundaries(), &[1.0, 1.0, 2.0]);
        assert_eq!(g.horizon_index(), 2);
    }

    #[test]
    fn two_unit_jobs() {
        let g = TimeGrid::build(&instance(&[1, 1], &[1.0], 1.0));
        assert_eq!(g.kappa(), 1.0);
        assert_eq!(g.horizon_index(), 2);
        assert_eq!(g.end(), 2.0);
    }

    #[test]
    fn single_unit_job_single_speed_has_one_interval() {
        let g = TimeGrid::build(&instance(&[1], &[1.0], 1.0));
        assert_eq!(g.horizon_index(), 1);
    }

    #[test]
    fn coarser_epsilon_gives_fewer_intervals() {
        let coarse = TimeGrid::build(&instance(&[3, 7, 2], &[1.0, 1.5], 10.0));
        let fine = TimeGrid::build(&instance(&[3, 7, 2], &[1.0, 1.5], 0.1));
        assert!(coarse.horizon_index() < fine.horizon_index());
    }

    #[test]
    fn horizon_is_minimal_and_covering() {
        let inst = instance(&[3, 7, 2], &[1.0, 1.5, 2.0], 0.25);
        let g = TimeGrid::build(&inst);
        let h = horizon_bound(&inst);
        let t = g.horizon_index();
        assert!(g.tau(t) >= h);
        assert!(g.tau(t - 1) < h);
    }

    #[test]
    fn interval_lookup() {
        let g = TimeGrid::with_horizon_index(1.0, 1.0, 4); // 1, 1, 2, 4, 8
        assert_eq!(g.interval_of(1.0).unwrap(), 1);
        assert_eq!(g.interval_of(2.0).unwrap(), 2);
        assert_eq!(g.interval_of(4.0).unwrap(), 3);
        assert_eq!(g.interval_of(2.0 + 1e-9).unwrap(), 3);
        assert_eq!(g.interval_of(8.0).unwrap(), 4);
        assert!(g.interval_of(0.5).is_err());
        assert!(g.interval_of(8.5).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn geometric_ratio(kappa in 0.01f64..10.0, eps in 0.01f64..3.0, t_max in 2usize..60) {
                let g = TimeGrid::with_horizon_index(kappa, eps, t_max);
                for t in 2..=t_max {
                    let ratio = g.tau(t) / g.tau(t - 1);
                    prop_assert!((ratio - (1.0 + eps)).abs() <= 1e-12 * (1.0 + eps));
                }
            }

            #[test]
            fn lookup_is_monotone(eps in 0.05f64..2.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
                let g = TimeGrid::with_horizon_index(0.5, eps, 12);
                let span = g.end() - g.kappa();
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                let tl = g.interval_of(g.kappa() + lo * span).unwrap();
                let th = g.interval_of(g.kappa() + hi * span).unwrap();
                prop_assert!(tl <= th);
                let t = g.interval_of(g.kappa() + lo * span).unwrap();
                let x = g.kappa() + lo * span;
                prop_assert!(x <= g.tau(t));
                prop_assert!(t == 1 || x > g.tau(t - 1));
            }
        }
    }
}
