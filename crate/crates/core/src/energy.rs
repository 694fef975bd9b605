//! Speed-dependent energy cost models.
//!
//! Two descriptors are supported: the classical polynomial model
//! `v * rho * s^(beta - 1)` and an arbitrary non-negative cost table given at
//! every speed of the machine's speed set. Tables are always evaluated through
//! their lower convex envelope, linearly interpolated between grid speeds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::SpeedSet;

/// Probe factors used when checking the growth condition on tabulated costs.
pub const DEFAULT_PROBE_GAMMAS: [f64; 6] = [1.0, 1.25, 1.5, 2.0, 4.0, 8.0];

const RANGE_TOL: f64 = 1e-12;

/// Energy cost descriptor as it appears in the instance file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum EnergyCost {
    #[serde(rename = "poly")]
    Polynomial { v: f64, beta: f64 },
    #[serde(rename = "table")]
    Table { costs: Vec<f64> },
}

impl EnergyCost {
    pub fn polynomial(v: f64, beta: f64) -> Self {
        EnergyCost::Polynomial { v, beta }
    }

    pub fn table(costs: Vec<f64>) -> Self {
        EnergyCost::Table { costs }
    }

    /// Human-readable descriptions of violated invariants, if any.
    pub(crate) fn violations(&self, speed_count: usize) -> Vec<String> {
        let mut out = Vec::new();
        match self {
            EnergyCost::Polynomial { v, beta } => {
                if !(v.is_finite() && *v > 0.0) {
                    out.push(format!("polynomial coefficient v must be > 0, got {v}"));
                }
                if !(beta.is_finite() && *beta >= 2.0) {
                    out.push(format!("polynomial beta must be >= 2, got {beta}"));
                }
            }
            EnergyCost::Table { costs } => {
                if costs.len() != speed_count {
                    out.push(format!(
                        "cost table has {} entries but the speed set has {speed_count}",
                        costs.len()
                    ));
                }
                if let Some(bad) = costs.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
                    out.push(format!("cost table entries must be finite and >= 0, got {bad}"));
                }
            }
        }
        out
    }
}

/// Lower convex envelope of a cost table over the speed grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexEnvelope {
    speeds: Vec<f64>,
    values: Vec<f64>,
}

impl ConvexEnvelope {
    pub fn speeds(&self) -> &[f64] {
        &self.speeds
    }

    /// Envelope value at each grid speed.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Linear interpolation between neighbouring grid speeds.
    pub fn value_at(&self, speed: f64) -> Result<f64> {
        let lo = self.speeds[0];
        let hi = *self.speeds.last().expect("non-empty speed grid");
        if !(speed >= lo * (1.0 - RANGE_TOL) && speed <= hi * (1.0 + RANGE_TOL)) {
            return Err(Error::SpeedOutOfRange { speed, min: lo, max: hi });
        }
        if let Some(j) = self.speeds.iter().position(|&s| s == speed) {
            return Ok(self.values[j]);
        }
        let speed = speed.clamp(lo, hi);
        // first grid speed strictly above `speed`
        let k = self.speeds.partition_point(|&s| s <= speed);
        if k == 0 {
            return Ok(self.values[0]);
        }
        if k == self.speeds.len() {
            return Ok(self.values[k - 1]);
        }
        let (s0, s1) = (self.speeds[k - 1], self.speeds[k]);
        let lambda = (s1 - speed) / (s1 - s0);
        Ok(lambda * self.values[k - 1] + (1.0 - lambda) * self.values[k])
    }

    /// Slopes between consecutive grid points are non-decreasing.
    pub fn is_convex(&self, tol: f64) -> bool {
        let slopes: Vec<f64> = self
            .speeds
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(s, v)| (v[1] - v[0]) / (s[1] - s[0]))
            .collect();
        slopes
            .windows(2)
            .all(|w| w[1] >= w[0] - tol * w[0].abs().max(1.0))
    }
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Lower convex envelope of the points `(speeds[j], costs[j])`.
///
/// `speeds` must be strictly increasing and the same length as `costs`.
pub fn convexify(costs: &[f64], speeds: &[f64]) -> ConvexEnvelope {
    assert_eq!(costs.len(), speeds.len(), "one cost per grid speed");
    assert!(!speeds.is_empty(), "empty speed grid");

    // Andrew's monotone chain, lower half only.
    let mut hull: Vec<usize> = Vec::with_capacity(speeds.len());
    for j in 0..speeds.len() {
        let p = (speeds[j], costs[j]);
        while hull.len() >= 2 {
            let o = hull[hull.len() - 2];
            let a = hull[hull.len() - 1];
            if cross((speeds[o], costs[o]), (speeds[a], costs[a]), p) < 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(j);
    }

    let mut values = costs.to_vec();
    for seg in hull.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        for j in a + 1..b {
            let lambda = (speeds[b] - speeds[j]) / (speeds[b] - speeds[a]);
            let chord = lambda * costs[a] + (1.0 - lambda) * costs[b];
            values[j] = chord.min(costs[j]);
        }
    }
    ConvexEnvelope {
        speeds: speeds.to_vec(),
        values,
    }
}

/// Energy cost of one job, ready for evaluation at arbitrary speeds.
#[derive(Debug, Clone, PartialEq)]
pub enum JobEnergy {
    /// `coefficient * s^exponent`, i.e. `v * rho * s^(beta - 1)`.
    Polynomial { coefficient: f64, exponent: f64 },
    Envelope(ConvexEnvelope),
}

impl JobEnergy {
    pub fn new(descriptor: &EnergyCost, rho: f64, speeds: &SpeedSet) -> Self {
        match descriptor {
            EnergyCost::Polynomial { v, beta } => JobEnergy::Polynomial {
                coefficient: v * rho,
                exponent: beta - 1.0,
            },
            EnergyCost::Table { costs } => JobEnergy::Envelope(convexify(costs, speeds.speeds())),
        }
    }

    pub fn cost(&self, speed: f64) -> Result<f64> {
        match self {
            JobEnergy::Polynomial {
                coefficient,
                exponent,
            } => Ok(coefficient * speed.powf(*exponent)),
            JobEnergy::Envelope(env) => env.value_at(speed),
        }
    }

    /// Cost at a grid speed; never fails for speeds taken from the speed set.
    pub fn at_grid(&self, speeds: &SpeedSet, j: usize) -> f64 {
        match self {
            JobEnergy::Polynomial { .. } => self.cost(speeds.speed(j)).expect("polynomial"),
            JobEnergy::Envelope(env) => env.values()[j],
        }
    }
}

/// Energy cost of running a job with requirement `rho` at `speed`.
pub fn cost_at(descriptor: &EnergyCost, rho: f64, speed: f64, speeds: &SpeedSet) -> Result<f64> {
    JobEnergy::new(descriptor, rho, speeds).cost(speed)
}

/// Checks `E(g * s) <= g^(beta - 1) * E(s)` for every grid speed `s` and every
/// probe factor `g`. Probes that would leave the speed range are clipped to
/// `s_max / s`. The polynomial model is decided analytically.
pub fn check_growth_condition(
    energy: &JobEnergy,
    beta: f64,
    speeds: &SpeedSet,
    probe_gammas: &[f64],
) -> bool {
    match energy {
        JobEnergy::Polynomial { exponent, .. } => *exponent <= beta - 1.0 + 1e-12,
        JobEnergy::Envelope(env) => {
            let top = speeds.max();
            for &sigma in speeds.speeds() {
                let base = env.value_at(sigma).expect("grid speed");
                for &gamma in probe_gammas {
                    let gamma = if gamma * sigma > top { top / sigma } else { gamma };
                    if gamma < 1.0 {
                        continue;
                    }
                    let lhs = env.value_at(gamma * sigma).expect("clipped into range");
                    let rhs = gamma.powf(beta - 1.0) * base;
                    if lhs > rhs + 1e-9 * rhs.abs().max(1.0) {
                        return false;
                    }
                }
            }
            true
        }
    }
}

/// Geometric speed ladder `s_min, (1+delta) s_min, ...` covering `s_max` with
/// the fewest speeds.
pub fn quantize_speed_range(sigma_min: f64, sigma_max: f64, delta: f64) -> Result<SpeedSet> {
    let valid = sigma_min.is_finite()
        && sigma_max.is_finite()
        && sigma_min > 0.0
        && sigma_min <= sigma_max
        && delta.is_finite()
        && delta > 0.0;
    if !valid {
        return Err(Error::InvalidSpeedRange {
            min: sigma_min,
            max: sigma_max,
            delta,
        });
    }
    let mut speeds = vec![sigma_min];
    let mut k = 0i32;
    while *speeds.last().unwrap() < sigma_max * (1.0 - RANGE_TOL) {
        k += 1;
        speeds.push(sigma_min * (1.0 + delta).powi(k));
    }
    SpeedSet::new(speeds, delta)
}
