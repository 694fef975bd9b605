//! Seeded random instance generation.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::energy::EnergyCost;
use crate::error::{Error, Result};
use crate::instance::{Instance, Job, Objective, PrecedenceDag, SpeedSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergyKind {
    #[serde(rename = "poly")]
    Polynomial,
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub objective: Objective,
    pub energy: EnergyKind,
    /// `rho` is drawn uniformly from `1..=max_rho`.
    pub max_rho: i64,
    pub weight_range: (f64, f64),
    /// Polynomial coefficient `v` range.
    pub v_range: (f64, f64),
    /// Tabulated costs are drawn from `[0, table_max]`.
    pub table_max: f64,
    /// Releases are drawn from `[0, release_factor * total work at the slowest
    /// speed]`; zero disables release dates.
    pub release_factor: f64,
    /// Deadlines are drawn from `[0, deadline_factor * total work at the
    /// slowest speed]` (tardiness objective only).
    pub deadline_factor: f64,
    /// Probability of each forward edge in a random topological order.
    pub edge_density: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub beta: f64,
    pub alpha: Option<f64>,
    /// After the `m` base speeds, keep appending `(1 + delta)` steps until the
    /// top speed is at least this multiple of the base top speed.
    pub speed_headroom: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            objective: Objective::Completion,
            energy: EnergyKind::Polynomial,
            max_rho: 10,
            weight_range: (1.0, 10.0),
            v_range: (0.5, 2.0),
            table_max: 50.0,
            release_factor: 0.0,
            deadline_factor: 0.6,
            edge_density: 0.3,
            delta: 1.0,
            epsilon: 1.0,
            beta: 2.0,
            alpha: None,
            speed_headroom: 1.0,
        }
    }
}

impl GeneratorConfig {
    /// Headroom that lets the tardiness rounding scale alpha-speeds by
    /// `gamma = (1 + eps) / (alpha (1 - alpha))` from the base top speed.
    pub fn tardiness_headroom(&self) -> f64 {
        let alpha = self.alpha.unwrap_or(0.5);
        (1.0 + self.epsilon) / (alpha * (1.0 - alpha)) * (1.0 + self.delta)
    }

    fn check(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.max_rho < 1 {
            return bad("max_rho must be >= 1");
        }
        let (wl, wh) = self.weight_range;
        if !(wl > 0.0 && wl <= wh) {
            return bad("weight_range must satisfy 0 < low <= high");
        }
        let (vl, vh) = self.v_range;
        if !(vl > 0.0 && vl <= vh) {
            return bad("v_range must satisfy 0 < low <= high");
        }
        if self.table_max.is_nan() || self.table_max < 0.0 {
            return bad("table_max must be >= 0");
        }
        if !(self.release_factor >= 0.0 && self.deadline_factor >= 0.0) {
            return bad("release and deadline factors must be >= 0");
        }
        if self.objective == Objective::Tardiness && self.release_factor > 0.0 {
            return bad("the tardiness objective does not allow release dates");
        }
        if !(0.0..=1.0).contains(&self.edge_density) {
            return bad("edge_density must lie in [0, 1]");
        }
        if !(self.delta > 0.0 && self.epsilon > 0.0 && self.beta >= 2.0) {
            return bad("need delta > 0, epsilon > 0, beta >= 2");
        }
        if self.speed_headroom.is_nan() || self.speed_headroom < 1.0 {
            return bad("speed_headroom must be >= 1");
        }
        Ok(())
    }
}

/// Deterministic random instance with `n` jobs and (at least) `m` speeds.
pub fn generate(seed: u64, n: usize, m: usize, config: &GeneratorConfig) -> Result<Instance> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidConfig(format!("need n >= 1 and m >= 1, got n={n}, m={m}")));
    }
    if n > 64 {
        return Err(Error::InvalidConfig("at most 64 jobs are supported".into()));
    }
    config.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut speeds = Vec::with_capacity(m);
    speeds.push(rng.random_range(1.0..2.0));
    for _ in 1..m {
        let step = 1.0 + config.delta * rng.random_range(0.5..=1.0);
        speeds.push(speeds.last().unwrap() * step);
    }
    let base = SpeedSet::new(speeds, config.delta)?;
    let speedset = base.extended_to(base.max() * config.speed_headroom);
    let slowest = speedset.min();
    let m_total = speedset.len();

    let mut jobs: Vec<Job> = (0..n)
        .map(|id| {
            let rho = rng.random_range(1..=config.max_rho);
            let weight = rng.random_range(config.weight_range.0..=config.weight_range.1);
            let energy = match config.energy {
                EnergyKind::Polynomial => EnergyCost::polynomial(
                    rng.random_range(config.v_range.0..=config.v_range.1),
                    config.beta,
                ),
                EnergyKind::Table => EnergyCost::table(
                    (0..m_total)
                        .map(|_| rng.random_range(0.0..=config.table_max))
                        .collect(),
                ),
            };
            Job::new(id, rho, weight, energy)
        })
        .collect();

    let total_work: f64 = jobs.iter().map(|j| j.work() / slowest).sum();
    for job in &mut jobs {
        if config.release_factor > 0.0 {
            job.release = rng.random_range(0.0..=config.release_factor * total_work);
        }
        if config.objective == Objective::Tardiness {
            job.deadline = rng.random_range(0.0..=config.deadline_factor * total_work);
        }
    }

    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if config.edge_density > 0.0 && rng.random_bool(config.edge_density) {
                edges.push((perm[a], perm[b]));
            }
        }
    }

    let instance = Instance {
        jobs,
        speeds: speedset,
        precedence: PrecedenceDag::new(edges),
        objective: config.objective,
        alpha: config.alpha,
        epsilon: config.epsilon,
        beta: config.beta,
    };
    instance.ensure_valid()?;
    Ok(instance)
}
