//! Fixtures for the benchmarks.

use ecosched::generate::{generate, GeneratorConfig};
use ecosched::{build_lp, Instance, LpModel, LpSolution, Objective, PrimalSimplex, TimeGrid};

/// Seeded instance with a moderate precedence density.
pub fn instance(seed: u64, n: usize, m: usize, objective: Objective) -> Instance {
    let mut config = GeneratorConfig {
        objective,
        edge_density: 0.3,
        ..Default::default()
    };
    if objective == Objective::Tardiness {
        config.speed_headroom = config.tardiness_headroom();
    }
    generate(seed, n, m, &config).expect("generator accepts fixture sizes")
}

pub fn model(instance: &Instance) -> LpModel {
    build_lp(instance, &TimeGrid::build(instance)).expect("fixture LP builds")
}

pub fn solution(instance: &Instance) -> LpSolution {
    model(instance).solve(&PrimalSimplex::default()).expect("fixture LP solves")
}
