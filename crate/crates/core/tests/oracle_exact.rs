mod support;

use ecosched::generate::{generate, EnergyKind, GeneratorConfig};
use ecosched::oracle::{brute_force, dual_cost, OracleLimits};
use ecosched::{assemble, cost, EnergyCost, Job, Objective};
use proptest::prelude::*;

/// Minimum over every order and speed tuple, without pruning.
fn naive_optimum(inst: &ecosched::Instance) -> f64 {
    let n = inst.n();
    let m = inst.m();
    let mut best = f64::INFINITY;
    for order in support::permutations(n) {
        let mut pos = vec![0; n];
        for (k, &i) in order.iter().enumerate() {
            pos[i] = k;
        }
        if inst.precedence.edges().iter().any(|&(a, b)| pos[a] > pos[b]) {
            continue;
        }
        for code in 0..m.pow(n as u32) {
            let speeds = (0..n)
                .map(|i| inst.speeds.speed(code / m.pow(i as u32) % m))
                .collect();
            let s = assemble(inst, order.clone(), speeds).unwrap();
            best = best.min(s.cost.total);
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pruned_search_matches_naive_enumeration(seed in any::<u64>(), n in 1usize..5, m in 1usize..4, kind in 0u8..3) {
        let cfg = GeneratorConfig {
            objective: if kind == 2 { Objective::Tardiness } else { Objective::Completion },
            energy: if kind == 1 { EnergyKind::Table } else { EnergyKind::Polynomial },
            release_factor: if kind == 0 { 0.5 } else { 0.0 },
            edge_density: 0.3,
            ..Default::default()
        };
        let inst = generate(seed, n, m, &cfg).unwrap();
        let exact = brute_force(&inst, OracleLimits::default()).unwrap();
        let naive = naive_optimum(&inst);
        prop_assert!((exact.cost.total - naive).abs() <= 1e-12 * naive.max(1.0));

        // the reported cost is exactly what the evaluator says
        let schedule = assemble(&inst, exact.order.clone(), exact.speeds.clone()).unwrap();
        prop_assert_eq!(cost(&inst, &schedule).unwrap(), exact.cost);
    }

    #[test]
    fn dual_cost_matches_numeric_speed_choice(
        rhos in prop::collection::vec(1i64..10, 1..6),
        seed in any::<u64>(),
        beta in 2.0f64..4.0,
    ) {
        let jobs: Vec<Job> = rhos
            .iter()
            .enumerate()
            .map(|(i, &rho)| {
                let w = 0.5 + ((seed >> (i * 4)) & 15) as f64 / 4.0;
                let v = 0.5 + ((seed >> (i * 4 + 24)) & 15) as f64 / 8.0;
                Job::new(i, rho, w, EnergyCost::polynomial(v, beta))
            })
            .collect();
        let order: Vec<usize> = (0..jobs.len()).rev().collect();
        let closed = dual_cost(&order, &jobs, beta).unwrap();
        let mut suffix = 0.0;
        let mut numeric = 0.0;
        for &i in order.iter().rev() {
            suffix += jobs[i].weight;
            let EnergyCost::Polynomial { v, .. } = jobs[i].energy else { unreachable!() };
            let rho = jobs[i].work();
            numeric += support::minimize_speed_cost(v * rho, beta - 1.0, rho * suffix);
        }
        prop_assert!((closed - numeric).abs() <= 1e-9 * closed);
    }
}

#[test]
fn zero_energy_job_leaves_dual_cost_unchanged() {
    // a job with v = 0 has xi = 0; its own term vanishes, and it only adds
    // weight to the suffixes of earlier jobs, so place it first
    let beta = 2.0;
    let jobs = vec![
        Job::new(0, 2, 1.0, EnergyCost::polynomial(1.0, beta)),
        Job::new(1, 3, 2.0, EnergyCost::polynomial(0.5, beta)),
    ];
    let base = dual_cost(&[0, 1], &jobs, beta).unwrap();
    let mut more = jobs.clone();
    more.push(Job::new(2, 1, 1.0, EnergyCost::polynomial(0.0, beta)));
    assert_eq!(dual_cost(&[2, 0, 1], &more, beta).unwrap(), base);
}
