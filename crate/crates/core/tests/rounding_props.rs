use ecosched::generate::{generate, EnergyKind, GeneratorConfig};
use ecosched::rounding::{alpha_data, alpha_intervals, saias_t_traced, saias_traced};
use ecosched::{
    build_lp, check_feasible, saias, saias_t, EnergyCost, Error, Instance, Job, LpSolution, Objective,
    PrecedenceDag, PrimalSimplex, SpeedSet, TimeGrid,
};
use proptest::prelude::*;

fn solve_lp(inst: &Instance) -> LpSolution {
    let grid = TimeGrid::build(inst);
    build_lp(inst, &grid).unwrap().solve(&PrimalSimplex::default()).unwrap()
}

fn instance(jobs: Vec<Job>, speeds: Vec<f64>, objective: Objective) -> Instance {
    Instance {
        jobs,
        speeds: SpeedSet::new(speeds, 1.0).unwrap(),
        precedence: PrecedenceDag::default(),
        objective,
        alpha: None,
        epsilon: 1.0,
        beta: 2.0,
    }
}

#[test]
fn single_job_single_speed() {
    let inst = instance(
        vec![Job::new(0, 3, 2.0, EnergyCost::polynomial(1.0, 2.0)).with_release(1.0)],
        vec![1.5],
        Objective::Completion,
    );
    let s = saias(&inst, &solve_lp(&inst)).unwrap();
    assert_eq!(s.jobs[0].speed, 1.5);
    assert_eq!(s.jobs[0].start, 1.0);
    assert_eq!(s.jobs[0].completion, 3.0);
    // energy 1 * 3 * 1.5 plus 2 * 3
    assert_eq!(s.cost.total, 4.5 + 6.0);
}

#[test]
fn late_release_leaves_a_gap() {
    let inst = instance(
        vec![
            Job::new(0, 1, 1.0, EnergyCost::polynomial(1.0, 2.0)),
            Job::new(1, 1, 1.0, EnergyCost::polynomial(1.0, 2.0)).with_release(100.0),
        ],
        vec![1.0],
        Objective::Completion,
    );
    let s = saias(&inst, &solve_lp(&inst)).unwrap();
    assert_eq!(s.order, vec![0, 1]);
    assert_eq!(s.jobs[0].completion, 1.0);
    assert_eq!(s.jobs[1].start, 100.0);
}

#[test]
fn tardiness_without_headroom_overflows() {
    // A single fast speed: gamma = 8 times it is never available.
    let inst = instance(
        vec![Job::new(0, 1, 1.0, EnergyCost::polynomial(1.0, 2.0)).with_deadline(0.5)],
        vec![1.0],
        Objective::Tardiness,
    );
    match saias_t(&inst, &solve_lp(&inst)) {
        Err(Error::SpeedOverflow { job: 0, required, max }) => {
            assert_eq!(required, 8.0);
            assert_eq!(max, 1.0);
        }
        other => panic!("expected overflow, got {other:?}"),
    }
    let mut wide = inst.clone();
    wide.speeds = inst.speeds.extended_to(8.0);
    let s = saias_t(&wide, &solve_lp(&wide)).unwrap();
    assert!(check_feasible(&wide, &s).is_feasible());
}

#[test]
fn tardiness_refuses_irregular_tables() {
    let speeds = vec![1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9, 2.0];
    let mut costs = vec![1.0; speeds.len()];
    *costs.last_mut().unwrap() = 100.0;
    let mut inst = instance(
        vec![Job::new(0, 1, 1.0, EnergyCost::table(costs)).with_deadline(10.0)],
        speeds,
        Objective::Tardiness,
    );
    inst.speeds = SpeedSet::new(inst.speeds.speeds().to_vec(), 0.1).unwrap();
    assert!(matches!(
        saias_t(&inst, &solve_lp(&inst)),
        Err(Error::GrowthCondition { job: 0, .. })
    ));
}

#[test]
fn wrong_objective_is_rejected() {
    let inst = instance(
        vec![Job::new(0, 1, 1.0, EnergyCost::polynomial(1.0, 2.0))],
        vec![1.0],
        Objective::Completion,
    );
    let sol = solve_lp(&inst);
    assert!(matches!(saias_t(&inst, &sol), Err(Error::ObjectiveMismatch { .. })));
}

fn completion_config(seed: u64) -> GeneratorConfig {
    GeneratorConfig {
        energy: if seed.is_multiple_of(2) { EnergyKind::Polynomial } else { EnergyKind::Table },
        release_factor: if seed.is_multiple_of(3) { 0.5 } else { 0.0 },
        edge_density: 0.4,
        ..Default::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn alpha_data_invariants(seed in any::<u64>(), n in 1usize..7, m in 1usize..4, alpha in 0.05f64..0.95) {
        let inst = generate(seed, n, m, &completion_config(seed)).unwrap();
        let sol = solve_lp(&inst);
        let data = alpha_data(&sol, alpha, &inst.speeds).unwrap();
        for (i, a) in data.iter().enumerate() {
            prop_assert!((a.truncated_mass() - alpha).abs() <= 1e-9);
            prop_assert!((a.mu.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            prop_assert!(a.mu.iter().all(|&p| p >= 0.0));
            prop_assert!(a.alpha_speed >= inst.speeds.min() && a.alpha_speed <= inst.speeds.max());
            for (j, row) in a.truncated.iter().enumerate() {
                for (u, &v) in row.iter().enumerate() {
                    let x = sol.value(i, j, u + 1);
                    prop_assert!(v >= 0.0 && v <= x + 1e-15);
                    if u + 1 < a.interval {
                        prop_assert_eq!(v, x);
                    }
                }
            }
        }
        for &(b, c) in inst.precedence.edges() {
            prop_assert!(data[b].interval <= data[c].interval);
        }
        let later = alpha_intervals(&sol, (alpha + 0.04).min(0.99)).unwrap();
        for (a, l) in data.iter().zip(&later) {
            prop_assert!(a.interval <= *l);
        }
    }

    #[test]
    fn saias_schedules_are_feasible(seed in any::<u64>(), n in 1usize..7, m in 1usize..4) {
        let inst = generate(seed, n, m, &completion_config(seed)).unwrap();
        let trace = saias_traced(&inst, &solve_lp(&inst)).unwrap();
        prop_assert!(check_feasible(&inst, &trace.schedule).is_feasible());
        let position: Vec<usize> = {
            let mut p = vec![0; n];
            for (k, &i) in trace.order.iter().enumerate() { p[i] = k; }
            p
        };
        for (k, w) in trace.order.windows(2).enumerate() {
            prop_assert!(trace.jobs[w[0]].interval <= trace.jobs[w[1]].interval, "position {}", k);
        }
        for &(a, b) in inst.precedence.edges() {
            prop_assert!(position[a] < position[b]);
        }
    }

    #[test]
    fn saias_t_keeps_lp_on_time_jobs_on_time(seed in any::<u64>(), n in 1usize..6, m in 1usize..4) {
        let mut cfg = GeneratorConfig {
            objective: Objective::Tardiness,
            edge_density: 0.3,
            ..Default::default()
        };
        cfg.speed_headroom = cfg.tardiness_headroom() * 4.0;
        let inst = generate(seed, n, m, &cfg).unwrap();
        let sol = solve_lp(&inst);
        let trace = match saias_t_traced(&inst, &sol) {
            Ok(t) => t,
            Err(Error::SpeedOverflow { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        prop_assert!(check_feasible(&inst, &trace.schedule).is_feasible());
        let pre = trace.pre_rounding_completion.as_ref().unwrap();
        for (i, job) in inst.jobs.iter().enumerate() {
            prop_assert!(trace.schedule.jobs[i].completion <= pre[i] * (1.0 + 1e-9));
            if sol.fractional_tardiness(i, job.deadline) <= 1e-12
                && sol.fractional_completion(i) <= job.deadline
            {
                prop_assert!(pre[i] <= job.deadline * (1.0 + 1e-9));
                prop_assert!(trace.schedule.jobs[i].tardiness <= 1e-9);
            }
        }
    }
}
