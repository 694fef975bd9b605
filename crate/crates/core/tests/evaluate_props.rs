use ecosched::energy::quantize_speed_range;
use ecosched::generate::{generate, GeneratorConfig};
use ecosched::{assemble, Objective};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn faster_speeds_never_add_tardiness(seed in any::<u64>(), n in 1usize..7, shift in 1usize..3) {
        let cfg = GeneratorConfig {
            objective: Objective::Tardiness,
            ..Default::default()
        };
        let mut inst = generate(seed, n, 1, &cfg).unwrap();
        // a ladder with exact doubling: moving every job up one index doubles all speeds
        inst.speeds = quantize_speed_range(1.0, 64.0, 1.0).unwrap();
        let order = inst.precedence.topological_order(n).unwrap();
        let base: Vec<usize> = (0..n).map(|i| (seed as usize >> i) % 3).collect();
        let speeds = |offset: usize| base.iter().map(|&j| inst.speeds.speed(j + offset)).collect();
        let slow = assemble(&inst, order.clone(), speeds(0)).unwrap();
        let fast = assemble(&inst, order, speeds(shift)).unwrap();
        prop_assert!(fast.cost.scheduling_total <= slow.cost.scheduling_total);
        for (a, b) in slow.jobs.iter().zip(&fast.jobs) {
            prop_assert!(b.completion <= a.completion);
        }
    }

    #[test]
    fn breakdown_adds_up(seed in any::<u64>(), n in 1usize..7, m in 1usize..4) {
        let inst = generate(seed, n, m, &GeneratorConfig { release_factor: 0.5, ..Default::default() }).unwrap();
        let order = inst.precedence.topological_order(n).unwrap();
        let speeds = (0..n).map(|i| inst.speeds.speed(i % m)).collect();
        let s = assemble(&inst, order, speeds).unwrap();
        prop_assert_eq!(s.cost.total, s.cost.energy_total + s.cost.scheduling_total);
        prop_assert!(s.cost.energy_total >= 0.0 && s.cost.scheduling_total >= 0.0);
    }
}
