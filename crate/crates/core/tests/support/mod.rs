//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use ecosched::simplex::{LinearProgram, Relation, Row};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Minimum of `lp` by enumerating every basic solution: each choice of
/// `n` active constraints (rows as equalities, or a column at one of its
/// bounds) that pins a unique point. Needs finite upper bounds so that the
/// feasible region is a polytope. `None` means infeasible.
pub fn vertex_enumeration(lp: &LinearProgram) -> Option<f64> {
    let n = lp.num_columns();
    assert!(lp.upper.iter().all(|u| u.is_finite()));
    // every candidate hyperplane as (coefficients, rhs)
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut mandatory = Vec::new();
    for row in &lp.rows {
        let mut a = vec![0.0; n];
        for &(j, c) in &row.coeffs {
            a[j] += c;
        }
        if row.relation == Relation::Eq {
            mandatory.push(planes.len());
        }
        planes.push((a, row.rhs));
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), 0.0));
        planes.push((e, lp.upper[j]));
    }

    let mut best: Option<f64> = None;
    let mut chosen = Vec::with_capacity(n);
    enumerate(&planes, &mandatory, 0, n, &mut chosen, &mut |set| {
        let a = DMatrix::from_fn(n, n, |r, c| planes[set[r]].0[c]);
        let b = DVector::from_fn(n, |r, _| planes[set[r]].1);
        let lu = a.lu();
        if lu.determinant().abs() < 1e-9 {
            return;
        }
        let Some(x) = lu.solve(&b) else { return };
        let x: Vec<f64> = x.iter().copied().collect();
        if lp.max_violation(&x) <= 1e-9 {
            let obj = lp.objective(&x);
            if best.is_none_or(|b| obj < b) {
                best = Some(obj);
            }
        }
    });
    best
}

fn enumerate(
    planes: &[(Vec<f64>, f64)],
    mandatory: &[usize],
    from: usize,
    n: usize,
    chosen: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]),
) {
    if chosen.len() == n {
        if mandatory.iter().all(|m| chosen.contains(m)) {
            visit(chosen);
        }
        return;
    }
    for p in from..planes.len() {
        chosen.push(p);
        enumerate(planes, mandatory, p + 1, n, chosen, visit);
        chosen.pop();
    }
}

/// Random LP with 1-4 bounded columns and 1-3 rows of small integers.
pub fn random_lp(seed: u64) -> LinearProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=4);
    let rows = rng.random_range(1..=3);
    LinearProgram {
        costs: (0..n).map(|_| rng.random_range(-5..=5) as f64).collect(),
        upper: (0..n).map(|_| [1.0, 2.0, 3.0, 5.0][rng.random_range(0..4)]).collect(),
        rows: (0..rows)
            .map(|_| Row {
                coeffs: (0..n)
                    .map(|j| (j, rng.random_range(-3..=3) as f64))
                    .filter(|&(_, c)| c != 0.0)
                    .collect(),
                relation: [Relation::Le, Relation::Ge, Relation::Eq][rng.random_range(0..3)],
                rhs: rng.random_range(-5..=5) as f64,
            })
            .collect(),
    }
}

/// `min_s a s^p + b / s` over `s > 0` by golden-section search on `ln s`.
pub fn minimize_speed_cost(a: f64, p: f64, b: f64) -> f64 {
    let f = |ln_s: f64| {
        let s = ln_s.exp();
        a * s.powf(p) + b / s
    };
    let (mut lo, mut hi) = (-30.0f64, 30.0f64);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..300 {
        let m1 = hi - ratio * (hi - lo);
        let m2 = lo + ratio * (hi - lo);
        if f(m1) < f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    f((lo + hi) / 2.0)
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    loop {
        out.push(current.clone());
        let Some(k) = (0..n.saturating_sub(1)).rev().find(|&k| current[k] < current[k + 1]) else {
            return out;
        };
        let l = (k + 1..n).rev().find(|&l| current[k] < current[l]).unwrap();
        current.swap(k, l);
        current[k + 1..].reverse();
    }
}
