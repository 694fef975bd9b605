//! Bounded-variable primal simplex on a dense tableau.
//!
//! Two phases: phase 1 minimizes the sum of artificial variables added to rows
//! that have no usable slack, phase 2 minimizes the real objective. Columns
//! satisfy `0 <= x_j <= u_j` (`u_j` may be infinite); nonbasic columns sit at
//! one of their bounds. Pricing is Dantzig's rule, switching to Bland's rule
//! after `3 * rows` consecutive degenerate pivots and back again on the first
//! pivot that makes progress.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    /// Sparse `(column, coefficient)` pairs.
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates this row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// `min c^T x` subject to `rows` and `0 <= x <= upper`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearProgram {
    pub costs: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Row>,
}

impl LinearProgram {
    pub fn num_columns(&self) -> usize {
        self.costs.len()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.costs.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest row or bound violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.rows.iter().map(|r| r.violation(x));
        let bounds = x
            .iter()
            .zip(&self.upper)
            .map(|(&v, &u)| (-v).max(v - u).max(0.0));
        rows.chain(bounds).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub feasibility_tolerance: f64,
    pub optimality_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            feasibility_tolerance: 1e-9,
            optimality_tolerance: 1e-9,
            max_iterations: 1_000_000,
        }
    }
}

pub const ENV_FEASIBILITY_TOL: &str = "ECOSCHED_FEASIBILITY_TOL";
pub const ENV_OPTIMALITY_TOL: &str = "ECOSCHED_OPTIMALITY_TOL";
pub const ENV_MAX_ITERATIONS: &str = "ECOSCHED_MAX_ITERATIONS";

impl SolverConfig {
    /// Defaults overridden by the `ECOSCHED_*` environment variables.
    pub fn from_env() -> Result<Self, String> {
        fn read<T: std::str::FromStr>(key: &str) -> Result<Option<T>, String> {
            match std::env::var(key) {
                Ok(v) => v
                    .trim()
                    .parse()
                    .map(Some)
                    .map_err(|_| format!("cannot parse {key}={v}")),
                Err(_) => Ok(None),
            }
        }
        let mut config = SolverConfig::default();
        if let Some(v) = read(ENV_FEASIBILITY_TOL)? {
            config.feasibility_tolerance = v;
        }
        if let Some(v) = read(ENV_OPTIMALITY_TOL)? {
            config.optimality_tolerance = v;
        }
        if let Some(v) = read(ENV_MAX_ITERATIONS)? {
            config.max_iterations = v;
        }
        config.check()?;
        Ok(config)
    }

    pub fn check(&self) -> Result<(), String> {
        if self.feasibility_tolerance > 0.0 && self.optimality_tolerance > 0.0 {
            Ok(())
        } else {
            Err("solver tolerances must be > 0".into())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Primal values of the structural columns (empty unless optimal).
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// Largest row/bound violation of `x`.
    pub max_residual: f64,
}

/// Anything that can solve a [`LinearProgram`] to optimality.
pub trait LpSolver: Sync {
    fn solve(&self, lp: &LinearProgram) -> SolveResult;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PrimalSimplex {
    pub config: SolverConfig,
}

impl PrimalSimplex {
    pub fn new(config: SolverConfig) -> Self {
        PrimalSimplex { config }
    }
}

impl LpSolver for PrimalSimplex {
    fn solve(&self, lp: &LinearProgram) -> SolveResult {
        Tableau::new(lp).run(lp, &self.config)
    }
}

const PIVOT_TOL: f64 = 1e-9;
const DRIVE_OUT_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColumnKind {
    Structural(usize),
    Slack,
    Artificial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pricing {
    Dantzig,
    Bland,
}

enum Phase {
    Done,
    Unbounded,
    IterationLimit,
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// `B^-1 A`, row-major.
    a: Vec<f64>,
    /// Sign-normalized `A` (rhs >= 0) for the final polish.
    original: Vec<f64>,
    rhs: Vec<f64>,
    /// Values of the basic variables.
    value: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    upper: Vec<f64>,
    at_upper: Vec<bool>,
    kind: Vec<ColumnKind>,
    cost: Vec<f64>,
    reduced: Vec<f64>,
    iterations: usize,
}

impl Tableau {
    fn new(lp: &LinearProgram) -> Self {
        let rows = lp.rows.len();
        // fixed-at-zero columns never enter the tableau
        let mut kind: Vec<ColumnKind> = (0..lp.num_columns())
            .filter(|&j| lp.upper[j] > 0.0)
            .map(ColumnKind::Structural)
            .collect();
        let mut structural_pos = vec![usize::MAX; lp.num_columns()];
        for (pos, k) in kind.iter().enumerate() {
            if let ColumnKind::Structural(j) = k {
                structural_pos[*j] = pos;
            }
        }

        let signs: Vec<f64> = lp
            .rows
            .iter()
            .map(|r| if r.rhs < 0.0 { -1.0 } else { 1.0 })
            .collect();
        let mut slack_of_row = vec![None; rows];
        for (i, r) in lp.rows.iter().enumerate() {
            let coef = match r.relation {
                Relation::Le => 1.0,
                Relation::Ge => -1.0,
                Relation::Eq => continue,
            };
            slack_of_row[i] = Some((kind.len(), coef * signs[i]));
            kind.push(ColumnKind::Slack);
        }
        let mut basis = vec![usize::MAX; rows];
        let mut artificial_of_row = vec![None; rows];
        for i in 0..rows {
            match slack_of_row[i] {
                Some((col, c)) if c > 0.0 => basis[i] = col,
                _ => {
                    artificial_of_row[i] = Some(kind.len());
                    basis[i] = kind.len();
                    kind.push(ColumnKind::Artificial);
                }
            }
        }
        let cols = kind.len();

        let mut a = vec![0.0; rows * cols];
        let mut rhs = vec![0.0; rows];
        for (i, r) in lp.rows.iter().enumerate() {
            let row = &mut a[i * cols..(i + 1) * cols];
            for &(j, coef) in &r.coeffs {
                let pos = structural_pos[j];
                if pos != usize::MAX {
                    row[pos] += coef * signs[i];
                }
            }
            if let Some((col, c)) = slack_of_row[i] {
                row[col] = c;
            }
            if let Some(col) = artificial_of_row[i] {
                row[col] = 1.0;
            }
            rhs[i] = r.rhs * signs[i];
        }

        let upper = kind
            .iter()
            .map(|k| match k {
                ColumnKind::Structural(j) => lp.upper[*j],
                _ => f64::INFINITY,
            })
            .collect();
        let mut is_basic = vec![false; cols];
        for &b in &basis {
            is_basic[b] = true;
        }

        Tableau {
            rows,
            cols,
            original: a.clone(),
            a,
            value: rhs.clone(),
            rhs,
            basis,
            is_basic,
            upper,
            at_upper: vec![false; cols],
            kind,
            cost: vec![0.0; cols],
            reduced: vec![0.0; cols],
            iterations: 0,
        }
    }

    fn run(mut self, lp: &LinearProgram, config: &SolverConfig) -> SolveResult {
        let has_artificials = self.kind.contains(&ColumnKind::Artificial);
        if has_artificials {
            let cost = self
                .kind
                .iter()
                .map(|k| if *k == ColumnKind::Artificial { 1.0 } else { 0.0 })
                .collect();
            self.set_costs(cost);
            match self.optimize(config) {
                Phase::Done => {}
                // phase 1 is bounded below by zero
                Phase::Unbounded => unreachable!("phase 1 objective is bounded"),
                Phase::IterationLimit => return self.failure(SolveStatus::IterationLimit),
            }
            let infeasibility: f64 = (0..self.rows)
                .filter(|&i| self.kind[self.basis[i]] == ColumnKind::Artificial)
                .map(|i| self.value[i])
                .sum();
            if infeasibility > config.feasibility_tolerance {
                return self.failure(SolveStatus::Infeasible);
            }
            self.drive_out_artificials();
        }

        let cost = self
            .kind
            .iter()
            .map(|k| match k {
                ColumnKind::Structural(j) => lp.costs[*j],
                _ => 0.0,
            })
            .collect();
        self.set_costs(cost);
        match self.optimize(config) {
            Phase::Done => {}
            Phase::Unbounded => return self.failure(SolveStatus::Unbounded),
            Phase::IterationLimit => return self.failure(SolveStatus::IterationLimit),
        }

        self.polish();
        let mut x = vec![0.0; lp.num_columns()];
        for col in 0..self.cols {
            if let ColumnKind::Structural(j) = self.kind[col] {
                x[j] = self.column_value(col);
            }
        }
        for (v, &u) in x.iter_mut().zip(&lp.upper) {
            if *v < 0.0 && *v > -config.feasibility_tolerance {
                *v = 0.0;
            }
            if *v > u && *v < u + config.feasibility_tolerance {
                *v = u;
            }
        }
        SolveResult {
            status: SolveStatus::Optimal,
            objective: lp.objective(&x),
            max_residual: lp.max_violation(&x),
            x,
            iterations: self.iterations,
        }
    }

    fn failure(&self, status: SolveStatus) -> SolveResult {
        SolveResult {
            status,
            x: Vec::new(),
            objective: f64::NAN,
            iterations: self.iterations,
            max_residual: f64::NAN,
        }
    }

    fn column_value(&self, col: usize) -> f64 {
        if self.is_basic[col] {
            let i = self.basis.iter().position(|&b| b == col).unwrap();
            self.value[i]
        } else if self.at_upper[col] {
            self.upper[col]
        } else {
            0.0
        }
    }

    fn set_costs(&mut self, cost: Vec<f64>) {
        self.cost = cost;
        self.reduced.copy_from_slice(&self.cost);
        for i in 0..self.rows {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.a[i * self.cols..(i + 1) * self.cols];
                for (d, &v) in self.reduced.iter_mut().zip(row) {
                    *d -= cb * v;
                }
            }
        }
        for &b in &self.basis {
            self.reduced[b] = 0.0;
        }
    }

    fn is_fixed(&self, col: usize) -> bool {
        self.upper[col] <= 0.0
    }

    fn choose_entering(&self, pricing: Pricing, tol: f64) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.cols {
            if self.is_basic[j] || self.is_fixed(j) {
                continue;
            }
            let d = self.reduced[j];
            let dir = if !self.at_upper[j] && d < -tol {
                1.0
            } else if self.at_upper[j] && d > tol {
                -1.0
            } else {
                continue;
            };
            match pricing {
                Pricing::Bland => return Some((j, dir)),
                Pricing::Dantzig => {
                    if d.abs() > best_score {
                        best_score = d.abs();
                        best = Some((j, dir));
                    }
                }
            }
        }
        best
    }

    fn optimize(&mut self, config: &SolverConfig) -> Phase {
        let mut pricing = Pricing::Dantzig;
        let mut degenerate_run = 0usize;
        let degenerate_limit = 3 * self.rows.max(1);
        loop {
            if self.iterations >= config.max_iterations {
                return Phase::IterationLimit;
            }
            let Some((e, dir)) = self.choose_entering(pricing, config.optimality_tolerance) else {
                return Phase::Done;
            };
            self.iterations += 1;

            // Ratio test: the entering column moves by `theta` in direction `dir`.
            let mut theta = self.upper[e];
            let mut leave: Option<(usize, bool)> = None;
            let mut leave_alpha = 0.0;
            for i in 0..self.rows {
                let alpha = dir * self.a[i * self.cols + e];
                let b = self.basis[i];
                let (limit, to_upper) = if alpha > PIVOT_TOL {
                    (self.value[i].max(0.0) / alpha, false)
                } else if alpha < -PIVOT_TOL && self.upper[b].is_finite() {
                    ((self.upper[b] - self.value[i]).max(0.0) / -alpha, true)
                } else {
                    continue;
                };
                let better = match leave {
                    _ if limit < theta - 1e-12 => true,
                    None => limit <= theta,
                    Some((r, _)) if limit <= theta + 1e-12 => match pricing {
                        Pricing::Dantzig => alpha.abs() > leave_alpha,
                        Pricing::Bland => b < self.basis[r],
                    },
                    _ => false,
                };
                if better {
                    theta = limit.min(theta);
                    leave = Some((i, to_upper));
                    leave_alpha = alpha.abs();
                }
            }
            if theta.is_infinite() {
                return Phase::Unbounded;
            }

            if theta > 1e-12 {
                for i in 0..self.rows {
                    let a_ie = self.a[i * self.cols + e];
                    if a_ie != 0.0 {
                        self.value[i] -= dir * theta * a_ie;
                    }
                }
                degenerate_run = 0;
                pricing = Pricing::Dantzig;
            } else {
                degenerate_run += 1;
                if degenerate_run >= degenerate_limit {
                    pricing = Pricing::Bland;
                }
            }

            let entering_value = if self.at_upper[e] {
                self.upper[e] - theta
            } else {
                theta
            };
            match leave {
                None => self.at_upper[e] = !self.at_upper[e],
                Some((r, to_upper)) => {
                    let out = self.basis[r];
                    self.at_upper[out] = to_upper;
                    self.at_upper[e] = false;
                    self.value[r] = entering_value;
                    self.pivot(r, e);
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let cols = self.cols;
        let piv = self.a[r * cols + e];
        {
            let row = &mut self.a[r * cols..(r + 1) * cols];
            for v in row.iter_mut() {
                *v /= piv;
            }
            row[e] = 1.0;
        }
        let pivot_row: Vec<f64> = self.a[r * cols..(r + 1) * cols].to_vec();
        let nonzero: Vec<usize> = (0..cols).filter(|&j| pivot_row[j] != 0.0).collect();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.a[i * cols + e];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.a[i * cols..(i + 1) * cols];
            for &j in &nonzero {
                row[j] -= f * pivot_row[j];
            }
            row[e] = 0.0;
        }
        let f = self.reduced[e];
        if f != 0.0 {
            for &j in &nonzero {
                self.reduced[j] -= f * pivot_row[j];
            }
            self.reduced[e] = 0.0;
        }
        let out = self.basis[r];
        self.is_basic[out] = false;
        self.is_basic[e] = true;
        self.basis[r] = e;
    }

    /// After phase 1: swap zero-valued basic artificials for real columns, and
    /// pin the rest (redundant rows) at zero.
    fn drive_out_artificials(&mut self) {
        for r in 0..self.rows {
            if self.kind[self.basis[r]] != ColumnKind::Artificial {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.cols {
                if self.is_basic[j] || self.kind[j] == ColumnKind::Artificial || self.is_fixed(j) {
                    continue;
                }
                let v = self.a[r * self.cols + j].abs();
                if v > DRIVE_OUT_TOL && best.is_none_or(|(_, b)| v > b) {
                    best = Some((j, v));
                }
            }
            if let Some((j, _)) = best {
                let out = self.basis[r];
                self.value[r] = if self.at_upper[j] { self.upper[j] } else { 0.0 };
                self.at_upper[j] = false;
                self.at_upper[out] = false;
                self.pivot(r, j);
            }
        }
        for col in 0..self.cols {
            if self.kind[col] == ColumnKind::Artificial {
                self.upper[col] = 0.0;
            }
        }
    }

    /// Recomputes basic values from the original matrix to shed pivoting drift.
    fn polish(&mut self) {
        if self.rows == 0 {
            return;
        }
        let m = self.rows;
        let mut rhs = DVector::from_vec(self.rhs.clone());
        for col in 0..self.cols {
            if !self.is_basic[col] && self.at_upper[col] {
                let u = self.upper[col];
                for i in 0..m {
                    rhs[i] -= self.original[i * self.cols + col] * u;
                }
            }
        }
        let b = DMatrix::from_fn(m, m, |i, k| self.original[i * self.cols + self.basis[k]]);
        if let Some(sol) = b.lu().solve(&rhs) {
            let drift = sol
                .iter()
                .zip(&self.value)
                .map(|(s, v)| (s - v).abs())
                .fold(0.0, f64::max);
            if sol.iter().all(|v| v.is_finite()) && drift < 1e-6 {
                self.value.copy_from_slice(sol.as_slice());
            }
        }
    }
}
