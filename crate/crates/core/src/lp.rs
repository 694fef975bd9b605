//! Interval- and speed-indexed LP relaxation.
//!
//! Column `x_{ijt}` is the fraction of job `i` that runs at speed `sigma_j`
//! and completes in interval `t`. Rows, in order:
//!
//! * one assignment equality per job: `sum_{j,t} x_{ijt} = 1`;
//! * one capacity row per interval: `sum_{i,j,u<=t} (rho_i / sigma_j) x_{iju} <= tau_t`;
//! * one row per precedence edge `a -> b` and interval `t`:
//!   `sum_{j,u<=t} x_{aju} - sum_{j,u<=t} x_{bju} >= 0`.
//!
//! Columns whose interval ends before `r_i + rho_i / sigma_j` stay in the
//! model with upper bound 0.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::instance::{Instance, Objective, ValidationReport, Violation};
use crate::simplex::{LinearProgram, LpSolver, Relation, Row, SolveStatus};
use crate::timegrid::TimeGrid;

/// Dense bijection `(i, j, t) <-> column`, with `t` in `1..=T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarIndex {
    pub jobs: usize,
    pub speeds: usize,
    pub intervals: usize,
}

impl VarIndex {
    pub fn len(&self) -> usize {
        self.jobs * self.speeds * self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn column(&self, i: usize, j: usize, t: usize) -> usize {
        debug_assert!(i < self.jobs && j < self.speeds && (1..=self.intervals).contains(&t));
        (i * self.speeds + j) * self.intervals + (t - 1)
    }

    pub fn triple(&self, column: usize) -> (usize, usize, usize) {
        let t = column % self.intervals + 1;
        let rest = column / self.intervals;
        (rest / self.speeds, rest % self.speeds, t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Assignment(usize),
    Capacity(usize),
    Precedence { before: usize, after: usize, t: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpModel {
    pub program: LinearProgram,
    pub index: VarIndex,
    pub row_kinds: Vec<RowKind>,
    pub objective: Objective,
    pub grid: TimeGrid,
}

/// Tolerant version of `tau_t >= r + rho / sigma`, so that a job finishing
/// exactly on a boundary is not excluded by rounding in the boundary.
fn fits(tau: f64, earliest: f64) -> bool {
    tau >= earliest * (1.0 - 1e-12)
}

fn check_grid(instance: &Instance, grid: &TimeGrid) -> Result<()> {
    let rho_min = instance.jobs.iter().map(|j| j.work()).fold(f64::INFINITY, f64::min);
    let kappa = rho_min / instance.speeds.max();
    if (grid.kappa() - kappa).abs() > 1e-12 * kappa {
        return Err(Error::GridMismatch(format!(
            "grid kappa {} differs from instance kappa {kappa}",
            grid.kappa()
        )));
    }
    Ok(())
}

fn build(instance: &Instance, grid: &TimeGrid, objective: Objective) -> Result<LpModel> {
    check_grid(instance, grid)?;
    let n = instance.n();
    let m = instance.m();
    let big_t = grid.horizon_index();
    let index = VarIndex {
        jobs: n,
        speeds: m,
        intervals: big_t,
    };

    let mut costs = vec![0.0; index.len()];
    let mut upper = vec![0.0; index.len()];
    for (i, job) in instance.jobs.iter().enumerate() {
        let energy = instance.job_energy(i);
        let mut open = false;
        for j in 0..m {
            let e = energy.at_grid(&instance.speeds, j);
            let earliest = job.release + job.work() / instance.speeds.speed(j);
            for t in 1..=big_t {
                let col = index.column(i, j, t);
                let lower = grid.lower(t);
                costs[col] = e + match objective {
                    Objective::Completion => job.weight * lower,
                    Objective::Tardiness => job.weight * (lower - job.deadline).max(0.0),
                };
                if fits(grid.tau(t), earliest) {
                    upper[col] = 1.0;
                    open = true;
                }
            }
        }
        if !open {
            return Err(Error::HorizonTooShort { job: i });
        }
    }

    let mut rows = Vec::with_capacity(n + big_t * (1 + instance.precedence.edges().len()));
    let mut row_kinds = Vec::with_capacity(rows.capacity());
    for i in 0..n {
        let coeffs = (0..m)
            .flat_map(|j| (1..=big_t).map(move |t| (index.column(i, j, t), 1.0)))
            .collect();
        rows.push(Row {
            coeffs,
            relation: Relation::Eq,
            rhs: 1.0,
        });
        row_kinds.push(RowKind::Assignment(i));
    }
    for t in 1..=big_t {
        let mut coeffs = Vec::with_capacity(n * m * t);
        for (i, job) in instance.jobs.iter().enumerate() {
            for j in 0..m {
                let p = job.work() / instance.speeds.speed(j);
                coeffs.extend((1..=t).map(|u| (index.column(i, j, u), p)));
            }
        }
        rows.push(Row {
            coeffs,
            relation: Relation::Le,
            rhs: grid.tau(t),
        });
        row_kinds.push(RowKind::Capacity(t));
    }
    for &(a, b) in instance.precedence.edges() {
        for t in 1..=big_t {
            let mut coeffs = Vec::with_capacity(2 * m * t);
            for j in 0..m {
                coeffs.extend((1..=t).map(|u| (index.column(a, j, u), 1.0)));
                coeffs.extend((1..=t).map(|u| (index.column(b, j, u), -1.0)));
            }
            rows.push(Row {
                coeffs,
                relation: Relation::Ge,
                rhs: 0.0,
            });
            row_kinds.push(RowKind::Precedence {
                before: a,
                after: b,
                t,
            });
        }
    }

    Ok(LpModel {
        program: LinearProgram { costs, upper, rows },
        index,
        row_kinds,
        objective,
        grid: grid.clone(),
    })
}

fn expect_objective(instance: &Instance, expected: Objective) -> Result<()> {
    if instance.objective == expected {
        Ok(())
    } else {
        Err(Error::ObjectiveMismatch {
            expected: expected.to_string(),
            found: instance.objective.to_string(),
        })
    }
}

/// LP whose objective charges `E_i(sigma_j) + w_i tau_{t-1}`.
pub fn build_completion_lp(instance: &Instance, grid: &TimeGrid) -> Result<LpModel> {
    expect_objective(instance, Objective::Completion)?;
    build(instance, grid, Objective::Completion)
}

/// LP whose objective charges `E_i(sigma_j) + w_i (tau_{t-1} - d_i)^+`.
pub fn build_tardiness_lp(instance: &Instance, grid: &TimeGrid) -> Result<LpModel> {
    expect_objective(instance, Objective::Tardiness)?;
    let released: Vec<Violation> = instance
        .jobs
        .iter()
        .filter(|j| j.release != 0.0)
        .map(|j| Violation::TardinessRelease { job: j.id })
        .collect();
    if !released.is_empty() {
        return Err(Error::Invalid(ValidationReport {
            violations: released,
        }));
    }
    build(instance, grid, Objective::Tardiness)
}

/// Builds the formulation matching the instance's declared objective.
pub fn build_lp(instance: &Instance, grid: &TimeGrid) -> Result<LpModel> {
    match instance.objective {
        Objective::Completion => build_completion_lp(instance, grid),
        Objective::Tardiness => build_tardiness_lp(instance, grid),
    }
}

impl LpModel {
    pub fn num_rows(&self) -> usize {
        self.program.rows.len()
    }

    pub fn num_columns(&self) -> usize {
        self.program.num_columns()
    }

    /// The same model without precedence rows.
    pub fn relax_precedence(&self) -> LpModel {
        let mut out = self.clone();
        let keep: Vec<bool> = self
            .row_kinds
            .iter()
            .map(|k| !matches!(k, RowKind::Precedence { .. }))
            .collect();
        let mut it = keep.iter();
        out.program.rows.retain(|_| *it.next().unwrap());
        out.row_kinds.retain(|k| !matches!(k, RowKind::Precedence { .. }));
        out
    }

    pub fn solve(&self, solver: &dyn LpSolver) -> Result<LpSolution> {
        let result = solver.solve(&self.program);
        if result.status != SolveStatus::Optimal {
            return Err(Error::Solver(result.status));
        }
        Ok(LpSolution {
            x: result.x,
            objective_value: result.objective,
            max_residual: result.max_residual,
            iterations: result.iterations,
            index: self.index,
            grid: self.grid.clone(),
        })
    }

    fn column_name(&self, col: usize) -> String {
        let (i, j, t) = self.index.triple(col);
        format!("x_{i}_{j}_{t}")
    }

    fn row_name(&self, r: usize) -> String {
        match self.row_kinds[r] {
            RowKind::Assignment(i) => format!("assign_{i}"),
            RowKind::Capacity(t) => format!("cap_{t}"),
            RowKind::Precedence { before, after, t } => format!("prec_{before}_{after}_{t}"),
        }
    }

    /// CPLEX-style LP text, one line per row.
    pub fn to_lp_text(&self) -> String {
        fn term(out: &mut String, coef: f64, name: &str, first: bool) {
            if first {
                let _ = write!(out, "{coef:?} {name}");
            } else if coef < 0.0 {
                let _ = write!(out, " - {:?} {name}", -coef);
            } else {
                let _ = write!(out, " + {coef:?} {name}");
            }
        }
        let mut out = String::new();
        let _ = writeln!(out, "\\ objective: {}", self.objective);
        let _ = writeln!(
            out,
            "\\ grid: kappa = {:?}, epsilon = {:?}, T = {}",
            self.grid.kappa(),
            self.grid.epsilon(),
            self.grid.horizon_index()
        );
        let _ = writeln!(out, "\\ tau = {:?}", self.grid.boundaries());
        out.push_str("Minimize\n obj:");
        for (col, &c) in self.program.costs.iter().enumerate() {
            term(&mut out, c, &self.column_name(col), col == 0);
            out.push(' ');
        }
        out.push_str("\nSubject To\n");
        for (r, row) in self.program.rows.iter().enumerate() {
            let _ = write!(out, " {}: ", self.row_name(r));
            for (k, &(col, coef)) in row.coeffs.iter().enumerate() {
                term(&mut out, coef, &self.column_name(col), k == 0);
            }
            let rel = match row.relation {
                Relation::Le => "<=",
                Relation::Ge => ">=",
                Relation::Eq => "=",
            };
            let _ = writeln!(out, " {rel} {:?}", row.rhs);
        }
        out.push_str("Bounds\n");
        for (col, &u) in self.program.upper.iter().enumerate() {
            let name = self.column_name(col);
            if u == 0.0 {
                let _ = writeln!(out, " {name} = 0");
            } else {
                let _ = writeln!(out, " 0 <= {name} <= {u:?}");
            }
        }
        out.push_str("End\n");
        out
    }
}

/// Optimal fractional assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective_value: f64,
    pub max_residual: f64,
    pub iterations: usize,
    pub index: VarIndex,
    pub grid: TimeGrid,
}

impl LpSolution {
    pub fn value(&self, i: usize, j: usize, t: usize) -> f64 {
        self.x[self.index.column(i, j, t)]
    }

    /// The LP optimum, a lower bound on the cost of every feasible schedule.
    pub fn lower_bound(&self) -> f64 {
        self.objective_value
    }

    pub fn job_mass(&self, i: usize) -> f64 {
        let range = self.job_columns(i);
        self.x[range].iter().sum()
    }

    /// Mass of job `i` completing in interval `t`, over all speeds.
    pub fn interval_mass(&self, i: usize, t: usize) -> f64 {
        (0..self.index.speeds).map(|j| self.value(i, j, t)).sum()
    }

    /// `sum_{j,t} tau_{t-1} x_{ijt}`.
    pub fn fractional_completion(&self, i: usize) -> f64 {
        let mut total = 0.0;
        for j in 0..self.index.speeds {
            for t in 1..=self.index.intervals {
                total += self.grid.lower(t) * self.value(i, j, t);
            }
        }
        total
    }

    /// `sum_{j,t} (tau_{t-1} - d)^+ x_{ijt}`, the job's unweighted LP tardiness.
    pub fn fractional_tardiness(&self, i: usize, deadline: f64) -> f64 {
        let mut total = 0.0;
        for j in 0..self.index.speeds {
            for t in 1..=self.index.intervals {
                total += (self.grid.lower(t) - deadline).max(0.0) * self.value(i, j, t);
            }
        }
        total
    }

    fn job_columns(&self, i: usize) -> std::ops::Range<usize> {
        let width = self.index.speeds * self.index.intervals;
        i * width..(i + 1) * width
    }
}
