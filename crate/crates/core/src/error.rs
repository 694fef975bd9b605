use std::path::PathBuf;

use thiserror::Error;

use crate::evaluate::FeasibilityReport;
use crate::instance::ValidationReport;
use crate::simplex::SolveStatus;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at `{field}` (line {line}, column {column}): {message}")]
    Parse {
        field: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid instance: {0}")]
    Invalid(ValidationReport),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("objective mismatch: expected {expected}, instance declares {found}")]
    ObjectiveMismatch { expected: String, found: String },

    #[error("grid does not match instance: {0}")]
    GridMismatch(String),

    #[error("horizon too short: every column of job {job} is fixed to zero")]
    HorizonTooShort { job: usize },

    #[error("time {time} outside grid range [{min}, {max}]")]
    TimeOutOfRange { time: f64, min: f64, max: f64 },

    #[error("speed {speed} outside tabulated range [{min}, {max}]")]
    SpeedOutOfRange { speed: f64, min: f64, max: f64 },

    #[error("invalid speed range: [{min}, {max}] with delta {delta}")]
    InvalidSpeedRange { min: f64, max: f64, delta: f64 },

    #[error("LP solver finished with status {0:?}")]
    Solver(SolveStatus),

    #[error("corrupt LP solution: job {job} has total mass {mass} below alpha {alpha}")]
    CorruptSolution { job: usize, mass: f64, alpha: f64 },

    #[error("alpha-interval order violates precedence {before} -> {after}")]
    PrecedenceViolation { before: usize, after: usize },

    #[error(
        "speed set cannot realize gamma-scaled speed {required} for job {job} \
         (max speed {max}); extend S"
    )]
    SpeedOverflow { job: usize, required: f64, max: f64 },

    #[error("energy cost of job {job} fails the growth regularity check for beta {beta}")]
    GrowthCondition { job: usize, beta: f64 },

    #[error("instance too large for brute force: n={n} (cap {max_n}), m={m} (cap {max_m})")]
    OracleTooLarge {
        n: usize,
        m: usize,
        max_n: usize,
        max_m: usize,
    },

    #[error("special-case ordering does not apply: {0}")]
    NotSpecialCase(String),

    #[error("infeasible schedule: {0}")]
    InfeasibleSchedule(FeasibilityReport),
}
