//! Energy-aware single-machine scheduling.
//!
//! Jobs with processing requirements, weights, release dates, deadlines and
//! per-job energy costs run non-preemptively on one machine whose speed is
//! picked per job from a finite speed set. The crate builds an
//! interval-indexed LP relaxation, solves it with an embedded simplex,
//! rounds the fractional solution into a schedule using alpha-intervals and
//! alpha-speeds, and evaluates the result against the LP bound or an exact
//! brute-force optimum.
//!
//! ```
//! use ecosched::{generate, pipeline, GeneratorConfig, PipelineOptions};
//!
//! let instance = generate(7, 4, 2, &GeneratorConfig::default()).unwrap();
//! let report = pipeline::solve(&instance, &PipelineOptions::default()).unwrap();
//! assert!(report.feasible);
//! assert!(report.ratio.ratio_vs_lp >= 1.0 - 1e-9);
//! ```

pub mod energy;
pub mod error;
pub mod evaluate;
pub mod generate;
pub mod instance;
pub mod lp;
pub mod oracle;
pub mod pipeline;
pub mod rounding;
pub mod simplex;
pub mod timegrid;

pub use energy::{convexify, ConvexEnvelope, EnergyCost, JobEnergy};
pub use error::{Error, Result};
pub use evaluate::{assemble, check_feasible, cost, CostBreakdown, FeasibilityReport, Schedule, ScheduledJob};
pub use generate::{generate, EnergyKind, GeneratorConfig};
pub use instance::{Instance, Job, Objective, PrecedenceDag, SpeedSet};
pub use lp::{build_completion_lp, build_lp, build_tardiness_lp, LpModel, LpSolution};
pub use oracle::{brute_force, ExactResult, OracleLimits};
pub use pipeline::{PipelineOptions, RatioEntry, SolveReport};
pub use rounding::{saias, saias_t};
pub use simplex::{LinearProgram, LpSolver, PrimalSimplex, SolveResult, SolveStatus, SolverConfig};
pub use timegrid::TimeGrid;
