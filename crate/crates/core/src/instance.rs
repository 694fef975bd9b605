//! Problem instances: jobs, the machine's speed set, precedence constraints
//! and the algorithm parameters that travel with them.

use std::collections::BinaryHeap;
use std::cmp::Reverse;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::energy::{EnergyCost, JobEnergy};
use crate::error::{Error, Result};

const SPACING_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    /// Weighted completion time plus energy.
    #[serde(alias = "completion_time")]
    Completion,
    /// Weighted tardiness plus energy.
    Tardiness,
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Objective::Completion => f.write_str("completion"),
            Objective::Tardiness => f.write_str("tardiness"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Job {
    pub id: usize,
    /// Processing requirement in machine cycles.
    pub rho: i64,
    pub weight: f64,
    #[serde(default)]
    pub release: f64,
    /// Only read by the tardiness objective.
    #[serde(default)]
    pub deadline: f64,
    pub energy: EnergyCost,
}

impl Job {
    pub fn new(id: usize, rho: i64, weight: f64, energy: EnergyCost) -> Self {
        Job {
            id,
            rho,
            weight,
            release: 0.0,
            deadline: 0.0,
            energy,
        }
    }

    pub fn with_release(mut self, release: f64) -> Self {
        self.release = release;
        self
    }

    pub fn with_deadline(mut self, deadline: f64) -> Self {
        self.deadline = deadline;
        self
    }

    pub fn work(&self) -> f64 {
        self.rho as f64
    }
}

/// Strictly increasing machine speeds with geometric spacing at most `1 + delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedSet {
    speeds: Vec<f64>,
    delta: f64,
}

impl SpeedSet {
    pub fn new(speeds: Vec<f64>, delta: f64) -> Result<Self> {
        let set = SpeedSet { speeds, delta };
        let issues = set.validate();
        if issues.is_empty() {
            Ok(set)
        } else {
            Err(Error::Invalid(ValidationReport { violations: issues }))
        }
    }

    pub(crate) fn new_unchecked(speeds: Vec<f64>, delta: f64) -> Self {
        SpeedSet { speeds, delta }
    }

    pub fn speeds(&self) -> &[f64] {
        &self.speeds
    }

    pub fn speed(&self, j: usize) -> f64 {
        self.speeds[j]
    }

    pub fn len(&self) -> usize {
        self.speeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.speeds.is_empty()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn min(&self) -> f64 {
        self.speeds[0]
    }

    pub fn max(&self) -> f64 {
        *self.speeds.last().expect("non-empty speed set")
    }

    /// Index of an exact member, tolerating round-off of 1e-12 relative.
    pub fn index_of(&self, speed: f64) -> Option<usize> {
        self.speeds
            .iter()
            .position(|&s| (s - speed).abs() <= 1e-12 * s.max(speed.abs()))
    }

    /// Appends `(1 + delta)` steps until the top speed reaches `target`.
    pub fn extended_to(&self, target: f64) -> SpeedSet {
        let mut speeds = self.speeds.clone();
        let mut top = self.max();
        while top < target {
            top *= 1.0 + self.delta;
            speeds.push(top);
        }
        SpeedSet::new_unchecked(speeds, self.delta)
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.speeds.is_empty() {
            out.push(Violation::SpeedSet("speed set is empty".into()));
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            out.push(Violation::SpeedSet(format!("delta must be > 0, got {}", self.delta)));
        }
        if let Some(s) = self.speeds.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            out.push(Violation::SpeedSet(format!("speeds must be > 0, got {s}")));
        }
        for (j, w) in self.speeds.windows(2).enumerate() {
            if w[1] <= w[0] {
                out.push(Violation::SpeedSet(format!(
                    "speeds must be strictly increasing at index {}",
                    j + 1
                )));
            } else if w[1] > (1.0 + self.delta) * w[0] * (1.0 + SPACING_TOL) {
                out.push(Violation::Spacing {
                    index: j + 1,
                    lower: w[0],
                    upper: w[1],
                    delta: self.delta,
                });
            }
        }
        out
    }
}

/// Precedence constraints; an edge `(a, b)` means job `a` precedes job `b`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PrecedenceDag {
    edges: Vec<(usize, usize)>,
}

impl PrecedenceDag {
    pub fn new(edges: Vec<(usize, usize)>) -> Self {
        PrecedenceDag { edges }
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Kahn's algorithm with smallest-id-first tie-breaking. `None` on a cycle.
    pub fn topological_order(&self, n: usize) -> Option<Vec<usize>> {
        let mut indegree = vec![0usize; n];
        let mut succ = vec![Vec::new(); n];
        for &(a, b) in &self.edges {
            succ[a].push(b);
            indegree[b] += 1;
        }
        let mut ready: BinaryHeap<Reverse<usize>> =
            (0..n).filter(|&i| indegree[i] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse(i)) = ready.pop() {
            order.push(i);
            for &k in &succ[i] {
                indegree[k] -= 1;
                if indegree[k] == 0 {
                    ready.push(Reverse(k));
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// `preds[b]` is a bitmask of the direct predecessors of `b` (n <= 64).
    pub(crate) fn predecessor_masks(&self, n: usize) -> Vec<u64> {
        let mut masks = vec![0u64; n];
        for &(a, b) in &self.edges {
            masks[b] |= 1 << a;
        }
        masks
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoJobs,
    JobId { index: usize, id: usize },
    Job { job: usize, reason: String },
    SpeedSet(String),
    Spacing {
        index: usize,
        lower: f64,
        upper: f64,
        delta: f64,
    },
    EdgeEndpoint { from: usize, to: usize },
    Cycle,
    TardinessRelease { job: usize },
    Alpha(f64),
    Epsilon(f64),
    Beta(f64),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoJobs => write!(f, "instance has no jobs"),
            Violation::JobId { index, id } => {
                write!(f, "job at position {index} has id {id}; ids must equal positions")
            }
            Violation::Job { job, reason } => write!(f, "job {job}: {reason}"),
            Violation::SpeedSet(reason) => write!(f, "speed set: {reason}"),
            Violation::Spacing {
                index,
                lower,
                upper,
                delta,
            } => write!(
                f,
                "speed spacing: speed {index} = {upper} exceeds (1 + {delta}) * {lower}"
            ),
            Violation::EdgeEndpoint { from, to } => {
                write!(f, "precedence edge ({from}, {to}) references an unknown job")
            }
            Violation::Cycle => write!(f, "precedence graph contains a cycle"),
            Violation::TardinessRelease { job } => write!(
                f,
                "job {job}: release dates must be 0 under the tardiness objective"
            ),
            Violation::Alpha(a) => write!(f, "alpha must lie in (0, 1), got {a}"),
            Violation::Epsilon(e) => write!(f, "epsilon must be > 0, got {e}"),
            Violation::Beta(b) => write!(f, "beta must be >= 2, got {b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "InstanceFile", into = "InstanceFile")]
pub struct Instance {
    pub jobs: Vec<Job>,
    pub speeds: SpeedSet,
    pub precedence: PrecedenceDag,
    pub objective: Objective,
    /// `None` selects the default for the objective and release pattern.
    pub alpha: Option<f64>,
    pub epsilon: f64,
    pub beta: f64,
}

/// On-disk layout of an instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    jobs: Vec<Job>,
    speeds: Vec<f64>,
    delta: f64,
    #[serde(default)]
    edges: Vec<(usize, usize)>,
    objective: Objective,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    epsilon: f64,
    beta: f64,
}

impl From<InstanceFile> for Instance {
    fn from(f: InstanceFile) -> Self {
        Instance {
            jobs: f.jobs,
            speeds: SpeedSet::new_unchecked(f.speeds, f.delta),
            precedence: PrecedenceDag::new(f.edges),
            objective: f.objective,
            alpha: f.alpha,
            epsilon: f.epsilon,
            beta: f.beta,
        }
    }
}

impl From<Instance> for InstanceFile {
    fn from(i: Instance) -> Self {
        InstanceFile {
            jobs: i.jobs,
            speeds: i.speeds.speeds,
            delta: i.speeds.delta,
            edges: i.precedence.edges,
            objective: i.objective,
            alpha: i.alpha,
            epsilon: i.epsilon,
            beta: i.beta,
        }
    }
}

impl Instance {
    pub fn n(&self) -> usize {
        self.jobs.len()
    }

    pub fn m(&self) -> usize {
        self.speeds.len()
    }

    pub fn delta(&self) -> f64 {
        self.speeds.delta()
    }

    pub fn has_releases(&self) -> bool {
        self.jobs.iter().any(|j| j.release > 0.0)
    }

    /// Explicit alpha, or the default: `sqrt(2) - 1` for completion time with
    /// release dates and `1/2` otherwise.
    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or_else(|| default_alpha(self.objective, self.has_releases()))
    }

    pub fn job_energy(&self, i: usize) -> JobEnergy {
        let job = &self.jobs[i];
        JobEnergy::new(&job.energy, job.work(), &self.speeds)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut v = Vec::new();
        let n = self.n();
        if n == 0 {
            v.push(Violation::NoJobs);
        }
        if n > 64 {
            v.push(Violation::Job {
                job: 64,
                reason: "at most 64 jobs are supported".into(),
            });
        }
        for (index, job) in self.jobs.iter().enumerate() {
            if job.id != index {
                v.push(Violation::JobId { index, id: job.id });
            }
            let mut bad = |reason: String| v.push(Violation::Job { job: index, reason });
            if job.rho < 1 {
                bad(format!("rho must be a positive integer, got {}", job.rho));
            }
            if !(job.weight.is_finite() && job.weight > 0.0) {
                bad(format!("weight must be > 0, got {}", job.weight));
            }
            if !(job.release.is_finite() && job.release >= 0.0) {
                bad(format!("release must be >= 0, got {}", job.release));
            }
            if !(job.deadline.is_finite() && job.deadline >= 0.0) {
                bad(format!("deadline must be >= 0, got {}", job.deadline));
            }
            for reason in job.energy.violations(self.m()) {
                bad(reason);
            }
            if self.objective == Objective::Tardiness && job.release != 0.0 {
                v.push(Violation::TardinessRelease { job: index });
            }
        }
        v.extend(self.speeds.validate());

        let mut endpoints_ok = true;
        for &(a, b) in self.precedence.edges() {
            if a >= n || b >= n {
                v.push(Violation::EdgeEndpoint { from: a, to: b });
                endpoints_ok = false;
            }
        }
        if endpoints_ok && self.precedence.topological_order(n).is_none() {
            v.push(Violation::Cycle);
        }

        if let Some(a) = self.alpha {
            if !(a > 0.0 && a < 1.0) {
                v.push(Violation::Alpha(a));
            }
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            v.push(Violation::Epsilon(self.epsilon));
        }
        if !(self.beta.is_finite() && self.beta >= 2.0) {
            v.push(Violation::Beta(self.beta));
        }
        ValidationReport { violations: v }
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::Invalid(report))
        }
    }

    /// Parses and validates an instance document.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let instance: Instance = serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner();
            Error::Parse {
                field,
                line: inner.line(),
                column: inner.column(),
                message: inner.to_string(),
            }
        })?;
        instance.ensure_valid()?;
        Ok(instance)
    }

    pub fn to_json_string(&self, pretty: bool) -> String {
        let out = if pretty {
            serde_json::to_string_pretty(self)
        } else {
            serde_json::to_string(self)
        };
        out.expect("instance serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json_string(true) + "\n").map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

pub fn default_alpha(objective: Objective, has_releases: bool) -> f64 {
    match objective {
        Objective::Completion if has_releases => std::f64::consts::SQRT_2 - 1.0,
        _ => 0.5,
    }
}
