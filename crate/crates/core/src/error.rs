use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("node id {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("edge ({u}, {v}) has weight {weight}, expected a value in (0, 1]")]
    InvalidWeight { u: usize, v: usize, weight: f64 },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("every node is isolated; nothing left to model")]
    EmptyModel,
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("opinion {value} at index {index} is outside [0, 1]")]
    OpinionOutOfRange { index: usize, value: f64 },
    #[error("I + L is not positive definite (numerical failure)")]
    NotPositiveDefinite,
    #[error("budget k = {k} exceeds node count {n}")]
    Budget { k: usize, n: usize },
    #[error("graph has {count} isolated node(s), first is {first}; remove them before running greedy")]
    IsolatedVertices { count: usize, first: usize },
    #[error("weighted-sum objective needs at least one edge")]
    NoEdges,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("exhaustive search needs {count} evaluations, limit is {limit}")]
    EnumerationTooLarge { count: f64, limit: f64 },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("no opinion given for node '{0}'")]
    MissingOpinion(String),
    #[error("opinion for node '{0}' given more than once")]
    DuplicateOpinion(String),
    #[error("opinion file names unknown node '{0}'")]
    UnknownNode(String),
    #[error("plan is inconsistent with the instance: {0}")]
    InconsistentPlan(String),
    #[error("{failures} of {checks} bound checks failed")]
    AuditFailed { failures: usize, checks: usize },
    #[error("budget {0} is not present in the sweep result")]
    MissingBudget(usize),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    File { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short stable tag used in machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NodeOutOfRange { .. }
            | Error::InvalidWeight { .. }
            | Error::SelfLoop(_)
            | Error::DuplicateEdge(..) => "graph",
            Error::EmptyModel | Error::IsolatedVertices { .. } | Error::NoEdges => "model",
            Error::LengthMismatch { .. } | Error::OpinionOutOfRange { .. } => "opinions",
            Error::NotPositiveDefinite => "numerics",
            Error::Budget { .. } | Error::EnumerationTooLarge { .. } => "budget",
            Error::InvalidParameter(_) | Error::Config(_) => "config",
            Error::Parse { .. }
            | Error::MissingOpinion(_)
            | Error::DuplicateOpinion(_)
            | Error::UnknownNode(_) => "parse",
            Error::InconsistentPlan(_) => "plan",
            Error::AuditFailed { .. } => "audit",
            Error::MissingBudget(_) => "table",
            Error::File { .. } | Error::Io(_) => "io",
            Error::Csv(_) | Error::Json(_) => "format",
        }
    }
}
