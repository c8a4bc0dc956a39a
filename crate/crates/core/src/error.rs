use thiserror::Error;

use crate::model::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The document is not well formed (bad JSON, unknown keys, duplicate edges, dangling labels).
    #[error("schema error: {0}")]
    Schema(String),

    #[error("validation failed: {}", format_violations(.0))]
    Validation(Vec<Violation>),

    /// The undirected graph splits into several components; each is listed by its labels.
    #[error("network is not irreducible; components: {}", format_components(.components))]
    Irreducible { components: Vec<Vec<String>> },

    #[error("unknown state `{0}`")]
    UnknownState(String),

    #[error("{what} needs {needed} but the cap is {cap}; {advice}")]
    CapExceeded {
        what: &'static str,
        needed: u64,
        cap: u64,
        advice: &'static str,
    },

    #[error("no self-avoiding path from `{from}` to `{to}` carries positive heat")]
    NoPositivePath { from: String, to: String },

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("delta search did not converge: {0}")]
    NonConvergence(String),

    #[error("phi table inconsistent with heat on edge {a}-{b}: phi(a,b) - phi(b,a) = {diff}, q(a,b) = {heat}")]
    PhiInconsistent {
        a: String,
        b: String,
        diff: f64,
        heat: f64,
    },

    #[error("phi table incomplete: {0}")]
    PhiIncomplete(String),

    #[error("singular stationarity system")]
    SingularSystem,

    #[error("inconsistent trajectory: {0}")]
    InconsistentTrajectory(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the CLI (and mirrored by the C ABI error codes).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::CapExceeded { .. } | Error::NonConvergence(_) | Error::NoPositivePath { .. } => 2,
            Error::HypothesisViolated(_) => 3,
            Error::Internal(_) | Error::Io(_) | Error::SingularSystem => 4,
            _ => 1,
        }
    }
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

fn format_components(c: &[Vec<String>]) -> String {
    c.iter()
        .map(|c| format!("{{{}}}", c.join(",")))
        .collect::<Vec<_>>()
        .join(" ")
}
