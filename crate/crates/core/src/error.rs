use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Document could not be parsed at all.
    #[error("parse error: {0}")]
    Parse(String),

    /// A document parsed but violates an invariant; `path` locates the offending field.
    #[error("invalid {path}: {msg}")]
    Invalid { path: String, msg: String },

    #[error("graph is disconnected: {0} unreachable from {1}")]
    Disconnected(String, String),

    #[error("unknown waypoint '{0}'")]
    UnknownWaypoint(String),

    #[error("unknown time-slot '{0}'")]
    UnknownSlot(String),

    #[error("candidate rate {candidate} Hz is below the Nyquist bound {bound} Hz")]
    BelowNyquist { candidate: f64, bound: f64 },

    #[error("timestamps are not uniformly spaced at row {0}")]
    NonUniformSampling(usize),

    #[error("column '{0}' is constant and carries no information")]
    ConstantColumn(String),

    #[error("unknown variable '{0}'")]
    UnknownVariable(String),

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("conditioning event has probability zero")]
    ZeroProbabilityEvidence,

    #[error("value {value} for '{var}' lies outside the training range [{lo}, {hi}]")]
    OutOfRange { var: String, value: f64, lo: f64, hi: f64 },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("no path from '{0}' to '{1}'")]
    NoPath(String, String),

    #[error("statistical test undefined: {0}")]
    DegenerateTest(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Invalid {
            path: path.into(),
            msg: msg.into(),
        }
    }
}
