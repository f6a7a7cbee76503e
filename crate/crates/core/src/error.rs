use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input: parameters, dimensions, malformed data.
    Config,
    /// A numerical procedure failed or produced an out-of-range value.
    Numerical,
    /// The request is well formed but its preconditions do not hold.
    Refusal,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: String,
    },

    #[error("divergence check failed: {0}")]
    DivergenceCheck(String),

    #[error("conjugate bracket expansion exceeded {doublings} doublings at y = {y} (growth condition violated?)")]
    BracketBudget { y: f64, doublings: u32 },

    #[error("conjugate overflow at y = {y}")]
    Range { y: f64 },

    #[error("quantile level {0} outside (0,1)")]
    QuantileLevel(f64),

    #[error("sample is empty")]
    EmptySample,

    #[error("non-finite observation at index {0}")]
    NonFinite(usize),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("piecewise-linear partition violated at theta = {theta:?}, z = {z:?}: {active} regions active")]
    PartitionViolation {
        theta: Vec<f64>,
        z: Vec<f64>,
        active: usize,
    },

    #[error("quadrature did not converge: {nodes} nodes, last change {change:e}")]
    QuadratureNotConverged { nodes: usize, change: f64 },

    #[error("inner minimizer {x} outside localization [{lo}, {hi}]")]
    LocalizationViolated { x: f64, lo: f64, hi: f64 },

    #[error("minimizer not unique: {0}")]
    NonUniqueMinimizer(String),

    #[error("epsilon {eps} must exceed delta_bar {delta_bar}")]
    BoundDomain { eps: f64, delta_bar: f64 },

    #[error("at theta = {theta:?}: {source}")]
    AtTheta {
        theta: Vec<f64>,
        #[source]
        source: Box<Error>,
    },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse: {0}")]
    Parse(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter { .. }
            | Error::DivergenceCheck(_)
            | Error::QuantileLevel(_)
            | Error::EmptySample
            | Error::NonFinite(_)
            | Error::Dimension(_)
            | Error::BoundDomain { .. }
            | Error::Io(_)
            | Error::Parse(_) => ErrorKind::Config,
            Error::NonUniqueMinimizer(_) => ErrorKind::Refusal,
            Error::AtTheta { source, .. } => source.kind(),
            _ => ErrorKind::Numerical,
        }
    }

    pub(crate) fn invalid(name: &'static str, value: f64, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason: reason.into(),
        }
    }

    pub(crate) fn at_theta(self, theta: &[f64]) -> Self {
        Error::AtTheta {
            theta: theta.to_vec(),
            source: Box::new(self),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
