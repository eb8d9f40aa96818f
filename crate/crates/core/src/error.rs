use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Evaluation left the domain of an expression. `path` locates the
    /// offending subtree, e.g. `add[1]/log`.
    #[error("domain error at `{path}`: {reason}")]
    Domain { path: String, reason: String },

    #[error("order error: {0}")]
    Order(String),

    #[error("jet centers differ")]
    CenterMismatch,

    #[error("jet orders differ ({0} vs {1})")]
    OrderMismatch(usize, usize),

    #[error("division by a jet with zero constant term")]
    DivisionByZeroJet,

    #[error("schema error at {location}: {message}")]
    Schema { location: String, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("datum is not in adapted coordinates (need phi1 = x1, phi2 = x2)")]
    NotAdapted,

    #[error("numerical rank ambiguous at order {order}: gap ratio {gap_ratio:.3e} near threshold {threshold:.3e}")]
    RankAmbiguous {
        order: usize,
        gap_ratio: f64,
        threshold: f64,
    },

    #[error("degenerate denominator `{name}` near {locus:?} (|value| = {value:.3e})")]
    DegenerateDenominator {
        name: String,
        locus: Vec<f64>,
        value: f64,
    },

    #[error("trajectory left the domain at time {exit_time}")]
    DomainEscape { exit_time: f64 },

    #[error("level set exits the domain: {0}")]
    FlowEscape(String),

    #[error("jacobian is rank deficient at {0:?}")]
    RankDeficient(Vec<f64>),

    #[error("insufficient data: need at least {needed} nonzero measures, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("derivation stops at n = 1")]
    StopAtBase,

    #[error("exact arithmetic supports polynomial and rational data only, found `{0}`")]
    NotPolynomial(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(reason: impl Into<String>) -> Self {
        Error::Domain {
            path: String::new(),
            reason: reason.into(),
        }
    }

    /// Prefix the subtree path of a domain error with `segment`.
    pub(crate) fn within(self, segment: &str) -> Self {
        match self {
            Error::Domain { path, reason } => Error::Domain {
                path: if path.is_empty() {
                    segment.to_string()
                } else {
                    format!("{segment}/{path}")
                },
                reason,
            },
            other => other,
        }
    }

    /// True for errors caused by the input files rather than the computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Schema { .. } | Error::Validation(_) | Error::NotAdapted
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            Error::Io(e.to_string())
        } else {
            Error::Schema {
                location: format!("line {}, column {}", e.line(), e.column()),
                message: e.to_string(),
            }
        }
    }
}
