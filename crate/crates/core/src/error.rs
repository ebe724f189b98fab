use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a domain invariant (grid bounds, probe positivity, coupling sign...).
    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    /// Two objects that must share a discretization do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Probability or amplitude mass reached the edge of a finite grid.
    #[error("truncation on {axis}: edge mass {mass:.3e} exceeds {limit:.1e} ({hint})")]
    Truncation {
        axis: String,
        mass: f64,
        limit: f64,
        hint: String,
    },

    /// A density went negative beyond round-off.
    #[error("negative density {value:.3e} at index {index}")]
    NegativeDensity { index: usize, value: f64 },

    /// An internal cross-check between two numerical routes failed.
    #[error("numerical check '{check}' failed: {detail}")]
    Numerical { check: &'static str, detail: String },

    #[error("config error in {location}: {reason}")]
    Config { location: String, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }

    pub(crate) fn truncation(
        axis: impl Into<String>,
        mass: f64,
        limit: f64,
        hint: impl Into<String>,
    ) -> Self {
        Error::Truncation {
            axis: axis.into(),
            mass,
            limit,
            hint: hint.into(),
        }
    }

    /// Whether the error stems from the discretization rather than from the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Truncation { .. } | Error::NegativeDensity { .. } | Error::Numerical { .. }
        )
    }
}
