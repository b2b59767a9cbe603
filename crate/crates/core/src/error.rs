use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// `Domain` and `InvalidParameters` are caller mistakes (CLI exit code 1);
/// the remaining variants are numerical failures (exit code 2).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("vacuous bound: {0}")]
    VacuousBound(String),

    #[error("convergence failure in {op}: {msg}")]
    Convergence { op: &'static str, msg: String },

    #[error("grid resolution failure: a_R changed by {rel_change:.3e} (relative) under grid doubling")]
    GridResolution { rel_change: f64 },

    #[error("degenerate potential: {0}")]
    DegeneratePotential(String),

    #[error("divergent tail integral: {0}")]
    Divergent(String),

    #[error("potential file, line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain {
            op,
            msg: msg.into(),
        }
    }

    pub(crate) fn convergence(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Convergence {
            op,
            msg: msg.into(),
        }
    }

    /// True for errors caused by bad input rather than numerical trouble.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain { .. }
                | Error::InvalidParameters(_)
                | Error::Parse { .. }
                | Error::VacuousBound(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
