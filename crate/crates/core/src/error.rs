use thiserror::Error;

use crate::grid::Field;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    /// A standing hypothesis on `phi`, `g` or the data failed on a sample grid.
    #[error("hypothesis {hypothesis} violated at t = {witness:e}: {detail}")]
    Hypothesis {
        hypothesis: &'static str,
        witness: f64,
        detail: String,
    },

    #[error("could not bracket s*phi(s) = {target:e} below s = {limit:e}")]
    Bracket { target: f64, limit: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("mesh resolution {0} is below the minimum of 2 cells per direction")]
    Resolution(usize),

    #[error("fields live on different meshes")]
    MeshMismatch,

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        best: Box<Field>,
        context: String,
    },

    #[error("a-priori bound violated at eps = {eps:e}: {quantity} = {value:e} exceeds {cap:e}")]
    BoundViolation {
        eps: f64,
        quantity: &'static str,
        value: f64,
        cap: f64,
    },

    #[error("inner solve failed at eps = {eps:e}: {source}")]
    AtEpsilon {
        eps: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("mountain-pass geometry not certified: {0}")]
    Geometry(String),

    #[error("path deformation stalled after {sweeps} sweeps (level {level:e}, residual {residual:e})")]
    Stagnation {
        sweeps: usize,
        level: f64,
        residual: f64,
        best: Box<Field>,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("no analytic oracle for {0}")]
    OracleMissing(String),

    #[error("table error: {0}")]
    Table(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn hypothesis(hypothesis: &'static str, witness: f64, detail: impl Into<String>) -> Self {
        Error::Hypothesis {
            hypothesis,
            witness,
            detail: detail.into(),
        }
    }

    /// True for failures of a standing hypothesis or of the mountain-pass geometry.
    pub fn is_hypothesis_failure(&self) -> bool {
        match self {
            Error::Hypothesis { .. } | Error::Geometry(_) | Error::Domain(_) => true,
            Error::AtEpsilon { source, .. } => source.is_hypothesis_failure(),
            _ => false,
        }
    }

    /// True when the failure carries a best iterate (solver did not converge).
    pub fn is_nonconvergence(&self) -> bool {
        match self {
            Error::NonConvergence { .. } | Error::Stagnation { .. } | Error::BoundViolation { .. } => true,
            Error::AtEpsilon { source, .. } => source.is_nonconvergence(),
            _ => false,
        }
    }

    /// Best iterate carried by a nonconvergence failure, if any.
    pub fn best_iterate(&self) -> Option<&Field> {
        match self {
            Error::NonConvergence { best, .. } | Error::Stagnation { best, .. } => Some(best),
            Error::AtEpsilon { source, .. } => source.best_iterate(),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
