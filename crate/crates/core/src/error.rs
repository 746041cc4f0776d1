use thiserror::Error;

/// Failures raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpdcError {
    #[error("{quantity} = {value} is outside the valid interval [{min}, {max}]")]
    Domain {
        quantity: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no phase-matching solution: {0}")]
    NoPhaseMatch(String),

    #[error("solver did not converge: {0}")]
    Convergence(String),

    #[error("filters leave an empty passband on the detuning grid")]
    EmptyPassband,

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("unknown path {0}")]
    UnknownPath(u8),

    #[error("path {0} is already occupied")]
    PathCollision(u8),

    #[error("photons occupy distinct paths {0} and {1}")]
    DistinctPaths(u8, u8),

    #[error("expected count {0:e} exceeds the exact-integer range")]
    Overflow(f64),
}

impl SpdcError {
    pub(crate) fn domain(quantity: &'static str, value: f64, min: f64, max: f64) -> Self {
        SpdcError::Domain {
            quantity,
            value,
            min,
            max,
        }
    }

    /// True for failures of an iterative solver or fit, as opposed to bad input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            SpdcError::NoPhaseMatch(_) | SpdcError::Convergence(_) | SpdcError::DegenerateFit(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, SpdcError>;
