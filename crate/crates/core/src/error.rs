use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the model builders, propagators and closed-form routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An input lies outside the domain where a function is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter violates a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A steady-state or linear-response query was made for an unstable system.
    #[error("unstable system: {0}")]
    Unstable(String),

    /// The adaptive integrator could not meet its tolerance.
    #[error("step-size failure at t = {t}: step {step:e} ({reason})")]
    StepSize { t: f64, step: f64, reason: String },

    /// The discrete frequency grid would produce spurious revivals inside the window.
    #[error(
        "revival guard: grid spacing gives a revival time of {revival_time:.4} \
         but the window needs at least {required:.4}; increase the number of sub-ensembles"
    )]
    Revival { revival_time: f64, required: f64 },

    /// Newton iteration did not converge; carries the iterates that were visited.
    #[error("root finder did not converge after {} iterations (last iterate {:?})", iterates.len(), iterates.last())]
    NonConvergence { iterates: Vec<Complex64> },

    /// A dense linear-algebra kernel failed.
    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors that come from bad inputs rather than numerical trouble.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::InvalidParameter(_) | Error::Unstable(_) | Error::Revival { .. }
        )
    }
}
