use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid quantum state: {0}")]
    InvalidState(String),

    #[error("integration step underflow: {0}")]
    StepUnderflow(String),

    #[error("Hamiltonian is not periodic with the requested period (mismatch {mismatch:e})")]
    PeriodMismatch { mismatch: f64 },

    #[error("ambiguous Floquet mode identification (subspace weights {first:.3}, {second:.3})")]
    AmbiguousModes { first: f64, second: f64 },

    #[error("value {value} outside domain [{lo}, {hi}]")]
    OutOfDomain { value: f64, lo: f64, hi: f64 },

    #[error("rank-deficient least-squares system: {0}")]
    RankDeficient(String),

    #[error("fit did not converge after {iterations} iterations (best rms residual {best_residual:e})")]
    NoConvergence { iterations: usize, best_residual: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// True for failures of the numerical machinery (integrators, eigensolvers,
    /// fits) as opposed to bad inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::StepUnderflow(_)
                | Error::AmbiguousModes { .. }
                | Error::NoConvergence { .. }
                | Error::Numerical(_)
                | Error::RankDeficient(_)
        )
    }
}
