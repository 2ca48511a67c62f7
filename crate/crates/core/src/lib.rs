//! Robust NOT-gate pulse toolkit for a resonantly driven qubit.
//!
//! The crate provides exact 2x2 unitary algebra ([`su2`]), time-ordered
//! perturbation series and their closed-form Magnus counterparts
//! ([`expansions`]), the harmonic pulse family implementing the NOT gate
//! ([`pulse`]), the robustness/feasibility objectives defined on that family
//! ([`objectives`]), and a multi-objective covariance-matrix-adaptation
//! evolution strategy with Pareto archiving ([`mocma`]).
//!
//! Conventions: time is parametrized by the angle `theta in [0, pi]`, energies
//! are measured in units of `pi*hbar/T` where `T` is the gate duration, and
//! all matrix norms are Frobenius.

pub mod expansions;
pub mod mocma;
pub mod objectives;
pub mod pulse;
pub mod su2;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("log branch ambiguous: eigenvalue within tolerance of -1")]
    LogBranchAmbiguous,
    #[error("propagation requires at least one step")]
    ZeroSteps,
    #[error("grid too small: {got} < {min}")]
    GridTooSmall { got: usize, min: usize },
    #[error("series order must lie in 1..=4, got {0}")]
    BadOrder(usize),
    #[error("theta {0} outside [0, pi]")]
    ThetaOutOfRange(f64),
    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),
    #[error("degenerate pulse: {0}")]
    DegeneratePulse(&'static str),
    #[error("not at a critical point (residual {0:.3e})")]
    NotAtCriticalPoint(f64),
    #[error("perturbation scale too large for a truncated-series comparison (bound {0:.3e})")]
    ScaleTooLarge(f64),
    #[error("objective vectors have mismatched lengths")]
    ObjectiveLengthMismatch,
    #[error("reference point {0:?} is not strictly dominated by the whole front")]
    RefNotDominated(Vec<f64>),
    #[error("empty front")]
    EmptyFront,
    #[error("threshold too strict: no front point has first objective below {0}")]
    ThresholdTooStrict(f64),
    #[error("mixed objective labels: {0:?} vs {1:?}")]
    MixedLabels(Vec<String>, Vec<String>),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed front CSV: {0}")]
    MalformedFront(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// True for errors caused by invalid user input (files, configuration,
    /// parameter ranges) as opposed to numeric failures encountered while
    /// computing on valid input.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::ZeroSteps
                | Error::GridTooSmall { .. }
                | Error::BadOrder(_)
                | Error::ThetaOutOfRange(_)
                | Error::InvalidCoefficients(_)
                | Error::ObjectiveLengthMismatch
                | Error::MixedLabels(_, _)
                | Error::InvalidConfig(_)
                | Error::MalformedFront(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
