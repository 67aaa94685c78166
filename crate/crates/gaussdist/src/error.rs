use thiserror::Error;

/// Errors for Gaussian-state computations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("state is not pure: det(2Σ) = {det_two_sigma}")]
    NotPure { det_two_sigma: f64 },

    #[error("uncertainty relation violated: min eigenvalue of Σ + (i/2)Δ is {min_eigenvalue}")]
    UncertaintyViolated { min_eigenvalue: f64 },

    #[error("not a symplectic matrix: {0}")]
    NotSymplectic(String),

    #[error("infeasible covariance: Tr Σ = {trace} exceeds energy budget {budget}")]
    InfeasibleCovariance { trace: f64, budget: f64 },

    #[error("Fock cutoff {cutoff} too small: tail mass {tail_mass:.3e} above {threshold:.3e}")]
    CutoffTooSmall {
        cutoff: usize,
        tail_mass: f64,
        threshold: f64,
    },

    #[error("optimization failed to converge: {0}")]
    ConvergenceFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
