//! # gaussdist
//!
//! Numerical toolkit for binary discrimination of energy-constrained bosonic
//! Gaussian states.
//!
//! The library computes fidelity, trace distance, and the Helstrom minimal
//! error probability between pure Gaussian states of one or more field modes,
//! locates the pair of isoenergetic single-mode states with maximal trace
//! distance (both in closed form and by independent numerical minimization),
//! and cross-checks everything against a brute-force oracle built in a
//! truncated Fock basis.
//!
//! Conventions: `ħ = 1`, vacuum covariance `diag(1/2, 1/2)`, quadratures
//! interleaved as `(q₁, p₁, …, q_M, p_M)`.

#![forbid(unsafe_code)]

mod error;
pub mod fidelity;
pub mod fock_oracle;
pub mod gaussian_core;
pub mod multimode;
pub mod optimum;
pub mod verify;

pub(crate) mod minimize;
pub(crate) mod workers;

pub use error::{Error, Result};
pub use fidelity::DiscriminationResult;
pub use gaussian_core::{GaussianState, PureStateParams, SymplecticMatrix};
pub use optimum::{OptimalPair, OptimumReport, PolarSolveReport};
