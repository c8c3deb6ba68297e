//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Dimensions of operands do not line up (block count, block size, level).
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A caller-side contract was violated (non-Hermitian input to the
    /// Hermitian eigensolver, functional of the wrong norm, ...).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// An iterative kernel ran out of sweeps. `residual` is the convergence
    /// measure at the point of giving up.
    #[error("iteration failed to converge (residual {residual:.3e})")]
    Convergence { residual: f64 },

    /// A declared subspace flag does not hold for the given basis, or the
    /// basis itself is invalid.
    #[error("invalid subspace: {0}")]
    InvalidSubspace(String),

    /// The quotient-norm solver could not close the duality gap.
    #[error(
        "quotient solver did not converge: value {value:.9e}, dual bound {bound:.9e}, gap {gap:.3e}"
    )]
    SolverNonConvergence { value: f64, bound: f64, gap: f64 },

    /// Malformed user input (problem files, flag values).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A binding invariant failed during verification of a built object.
    #[error("invariant failure: {0}")]
    InvariantFailure(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
