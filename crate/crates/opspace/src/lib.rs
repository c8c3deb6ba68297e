//! Finite-dimensional operator-space quotients, realized concretely.
//!
//! For `A = ⊕_i M_{d_i}` and a subspace `V ⊆ A`, the quotient `A/V` carries
//! matrix norms `‖C‖ = inf{‖C - D‖ : D ∈ M_n(V)}`. This crate computes those
//! norms with dual certificates, turns certificates into representations on
//! concrete Hilbert spaces, and assembles maps of the forms
//! `Q π(·) P`, `P U π(·) P`, `½ P [Z, π(·)] P`, and `½ [iX, π(·)]`
//! that realize the quotient norms — exactly on certified probes and as a
//! lower bound elsewhere. Every structural claim (projections, unitarity,
//! adjoint-compatibility, derivation identities, positivity of Choi
//! matrices) is checked numerically against explicit tolerances.
//!
//! Entry points:
//! - [`quotient::quotient_norm`] — certified quotient norms with duality gaps;
//! - [`gns::represent_functional`] — functional → representation + cyclic-style vectors;
//! - [`realization`] — the four realization builders and their verifiers;
//! - [`cli`] — the `quotient | realize | verify` command set used by the binary.

pub mod algebra;
pub mod check;
pub mod cli;
pub mod config;
pub mod error;
pub mod gns;
pub mod matrix;
pub mod problem;
pub mod quotient;
pub mod realization;
pub mod report;
pub mod sampling;

pub use config::{Config, SolverOptions, Tolerances};
pub use error::{Error, Result};
