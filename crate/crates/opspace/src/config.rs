//! Tolerances and solver knobs.
//!
//! Every numerical check in the crate reads its threshold from [`Tolerances`]
//! so that the CLI can override any of them by name. The defaults are the
//! binding values used by the acceptance suite.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Named tolerances. All are absolute unless the name says otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative singular-value cutoff used everywhere a numerical rank is taken.
    pub rank_cutoff: f64,
    /// Relative Hermitian-defect allowance on matrices that claim to be Hermitian.
    pub hermitian: f64,
    /// Residual contract for eigen/SVD factorizations (relative to max(1, norm)).
    pub factorization: f64,
    /// Pairwise orthonormality defect of computed bases.
    pub orthonormal: f64,
    /// |psi(W)| allowance for annihilator functionals, W a basis element of M_n(V).
    pub annihilation: f64,
    /// Norm-one defect allowance for certificate functionals.
    pub functional_norm: f64,
    /// Relative agreement between a certified value and the recomputed norm of C - D.
    pub quotient_value_rel: f64,
    /// Duality gap allowance: Re psi(C) >= value - quotient_gap.
    pub quotient_gap: f64,
    /// Values at or below this (relative to max(1, |C|)) are treated as zero quotient.
    pub quotient_zero: f64,
    /// Relative agreement demanded between the solver and the derivative-free oracle.
    pub oracle_agreement_rel: f64,
    /// Functional-reconstruction residual through the represented form.
    pub reconstruction: f64,
    /// Residual allowance on structural operator identities (projections, commutation...).
    pub structural: f64,
    /// Residual allowance on adjoint-compatibility of star realizations.
    pub star_map: f64,
    /// Allowed deviation of realized norms from certified values on probes.
    pub probe_exactness: f64,
    /// Allowed positive excess of realized norms over quotient values on held-out elements.
    pub overshoot: f64,
    /// Allowed negative slack in the Leibniz inequality.
    pub leibniz: f64,
    /// Minimum eigenvalue allowance when checking Choi matrices for positivity.
    pub choi_psd: f64,
    /// Allowed excess over 1 for norms of maps that must be (completely) contractive.
    pub contraction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank_cutoff: 1e-9,
            hermitian: 1e-12,
            factorization: 1e-10,
            orthonormal: 1e-12,
            annihilation: 1e-8,
            functional_norm: 1e-6,
            quotient_value_rel: 1e-6,
            quotient_gap: 1e-5,
            quotient_zero: 1e-9,
            oracle_agreement_rel: 1e-4,
            reconstruction: 1e-8,
            structural: 1e-10,
            star_map: 1e-12,
            probe_exactness: 1e-5,
            overshoot: 1e-8,
            leibniz: 1e-9,
            choi_psd: 1e-9,
            contraction: 1e-10,
        }
    }
}

impl Tolerances {
    /// Set a tolerance by its field name. Used by the CLI's repeatable
    /// `--tol NAME=VALUE` flag.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "tolerance {name} must be a finite non-negative number, got {value}"
            )));
        }
        match name {
            "rank_cutoff" => self.rank_cutoff = value,
            "hermitian" => self.hermitian = value,
            "factorization" => self.factorization = value,
            "orthonormal" => self.orthonormal = value,
            "annihilation" => self.annihilation = value,
            "functional_norm" => self.functional_norm = value,
            "quotient_value_rel" => self.quotient_value_rel = value,
            "quotient_gap" => self.quotient_gap = value,
            "quotient_zero" => self.quotient_zero = value,
            "oracle_agreement_rel" => self.oracle_agreement_rel = value,
            "reconstruction" => self.reconstruction = value,
            "structural" => self.structural = value,
            "star_map" => self.star_map = value,
            "probe_exactness" => self.probe_exactness = value,
            "overshoot" => self.overshoot = value,
            "leibniz" => self.leibniz = value,
            "choi_psd" => self.choi_psd = value,
            "contraction" => self.contraction = value,
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown tolerance name: {other}"
                )))
            }
        }
        Ok(())
    }

    pub const NAMES: &'static [&'static str] = &[
        "rank_cutoff",
        "hermitian",
        "factorization",
        "orthonormal",
        "annihilation",
        "functional_norm",
        "quotient_value_rel",
        "quotient_gap",
        "quotient_zero",
        "oracle_agreement_rel",
        "reconstruction",
        "structural",
        "star_map",
        "probe_exactness",
        "overshoot",
        "leibniz",
        "choi_psd",
        "contraction",
    ];
}

/// Iteration budgets for the quotient-norm solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Smoothing stages (mu is halved each stage).
    pub continuation_stages: usize,
    /// Accelerated-gradient iterations per smoothing stage.
    pub iters_per_stage: usize,
    /// Subgradient polish iterations per round after dual extraction.
    pub polish_iters: usize,
    /// Rounds of extract-then-polish before the global dual solve.
    pub refine_rounds: usize,
    /// Iterations of the splitting method used to solve the dual program.
    pub dual_iters: usize,
    /// Gap (relative to max(1, |C|)) at which the solver stops early.
    pub target_gap: f64,
    /// Evaluation budget for the derivative-free oracle.
    pub oracle_budget: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            continuation_stages: 26,
            iters_per_stage: 120,
            polish_iters: 1500,
            refine_rounds: 8,
            dual_iters: 4000,
            target_gap: 1e-8,
            oracle_budget: 200_000,
        }
    }
}

/// Bundle passed to every operation that needs tolerances or budgets.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub tol: Tolerances,
    pub solver: SolverOptions,
    /// Seed for every stochastic step (probe generation, held-out sweeps).
    pub seed: u64,
}

impl Config {
    pub fn with_seed(seed: u64) -> Self {
        Config {
            seed,
            ..Config::default()
        }
    }
}
