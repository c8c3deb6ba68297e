//! A named residual-vs-tolerance record. Verification routines return lists
//! of these; reports serialize them as-is so every residual appears next to
//! the tolerance it was held to.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantCheck {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl InvariantCheck {
    pub fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        InvariantCheck {
            name: name.into(),
            residual,
            tolerance,
            pass: residual <= tolerance,
        }
    }

    /// For quantities that must not fall below a bound (signed slack:
    /// negative values are violations beyond `tolerance`).
    pub fn lower_bounded(name: impl Into<String>, slack: f64, tolerance: f64) -> Self {
        InvariantCheck {
            name: name.into(),
            residual: slack,
            tolerance,
            pass: slack >= -tolerance,
        }
    }
}

pub fn all_pass(checks: &[InvariantCheck]) -> bool {
    checks.iter().all(|c| c.pass)
}

pub fn worst_failure(checks: &[InvariantCheck]) -> Option<&InvariantCheck> {
    checks.iter().filter(|c| !c.pass).max_by(|a, b| {
        (a.residual.abs() / a.tolerance.max(1e-300))
            .partial_cmp(&(b.residual.abs() / b.tolerance.max(1e-300)))
            .unwrap()
    })
}
