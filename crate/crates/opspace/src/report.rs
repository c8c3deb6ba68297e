//! Machine-readable run reports and persisted realizations.
//!
//! Reports carry schema tag `opspace/report-v1`; persisted realizations
//! carry `opspace/realization-v1`. Both use the same matrix encoding as
//! problem files. Serialization is deterministic: struct field order is
//! fixed, collections are emitted in construction order, and floats go
//! through the standard shortest-roundtrip formatter — identical inputs
//! produce byte-identical documents.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::algebra::Subspace;
use crate::check::InvariantCheck;
use crate::config::{Config, Tolerances};
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::problem::{matrix_to_pairs, pairs_to_matrix, ElementData};
use crate::realization::{
    from_parts, IsometryReport, ProbeSet, Realization, RealizationKind,
};

pub const REPORT_SCHEMA: &str = "opspace/report-v1";
pub const REALIZATION_SCHEMA: &str = "opspace/realization-v1";

/// Echo of the problem a report answers.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProblemEcho {
    pub shape: Vec<usize>,
    pub kind: String,
    pub subspace_dim: usize,
    pub probe_count: usize,
}

/// Echo of the effective configuration, seed included.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub seed: u64,
    pub levels: usize,
    pub randoms_per_level: usize,
    pub tolerances: Tolerances,
}

/// One certified quotient norm.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuotientEntry {
    pub probe: usize,
    pub level: usize,
    pub value: f64,
    pub duality_gap: f64,
    pub certificate_norm: Option<f64>,
    pub annihilation_defect: Option<f64>,
    /// Independent derivative-free verification value, when in budget.
    pub oracle_value: Option<f64>,
}

/// Dimensions of a built realization.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RealizationSummary {
    pub kind: String,
    pub hilbert_dim: usize,
    pub projection_rank: usize,
    pub multiplicities: Vec<usize>,
}

/// Per-level truncation bookkeeping for held-out elements.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TruncationRow {
    pub level: usize,
    pub probes_checked: usize,
    pub max_probe_deviation: f64,
    pub holdouts_checked: usize,
    /// Positive part of (realized − quotient); must stay within tolerance.
    pub max_overshoot: f64,
    /// (quotient − realized) on held-out elements; expected, reported.
    pub max_truncation_slack: f64,
}

/// The full result of a command run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub command: String,
    /// `"pass"` iff every invariant below passes.
    pub status: String,
    pub problem: ProblemEcho,
    pub config: ConfigEcho,
    pub quotients: Vec<QuotientEntry>,
    pub realization: Option<RealizationSummary>,
    pub invariants: Vec<InvariantCheck>,
    pub truncation: Vec<TruncationRow>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.invariants.iter().all(|c| c.pass)
    }

    /// Recompute `status` from the invariant list.
    pub fn seal(&mut self) {
        self.status = if self.all_pass() { "pass" } else { "fail" }.to_string();
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let report: Report =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("report file: {e}")))?;
        if report.schema != REPORT_SCHEMA {
            return Err(Error::Parse(format!(
                "unsupported schema `{}` (expected `{REPORT_SCHEMA}`)",
                report.schema
            )));
        }
        Ok(report)
    }
}

pub fn truncation_rows(r: &IsometryReport) -> Vec<TruncationRow> {
    r.levels
        .iter()
        .map(|l| TruncationRow {
            level: l.level,
            probes_checked: l.probes_checked,
            max_probe_deviation: l.max_probe_deviation,
            holdouts_checked: l.holdouts_checked,
            max_overshoot: l.max_overshoot,
            max_truncation_slack: l.max_truncation_slack,
        })
        .collect()
}

fn optional_matrix(m: Option<&ComplexMatrix>) -> Option<Vec<[f64; 2]>> {
    m.map(matrix_to_pairs)
}

/// A realization persisted to disk: the merged representation's shape
/// data, the operator matrices, and the probe elements it was built for.
/// Frames are not stored; they are recovered from the projections on
/// load, and every mathematical property is re-verified rather than
/// trusted.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RealizationFile {
    pub schema: String,
    pub kind: String,
    pub shape: Vec<usize>,
    pub multiplicities: Vec<usize>,
    pub hilbert_dim: usize,
    pub p: Vec<[f64; 2]>,
    pub q: Vec<[f64; 2]>,
    pub u: Option<Vec<[f64; 2]>>,
    pub z: Option<Vec<[f64; 2]>>,
    pub x: Option<Vec<[f64; 2]>>,
    pub p_hat: Option<Vec<[f64; 2]>>,
    pub probes: Vec<ElementData>,
    /// Certified quotient values of the probes at build time (reference
    /// only; verification recomputes them).
    pub probe_values: Vec<f64>,
}

impl RealizationFile {
    pub fn from_realization(r: &Realization) -> Self {
        RealizationFile {
            schema: REALIZATION_SCHEMA.to_string(),
            kind: r.kind().as_str().to_string(),
            shape: r.rep().shape().block_dims().to_vec(),
            multiplicities: r.rep().multiplicities().to_vec(),
            hilbert_dim: r.hilbert_dim(),
            p: matrix_to_pairs(r.p()),
            q: matrix_to_pairs(r.q()),
            u: optional_matrix(r.u()),
            z: optional_matrix(r.z()),
            x: optional_matrix(r.x()),
            p_hat: optional_matrix(r.p_hat()),
            probes: r
                .probes()
                .probes()
                .iter()
                .map(|p| ElementData::from_element(&p.element))
                .collect(),
            probe_values: r
                .probes()
                .probes()
                .iter()
                .map(|p| p.certified_value())
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("realization serialization");
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: RealizationFile = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("realization file: {e}")))?;
        if file.schema != REALIZATION_SCHEMA {
            return Err(Error::Parse(format!(
                "unsupported schema `{}` (expected `{REALIZATION_SCHEMA}`)",
                file.schema
            )));
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Parse(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    /// Rebuild the realization against a subspace. Probe certificates are
    /// recomputed from scratch (the stored values are not trusted); the
    /// stored matrices are loaded as-is so that any tampering or drift
    /// shows up in `Realization::validate`, not here.
    pub fn to_realization(&self, v: &Subspace, cfg: &Config) -> Result<Realization> {
        let kind: RealizationKind = self.kind.parse()?;
        if self.shape != v.shape().block_dims() {
            return Err(Error::ShapeMismatch(format!(
                "realization file has shape {:?}, problem has {:?}",
                self.shape,
                v.shape().block_dims()
            )));
        }
        let h = self.hilbert_dim;
        let load = |name: &str, data: &Vec<[f64; 2]>| -> Result<ComplexMatrix> {
            pairs_to_matrix(h, h, data)
                .map_err(|e| Error::Parse(format!("stored `{name}`: {e}")))
        };
        let load_opt = |name: &str, data: &Option<Vec<[f64; 2]>>| -> Result<Option<ComplexMatrix>> {
            data.as_ref().map(|d| load(name, d)).transpose()
        };
        let elements = self
            .probes
            .iter()
            .map(|e| e.to_element(v.shape()))
            .collect::<Result<Vec<_>>>()?;
        let probes = ProbeSet::from_elements(elements, v, cfg)?;
        from_parts(
            kind,
            v.shape().clone(),
            self.multiplicities.clone(),
            load("p", &self.p)?,
            load("q", &self.q)?,
            load_opt("u", &self.u)?,
            load_opt("z", &self.z)?,
            load_opt("x", &self.x)?,
            load_opt("p_hat", &self.p_hat)?,
            probes,
            &cfg.tol,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{AlgebraElement, AlgebraShape, AmplifiedElement, SubspaceFlags};
    use crate::realization::build_system;

    fn worked_example() -> (Subspace, Realization, Config) {
        let cfg = Config::default();
        let shape = AlgebraShape::new(vec![2]).unwrap();
        let v = Subspace::new(
            shape.clone(),
            vec![AlgebraElement::unit(&shape)],
            SubspaceFlags::operator_system(),
            &cfg.tol,
        )
        .unwrap();
        let probe = AmplifiedElement::from_element(
            AlgebraElement::new(shape, vec![ComplexMatrix::real_diag(&[1.0, -1.0])]).unwrap(),
        );
        let probes = ProbeSet::from_elements(vec![probe], &v, &cfg).unwrap();
        let r = build_system(&v, probes, &cfg).unwrap();
        (v, r, cfg)
    }

    #[test]
    fn realization_file_round_trips() {
        let (v, r, cfg) = worked_example();
        let file = RealizationFile::from_realization(&r);
        let text = file.to_json();
        let back = RealizationFile::parse(&text).unwrap();
        let r2 = back.to_realization(&v, &cfg).unwrap();
        assert_eq!(r2.kind(), r.kind());
        assert_eq!(r2.hilbert_dim(), r.hilbert_dim());
        assert!(r.p().sub(r2.p()).max_abs() < 1e-15);
        // The reloaded realization verifies end to end.
        for c in r2.validate(&v, &cfg.tol).unwrap() {
            assert!(c.pass, "{} residual {:.3e}", c.name, c.residual);
        }
        for c in r2.probe_exactness(&cfg.tol).unwrap() {
            assert!(c.pass, "{} residual {:.3e}", c.name, c.residual);
        }
    }

    #[test]
    fn tampered_symmetry_is_caught_by_validation() {
        let (v, r, cfg) = worked_example();
        let mut file = RealizationFile::from_realization(&r);
        // Knock the stored symmetry off unitarity.
        file.u.as_mut().unwrap()[0] = [3.0, 0.25];
        let r2 = file.to_realization(&v, &cfg).unwrap();
        let checks = r2.validate(&v, &cfg.tol).unwrap();
        assert!(checks.iter().any(|c| !c.pass));
    }

    #[test]
    fn report_status_follows_invariants() {
        let mut report = Report {
            schema: REPORT_SCHEMA.into(),
            command: "realize".into(),
            status: String::new(),
            problem: ProblemEcho {
                shape: vec![2],
                kind: "system".into(),
                subspace_dim: 1,
                probe_count: 1,
            },
            config: ConfigEcho {
                seed: 0,
                levels: 2,
                randoms_per_level: 1,
                tolerances: Tolerances::default(),
            },
            quotients: Vec::new(),
            realization: None,
            invariants: vec![InvariantCheck::new("ok", 0.0, 1e-9)],
            truncation: Vec::new(),
        };
        report.seal();
        assert_eq!(report.status, "pass");
        report
            .invariants
            .push(InvariantCheck::new("bad", 1.0, 1e-9));
        report.seal();
        assert_eq!(report.status, "fail");
        let text = report.to_json();
        let back = Report::parse(&text).unwrap();
        assert_eq!(back.status, "fail");
        assert_eq!(back.invariants.len(), 2);
    }

    #[test]
    fn wrong_unit_entry_makes_map_annihilation_fail() {
        // Same tamper class as a corrupted artifact: a stored `z` that no
        // longer matches `[P, U]` must fail the commutator-consistency or
        // annihilation checks rather than load as "valid".
        let (v, r, cfg) = worked_example();
        let mut file = RealizationFile::from_realization(&r);
        let entries = file.z.as_mut().unwrap();
        for e in entries.iter_mut() {
            e[0] = -e[0];
            e[1] = -e[1];
        }
        let r2 = file.to_realization(&v, &cfg).unwrap();
        let checks = r2.validate(&v, &cfg.tol).unwrap();
        assert!(checks.iter().any(|c| !c.pass));
    }
}
