//! Problem descriptions on disk.
//!
//! A problem file is a JSON document (schema tag `opspace/problem-v1`)
//! naming the algebra, the subspace, the realization kind, and the probe
//! family. Complex numbers are `[re, im]` pairs; matrices are flat
//! row-major arrays of such pairs. A level-`n` element is stored as one
//! assembled `(n·dᵢ) × (n·dᵢ)` matrix per block.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

use crate::algebra::{AlgebraElement, AlgebraShape, AmplifiedElement, Subspace, SubspaceFlags};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};
use crate::realization::RealizationKind;

pub const PROBLEM_SCHEMA: &str = "opspace/problem-v1";

/// Flat row-major matrix encoding: entry `(r, c)` of an `n×n` matrix sits
/// at index `r·n + c`.
pub fn matrix_to_pairs(m: &ComplexMatrix) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.rows() * m.cols());
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            let z = m.get(r, c);
            out.push([z.re, z.im]);
        }
    }
    out
}

pub fn pairs_to_matrix(rows: usize, cols: usize, data: &[[f64; 2]]) -> Result<ComplexMatrix> {
    if data.len() != rows * cols {
        return Err(Error::Parse(format!(
            "matrix needs {} entries for {rows}x{cols}, got {}",
            rows * cols,
            data.len()
        )));
    }
    for (k, z) in data.iter().enumerate() {
        if !z[0].is_finite() || !z[1].is_finite() {
            return Err(Error::Parse(format!("matrix entry {k} is not finite")));
        }
    }
    let mut m = ComplexMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            let z = data[r * cols + c];
            m.set(r, c, C64::new(z[0], z[1]));
        }
    }
    Ok(m)
}

fn default_level() -> usize {
    1
}

/// One element of `M_n(A)`: assembled per-block matrices at a given level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementData {
    #[serde(default = "default_level")]
    pub level: usize,
    pub blocks: Vec<Vec<[f64; 2]>>,
}

impl ElementData {
    pub fn from_element(c: &AmplifiedElement) -> Self {
        ElementData {
            level: c.level(),
            blocks: (0..c.shape().num_blocks())
                .map(|i| matrix_to_pairs(&c.assembled_block(i)))
                .collect(),
        }
    }

    pub fn to_element(&self, shape: &AlgebraShape) -> Result<AmplifiedElement> {
        if self.level == 0 {
            return Err(Error::Parse("element level must be at least 1".into()));
        }
        if self.blocks.len() != shape.num_blocks() {
            return Err(Error::Parse(format!(
                "element has {} blocks, algebra has {}",
                self.blocks.len(),
                shape.num_blocks()
            )));
        }
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for (i, data) in self.blocks.iter().enumerate() {
            let side = self.level * shape.block_dim(i);
            blocks.push(pairs_to_matrix(side, side, data)?);
        }
        AmplifiedElement::from_assembled_blocks(shape, self.level, &blocks)
    }

    /// Strict level-1 variant, for subspace bases.
    pub fn to_base_element(&self, shape: &AlgebraShape) -> Result<AlgebraElement> {
        if self.level != 1 {
            return Err(Error::Parse(
                "subspace basis elements must be level 1".into(),
            ));
        }
        Ok(self.to_element(shape)?.entry(0, 0).clone())
    }
}

/// Probe family description: explicit elements, auto-generation, or both.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbeSpec {
    /// Explicit probe elements.
    pub elements: Vec<ElementData>,
    /// Auto-generate probes at matrix levels `1..=levels`.
    pub levels: Option<usize>,
    /// Seeded random draws per auto-generated level.
    pub randoms_per_level: Option<usize>,
}

/// A parsed problem file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub schema: String,
    /// Block dimensions of `A = ⊕ M_{dᵢ}`.
    pub shape: Vec<usize>,
    /// One of `general | star | system | subalgebra`.
    pub kind: String,
    /// Basis of the subspace `V` (level-1 elements). May be empty.
    #[serde(default)]
    pub subspace: Vec<ElementData>,
    #[serde(default)]
    pub probes: ProbeSpec,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Tolerance overrides by field name.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

impl ProblemSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let spec: ProblemSpec = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("problem file: {e}")))?;
        if spec.schema != PROBLEM_SCHEMA {
            return Err(Error::Parse(format!(
                "unsupported schema `{}` (expected `{PROBLEM_SCHEMA}`)",
                spec.schema
            )));
        }
        Ok(spec)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Parse(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }
}

/// Command-line overrides applied on top of a problem file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    /// `(name, value)` tolerance settings.
    pub tolerances: Vec<(String, f64)>,
    pub levels: Option<usize>,
    pub randoms_per_level: Option<usize>,
}

/// Everything a command needs, in library types.
#[derive(Clone, Debug)]
pub struct ResolvedProblem {
    pub kind: RealizationKind,
    pub subspace: Subspace,
    pub explicit_probes: Vec<AmplifiedElement>,
    /// Auto-generation depth; 0 disables auto-generation.
    pub levels: usize,
    pub randoms_per_level: usize,
    pub config: Config,
}

impl ProblemSpec {
    /// Validate the file against the library's constructors and apply
    /// overrides. The kind tag is turned into declared subspace flags,
    /// which `Subspace::new` checks against the basis — a `system` spec
    /// whose span misses the unit fails here, not downstream.
    pub fn resolve(&self, over: &Overrides) -> Result<ResolvedProblem> {
        let shape = AlgebraShape::new(self.shape.clone())?;
        let kind: RealizationKind = self.kind.parse()?;

        let mut config = Config::default();
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        for (name, value) in &self.tolerances {
            config.tol.set(name, *value)?;
        }
        if let Some(seed) = over.seed {
            config.seed = seed;
        }
        for (name, value) in &over.tolerances {
            config.tol.set(name, *value)?;
        }

        let flags = match kind {
            RealizationKind::General => SubspaceFlags::default(),
            RealizationKind::Star => SubspaceFlags::star(),
            RealizationKind::System => SubspaceFlags::operator_system(),
            RealizationKind::Subalgebra => SubspaceFlags::subalgebra(),
        };
        let basis = self
            .subspace
            .iter()
            .map(|e| e.to_base_element(&shape))
            .collect::<Result<Vec<_>>>()?;
        let subspace = Subspace::new(shape.clone(), basis, flags, &config.tol)?;

        let explicit_probes = self
            .probes
            .elements
            .iter()
            .map(|e| e.to_element(&shape))
            .collect::<Result<Vec<_>>>()?;

        // Auto-generation defaults on only when no explicit probes are
        // given; any levels/randoms setting (file or flag) turns it on.
        let auto_requested = self.probes.levels.is_some()
            || self.probes.randoms_per_level.is_some()
            || over.levels.is_some()
            || over.randoms_per_level.is_some()
            || explicit_probes.is_empty();
        let levels = if auto_requested {
            over.levels.or(self.probes.levels).unwrap_or(2)
        } else {
            0
        };
        let randoms_per_level = over
            .randoms_per_level
            .or(self.probes.randoms_per_level)
            .unwrap_or(1);

        Ok(ResolvedProblem {
            kind,
            subspace,
            explicit_probes,
            levels,
            randoms_per_level,
            config,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn element_data_round_trips() {
        let shape = AlgebraShape::new(vec![2, 3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for level in 1..=3 {
            let c = sampling::random_amplified(&mut rng, &shape, level);
            let data = ElementData::from_element(&c);
            let back = data.to_element(&shape).unwrap();
            assert_eq!(back.level(), level);
            assert!(c.sub(&back).unwrap().frobenius_norm() < 1e-14);
        }
    }

    #[test]
    fn resolve_validates_kind_against_basis() {
        // diag(1, -1) spans a star-closed line without the unit: a `system`
        // tag must be rejected, a `star` tag accepted.
        let spec = |kind: &str| ProblemSpec {
            schema: PROBLEM_SCHEMA.into(),
            shape: vec![2],
            kind: kind.into(),
            subspace: vec![ElementData {
                level: 1,
                blocks: vec![vec![[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [-1.0, 0.0]]],
            }],
            probes: ProbeSpec::default(),
            seed: Some(9),
            tolerances: BTreeMap::new(),
        };
        assert!(spec("system").resolve(&Overrides::default()).is_err());
        let ok = spec("star").resolve(&Overrides::default()).unwrap();
        assert_eq!(ok.kind, RealizationKind::Star);
        assert_eq!(ok.config.seed, 9);
        assert_eq!(ok.levels, 2);
        assert!(spec("nonsense").resolve(&Overrides::default()).is_err());
    }

    #[test]
    fn overrides_beat_file_settings() {
        let mut tolerances = BTreeMap::new();
        tolerances.insert("quotient_gap".to_string(), 1e-4);
        let spec = ProblemSpec {
            schema: PROBLEM_SCHEMA.into(),
            shape: vec![2],
            kind: "general".into(),
            subspace: Vec::new(),
            probes: ProbeSpec {
                elements: Vec::new(),
                levels: Some(3),
                randoms_per_level: Some(2),
            },
            seed: Some(1),
            tolerances,
        };
        let over = Overrides {
            seed: Some(7),
            tolerances: vec![("quotient_gap".into(), 1e-3)],
            levels: Some(1),
            randoms_per_level: None,
        };
        let r = spec.resolve(&over).unwrap();
        assert_eq!(r.config.seed, 7);
        assert_eq!(r.config.tol.quotient_gap, 1e-3);
        assert_eq!(r.levels, 1);
        assert_eq!(r.randoms_per_level, 2);
    }

    #[test]
    fn explicit_probes_disable_auto_generation() {
        let spec = ProblemSpec {
            schema: PROBLEM_SCHEMA.into(),
            shape: vec![1],
            kind: "general".into(),
            subspace: Vec::new(),
            probes: ProbeSpec {
                elements: vec![ElementData {
                    level: 1,
                    blocks: vec![vec![[2.0, 0.0]]],
                }],
                levels: None,
                randoms_per_level: None,
            },
            seed: None,
            tolerances: BTreeMap::new(),
        };
        let r = spec.resolve(&Overrides::default()).unwrap();
        assert_eq!(r.levels, 0);
        assert_eq!(r.explicit_probes.len(), 1);
    }

    #[test]
    fn schema_tag_is_enforced() {
        let text = r#"{"schema": "opspace/problem-v0", "shape": [2], "kind": "general"}"#;
        assert!(ProblemSpec::parse(text).is_err());
        let ok = r#"{"schema": "opspace/problem-v1", "shape": [2], "kind": "general"}"#;
        let spec = ProblemSpec::parse(ok).unwrap();
        assert!(spec.subspace.is_empty());
        assert!(spec.seed.is_none());
    }
}
