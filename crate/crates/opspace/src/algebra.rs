//! Finite-dimensional C*-algebras `A = ⊕_i M_{d_i}`, their elements,
//! distinguished subspaces, and matrix amplifications `M_n(A)`.
//!
//! An element is stored blockwise. The norm of an amplified element is the
//! unique C*-norm: assemble each block of `M_n(M_{d_i})` into one
//! `(n·d_i)×(n·d_i)` matrix and take the largest spectral norm over blocks.

use num_complex::Complex64;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::matrix::{self, spectral_norm, ComplexMatrix, C64};

// ── shape ───────────────────────────────────────────────────────────

/// Block dimensions `(d_1, ..., d_B)` of `⊕_i M_{d_i}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraShape {
    block_dims: Vec<usize>,
}

impl AlgebraShape {
    pub fn new(block_dims: Vec<usize>) -> Result<Self> {
        if block_dims.is_empty() {
            return Err(Error::ShapeMismatch("shape needs at least one block".into()));
        }
        if block_dims.iter().any(|&d| d == 0) {
            return Err(Error::ShapeMismatch("block dimensions must be positive".into()));
        }
        Ok(AlgebraShape { block_dims })
    }

    pub fn num_blocks(&self) -> usize {
        self.block_dims.len()
    }

    pub fn block_dim(&self, i: usize) -> usize {
        self.block_dims[i]
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    /// Complex dimension of the algebra, `Σ d_i²`.
    pub fn dim(&self) -> usize {
        self.block_dims.iter().map(|d| d * d).sum()
    }
}

// ── elements ────────────────────────────────────────────────────────

/// One element of `⊕_i M_{d_i}`, stored block by block.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    shape: AlgebraShape,
    blocks: Vec<ComplexMatrix>,
}

impl AlgebraElement {
    pub fn new(shape: AlgebraShape, blocks: Vec<ComplexMatrix>) -> Result<Self> {
        if blocks.len() != shape.num_blocks() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} blocks, got {}",
                shape.num_blocks(),
                blocks.len()
            )));
        }
        for (i, b) in blocks.iter().enumerate() {
            let d = shape.block_dim(i);
            if b.rows() != d || b.cols() != d {
                return Err(Error::ShapeMismatch(format!(
                    "block {i} must be {d}x{d}, got {}x{}",
                    b.rows(),
                    b.cols()
                )));
            }
        }
        Ok(AlgebraElement { shape, blocks })
    }

    pub fn zero(shape: &AlgebraShape) -> Self {
        let blocks = shape
            .block_dims()
            .iter()
            .map(|&d| ComplexMatrix::zeros(d, d))
            .collect();
        AlgebraElement {
            shape: shape.clone(),
            blocks,
        }
    }

    pub fn unit(shape: &AlgebraShape) -> Self {
        let blocks = shape
            .block_dims()
            .iter()
            .map(|&d| ComplexMatrix::identity(d))
            .collect();
        AlgebraElement {
            shape: shape.clone(),
            blocks,
        }
    }

    /// The matrix-unit basis: block i, entry (r, c), ordered block-major.
    pub fn basis(shape: &AlgebraShape) -> Vec<AlgebraElement> {
        let mut out = Vec::with_capacity(shape.dim());
        for i in 0..shape.num_blocks() {
            let d = shape.block_dim(i);
            for r in 0..d {
                for c in 0..d {
                    let mut e = AlgebraElement::zero(shape);
                    e.blocks[i].set(r, c, C64::new(1.0, 0.0));
                    out.push(e);
                }
            }
        }
        out
    }

    /// Embed a single matrix as block `i`, zero elsewhere.
    pub fn from_block(shape: &AlgebraShape, i: usize, m: ComplexMatrix) -> Result<Self> {
        let mut e = AlgebraElement::zero(shape);
        let d = shape.block_dim(i);
        if m.rows() != d || m.cols() != d {
            return Err(Error::ShapeMismatch(format!(
                "block {i} must be {d}x{d}"
            )));
        }
        e.blocks[i] = m;
        Ok(e)
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn block(&self, i: usize) -> &ComplexMatrix {
        &self.blocks[i]
    }

    pub fn blocks(&self) -> &[ComplexMatrix] {
        &self.blocks
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        Ok(AlgebraElement {
            shape: self.shape.clone(),
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a.add(b))
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        Ok(AlgebraElement {
            shape: self.shape.clone(),
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a.sub(b))
                .collect(),
        })
    }

    pub fn scaled(&self, s: C64) -> Self {
        AlgebraElement {
            shape: self.shape.clone(),
            blocks: self.blocks.iter().map(|b| b.scaled(s)).collect(),
        }
    }

    /// Blockwise product.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        Ok(AlgebraElement {
            shape: self.shape.clone(),
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a.mul(b))
                .collect(),
        })
    }

    /// Blockwise conjugate transpose.
    pub fn adjoint(&self) -> Self {
        AlgebraElement {
            shape: self.shape.clone(),
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
        }
    }

    /// C*-norm at level 1: max spectral norm over blocks.
    pub fn norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(spectral_norm)
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.frobenius_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.blocks.iter().all(|b| b.is_hermitian(rel_tol))
    }

    /// Flatten to a single vector (blocks concatenated, each row-major).
    pub fn to_vec(&self) -> Vec<C64> {
        let mut v = Vec::with_capacity(self.shape.dim());
        for b in &self.blocks {
            v.extend_from_slice(b.data());
        }
        v
    }

    pub fn from_vec(shape: &AlgebraShape, v: &[C64]) -> Result<Self> {
        if v.len() != shape.dim() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} entries, got {}",
                shape.dim(),
                v.len()
            )));
        }
        let mut blocks = Vec::with_capacity(shape.num_blocks());
        let mut off = 0;
        for &d in shape.block_dims() {
            let mut m = ComplexMatrix::zeros(d, d);
            for r in 0..d {
                for c in 0..d {
                    m.set(r, c, v[off + r * d + c]);
                }
            }
            off += d * d;
            blocks.push(m);
        }
        AlgebraElement::new(shape.clone(), blocks)
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch(
                "elements live in different algebras".into(),
            ));
        }
        Ok(())
    }
}

// ── amplified elements ──────────────────────────────────────────────

/// An element of `M_n(A)`: an `n×n` array of algebra elements, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplifiedElement {
    level: usize,
    shape: AlgebraShape,
    entries: Vec<AlgebraElement>,
}

impl AmplifiedElement {
    pub fn new(level: usize, shape: AlgebraShape, entries: Vec<AlgebraElement>) -> Result<Self> {
        if level == 0 {
            return Err(Error::ShapeMismatch("level must be at least 1".into()));
        }
        if entries.len() != level * level {
            return Err(Error::ShapeMismatch(format!(
                "level {level} needs {} entries, got {}",
                level * level,
                entries.len()
            )));
        }
        for e in &entries {
            if e.shape() != &shape {
                return Err(Error::ShapeMismatch(
                    "amplified entries live in different algebras".into(),
                ));
            }
        }
        Ok(AmplifiedElement {
            level,
            shape,
            entries,
        })
    }

    pub fn zero(shape: &AlgebraShape, level: usize) -> Self {
        AmplifiedElement {
            level,
            shape: shape.clone(),
            entries: vec![AlgebraElement::zero(shape); level * level],
        }
    }

    /// Level-1 wrapper around a plain element.
    pub fn from_element(e: AlgebraElement) -> Self {
        AmplifiedElement {
            level: 1,
            shape: e.shape().clone(),
            entries: vec![e],
        }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn entry(&self, j: usize, k: usize) -> &AlgebraElement {
        &self.entries[j * self.level + k]
    }

    pub fn set_entry(&mut self, j: usize, k: usize, e: AlgebraElement) -> Result<()> {
        if e.shape() != &self.shape {
            return Err(Error::ShapeMismatch("entry has wrong shape".into()));
        }
        self.entries[j * self.level + k] = e;
        Ok(())
    }

    /// `(C*)_{jk} = (C_{kj})*`.
    pub fn adjoint(&self) -> Self {
        let n = self.level;
        let mut out = self.clone();
        for j in 0..n {
            for k in 0..n {
                out.entries[j * n + k] = self.entry(k, j).adjoint();
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        AmplifiedElement::new(self.level, self.shape.clone(), entries)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        AmplifiedElement::new(self.level, self.shape.clone(), entries)
    }

    pub fn scaled(&self, s: C64) -> Self {
        AmplifiedElement {
            level: self.level,
            shape: self.shape.clone(),
            entries: self.entries.iter().map(|e| e.scaled(s)).collect(),
        }
    }

    /// Assemble block `i` as one `(n·d_i)×(n·d_i)` matrix; entry `(j,k)`
    /// occupies rows `[j·d_i, (j+1)·d_i)` and columns `[k·d_i, (k+1)·d_i)`.
    pub fn assembled_block(&self, i: usize) -> ComplexMatrix {
        let n = self.level;
        let d = self.shape.block_dim(i);
        let mut m = ComplexMatrix::zeros(n * d, n * d);
        for j in 0..n {
            for k in 0..n {
                m.set_block(j * d, k * d, self.entry(j, k).block(i));
            }
        }
        m
    }

    /// Inverse of `assembled_block` across all blocks.
    pub fn from_assembled_blocks(
        shape: &AlgebraShape,
        level: usize,
        blocks: &[ComplexMatrix],
    ) -> Result<Self> {
        if blocks.len() != shape.num_blocks() {
            return Err(Error::ShapeMismatch("wrong number of assembled blocks".into()));
        }
        let mut out = AmplifiedElement::zero(shape, level);
        for (i, big) in blocks.iter().enumerate() {
            let d = shape.block_dim(i);
            if big.rows() != level * d || big.cols() != level * d {
                return Err(Error::ShapeMismatch(format!(
                    "assembled block {i} must be {0}x{0}",
                    level * d
                )));
            }
            for j in 0..level {
                for k in 0..level {
                    let mut e = out.entries[j * level + k].clone();
                    let mut blk = e.blocks[i].clone();
                    for r in 0..d {
                        for c in 0..d {
                            blk.set(r, c, big.get(j * d + r, k * d + c));
                        }
                    }
                    e.blocks[i] = blk;
                    out.entries[j * level + k] = e;
                }
            }
        }
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.frobenius_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Flatten to a single coefficient vector (entries in row-major order,
    /// each flattened blockwise). Used for span computations.
    pub fn to_vec(&self) -> Vec<C64> {
        let mut v = Vec::with_capacity(self.level * self.level * self.shape.dim());
        for e in &self.entries {
            v.extend(e.to_vec());
        }
        v
    }

    /// Inverse of [`AmplifiedElement::to_vec`].
    pub fn from_vec(shape: &AlgebraShape, level: usize, v: &[C64]) -> Result<Self> {
        let per = shape.dim();
        if v.len() != level * level * per {
            return Err(Error::ShapeMismatch(format!(
                "expected {} entries, got {}",
                level * level * per,
                v.len()
            )));
        }
        let entries = v
            .chunks(per)
            .map(|chunk| AlgebraElement::from_vec(shape, chunk))
            .collect::<Result<Vec<_>>>()?;
        AmplifiedElement::new(level, shape.clone(), entries)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.level != other.level || self.shape != other.shape {
            return Err(Error::ShapeMismatch(
                "amplified elements are not compatible".into(),
            ));
        }
        Ok(())
    }
}

/// The C*-norm of an amplified element: max over blocks of the spectral norm
/// of the assembled block.
pub fn cstar_norm(c: &AmplifiedElement) -> f64 {
    (0..c.shape().num_blocks())
        .map(|i| spectral_norm(&c.assembled_block(i)))
        .fold(0.0, f64::max)
}

// ── subspaces ───────────────────────────────────────────────────────

/// Structural claims about a subspace. Every set flag is validated at
/// construction; constructing with a false flag is an error.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SubspaceFlags {
    pub star_closed: bool,
    pub contains_unit: bool,
    pub is_subalgebra: bool,
}

impl SubspaceFlags {
    pub fn star() -> Self {
        SubspaceFlags {
            star_closed: true,
            ..Default::default()
        }
    }

    pub fn operator_system() -> Self {
        SubspaceFlags {
            star_closed: true,
            contains_unit: true,
            is_subalgebra: false,
        }
    }

    pub fn subalgebra() -> Self {
        SubspaceFlags {
            star_closed: true,
            contains_unit: true,
            is_subalgebra: true,
        }
    }
}

/// A linear subspace `V ⊆ A`, given by a linearly independent basis.
#[derive(Clone, Debug)]
pub struct Subspace {
    shape: AlgebraShape,
    basis: Vec<AlgebraElement>,
    flags: SubspaceFlags,
    /// Orthonormal (Frobenius) basis of the span, cached for membership tests.
    ortho: Vec<Vec<C64>>,
}

impl Subspace {
    pub fn new(
        shape: AlgebraShape,
        basis: Vec<AlgebraElement>,
        flags: SubspaceFlags,
        tol: &Tolerances,
    ) -> Result<Self> {
        for e in &basis {
            if e.shape() != &shape {
                return Err(Error::ShapeMismatch(
                    "basis element has the wrong shape".into(),
                ));
            }
        }
        let vectors: Vec<Vec<C64>> = basis.iter().map(|e| e.to_vec()).collect();
        let ortho = matrix::orthonormalize(&vectors, tol.rank_cutoff);
        if ortho.len() != basis.len() {
            return Err(Error::InvalidSubspace(format!(
                "declared basis of size {} has rank {}",
                basis.len(),
                ortho.len()
            )));
        }
        let v = Subspace {
            shape,
            basis,
            flags,
            ortho,
        };
        v.validate_flags(tol)?;
        Ok(v)
    }

    fn validate_flags(&self, tol: &Tolerances) -> Result<()> {
        if self.flags.is_subalgebra && !(self.flags.star_closed && self.flags.contains_unit) {
            return Err(Error::InvalidSubspace(
                "a subalgebra must also be flagged star-closed and unital".into(),
            ));
        }
        if self.flags.contains_unit {
            let unit = AlgebraElement::unit(&self.shape);
            let r = self.membership_residual(&unit);
            if r > tol.rank_cutoff {
                return Err(Error::InvalidSubspace(format!(
                    "unit is not in the span (residual {r:.3e})"
                )));
            }
        }
        if self.flags.star_closed {
            for (k, e) in self.basis.iter().enumerate() {
                let r = self.membership_residual(&e.adjoint());
                if r > tol.rank_cutoff {
                    return Err(Error::InvalidSubspace(format!(
                        "adjoint of basis element {k} leaves the span (residual {r:.3e})"
                    )));
                }
            }
        }
        if self.flags.is_subalgebra {
            for (j, a) in self.basis.iter().enumerate() {
                for (k, b) in self.basis.iter().enumerate() {
                    let p = a.multiply(b)?;
                    let r = self.membership_residual(&p);
                    if r > tol.rank_cutoff {
                        return Err(Error::InvalidSubspace(format!(
                            "product of basis elements {j} and {k} leaves the span (residual {r:.3e})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn basis(&self) -> &[AlgebraElement] {
        &self.basis
    }

    pub fn flags(&self) -> SubspaceFlags {
        self.flags
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Whether the subspace is all of `A`.
    pub fn is_full(&self) -> bool {
        self.dim() == self.shape.dim()
    }

    /// Distance from `x` to the span, relative to `max(1, |x|_F)`.
    pub fn membership_residual(&self, x: &AlgebraElement) -> f64 {
        let mut v = x.to_vec();
        for b in &self.ortho {
            let c = matrix::inner(&v, b);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= c * bi;
            }
        }
        matrix::vec_norm(&v) / x.frobenius_norm().max(1.0)
    }

    pub fn contains(&self, x: &AlgebraElement, tol: f64) -> bool {
        self.membership_residual(x) <= tol
    }

    /// Orthogonal (Frobenius) projection of `x` onto the span.
    pub fn project(&self, x: &AlgebraElement) -> AlgebraElement {
        let v = x.to_vec();
        let mut acc = vec![Complex64::new(0.0, 0.0); v.len()];
        for b in &self.ortho {
            let c = matrix::inner(&v, b);
            for (ai, bi) in acc.iter_mut().zip(b) {
                *ai += c * bi;
            }
        }
        AlgebraElement::from_vec(&self.shape, &acc).expect("projection keeps the shape")
    }

    /// Basis `{V_i ⊗ E_pq}` of `M_n(V)`, ordered basis-major then `p` then `q`.
    pub fn amplified_basis(&self, level: usize) -> Vec<AmplifiedElement> {
        let mut out = Vec::with_capacity(self.dim() * level * level);
        for e in &self.basis {
            for p in 0..level {
                for q in 0..level {
                    let mut amp = AmplifiedElement::zero(&self.shape, level);
                    amp.set_entry(p, q, e.clone()).unwrap();
                    out.push(amp);
                }
            }
        }
        out
    }

    /// Coefficients of the basis expansion of each basis element's adjoint:
    /// `V_j* = Σ_l star[l][j] V_l`. Only meaningful when star-closed.
    pub fn star_matrix(&self) -> Result<Vec<Vec<C64>>> {
        if !self.flags.star_closed {
            return Err(Error::ContractViolation(
                "star_matrix needs a star-closed subspace".into(),
            ));
        }
        let k = self.dim();
        // Solve the Gram system G c = rhs for each adjoint.
        let gram = ComplexMatrix::from_fn(k, k, |r, c| {
            matrix::inner(&self.basis[c].to_vec(), &self.basis[r].to_vec())
        });
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(k);
        for j in 0..k {
            let target = self.basis[j].adjoint().to_vec();
            let rhs: Vec<C64> = (0..k)
                .map(|r| matrix::inner(&target, &self.basis[r].to_vec()))
                .collect();
            cols.push(gram.solve(&rhs)?);
        }
        // star[l][j]: coefficient of V_l in V_j*.
        let mut star = vec![vec![C64::new(0.0, 0.0); k]; k];
        for (j, col) in cols.iter().enumerate() {
            for l in 0..k {
                star[l][j] = col[l];
            }
        }
        Ok(star)
    }
}

/// The spec'd free function form of [`Subspace::amplified_basis`].
pub fn amplify_subspace(v: &Subspace, level: usize) -> Vec<AmplifiedElement> {
    v.amplified_basis(level)
}
