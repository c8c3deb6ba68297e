//! From a norm-one annihilating functional to a concrete compression: a
//! block *-representation with one multiplicity per algebra block, unit
//! vectors that realize the functional as a matrix coefficient of the
//! amplified representation, and rank-bounded projections whose compression
//! `Ψ(a) = Q·π(a)·P` kills the quotienting subspace while reproducing the
//! functional.
//!
//! The construction factors each certificate block through its singular
//! value decomposition `T_i = Σ_j σ_j u_j v_j^*`: the multiplicity of block
//! `i` is `rank T_i`, the `√σ_j`-weighted segments of the left singular
//! vectors assemble the vector family `ξ_k`, those of the right singular
//! vectors the family `η_j`, and `Σ_{ij} σ_{ij} = ‖ψ‖ = 1` makes both
//! stacked vectors unit. `P` and `Q` project onto the spans of `{ξ_k}` and
//! `{η_j}`, so their ranks never exceed the level.

use crate::algebra::{AlgebraElement, AlgebraShape, AmplifiedElement, Subspace};
use crate::check::InvariantCheck;
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::matrix::{self, svd, ComplexMatrix, C64};
use crate::quotient::Functional;

// ── representations ─────────────────────────────────────────────────

/// Block *-representation `π(a) = ⊕_i (a_i ⊗ I_{m_i})` of a block algebra,
/// determined by one multiplicity per block. Blocks with multiplicity zero
/// are simply absent from the representation space.
#[derive(Clone, Debug)]
pub struct RepresentationData {
    shape: AlgebraShape,
    multiplicities: Vec<usize>,
}

impl RepresentationData {
    pub fn new(shape: AlgebraShape, multiplicities: Vec<usize>) -> Result<Self> {
        if multiplicities.len() != shape.num_blocks() {
            return Err(Error::ShapeMismatch(format!(
                "{} multiplicities for {} blocks",
                multiplicities.len(),
                shape.num_blocks()
            )));
        }
        Ok(RepresentationData {
            shape,
            multiplicities,
        })
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    /// Dimension of the representation space `⊕_i C^{d_i} ⊗ C^{m_i}`.
    pub fn hilbert_dim(&self) -> usize {
        self.shape
            .block_dims()
            .iter()
            .zip(&self.multiplicities)
            .map(|(&d, &m)| d * m)
            .sum()
    }

    /// Start of block `i`'s slice of the representation space. Within the
    /// slice, coordinate `r` of `C^{d_i}` and copy `j` of `C^{m_i}` sit at
    /// index `r·m_i + j`.
    pub fn block_offset(&self, i: usize) -> usize {
        self.shape
            .block_dims()
            .iter()
            .zip(&self.multiplicities)
            .take(i)
            .map(|(&d, &m)| d * m)
            .sum()
    }

    /// The representing matrix `⊕_i (a_i ⊗ I_{m_i})`.
    pub fn represent(&self, a: &AlgebraElement) -> Result<ComplexMatrix> {
        if a.shape() != &self.shape {
            return Err(Error::ShapeMismatch(
                "element shape differs from representation shape".into(),
            ));
        }
        let h = self.hilbert_dim();
        let mut out = ComplexMatrix::zeros(h, h);
        for (i, &m) in self.multiplicities.iter().enumerate() {
            if m == 0 {
                continue;
            }
            let off = self.block_offset(i);
            out.set_block(off, off, &a.block(i).kron(&ComplexMatrix::identity(m)));
        }
        Ok(out)
    }

    /// The amplified representing matrix: entry block `(j, k)` of the
    /// `n·h`-dimensional output is `represent(c_jk)`.
    pub fn represent_amplified(&self, c: &AmplifiedElement) -> Result<ComplexMatrix> {
        let n = c.level();
        let h = self.hilbert_dim();
        let mut out = ComplexMatrix::zeros(n * h, n * h);
        for j in 0..n {
            for k in 0..n {
                out.set_block(j * h, k * h, &self.represent(c.entry(j, k))?);
            }
        }
        Ok(out)
    }

    /// Unital *-homomorphism checks on all basis pairs: multiplicativity,
    /// adjoint-compatibility, and preservation of the unit.
    pub fn validate(&self, tol: &Tolerances) -> Result<Vec<InvariantCheck>> {
        let basis = AlgebraElement::basis(&self.shape);
        let mut mult = 0.0f64;
        let mut star = 0.0f64;
        for a in &basis {
            let ra = self.represent(a)?;
            star = star.max(self.represent(&a.adjoint())?.sub(&ra.adjoint()).max_abs());
            for b in &basis {
                let product = self.represent(&a.multiply(b)?)?;
                mult = mult.max(product.sub(&ra.mul(&self.represent(b)?)).max_abs());
            }
        }
        let unit = self
            .represent(&AlgebraElement::unit(&self.shape))?
            .sub(&ComplexMatrix::identity(self.hilbert_dim()))
            .max_abs();
        Ok(vec![
            InvariantCheck::new("representation_multiplicative", mult, tol.hermitian),
            InvariantCheck::new("representation_star_compatible", star, tol.hermitian),
            InvariantCheck::new("representation_unital", unit, tol.hermitian),
        ])
    }
}

// ── functional factorization ────────────────────────────────────────

/// Factor a norm-one functional `ψ(C) = Σ_i tr(T_i C_i)` through a
/// representation: returns the representation plus vector families
/// `ξ_1..ξ_n`, `η_1..η_n` in its space with
/// `ψ(C) = Σ_{jk} ⟨π(C_jk) ξ_k, η_j⟩`. Both stacked families are unit
/// vectors because the singular values of the blocks sum to `‖ψ‖ = 1`.
#[allow(clippy::type_complexity)]
pub fn represent_functional(
    psi: &Functional,
    shape: &AlgebraShape,
    tol: &Tolerances,
) -> Result<(RepresentationData, Vec<Vec<C64>>, Vec<Vec<C64>>)> {
    let deviation = (psi.norm() - 1.0).abs();
    if deviation > tol.functional_norm {
        return Err(Error::ContractViolation(format!(
            "functional must have norm 1 (deviation {deviation:.3e})"
        )));
    }
    let n = psi.level();
    if psi.blocks().len() != shape.num_blocks() {
        return Err(Error::ShapeMismatch(
            "functional block count differs from algebra shape".into(),
        ));
    }
    let mut facts = Vec::new();
    let mut multiplicities = Vec::new();
    for (i, &d) in shape.block_dims().iter().enumerate() {
        let t = psi.block(i);
        if t.rows() != n * d {
            return Err(Error::ShapeMismatch(format!(
                "functional block {i} has side {}, expected {}",
                t.rows(),
                n * d
            )));
        }
        let fact = svd(t)?;
        multiplicities.push(fact.rank(tol.rank_cutoff));
        facts.push(fact);
    }
    let rep = RepresentationData::new(shape.clone(), multiplicities)?;

    let h = rep.hilbert_dim();
    let mut xi = vec![vec![C64::new(0.0, 0.0); h]; n];
    let mut eta = vec![vec![C64::new(0.0, 0.0); h]; n];
    for (i, &d) in shape.block_dims().iter().enumerate() {
        let m = rep.multiplicities()[i];
        let off = rep.block_offset(i);
        let fact = &facts[i];
        for j in 0..m {
            let w = fact.singular_values[j].max(0.0).sqrt();
            let u = fact.left.column(j);
            let v = fact.right.column(j);
            for slot in 0..n {
                for r in 0..d {
                    let idx = off + r * m + j;
                    xi[slot][idx] += C64::new(w, 0.0) * u[slot * d + r];
                    eta[slot][idx] += C64::new(w, 0.0) * v[slot * d + r];
                }
            }
        }
    }
    Ok((rep, xi, eta))
}

// ── projections and compression ─────────────────────────────────────

/// A representation together with the vector families realizing a
/// functional and the projections `P`, `Q` onto their spans. The
/// compression `Ψ(a) = Q·π(a)·P` is completely contractive, kills the
/// quotienting subspace, and reproduces the functional as
/// `ψ(C) = ⟨Ψ_n(C)ξ, η⟩`.
#[derive(Clone, Debug)]
pub struct GnsData {
    rep: RepresentationData,
    xi: Vec<Vec<C64>>,
    eta: Vec<Vec<C64>>,
    p: ComplexMatrix,
    q: ComplexMatrix,
}

/// Orthogonal projection onto the span of `vectors` (zero and dependent
/// vectors are dropped by the rank cutoff).
fn span_projection(vectors: &[Vec<C64>], dim: usize, rel_cutoff: f64) -> ComplexMatrix {
    let basis = matrix::orthonormalize(vectors, rel_cutoff);
    let mut p = ComplexMatrix::zeros(dim, dim);
    for b in &basis {
        for r in 0..dim {
            for c in 0..dim {
                p.add_assign_at(r, c, b[r] * b[c].conj());
            }
        }
    }
    p
}

/// Build the span projections for represented vectors and check that the
/// compression annihilates every basis element of `v`.
pub fn build_projections(
    rep: RepresentationData,
    xi: Vec<Vec<C64>>,
    eta: Vec<Vec<C64>>,
    v: &Subspace,
    tol: &Tolerances,
) -> Result<GnsData> {
    let h = rep.hilbert_dim();
    if xi.iter().chain(&eta).any(|vec| vec.len() != h) {
        return Err(Error::ShapeMismatch(
            "vector dimensions differ from the representation space".into(),
        ));
    }
    let p = span_projection(&xi, h, tol.rank_cutoff);
    let q = span_projection(&eta, h, tol.rank_cutoff);
    let data = GnsData {
        rep,
        xi,
        eta,
        p,
        q,
    };
    let mut worst = 0.0f64;
    for d in v.basis() {
        worst = worst.max(matrix::spectral_norm(&data.compress(d)?));
    }
    if worst > tol.annihilation {
        return Err(Error::ContractViolation(format!(
            "compression fails to annihilate the subspace (residual {worst:.3e})"
        )));
    }
    Ok(data)
}

impl GnsData {
    pub fn rep(&self) -> &RepresentationData {
        &self.rep
    }

    pub fn xi(&self) -> &[Vec<C64>] {
        &self.xi
    }

    pub fn eta(&self) -> &[Vec<C64>] {
        &self.eta
    }

    /// Projection onto the span of the `ξ` family.
    pub fn p(&self) -> &ComplexMatrix {
        &self.p
    }

    /// Projection onto the span of the `η` family.
    pub fn q(&self) -> &ComplexMatrix {
        &self.q
    }

    /// The level the underlying functional lived at.
    pub fn level(&self) -> usize {
        self.xi.len()
    }

    /// The compressed map `Ψ(a) = Q·π(a)·P`.
    pub fn compress(&self, a: &AlgebraElement) -> Result<ComplexMatrix> {
        Ok(self.q.mul(&self.rep.represent(a)?).mul(&self.p))
    }

    /// The amplification of the compressed map: block `(j, k)` of the
    /// output is `Ψ(c_jk)`.
    pub fn compress_amplified(&self, c: &AmplifiedElement) -> Result<ComplexMatrix> {
        let n = c.level();
        let h = self.rep.hilbert_dim();
        let mut out = ComplexMatrix::zeros(n * h, n * h);
        for j in 0..n {
            for k in 0..n {
                out.set_block(j * h, k * h, &self.compress(c.entry(j, k))?);
            }
        }
        Ok(out)
    }

    /// Stack the `ξ` family into one vector of the amplified space.
    fn stacked_xi(&self) -> Vec<C64> {
        self.xi.concat()
    }

    fn stacked_eta(&self) -> Vec<C64> {
        self.eta.concat()
    }

    /// The matrix coefficient `⟨π_n(C)ξ, η⟩`, which reproduces the
    /// functional this data was built from.
    pub fn reconstruct(&self, c: &AmplifiedElement) -> Result<C64> {
        if c.level() != self.level() {
            return Err(Error::ShapeMismatch(
                "element level differs from the represented functional".into(),
            ));
        }
        let big = self.rep.represent_amplified(c)?;
        Ok(matrix::inner(
            &big.apply(&self.stacked_xi()),
            &self.stacked_eta(),
        ))
    }

    /// Same coefficient taken through the compression,
    /// `⟨Ψ_n(C)ξ, η⟩`; equal to `reconstruct` because `P` fixes every
    /// `ξ_k` and `Q` every `η_j`.
    pub fn reconstruct_compressed(&self, c: &AmplifiedElement) -> Result<C64> {
        if c.level() != self.level() {
            return Err(Error::ShapeMismatch(
                "element level differs from the represented functional".into(),
            ));
        }
        let big = self.compress_amplified(c)?;
        Ok(matrix::inner(
            &big.apply(&self.stacked_xi()),
            &self.stacked_eta(),
        ))
    }

    /// Structural invariants: unit stacked vectors, Hermitian idempotent
    /// projections that fix their defining families, rank bounds by the
    /// level, and annihilation of the supplied subspace.
    pub fn validate(&self, v: &Subspace, tol: &Tolerances) -> Result<Vec<InvariantCheck>> {
        let n = self.level();
        let mut checks = Vec::new();
        let xi_norm = matrix::vec_norm(&self.stacked_xi());
        let eta_norm = matrix::vec_norm(&self.stacked_eta());
        checks.push(InvariantCheck::new(
            "xi_unit_norm",
            (xi_norm - 1.0).abs(),
            tol.functional_norm,
        ));
        checks.push(InvariantCheck::new(
            "eta_unit_norm",
            (eta_norm - 1.0).abs(),
            tol.functional_norm,
        ));
        for (name, proj, family) in [("p", &self.p, &self.xi), ("q", &self.q, &self.eta)] {
            checks.push(InvariantCheck::new(
                format!("projection_{name}_idempotent"),
                proj.mul(proj).sub(proj).max_abs(),
                tol.structural,
            ));
            checks.push(InvariantCheck::new(
                format!("projection_{name}_hermitian"),
                proj.sub(&proj.adjoint()).max_abs(),
                tol.structural,
            ));
            let rank = proj.trace().re.round() as usize;
            checks.push(InvariantCheck::new(
                format!("projection_{name}_rank_at_most_level"),
                (rank as f64 - n as f64).max(0.0),
                0.0,
            ));
            let mut fix = 0.0f64;
            for vec in family.iter() {
                let diff: Vec<C64> = proj
                    .apply(vec)
                    .iter()
                    .zip(vec)
                    .map(|(a, b)| a - b)
                    .collect();
                fix = fix.max(matrix::vec_norm(&diff));
            }
            checks.push(InvariantCheck::new(
                format!("projection_{name}_fixes_family"),
                fix,
                tol.structural,
            ));
        }
        let mut annihilation = 0.0f64;
        for d in v.basis() {
            annihilation = annihilation.max(matrix::spectral_norm(&self.compress(d)?));
        }
        checks.push(InvariantCheck::new(
            "compression_annihilates_subspace",
            annihilation,
            tol.annihilation,
        ));
        Ok(checks)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{cstar_norm, SubspaceFlags};
    use crate::config::Config;
    use crate::quotient::{quotient_norm, Functional};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn m2() -> AlgebraShape {
        AlgebraShape::new(vec![2]).unwrap()
    }

    fn span_identity(shape: &AlgebraShape) -> Subspace {
        Subspace::new(
            shape.clone(),
            vec![AlgebraElement::unit(shape)],
            SubspaceFlags::operator_system(),
            &Tolerances::default(),
        )
        .unwrap()
    }

    use crate::sampling::{random_amplified, random_element};

    /// Every element of a basis of `M_n(A)`: each algebra basis element in
    /// each matrix slot.
    fn amplified_basis(s: &AlgebraShape, n: usize) -> Vec<AmplifiedElement> {
        let mut out = Vec::new();
        for j in 0..n {
            for k in 0..n {
                for b in AlgebraElement::basis(s) {
                    let mut c = AmplifiedElement::zero(s, n);
                    c.set_entry(j, k, b.clone()).unwrap();
                    out.push(c);
                }
            }
        }
        out
    }

    #[test]
    fn representation_is_star_homomorphism() {
        let s = AlgebraShape::new(vec![2, 3]).unwrap();
        let rep = RepresentationData::new(s, vec![2, 1]).unwrap();
        assert_eq!(rep.hilbert_dim(), 2 * 2 + 3);
        let checks = rep.validate(&Tolerances::default()).unwrap();
        assert!(crate::check::all_pass(&checks), "{checks:?}");
    }

    #[test]
    fn zero_multiplicity_blocks_are_absent() {
        let s = AlgebraShape::new(vec![2, 3]).unwrap();
        let rep = RepresentationData::new(s.clone(), vec![0, 2]).unwrap();
        assert_eq!(rep.hilbert_dim(), 6);
        // An element supported on the dropped block represents to zero.
        let a = AlgebraElement::from_block(&s, 0, ComplexMatrix::identity(2)).unwrap();
        assert_eq!(rep.represent(&a).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn worked_example_functional_representation() {
        let s = m2();
        let t = ComplexMatrix::real_diag(&[0.5, -0.5]);
        let psi = Functional::new(1, vec![t]).unwrap();
        let tol = Tolerances::default();
        let (rep, xi, eta) = represent_functional(&psi, &s, &tol).unwrap();
        assert_eq!(rep.multiplicities(), &[2]);
        assert_eq!(rep.hilbert_dim(), 4);

        // Unit vectors, orthogonal to each other.
        let ip = matrix::inner(&xi[0], &eta[0]);
        assert!((matrix::vec_norm(&xi[0]) - 1.0).abs() < 1e-12);
        assert!((matrix::vec_norm(&eta[0]) - 1.0).abs() < 1e-12);
        assert!(ip.norm() < 1e-12, "xi and eta must be orthogonal: {ip}");

        // The matrix coefficient reproduces (C₁₁ − C₂₂)/2 on random input.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let c = random_amplified(&mut rng, &s, 1);
        let m = c.entry(0, 0).block(0);
        let expected = (m.get(0, 0) - m.get(1, 1)) * C64::new(0.5, 0.0);
        let data = build_projections(rep, xi, eta, &span_identity(&s), &tol).unwrap();
        let got = data.reconstruct(&c).unwrap();
        assert!((got - expected).norm() < 1e-10);

        // Orthogonality of the vectors makes the projections orthogonal to
        // each other, so the unit compresses to zero.
        assert!(data.q().mul(data.p()).max_abs() < 1e-10);
        let unit = AlgebraElement::unit(&s);
        assert!(matrix::spectral_norm(&data.compress(&unit).unwrap()) < 1e-10);

        // The compression attains the quotient norm of diag(1, −1).
        let hard = AlgebraElement::new(s.clone(), vec![ComplexMatrix::real_diag(&[1.0, -1.0])])
            .unwrap();
        let norm = matrix::spectral_norm(&data.compress(&hard).unwrap());
        assert!((norm - 1.0).abs() < 1e-10, "norm {norm}");
    }

    #[test]
    fn pure_state_gives_rank_one_data() {
        let s = m2();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let raw: Vec<C64> = (0..2)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let nrm = matrix::vec_norm(&raw);
        let v: Vec<C64> = raw.iter().map(|x| x / nrm).collect();
        let t = ComplexMatrix::from_fn(2, 2, |r, c| v[r] * v[c].conj());
        let psi = Functional::new(1, vec![t]).unwrap();
        let tol = Tolerances::default();
        let (rep, xi, eta) = represent_functional(&psi, &s, &tol).unwrap();
        assert_eq!(rep.multiplicities(), &[1]);
        // A state is realized by a single cyclic vector: ξ = η.
        let diff: Vec<C64> = xi[0].iter().zip(&eta[0]).map(|(a, b)| a - b).collect();
        assert!(matrix::vec_norm(&diff) < 1e-12);
        // ⟨π(C)ξ, ξ⟩ = ⟨C v, v⟩.
        let c = random_amplified(&mut rng, &s, 1);
        let data = build_projections(
            rep,
            xi,
            eta,
            &Subspace::new(s.clone(), vec![], SubspaceFlags::default(), &tol).unwrap(),
            &tol,
        )
        .unwrap();
        let got = data.reconstruct(&c).unwrap();
        let expected = matrix::inner(&c.entry(0, 0).block(0).apply(&v), &v);
        assert!((got - expected).norm() < 1e-12);
    }

    #[test]
    fn parallel_components_collapse_projection_rank() {
        let s = m2();
        // Rank-one certificate at level 2 whose left vector has two equal
        // slot segments: both ξ components are parallel, so P has rank 1
        // even though the level allows rank 2.
        let seg = [C64::new(0.5, 0.0), C64::new(0.5, 0.0)];
        let u: Vec<C64> = seg.iter().chain(seg.iter()).copied().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let raw: Vec<C64> = (0..4)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let nrm = matrix::vec_norm(&raw);
        let w: Vec<C64> = raw.iter().map(|x| x / nrm).collect();
        let t = ComplexMatrix::from_fn(4, 4, |r, c| u[r] * w[c].conj());
        let psi = Functional::new(2, vec![t]).unwrap();
        let tol = Tolerances::default();
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        let (rep, xi, eta) = represent_functional(&psi, &s, &tol).unwrap();
        let empty = Subspace::new(s.clone(), vec![], SubspaceFlags::default(), &tol).unwrap();
        let data = build_projections(rep, xi, eta, &empty, &tol).unwrap();
        assert!((data.p().trace().re - 1.0).abs() < 1e-10);
        let checks = data.validate(&empty, &tol).unwrap();
        assert!(crate::check::all_pass(&checks), "{checks:?}");
    }

    #[test]
    fn solver_certificates_reconstruct_over_full_basis() {
        let cfg = Config::default();
        let s = AlgebraShape::new(vec![2, 1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let h = {
            let e = random_element(&mut rng, &s);
            e.add(&e.adjoint()).unwrap().scaled(C64::new(0.5, 0.0))
        };
        let v = Subspace::new(
            s.clone(),
            vec![AlgebraElement::unit(&s), h],
            SubspaceFlags::operator_system(),
            &cfg.tol,
        )
        .unwrap();
        for n in [1, 2] {
            let c = random_amplified(&mut rng, &s, n);
            let res = quotient_norm(&c, &v, &cfg).unwrap();
            let psi = res.certificate.expect("nonzero value carries certificate");
            let (rep, xi, eta) = represent_functional(&psi, &s, &cfg.tol).unwrap();
            let data = build_projections(rep, xi, eta, &v, &cfg.tol).unwrap();

            // Reconstruction residual over the full basis is the oracle for
            // the factorization.
            let mut worst = 0.0f64;
            for b in amplified_basis(&s, n) {
                let direct = psi.apply(&b).unwrap();
                let through_rep = data.reconstruct(&b).unwrap();
                let through_compression = data.reconstruct_compressed(&b).unwrap();
                worst = worst.max((direct - through_rep).norm());
                worst = worst.max((direct - through_compression).norm());
            }
            assert!(worst <= cfg.tol.reconstruction, "residual {worst:.3e}");

            // The compression never exceeds quotient norms (it factors
            // through the quotient) and is contractive on the algebra.
            for _ in 0..2 {
                let a = random_element(&mut rng, &s);
                let compressed = matrix::spectral_norm(&data.compress(&a).unwrap());
                assert!(compressed <= a.norm() + cfg.tol.contraction);
                let amp = AmplifiedElement::from_element(a);
                let qn = quotient_norm(&amp, &v, &cfg).unwrap().value;
                assert!(compressed <= qn + cfg.tol.overshoot, "{compressed} vs {qn}");
            }

            let checks = data.validate(&v, &cfg.tol).unwrap();
            assert!(crate::check::all_pass(&checks), "{checks:?}");
        }
    }

    #[test]
    fn compression_is_completely_contractive() {
        let cfg = Config::default();
        let s = m2();
        let v = span_identity(&s);
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let c = random_amplified(&mut rng, &s, 2);
        let res = quotient_norm(&c, &v, &cfg).unwrap();
        let psi = res.certificate.unwrap();
        let (rep, xi, eta) = represent_functional(&psi, &s, &cfg.tol).unwrap();
        let data = build_projections(rep, xi, eta, &v, &cfg.tol).unwrap();
        for n in 1..=3 {
            let x = random_amplified(&mut rng, &s, n);
            let compressed = matrix::spectral_norm(&data.compress_amplified(&x).unwrap());
            assert!(
                compressed <= cstar_norm(&x) + cfg.tol.contraction,
                "level {n}: {compressed} vs {}",
                cstar_norm(&x)
            );
        }
    }

    #[test]
    fn certificate_attainment_through_compression() {
        // The defining identity ψ(C) = ⟨Ψ_n(C)ξ, η⟩ forces the compressed
        // norm of C to be at least the certified value; complete
        // contractivity caps it at the quotient norm, so it is exact.
        let cfg = Config::default();
        let s = m2();
        let v = span_identity(&s);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let c = random_amplified(&mut rng, &s, 2);
        let res = quotient_norm(&c, &v, &cfg).unwrap();
        let psi = res.certificate.unwrap();
        let (rep, xi, eta) = represent_functional(&psi, &s, &cfg.tol).unwrap();
        let data = build_projections(rep, xi, eta, &v, &cfg.tol).unwrap();
        let compressed = matrix::spectral_norm(&data.compress_amplified(&c).unwrap());
        assert!(compressed >= res.value - res.duality_gap - 1e-8);
        assert!(compressed <= res.value + cfg.tol.overshoot);
    }

    #[test]
    fn norm_deviation_is_rejected() {
        let t = ComplexMatrix::real_diag(&[0.7, -0.5]);
        let psi = Functional::new(1, vec![t]).unwrap();
        assert!(matches!(
            represent_functional(&psi, &m2(), &Tolerances::default()),
            Err(Error::ContractViolation(_))
        ));
    }
}
