//! Concrete realizations of quotient operator spaces, assembled from
//! families of certified norming functionals.
//!
//! Given a subspace `V ⊆ A = ⊕_i M_{d_i}` and a finite probe family with
//! certified quotient norms, the builders here produce a representation
//! `π` on an explicit finite-dimensional space together with projections
//! and symmetries realizing the quotient norm through one of four maps:
//!
//! - **general**: `Ψ(a) = Q π(a) P` — kills `V`, completely contractive;
//! - **star** (`V` star-closed): the space is doubled, a swap symmetry `U`
//!   commutes with `π`, and `Ψ(a) = P U π(a) P` is additionally a *-map;
//! - **system** (`V` an operator system): with `Z = [P, U]`, the map
//!   `Ψ(a) = ½ P [Z, π(a)] P` agrees with the star form, and `Z* = −Z`,
//!   `‖Z‖ ≤ 1`, `PZ = Z(I−P)`;
//! - **subalgebra** (`V = B` a unital C*-subalgebra): with `P̂` the
//!   projection onto `span π(B)·range P` and `X = 2P̂ − I`, the derivation
//!   `Θ(a) = ½ [iX, π(a)]` is a completely contractive *-map with
//!   `Θ(B) = 0` obeying the Leibniz inequality.
//!
//! Finite families truncate the construction: on the probes the maps
//! reproduce the certified norms exactly (within tolerance); on arbitrary
//! elements they are provably one-sided — never above the quotient norm —
//! and the verification reports record the truncation slack separately
//! from genuine failures.

use crate::algebra::{cstar_norm, AlgebraElement, AlgebraShape, AmplifiedElement, Subspace};
use crate::check::InvariantCheck;
use crate::config::{Config, Tolerances};
use crate::error::{Error, Result};
use crate::gns::{represent_functional, RepresentationData};
use crate::matrix::{self, ComplexMatrix, C64};
use crate::quotient::{quotient_norm, CertifiedNorm};
use crate::sampling;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// ── probe families ───────────────────────────────────────────────────

/// One probe: an element of some matrix level over the algebra, together
/// with its certified quotient norm. Probes whose quotient norm is zero
/// (elements of `M_n(V)`) carry no certificate and contribute no
/// functional to the realization.
#[derive(Clone, Debug)]
pub struct Probe {
    pub element: AmplifiedElement,
    pub certificate: Option<CertifiedNorm>,
}

impl Probe {
    pub fn level(&self) -> usize {
        self.element.level()
    }

    /// The certified quotient norm (zero when no certificate is present).
    pub fn certified_value(&self) -> f64 {
        self.certificate.as_ref().map_or(0.0, |c| c.value)
    }
}

/// A finite family of certified probes over one algebra shape: the
/// truncated stand-in for the full family of norm-one annihilating
/// functionals that the exact construction sums over.
#[derive(Clone, Debug)]
pub struct ProbeSet {
    shape: AlgebraShape,
    probes: Vec<Probe>,
}

impl ProbeSet {
    /// Certify each element against `v` with the quotient-norm solver.
    /// Elements inside `M_n(V)` (quotient norm ~ 0) are kept as
    /// certificate-free probes; every other probe must come back with a
    /// dual certificate or the construction cannot proceed.
    pub fn from_elements(
        elements: Vec<AmplifiedElement>,
        v: &Subspace,
        cfg: &Config,
    ) -> Result<Self> {
        let shape = v.shape().clone();
        let mut probes = Vec::new();
        for (idx, c) in elements.into_iter().enumerate() {
            if c.shape() != &shape {
                return Err(Error::ShapeMismatch(format!(
                    "probe {idx} has a different algebra shape"
                )));
            }
            let r = quotient_norm(&c, v, cfg)?;
            let scale = cstar_norm(&c).max(1.0);
            if r.value <= cfg.tol.quotient_zero * scale {
                probes.push(Probe {
                    element: c,
                    certificate: None,
                });
            } else {
                if r.certificate.is_none() {
                    return Err(Error::ContractViolation(format!(
                        "probe {idx} has nonzero quotient norm but no dual certificate"
                    )));
                }
                probes.push(Probe {
                    element: c,
                    certificate: Some(r),
                });
            }
        }
        Ok(ProbeSet { shape, probes })
    }

    /// The default probe family: all algebra basis elements at level 1,
    /// plus `randoms_per_level` random pairs (one general, one Hermitian)
    /// at each level `1..=levels`, plus the adjoints of the general random
    /// draws when `v` is star-closed. Randomness is seeded from the
    /// configuration, so the family is reproducible.
    pub fn generate(
        v: &Subspace,
        levels: usize,
        randoms_per_level: usize,
        cfg: &Config,
    ) -> Result<Self> {
        if levels == 0 {
            return Err(Error::InvalidInput("probe levels must be ≥ 1".into()));
        }
        let s = v.shape();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut elements: Vec<AmplifiedElement> = AlgebraElement::basis(s)
            .into_iter()
            .map(AmplifiedElement::from_element)
            .collect();
        for n in 1..=levels {
            for _ in 0..randoms_per_level {
                let g = sampling::random_amplified(&mut rng, s, n);
                if v.flags().star_closed {
                    elements.push(g.adjoint());
                }
                elements.push(g);
                elements.push(sampling::random_hermitian_amplified(&mut rng, s, n));
            }
        }
        Self::from_elements(elements, v, cfg)
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn probes(&self) -> &[Probe] {
        &self.probes
    }

    pub fn len(&self) -> usize {
        self.probes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probes.is_empty()
    }

    /// Highest matrix level appearing in the family.
    pub fn max_level(&self) -> usize {
        self.probes.iter().map(|p| p.level()).max().unwrap_or(0)
    }

    /// Concatenate two probe families over the same algebra.
    pub fn merge(mut self, other: ProbeSet) -> Result<ProbeSet> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch(
                "cannot merge probe families over different algebras".into(),
            ));
        }
        self.probes.extend(other.probes);
        Ok(self)
    }
}

// ── assembly of the direct-sum representation ────────────────────────

/// The merged representation for a probe family, with orthonormal frames
/// spanning the ranges of the projections `P` (from the `ξ` families) and
/// `Q` (from the `η` families).
struct Assembly {
    rep: RepresentationData,
    fp: Vec<Vec<C64>>,
    fq: Vec<Vec<C64>>,
}

/// Scatter a vector from `src` coordinates into `dst` coordinates,
/// placing multiplicity copy `j` of block `i` at copy `off[i] + j`.
fn embed_vector(
    src: &RepresentationData,
    dst: &RepresentationData,
    off: &[usize],
    vec: &[C64],
) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); dst.hilbert_dim()];
    for (i, &d) in src.shape().block_dims().iter().enumerate() {
        let ms = src.multiplicities()[i];
        let md = dst.multiplicities()[i];
        let so = src.block_offset(i);
        let do_ = dst.block_offset(i);
        for r in 0..d {
            for j in 0..ms {
                out[do_ + r * md + off[i] + j] = vec[so + r * ms + j];
            }
        }
    }
    out
}

/// Factor every certified probe functional through its representation and
/// merge the summands into one direct-sum representation (block `i`
/// multiplicities add up), embedding all vector families into it.
fn assemble(probes: &ProbeSet, tol: &Tolerances) -> Result<Assembly> {
    let shape = probes.shape().clone();
    let nb = shape.num_blocks();
    let mut parts = Vec::new();
    for probe in probes.probes() {
        if let Some(cert) = &probe.certificate {
            let psi = cert.certificate.as_ref().ok_or_else(|| {
                Error::ContractViolation("certified probe lost its functional".into())
            })?;
            parts.push(represent_functional(psi, &shape, tol)?);
        }
    }
    let mut total = vec![0usize; nb];
    let mut offsets = Vec::new();
    for (rep, _, _) in &parts {
        offsets.push(total.clone());
        for i in 0..nb {
            total[i] += rep.multiplicities()[i];
        }
    }
    let merged = RepresentationData::new(shape, total)?;
    let mut xi_all = Vec::new();
    let mut eta_all = Vec::new();
    for ((rep, xi, eta), off) in parts.iter().zip(&offsets) {
        for x in xi {
            xi_all.push(embed_vector(rep, &merged, off, x));
        }
        for y in eta {
            eta_all.push(embed_vector(rep, &merged, off, y));
        }
    }
    let fp = matrix::orthonormalize(&xi_all, tol.rank_cutoff);
    let fq = matrix::orthonormalize(&eta_all, tol.rank_cutoff);
    Ok(Assembly {
        rep: merged,
        fp,
        fq,
    })
}

/// The doubled representation (every multiplicity twice) together with
/// the swap symmetry `U` exchanging the two copies. `U` is a Hermitian
/// unitary and commutes with the doubled representation exactly, by
/// construction of the multiplicity layout.
fn doubled_with_swap(rep: &RepresentationData) -> Result<(RepresentationData, ComplexMatrix)> {
    let mult2: Vec<usize> = rep.multiplicities().iter().map(|&m| 2 * m).collect();
    let rep2 = RepresentationData::new(rep.shape().clone(), mult2)?;
    let h2 = rep2.hilbert_dim();
    let mut u = ComplexMatrix::zeros(h2, h2);
    for (i, &d) in rep.shape().block_dims().iter().enumerate() {
        let m = rep.multiplicities()[i];
        let off = rep2.block_offset(i);
        for r in 0..d {
            for j in 0..m {
                let a = off + r * 2 * m + j;
                let b = a + m;
                u.set(a, b, C64::new(1.0, 0.0));
                u.set(b, a, C64::new(1.0, 0.0));
            }
        }
    }
    Ok((rep2, u))
}

/// Embed a vector of `rep` into half `0` or `1` of the doubled space.
fn embed_half(
    rep: &RepresentationData,
    rep2: &RepresentationData,
    half: usize,
    vec: &[C64],
) -> Vec<C64> {
    let off: Vec<usize> = rep
        .multiplicities()
        .iter()
        .map(|&m| if half == 0 { 0 } else { m })
        .collect();
    embed_vector(rep, rep2, &off, vec)
}

/// `Σ f f†` over an orthonormal frame: the projection onto its span.
fn frame_projection(frame: &[Vec<C64>], dim: usize) -> ComplexMatrix {
    let mut p = ComplexMatrix::zeros(dim, dim);
    for f in frame {
        for r in 0..dim {
            if f[r].norm_sqr() == 0.0 {
                continue;
            }
            for c in 0..dim {
                p.add_assign_at(r, c, f[r] * f[c].conj());
            }
        }
    }
    p
}

/// Block-diagonal amplification `I_n ⊗ M` in the slot-major layout used
/// by [`RepresentationData::represent_amplified`].
fn amplified(m: &ComplexMatrix, n: usize) -> ComplexMatrix {
    let h = m.rows();
    let mut out = ComplexMatrix::zeros(n * h, n * h);
    for s in 0..n {
        out.set_block(s * h, s * h, m);
    }
    out
}

/// `‖L† G R‖` for orthonormal frames `L`, `R` lifted to level `n`: equals
/// `‖P_L G P_R‖` because the lifted frames are isometries onto the ranges
/// of the amplified projections.
fn compressed_norm(
    g: &ComplexMatrix,
    left: &[Vec<C64>],
    right: &[Vec<C64>],
    n: usize,
    h: usize,
) -> f64 {
    if left.is_empty() || right.is_empty() {
        return 0.0;
    }
    let lift = |frame: &[Vec<C64>]| -> Vec<Vec<C64>> {
        let mut cols = Vec::with_capacity(n * frame.len());
        for s in 0..n {
            for f in frame {
                let mut v = vec![C64::new(0.0, 0.0); n * h];
                v[s * h..(s + 1) * h].copy_from_slice(f);
                cols.push(v);
            }
        }
        cols
    };
    let lcols = lift(left);
    let rcols = lift(right);
    let mut b = ComplexMatrix::zeros(lcols.len(), rcols.len());
    for (c, rc) in rcols.iter().enumerate() {
        let w = g.apply(rc);
        for (r, lc) in lcols.iter().enumerate() {
            b.set(r, c, matrix::inner(&w, lc));
        }
    }
    matrix::spectral_norm(&b)
}

fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.mul(b).sub(&b.mul(a))
}

/// Hermiticity defect of `m` together with its Hermitian part. Spectra of
/// matrices that are Hermitian by construction are taken on the Hermitian
/// part, so that corrupted inputs surface as a reported defect instead of
/// an eigensolver contract error.
fn hermitian_part(m: &ComplexMatrix) -> (f64, ComplexMatrix) {
    let defect = 0.5 * m.sub(&m.adjoint()).max_abs();
    let sym = m.add(&m.adjoint()).scaled(C64::new(0.5, 0.0));
    (defect, sym)
}

// ── realizations ─────────────────────────────────────────────────────

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RealizationKind {
    General,
    Star,
    System,
    Subalgebra,
}

impl RealizationKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RealizationKind::General => "general",
            RealizationKind::Star => "star",
            RealizationKind::System => "system",
            RealizationKind::Subalgebra => "subalgebra",
        }
    }
}

impl std::str::FromStr for RealizationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(RealizationKind::General),
            "star" => Ok(RealizationKind::Star),
            "system" => Ok(RealizationKind::System),
            "subalgebra" => Ok(RealizationKind::Subalgebra),
            other => Err(Error::InvalidInput(format!(
                "unknown realization kind `{other}` (expected general | star | system | subalgebra)"
            ))),
        }
    }
}

/// A concrete realization: the merged representation, the projections,
/// and whichever symmetries the kind provides, together with the probe
/// family that built it (kept for exactness verification).
#[derive(Clone, Debug)]
pub struct Realization {
    kind: RealizationKind,
    rep: RepresentationData,
    p: ComplexMatrix,
    q: ComplexMatrix,
    u: Option<ComplexMatrix>,
    z: Option<ComplexMatrix>,
    x: Option<ComplexMatrix>,
    p_hat: Option<ComplexMatrix>,
    fp: Vec<Vec<C64>>,
    fq: Vec<Vec<C64>>,
    f_hat: Vec<Vec<C64>>,
    probes: ProbeSet,
}

/// `Ψ(a) = Q π(a) P`: the base realization for an arbitrary subspace.
pub fn build_general(v: &Subspace, probes: ProbeSet, cfg: &Config) -> Result<Realization> {
    if probes.shape() != v.shape() {
        return Err(Error::ShapeMismatch(
            "probe family and subspace have different algebra shapes".into(),
        ));
    }
    let a = assemble(&probes, &cfg.tol)?;
    let h = a.rep.hilbert_dim();
    Ok(Realization {
        kind: RealizationKind::General,
        p: frame_projection(&a.fp, h),
        q: frame_projection(&a.fq, h),
        rep: a.rep,
        u: None,
        z: None,
        x: None,
        p_hat: None,
        fp: a.fp,
        fq: a.fq,
        f_hat: Vec::new(),
        probes,
    })
}

/// Shared doubling step for the star-type builders: merge the probe
/// functionals, double the space, place the `ξ`-span in the first copy
/// and the `η`-span in the second, and return the doubled representation,
/// the frame of the combined projection, and the swap symmetry.
fn star_core(
    probes: &ProbeSet,
    tol: &Tolerances,
) -> Result<(RepresentationData, Vec<Vec<C64>>, ComplexMatrix)> {
    let a = assemble(probes, tol)?;
    let (rep2, u) = doubled_with_swap(&a.rep)?;
    let mut frame = Vec::with_capacity(a.fp.len() + a.fq.len());
    for f in &a.fp {
        frame.push(embed_half(&a.rep, &rep2, 0, f));
    }
    for f in &a.fq {
        frame.push(embed_half(&a.rep, &rep2, 1, f));
    }
    Ok((rep2, frame, u))
}

/// `Ψ(a) = P U π(a) P` on the doubled space: a *-map whenever `V` is
/// star-closed. Exactness transfers to adjoints of probes automatically,
/// because the doubled map satisfies `Ψ(C*) = Ψ(C)*` identically.
pub fn build_star(v: &Subspace, probes: ProbeSet, cfg: &Config) -> Result<Realization> {
    if probes.shape() != v.shape() {
        return Err(Error::ShapeMismatch(
            "probe family and subspace have different algebra shapes".into(),
        ));
    }
    if !v.flags().star_closed {
        return Err(Error::ContractViolation(
            "star realization requires a star-closed subspace".into(),
        ));
    }
    let (rep2, frame, u) = star_core(&probes, &cfg.tol)?;
    let h2 = rep2.hilbert_dim();
    let p = frame_projection(&frame, h2);
    Ok(Realization {
        kind: RealizationKind::Star,
        rep: rep2,
        q: p.clone(),
        p,
        u: Some(u),
        z: None,
        x: None,
        p_hat: None,
        fq: frame.clone(),
        fp: frame,
        f_hat: Vec::new(),
        probes,
    })
}

/// `Ψ(a) = ½ P [Z, π(a)] P` with `Z = [P, U]`: available when `V` is an
/// operator system (star-closed and containing the unit), which forces
/// `PUP = Ψ(1) = 0` and turns the star form into a commutator form.
pub fn build_system(v: &Subspace, probes: ProbeSet, cfg: &Config) -> Result<Realization> {
    if !v.flags().star_closed || !v.flags().contains_unit {
        return Err(Error::ContractViolation(
            "system realization requires an operator system (star-closed, unital)".into(),
        ));
    }
    let mut r = build_star(v, probes, cfg)?;
    let u = r.u.as_ref().expect("star builder always sets U");
    r.z = Some(commutator(&r.p, u));
    r.kind = RealizationKind::System;
    Ok(r)
}

/// `Θ(a) = ½ [iX, π(a)]` with `X = 2P̂ − I` and `P̂` the projection onto
/// `span π(B)·range P`: available when the quotient is by a unital
/// C*-subalgebra. `Θ` is a derivation vanishing on `B`, and sandwiches
/// the compressed maps: `‖Θ_n(C)‖ ≥ ‖P̂Uπ_n(C)P̂‖ ≥ ‖PUπ_n(C)P‖`.
pub fn build_subalgebra(b: &Subspace, probes: ProbeSet, cfg: &Config) -> Result<Realization> {
    if !b.flags().is_subalgebra {
        return Err(Error::ContractViolation(
            "subalgebra realization requires the subalgebra flag".into(),
        ));
    }
    let mut r = build_star(b, probes, cfg)?;
    let mut spanned = Vec::new();
    for bj in b.basis() {
        let m = r.rep.represent(bj)?;
        for f in &r.fp {
            spanned.push(m.apply(f));
        }
    }
    let f_hat = matrix::orthonormalize(&spanned, cfg.tol.rank_cutoff);
    let p_hat = frame_projection(&f_hat, r.rep.hilbert_dim());
    let mut x = p_hat.scaled(C64::new(2.0, 0.0));
    for i in 0..x.rows() {
        x.add_assign_at(i, i, C64::new(-1.0, 0.0));
    }
    r.p_hat = Some(p_hat);
    r.x = Some(x);
    r.f_hat = f_hat;
    r.kind = RealizationKind::Subalgebra;
    Ok(r)
}

/// Dispatch to the builder matching `kind`.
pub fn build_realization(
    kind: RealizationKind,
    v: &Subspace,
    probes: ProbeSet,
    cfg: &Config,
) -> Result<Realization> {
    match kind {
        RealizationKind::General => build_general(v, probes, cfg),
        RealizationKind::Star => build_star(v, probes, cfg),
        RealizationKind::System => build_system(v, probes, cfg),
        RealizationKind::Subalgebra => build_subalgebra(v, probes, cfg),
    }
}

/// Orthonormal frame spanning the column space of a (numerical) projection.
fn projection_frame(p: &ComplexMatrix, rel_cutoff: f64) -> Vec<Vec<C64>> {
    let cols: Vec<Vec<C64>> = (0..p.cols())
        .map(|j| (0..p.rows()).map(|r| p.get(r, j)).collect())
        .collect();
    matrix::orthonormalize(&cols, rel_cutoff)
}

/// Reassemble a realization from stored matrices (for persisted artifacts).
///
/// Only dimensional consistency and kind-required parts are enforced here;
/// the mathematical invariants (projections, symmetries, commutation) are
/// deliberately left to [`Realization::validate`] so that a corrupted
/// artifact surfaces as a reported invariant failure, not a load error.
#[allow(clippy::too_many_arguments)]
pub fn from_parts(
    kind: RealizationKind,
    shape: AlgebraShape,
    multiplicities: Vec<usize>,
    p: ComplexMatrix,
    q: ComplexMatrix,
    u: Option<ComplexMatrix>,
    z: Option<ComplexMatrix>,
    x: Option<ComplexMatrix>,
    p_hat: Option<ComplexMatrix>,
    probes: ProbeSet,
    tol: &Tolerances,
) -> Result<Realization> {
    if probes.shape() != &shape {
        return Err(Error::ShapeMismatch(
            "probe family and stored realization have different algebra shapes".into(),
        ));
    }
    let rep = RepresentationData::new(shape, multiplicities)?;
    let h = rep.hilbert_dim();
    let square = |name: &str, m: Option<&ComplexMatrix>| -> Result<()> {
        match m {
            Some(m) if m.rows() != h || m.cols() != h => Err(Error::ShapeMismatch(format!(
                "stored `{name}` must be {h}x{h}, got {}x{}",
                m.rows(),
                m.cols()
            ))),
            _ => Ok(()),
        }
    };
    square("p", Some(&p))?;
    square("q", Some(&q))?;
    square("u", u.as_ref())?;
    square("z", z.as_ref())?;
    square("x", x.as_ref())?;
    square("p_hat", p_hat.as_ref())?;
    let need = |name: &str, present: bool| -> Result<()> {
        if present {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "realization of kind `{}` requires a stored `{name}`",
                kind.as_str()
            )))
        }
    };
    if kind != RealizationKind::General {
        need("u", u.is_some())?;
    }
    if kind == RealizationKind::System {
        need("z", z.is_some())?;
    }
    if kind == RealizationKind::Subalgebra {
        need("x", x.is_some())?;
        need("p_hat", p_hat.is_some())?;
    }
    let fp = projection_frame(&p, tol.rank_cutoff);
    let fq = projection_frame(&q, tol.rank_cutoff);
    let f_hat = p_hat
        .as_ref()
        .map(|m| projection_frame(m, tol.rank_cutoff))
        .unwrap_or_default();
    Ok(Realization {
        kind,
        rep,
        p,
        q,
        u,
        z,
        x,
        p_hat,
        fp,
        fq,
        f_hat,
        probes,
    })
}

impl Realization {
    pub fn kind(&self) -> RealizationKind {
        self.kind
    }

    pub fn rep(&self) -> &RepresentationData {
        &self.rep
    }

    pub fn hilbert_dim(&self) -> usize {
        self.rep.hilbert_dim()
    }

    pub fn p(&self) -> &ComplexMatrix {
        &self.p
    }

    pub fn q(&self) -> &ComplexMatrix {
        &self.q
    }

    pub fn u(&self) -> Option<&ComplexMatrix> {
        self.u.as_ref()
    }

    pub fn z(&self) -> Option<&ComplexMatrix> {
        self.z.as_ref()
    }

    pub fn x(&self) -> Option<&ComplexMatrix> {
        self.x.as_ref()
    }

    pub fn p_hat(&self) -> Option<&ComplexMatrix> {
        self.p_hat.as_ref()
    }

    pub fn probes(&self) -> &ProbeSet {
        &self.probes
    }

    /// Rank of `P` (= rank of `Q` for the star kinds).
    pub fn projection_rank(&self) -> usize {
        self.fp.len()
    }

    /// The realized operator: the kind's map applied to a level-`n`
    /// element, as a matrix on the `n`-fold amplification of the
    /// representation space.
    pub fn map_matrix(&self, c: &AmplifiedElement) -> Result<ComplexMatrix> {
        let n = c.level();
        let h = self.hilbert_dim();
        if h == 0 {
            return Ok(ComplexMatrix::zeros(0, 0));
        }
        let g = self.rep.represent_amplified(c)?;
        Ok(match self.kind {
            RealizationKind::General => {
                let pn = amplified(&self.p, n);
                let qn = amplified(&self.q, n);
                qn.mul(&g).mul(&pn)
            }
            RealizationKind::Star => {
                let pn = amplified(&self.p, n);
                let un = amplified(self.u.as_ref().unwrap(), n);
                pn.mul(&un).mul(&g).mul(&pn)
            }
            RealizationKind::System => {
                let pn = amplified(&self.p, n);
                let zn = amplified(self.z.as_ref().unwrap(), n);
                pn.mul(&commutator(&zn, &g)).mul(&pn).scaled(C64::new(0.5, 0.0))
            }
            RealizationKind::Subalgebra => {
                let xn = amplified(self.x.as_ref().unwrap(), n);
                commutator(&xn, &g).scaled(C64::new(0.0, 0.5))
            }
        })
    }

    /// `‖map(c)‖`, using frame compression for the projected kinds (the
    /// derivation kind needs the full operator norm).
    pub fn map_norm(&self, c: &AmplifiedElement) -> Result<f64> {
        let n = c.level();
        let h = self.hilbert_dim();
        if h == 0 {
            return Ok(0.0);
        }
        let g = self.rep.represent_amplified(c)?;
        Ok(match self.kind {
            RealizationKind::General => compressed_norm(&g, &self.fq, &self.fp, n, h),
            RealizationKind::Star => {
                let ug = amplified(self.u.as_ref().unwrap(), n).mul(&g);
                compressed_norm(&ug, &self.fp, &self.fp, n, h)
            }
            RealizationKind::System => {
                let zn = amplified(self.z.as_ref().unwrap(), n);
                let m = commutator(&zn, &g).scaled(C64::new(0.5, 0.0));
                compressed_norm(&m, &self.fp, &self.fp, n, h)
            }
            RealizationKind::Subalgebra => {
                let xn = amplified(self.x.as_ref().unwrap(), n);
                0.5 * matrix::spectral_norm(&commutator(&xn, &g))
            }
        })
    }

    /// `‖P̂ U π_n(C) P̂‖` — the intermediate compression of the subalgebra
    /// construction (between the base star map and the derivation).
    pub fn hat_map_norm(&self, c: &AmplifiedElement) -> Result<f64> {
        if self.kind != RealizationKind::Subalgebra {
            return Err(Error::ContractViolation(
                "intermediate compression exists only for subalgebra realizations".into(),
            ));
        }
        let h = self.hilbert_dim();
        if h == 0 {
            return Ok(0.0);
        }
        let n = c.level();
        let g = self.rep.represent_amplified(c)?;
        let ug = amplified(self.u.as_ref().unwrap(), n).mul(&g);
        Ok(compressed_norm(&ug, &self.f_hat, &self.f_hat, n, h))
    }

    /// `‖P U π_n(C) P‖` — the base star map underlying the star-type
    /// kinds (for the sandwich and formula-agreement diagnostics).
    pub fn star_map_norm(&self, c: &AmplifiedElement) -> Result<f64> {
        if self.u.is_none() {
            return Err(Error::ContractViolation(
                "the base star map exists only for star-type realizations".into(),
            ));
        }
        let h = self.hilbert_dim();
        if h == 0 {
            return Ok(0.0);
        }
        let n = c.level();
        let g = self.rep.represent_amplified(c)?;
        let ug = amplified(self.u.as_ref().unwrap(), n).mul(&g);
        Ok(compressed_norm(&ug, &self.fp, &self.fp, n, h))
    }

    /// The quotient seminorm realized by the subalgebra derivation:
    /// `L(a) = ‖Θ(a)‖`. Vanishes on `B`, obeys the Leibniz inequality
    /// `L(ac) ≤ L(a)‖c‖ + ‖a‖L(c)`, and never exceeds the quotient norm.
    pub fn leibniz_seminorm(&self, a: &AlgebraElement) -> Result<f64> {
        if self.kind != RealizationKind::Subalgebra {
            return Err(Error::ContractViolation(
                "the Leibniz seminorm requires a subalgebra realization".into(),
            ));
        }
        self.map_norm(&AmplifiedElement::from_element(a.clone()))
    }

    /// Seeded sweep of the Leibniz seminorm's two defining properties:
    /// it vanishes on the subalgebra (and on the unit), and it satisfies
    /// the product inequality `L(ac) ≤ L(a)‖c‖ + ‖a‖L(c)` on random pairs.
    pub fn leibniz_sweep(
        &self,
        b: &Subspace,
        pairs: usize,
        cfg: &Config,
    ) -> Result<Vec<InvariantCheck>> {
        let shape = self.rep.shape().clone();
        let mut vanish: f64 = self
            .leibniz_seminorm(&AlgebraElement::unit(&shape))?;
        for bj in b.basis() {
            vanish = vanish.max(self.leibniz_seminorm(bj)?);
        }
        let mut checks = vec![InvariantCheck::new(
            "leibniz_vanishes_on_generators",
            vanish,
            cfg.tol.annihilation,
        )];
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x6c65_6962_6e69_7a21);
        let mut min_slack = f64::INFINITY;
        for _ in 0..pairs {
            let a = sampling::random_element(&mut rng, &shape);
            let c = sampling::random_element(&mut rng, &shape);
            let lhs = self.leibniz_seminorm(&a.multiply(&c)?)?;
            let rhs = self.leibniz_seminorm(&a)? * c.norm() + a.norm() * self.leibniz_seminorm(&c)?;
            min_slack = min_slack.min((rhs - lhs) / rhs.max(1.0));
        }
        if pairs > 0 {
            checks.push(InvariantCheck::lower_bounded(
                "leibniz_product_inequality",
                min_slack,
                cfg.tol.leibniz,
            ));
        }
        Ok(checks)
    }

    /// Every structural identity the kind asserts, as named checks.
    pub fn validate(&self, v: &Subspace, tol: &Tolerances) -> Result<Vec<InvariantCheck>> {
        let h = self.hilbert_dim();
        let mut checks = self.rep.validate(tol)?;
        let basis = AlgebraElement::basis(self.rep.shape());

        let proj_defect = |m: &ComplexMatrix| -> f64 {
            let idem = m.mul(m).sub(m).max_abs();
            let herm = m.sub(&m.adjoint()).max_abs();
            idem.max(herm)
        };
        checks.push(InvariantCheck::new(
            "p_is_projection",
            proj_defect(&self.p),
            tol.structural,
        ));
        checks.push(InvariantCheck::new(
            "q_is_projection",
            proj_defect(&self.q),
            tol.structural,
        ));

        // The map must kill the subspace it quotients by.
        let mut kill = 0.0f64;
        for b in v.basis() {
            kill = kill.max(self.map_norm(&AmplifiedElement::from_element(b.clone()))?);
        }
        checks.push(InvariantCheck::new(
            "map_annihilates_subspace",
            kill,
            tol.annihilation,
        ));

        if let Some(u) = &self.u {
            checks.push(InvariantCheck::new(
                "u_hermitian",
                u.sub(&u.adjoint()).max_abs(),
                tol.structural,
            ));
            checks.push(InvariantCheck::new(
                "u_involution",
                u.mul(u).sub(&ComplexMatrix::identity(h)).max_abs(),
                tol.structural,
            ));
            let mut comm = 0.0f64;
            let mut star = 0.0f64;
            for a in &basis {
                let pa = self.rep.represent(a)?;
                comm = comm.max(commutator(u, &pa).max_abs());
                if self.kind != RealizationKind::Subalgebra {
                    let lhs = self.map_matrix(&AmplifiedElement::from_element(a.adjoint()))?;
                    let rhs = self
                        .map_matrix(&AmplifiedElement::from_element(a.clone()))?
                        .adjoint();
                    star = star.max(lhs.sub(&rhs).max_abs());
                }
            }
            checks.push(InvariantCheck::new(
                "u_commutes_with_representation",
                comm,
                tol.structural,
            ));
            if self.kind != RealizationKind::Subalgebra {
                checks.push(InvariantCheck::new("star_map_identity", star, tol.star_map));
            }
        }

        if self.kind == RealizationKind::System {
            let z = self.z.as_ref().expect("system kind always sets Z");
            let u = self.u.as_ref().expect("system kind always sets U");
            checks.push(InvariantCheck::new(
                "z_antihermitian",
                z.add(&z.adjoint()).max_abs(),
                tol.structural,
            ));
            checks.push(InvariantCheck::new(
                "z_contraction",
                (matrix::spectral_norm(z) - 1.0).max(0.0),
                tol.contraction,
            ));
            let pz = self.p.mul(z);
            let zp_complement = z.sub(&z.mul(&self.p));
            checks.push(InvariantCheck::new(
                "z_swaps_projection_sides",
                pz.sub(&zp_complement).max_abs(),
                tol.structural,
            ));
            checks.push(InvariantCheck::new(
                "unit_compression_vanishes",
                matrix::spectral_norm(&self.p.mul(u).mul(&self.p)),
                tol.annihilation,
            ));
            let mut agree = 0.0f64;
            for a in &basis {
                let pa = self.rep.represent(a)?;
                let star_form = self.p.mul(u).mul(&pa).mul(&self.p);
                let comm_form = self
                    .p
                    .mul(&commutator(z, &pa))
                    .mul(&self.p)
                    .scaled(C64::new(0.5, 0.0));
                agree = agree.max(star_form.sub(&comm_form).max_abs());
            }
            checks.push(InvariantCheck::new(
                "commutator_form_matches_star_form",
                agree,
                tol.structural,
            ));
        }

        if self.kind == RealizationKind::Subalgebra {
            let p_hat = self.p_hat.as_ref().expect("subalgebra kind always sets P̂");
            let x = self.x.as_ref().expect("subalgebra kind always sets X");
            checks.push(InvariantCheck::new(
                "p_hat_is_projection",
                proj_defect(p_hat),
                tol.structural,
            ));
            checks.push(InvariantCheck::new(
                "p_hat_dominates_p",
                p_hat.mul(&self.p).sub(&self.p).max_abs(),
                tol.structural,
            ));
            checks.push(InvariantCheck::new(
                "x_hermitian",
                x.sub(&x.adjoint()).max_abs(),
                tol.structural,
            ));
            checks.push(InvariantCheck::new(
                "x_involution",
                x.mul(x).sub(&ComplexMatrix::identity(h)).max_abs(),
                tol.structural,
            ));
            let mut comm = 0.0f64;
            for b in v.basis() {
                comm = comm.max(commutator(p_hat, &self.rep.represent(b)?).max_abs());
            }
            checks.push(InvariantCheck::new(
                "p_hat_commutes_with_subalgebra",
                comm,
                tol.structural,
            ));
            // Θ is a *-map and a derivation; both identities are bilinear
            // or linear, so checking all basis (pairs) checks everything.
            let mut star = 0.0f64;
            let mut deriv = 0.0f64;
            for a in &basis {
                let ta = self.map_matrix(&AmplifiedElement::from_element(a.clone()))?;
                let tastar = self.map_matrix(&AmplifiedElement::from_element(a.adjoint()))?;
                star = star.max(tastar.sub(&ta.adjoint()).max_abs());
                let pa = self.rep.represent(a)?;
                for c in &basis {
                    let tc = self.map_matrix(&AmplifiedElement::from_element(c.clone()))?;
                    let pc = self.rep.represent(c)?;
                    let tac =
                        self.map_matrix(&AmplifiedElement::from_element(a.multiply(c)?))?;
                    let sum = ta.mul(&pc).add(&pa.mul(&tc));
                    deriv = deriv.max(tac.sub(&sum).max_abs());
                }
            }
            checks.push(InvariantCheck::new("star_map_identity", star, tol.star_map));
            checks.push(InvariantCheck::new(
                "derivation_identity_on_basis",
                deriv,
                tol.structural,
            ));
        }

        Ok(checks)
    }

    /// On every probe, the realized norm must equal the certified
    /// quotient norm (for the subalgebra kind this also pins the sandwich
    /// `‖Θ‖ ≥ ‖P̂Uπ(·)P̂‖ ≥ ‖PUπ(·)P‖` between the certified value and
    /// the never-overshooting upper bound).
    pub fn probe_exactness(&self, tol: &Tolerances) -> Result<Vec<InvariantCheck>> {
        let mut checks = Vec::new();
        for (i, probe) in self.probes.probes().iter().enumerate() {
            let target = probe.certified_value();
            let scale = target.max(1.0);
            let got = self.map_norm(&probe.element)?;
            checks.push(InvariantCheck::new(
                format!("probe_{i}_exact"),
                (got - target).abs() / scale,
                tol.probe_exactness,
            ));
            if self.kind == RealizationKind::Subalgebra && probe.certificate.is_some() {
                let hat = self.hat_map_norm(&probe.element)?;
                let base = self.star_map_norm(&probe.element)?;
                checks.push(InvariantCheck::lower_bounded(
                    format!("probe_{i}_sandwich_theta_vs_hat"),
                    (got - hat) / scale,
                    tol.overshoot,
                ));
                checks.push(InvariantCheck::lower_bounded(
                    format!("probe_{i}_sandwich_hat_vs_base"),
                    (hat - base) / scale,
                    tol.overshoot,
                ));
            }
        }
        Ok(checks)
    }

    /// Truncation soundness on one element: the realized norm may fall
    /// short of the quotient norm but must never exceed it.
    pub fn overshoot_check(
        &self,
        c: &AmplifiedElement,
        quotient_value: f64,
        tol: &Tolerances,
    ) -> Result<InvariantCheck> {
        let got = self.map_norm(c)?;
        let scale = quotient_value.max(1.0);
        Ok(InvariantCheck::new(
            "no_overshoot",
            (got - quotient_value).max(0.0) / scale,
            tol.overshoot,
        ))
    }

    /// Contractivity at the element's level: `‖map_n(C)‖ ≤ ‖C‖`.
    pub fn contraction_check(
        &self,
        c: &AmplifiedElement,
        tol: &Tolerances,
    ) -> Result<InvariantCheck> {
        let got = self.map_norm(c)?;
        let norm = cstar_norm(c);
        Ok(InvariantCheck::new(
            "map_contractive",
            (got - norm).max(0.0) / norm.max(1.0),
            tol.contraction,
        ))
    }

    /// Jordan-type decomposition of a star-type map: with `E`, `F` the
    /// eigenprojections of `U`, the two compressions `a ↦ PEπ(a)EP` and
    /// `a ↦ PFπ(a)FP` are completely positive (verified through blockwise
    /// Choi matrices) and their difference reproduces the star map.
    pub fn jordan_checks(&self, tol: &Tolerances) -> Result<Vec<InvariantCheck>> {
        let u = self.u.as_ref().ok_or_else(|| {
            Error::ContractViolation(
                "the Jordan decomposition requires a star-type realization".into(),
            )
        })?;
        let h = self.hilbert_dim();
        if h == 0 {
            return Ok(Vec::new());
        }
        let mut checks = Vec::new();
        let ident = ComplexMatrix::identity(h);
        let e = u.add(&ident).scaled(C64::new(0.5, 0.0));
        let f = ident.sub(u).scaled(C64::new(0.5, 0.0));
        let proj_defect = |m: &ComplexMatrix| -> f64 {
            m.mul(m).sub(m).max_abs().max(m.sub(&m.adjoint()).max_abs())
        };
        checks.push(InvariantCheck::new(
            "eigenprojection_e",
            proj_defect(&e),
            tol.structural,
        ));
        checks.push(InvariantCheck::new(
            "eigenprojection_f",
            proj_defect(&f),
            tol.structural,
        ));
        checks.push(InvariantCheck::new(
            "eigenprojections_resolve_identity",
            e.add(&f).sub(&ident).max_abs(),
            tol.star_map,
        ));
        checks.push(InvariantCheck::new(
            "u_equals_e_minus_f",
            e.sub(&f).sub(u).max_abs(),
            tol.star_map,
        ));

        let pos = |a: &AlgebraElement, half: &ComplexMatrix| -> Result<ComplexMatrix> {
            Ok(self
                .p
                .mul(half)
                .mul(&self.rep.represent(a)?)
                .mul(half)
                .mul(&self.p))
        };
        // Blockwise Choi matrices of both completely positive terms.
        let shape = self.rep.shape().clone();
        for (i, &d) in shape.block_dims().iter().enumerate() {
            for (label, half) in [("e", &e), ("f", &f)] {
                let mut choi = ComplexMatrix::zeros(d * h, d * h);
                for r in 0..d {
                    for s in 0..d {
                        let mut unit = ComplexMatrix::zeros(d, d);
                        unit.set(r, s, C64::new(1.0, 0.0));
                        let lam = pos(&AlgebraElement::from_block(&shape, i, unit)?, half)?;
                        for rr in 0..h {
                            for cc in 0..h {
                                choi.add_assign_at(r * h + rr, s * h + cc, lam.get(rr, cc));
                            }
                        }
                    }
                }
                let (defect, sym) = hermitian_part(&choi);
                checks.push(InvariantCheck::new(
                    format!("choi_hermitian_{label}_block_{i}"),
                    defect,
                    tol.structural,
                ));
                let (eigs, _) = matrix::hermitian_eig(&sym)?;
                let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
                checks.push(InvariantCheck::lower_bounded(
                    format!("choi_positive_{label}_block_{i}"),
                    min,
                    tol.choi_psd,
                ));
            }
        }

        let mut reproduce = 0.0f64;
        for a in AlgebraElement::basis(&shape) {
            let diff = pos(&a, &e)?.sub(&pos(&a, &f)?);
            let psi = self.p.mul(u).mul(&self.rep.represent(&a)?).mul(&self.p);
            reproduce = reproduce.max(diff.sub(&psi).max_abs());
        }
        checks.push(InvariantCheck::new(
            "jordan_difference_reproduces_map",
            reproduce,
            tol.structural,
        ));
        Ok(checks)
    }

    /// The completely positive average certifying complete contractivity
    /// of the derivation: `Λ(M) = ½ S π₂(M) S* + ½ T π₂(M) T*` with
    /// `S = I ⊕ X`, `T = (−X) ⊕ I` is unital, its `(1,2)` corner on
    /// `M = E₁₂ ⊗ a` is `iΘ(a)`, and its blockwise Choi matrices are
    /// positive semidefinite.
    pub fn cp_average_checks(&self, tol: &Tolerances) -> Result<Vec<InvariantCheck>> {
        if self.kind != RealizationKind::Subalgebra {
            return Err(Error::ContractViolation(
                "the positive-average certificate requires a subalgebra realization".into(),
            ));
        }
        let x = self.x.as_ref().expect("subalgebra kind always sets X");
        let h = self.hilbert_dim();
        if h == 0 {
            return Ok(Vec::new());
        }
        let shape = self.rep.shape().clone();
        let mut s = ComplexMatrix::zeros(2 * h, 2 * h);
        s.set_block(0, 0, &ComplexMatrix::identity(h));
        s.set_block(h, h, x);
        let mut t = ComplexMatrix::zeros(2 * h, 2 * h);
        t.set_block(0, 0, &x.scaled(C64::new(-1.0, 0.0)));
        t.set_block(h, h, &ComplexMatrix::identity(h));
        let average = |m: &AmplifiedElement| -> Result<ComplexMatrix> {
            let g = self.rep.represent_amplified(m)?;
            let first = s.mul(&g).mul(&s.adjoint());
            let second = t.mul(&g).mul(&t.adjoint());
            Ok(first.add(&second).scaled(C64::new(0.5, 0.0)))
        };

        let mut checks = Vec::new();
        let unit2 = {
            let mut m = AmplifiedElement::zero(&shape, 2);
            m.set_entry(0, 0, AlgebraElement::unit(&shape))?;
            m.set_entry(1, 1, AlgebraElement::unit(&shape))?;
            m
        };
        checks.push(InvariantCheck::new(
            "positive_average_unital",
            average(&unit2)?
                .sub(&ComplexMatrix::identity(2 * h))
                .max_abs(),
            tol.structural,
        ));

        let mut corner = 0.0f64;
        for a in AlgebraElement::basis(&shape) {
            let mut m = AmplifiedElement::zero(&shape, 2);
            m.set_entry(0, 1, a.clone())?;
            let lam = average(&m)?;
            let theta = self.map_matrix(&AmplifiedElement::from_element(a))?;
            let mut diff = 0.0f64;
            for r in 0..h {
                for c in 0..h {
                    let want = C64::new(0.0, 1.0) * theta.get(r, c);
                    diff = diff.max((lam.get(r, h + c) - want).norm());
                }
            }
            corner = corner.max(diff);
        }
        checks.push(InvariantCheck::new(
            "positive_average_corner_is_derivation",
            corner,
            tol.structural,
        ));

        // Choi positivity blockwise over M₂(A) = ⊕_i M_{2d_i}.
        for (i, &d) in shape.block_dims().iter().enumerate() {
            let side = 2 * d;
            let mut choi = ComplexMatrix::zeros(side * 2 * h, side * 2 * h);
            for r in 0..side {
                for c in 0..side {
                    let mut unit = ComplexMatrix::zeros(d, d);
                    unit.set(r % d, c % d, C64::new(1.0, 0.0));
                    let mut m = AmplifiedElement::zero(&shape, 2);
                    m.set_entry(r / d, c / d, AlgebraElement::from_block(&shape, i, unit)?)?;
                    let lam = average(&m)?;
                    for rr in 0..2 * h {
                        for cc in 0..2 * h {
                            choi.add_assign_at(
                                r * 2 * h + rr,
                                c * 2 * h + cc,
                                lam.get(rr, cc),
                            );
                        }
                    }
                }
            }
            let (defect, sym) = hermitian_part(&choi);
            checks.push(InvariantCheck::new(
                format!("positive_average_choi_hermitian_block_{i}"),
                defect,
                tol.structural,
            ));
            let (eigs, _) = matrix::hermitian_eig(&sym)?;
            let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
            checks.push(InvariantCheck::lower_bounded(
                format!("positive_average_choi_block_{i}"),
                min,
                tol.choi_psd,
            ));
        }
        Ok(checks)
    }
}

// ── truncated complete-isometry verification ─────────────────────────

/// Per-level outcome of [`verify_complete_isometry`].
#[derive(Clone, Debug)]
pub struct LevelIsometry {
    pub level: usize,
    pub probes_checked: usize,
    /// Worst relative deviation `|‖map(C)‖ − certified|` over probes.
    pub max_probe_deviation: f64,
    pub holdouts_checked: usize,
    /// Worst positive excess `‖map(C)‖ − ‖C‖_{A/V}` over held-out draws
    /// (a genuine failure when beyond tolerance).
    pub max_overshoot: f64,
    /// Worst deficit `‖C‖_{A/V} − ‖map(C)‖` over held-out draws (expected
    /// truncation slack, reported but never a failure).
    pub max_truncation_slack: f64,
}

/// Outcome of the truncated complete-isometry verification: exactness on
/// probes and one-sidedness on held-out random elements, per level.
#[derive(Clone, Debug)]
pub struct IsometryReport {
    pub levels: Vec<LevelIsometry>,
    pub checks: Vec<InvariantCheck>,
}

/// Verify the truncated complete-isometry contract of a realization: at
/// each level `1..=levels`, the realized norm must match the certified
/// value on every probe of that level and must not exceed the quotient
/// norm on `trials` freshly drawn held-out elements (their deficits are
/// recorded as truncation slack).
pub fn verify_complete_isometry(
    r: &Realization,
    v: &Subspace,
    levels: usize,
    trials: usize,
    cfg: &Config,
) -> Result<IsometryReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x7275_6e63_6174_6564);
    let mut out = IsometryReport {
        levels: Vec::new(),
        checks: Vec::new(),
    };
    for level in 1..=levels {
        let mut entry = LevelIsometry {
            level,
            probes_checked: 0,
            max_probe_deviation: 0.0,
            holdouts_checked: 0,
            max_overshoot: 0.0,
            max_truncation_slack: 0.0,
        };
        for probe in r.probes().probes() {
            if probe.level() != level {
                continue;
            }
            let target = probe.certified_value();
            let got = r.map_norm(&probe.element)?;
            entry.probes_checked += 1;
            entry.max_probe_deviation = entry
                .max_probe_deviation
                .max((got - target).abs() / target.max(1.0));
        }
        for _ in 0..trials {
            let c = sampling::random_amplified(&mut rng, v.shape(), level);
            let quotient = quotient_norm(&c, v, cfg)?.value;
            let got = r.map_norm(&c)?;
            entry.holdouts_checked += 1;
            let scale = quotient.max(1.0);
            entry.max_overshoot = entry.max_overshoot.max((got - quotient).max(0.0) / scale);
            entry.max_truncation_slack = entry
                .max_truncation_slack
                .max((quotient - got).max(0.0) / scale);
        }
        if entry.probes_checked > 0 {
            out.checks.push(InvariantCheck::new(
                format!("probes_exact_level_{level}"),
                entry.max_probe_deviation,
                cfg.tol.probe_exactness,
            ));
        }
        if entry.holdouts_checked > 0 {
            out.checks.push(InvariantCheck::new(
                format!("no_overshoot_level_{level}"),
                entry.max_overshoot,
                cfg.tol.overshoot,
            ));
        }
        out.levels.push(entry);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::SubspaceFlags;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn m2() -> AlgebraShape {
        AlgebraShape::new(vec![2]).unwrap()
    }

    fn diag_pm1() -> AmplifiedElement {
        let e = AlgebraElement::new(
            m2(),
            vec![ComplexMatrix::real_diag(&[1.0, -1.0])],
        )
        .unwrap();
        AmplifiedElement::from_element(e)
    }

    fn span_identity() -> Subspace {
        Subspace::new(
            m2(),
            vec![AlgebraElement::unit(&m2())],
            SubspaceFlags::operator_system(),
            &Tolerances::default(),
        )
        .unwrap()
    }

    fn diagonal_subalgebra() -> Subspace {
        let mut basis = Vec::new();
        for k in 0..2 {
            let mut e = ComplexMatrix::zeros(2, 2);
            e.set(k, k, C64::new(1.0, 0.0));
            basis.push(AlgebraElement::new(m2(), vec![e]).unwrap());
        }
        Subspace::new(m2(), basis, SubspaceFlags::subalgebra(), &Tolerances::default()).unwrap()
    }

    fn corner_unit() -> AmplifiedElement {
        let mut e = ComplexMatrix::zeros(2, 2);
        e.set(0, 1, C64::new(1.0, 0.0));
        AmplifiedElement::from_element(AlgebraElement::new(m2(), vec![e]).unwrap())
    }

    fn assert_all(checks: &[InvariantCheck]) {
        for c in checks {
            assert!(
                c.pass,
                "check `{}` failed: residual {:.3e} against tolerance {:.3e}",
                c.name, c.residual, c.tolerance
            );
        }
    }

    #[test]
    fn general_worked_example() {
        let cfg = Config::default();
        let v = span_identity();
        let probes = ProbeSet::from_elements(vec![diag_pm1()], &v, &cfg).unwrap();
        let r = build_general(&v, probes, &cfg).unwrap();
        assert_eq!(r.hilbert_dim(), 4);
        assert_eq!(r.projection_rank(), 1);
        let got = r.map_norm(&diag_pm1()).unwrap();
        assert!((got - 1.0).abs() < 1e-5, "norm {got}");
        assert_all(&r.validate(&v, &cfg.tol).unwrap());
        assert_all(&r.probe_exactness(&cfg.tol).unwrap());
    }

    #[test]
    fn quotient_by_zero_recovers_operator_norms() {
        let cfg = Config::default();
        let v = Subspace::new(m2(), Vec::new(), SubspaceFlags::default(), &cfg.tol).unwrap();
        let elements: Vec<AmplifiedElement> = AlgebraElement::basis(&m2())
            .into_iter()
            .map(AmplifiedElement::from_element)
            .collect();
        let probes = ProbeSet::from_elements(elements, &v, &cfg).unwrap();
        let r = build_general(&v, probes, &cfg).unwrap();
        for probe in r.probes().probes() {
            let want = cstar_norm(&probe.element);
            let got = r.map_norm(&probe.element).unwrap();
            assert!(
                (got - want).abs() < 1e-5 * want.max(1.0),
                "got {got}, want {want}"
            );
        }
        assert_all(&r.validate(&v, &cfg.tol).unwrap());
    }

    #[test]
    fn projection_ranks_add_over_probes() {
        let cfg = Config::default();
        let v = span_identity();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let c1 = sampling::random_amplified(&mut rng, &m2(), 1);
        let c2 = sampling::random_amplified(&mut rng, &m2(), 2);
        let p1 = ProbeSet::from_elements(vec![c1.clone()], &v, &cfg).unwrap();
        let p2 = ProbeSet::from_elements(vec![c2.clone()], &v, &cfg).unwrap();
        let both = ProbeSet::from_elements(vec![c1, c2], &v, &cfg).unwrap();
        let r1 = build_general(&v, p1, &cfg).unwrap();
        let r2 = build_general(&v, p2, &cfg).unwrap();
        let r = build_general(&v, both, &cfg).unwrap();
        assert_eq!(
            r.projection_rank(),
            r1.projection_rank() + r2.projection_rank()
        );
        assert_eq!(r.hilbert_dim(), r1.hilbert_dim() + r2.hilbert_dim());
        assert_all(&r.probe_exactness(&cfg.tol).unwrap());
    }

    #[test]
    fn star_doubles_space_and_keeps_norm() {
        let cfg = Config::default();
        let v = span_identity();
        let probes = ProbeSet::from_elements(vec![diag_pm1()], &v, &cfg).unwrap();
        let r = build_star(&v, probes, &cfg).unwrap();
        assert_eq!(r.hilbert_dim(), 8);
        let got = r.map_norm(&diag_pm1()).unwrap();
        assert!((got - 1.0).abs() < 1e-5, "norm {got}");
        assert_all(&r.validate(&v, &cfg.tol).unwrap());
        assert_all(&r.probe_exactness(&cfg.tol).unwrap());
        // A Hermitian input under a *-map lands on a Hermitian operator.
        let m = r.map_matrix(&diag_pm1()).unwrap();
        assert!(m.sub(&m.adjoint()).max_abs() < 1e-12);
    }

    #[test]
    fn star_is_exact_on_adjoints_without_symmetrization() {
        let cfg = Config::default();
        let s = AlgebraShape::new(vec![2, 1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let v = sampling::random_star_subspace(&mut rng, &s, 1, &cfg.tol).unwrap();
        let c = sampling::random_amplified(&mut rng, &s, 1);
        let probes = ProbeSet::from_elements(vec![c.clone()], &v, &cfg).unwrap();
        let r = build_star(&v, probes, &cfg).unwrap();
        let adj = c.adjoint();
        let want = quotient_norm(&adj, &v, &cfg).unwrap().value;
        let got = r.map_norm(&adj).unwrap();
        assert!(
            (got - want).abs() < 1e-5 * want.max(1.0),
            "adjoint norm {got}, quotient {want}"
        );
        assert_all(&r.validate(&v, &cfg.tol).unwrap());
    }

    #[test]
    fn system_commutator_form() {
        let cfg = Config::default();
        let v = span_identity();
        let probes = ProbeSet::from_elements(vec![diag_pm1()], &v, &cfg).unwrap();
        let r = build_system(&v, probes, &cfg).unwrap();
        let got = r.map_norm(&diag_pm1()).unwrap();
        assert!((got - 1.0).abs() < 1e-5, "norm {got}");
        assert_all(&r.validate(&v, &cfg.tol).unwrap());
        assert_all(&r.probe_exactness(&cfg.tol).unwrap());
        // Ψ(1) = 0 via the commutator form directly.
        let unit = AmplifiedElement::from_element(AlgebraElement::unit(&m2()));
        assert!(r.map_norm(&unit).unwrap() < 1e-10);
    }

    #[test]
    fn subalgebra_derivation_on_m2_diagonals() {
        let cfg = Config::default();
        let b = diagonal_subalgebra();
        let probes = ProbeSet::from_elements(vec![corner_unit()], &b, &cfg).unwrap();
        let r = build_subalgebra(&b, probes, &cfg).unwrap();
        let got = r.map_norm(&corner_unit()).unwrap();
        assert!((got - 1.0).abs() < 1e-5, "derivation norm {got}");
        assert_all(&r.validate(&b, &cfg.tol).unwrap());
        assert_all(&r.probe_exactness(&cfg.tol).unwrap());
        // The seminorm vanishes on the subalgebra and on the unit.
        for bj in b.basis() {
            assert!(r.leibniz_seminorm(bj).unwrap() < 1e-10);
        }
        assert!(r
            .leibniz_seminorm(&AlgebraElement::unit(&m2()))
            .unwrap()
            < 1e-10);
    }

    #[test]
    fn leibniz_inequality_over_random_pairs() {
        let cfg = Config::default();
        let b = diagonal_subalgebra();
        let probes = ProbeSet::from_elements(vec![corner_unit()], &b, &cfg).unwrap();
        let r = build_subalgebra(&b, probes, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let a = sampling::random_element(&mut rng, &m2());
            let c = sampling::random_element(&mut rng, &m2());
            let lhs = r.leibniz_seminorm(&a.multiply(&c).unwrap()).unwrap();
            let rhs = r.leibniz_seminorm(&a).unwrap() * c.norm()
                + a.norm() * r.leibniz_seminorm(&c).unwrap();
            assert!(
                lhs <= rhs + 1e-9,
                "Leibniz violated: {lhs} > {rhs}"
            );
        }
    }

    #[test]
    fn jordan_decomposition_is_positive() {
        let cfg = Config::default();
        let v = span_identity();
        let probes = ProbeSet::from_elements(vec![diag_pm1()], &v, &cfg).unwrap();
        let r = build_star(&v, probes, &cfg).unwrap();
        assert_all(&r.jordan_checks(&cfg.tol).unwrap());
    }

    #[test]
    fn cp_average_certifies_contractivity() {
        let cfg = Config::default();
        let b = diagonal_subalgebra();
        let probes = ProbeSet::from_elements(vec![corner_unit()], &b, &cfg).unwrap();
        let r = build_subalgebra(&b, probes, &cfg).unwrap();
        assert_all(&r.cp_average_checks(&cfg.tol).unwrap());
        // And the derivation is completely contractive at levels 1..3.
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for n in 1..=3 {
            let c = sampling::random_amplified(&mut rng, &m2(), n);
            let check = r.contraction_check(&c, &cfg.tol).unwrap();
            assert!(check.pass, "level {n}: residual {:.3e}", check.residual);
        }
    }

    #[test]
    fn full_subspace_gives_trivial_realization() {
        let cfg = Config::default();
        let v = Subspace::new(
            m2(),
            AlgebraElement::basis(&m2()),
            SubspaceFlags::star(),
            &cfg.tol,
        )
        .unwrap();
        let elements: Vec<AmplifiedElement> = AlgebraElement::basis(&m2())
            .into_iter()
            .map(AmplifiedElement::from_element)
            .collect();
        let probes = ProbeSet::from_elements(elements, &v, &cfg).unwrap();
        let r = build_star(&v, probes, &cfg).unwrap();
        assert_eq!(r.hilbert_dim(), 0);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let c = sampling::random_amplified(&mut rng, &m2(), 2);
        assert_eq!(r.map_norm(&c).unwrap(), 0.0);
        assert_all(&r.validate(&v, &cfg.tol).unwrap());
        assert_all(&r.jordan_checks(&cfg.tol).unwrap());
    }

    #[test]
    fn verify_isometry_on_operator_system() {
        let mut cfg = Config::default();
        cfg.seed = 5;
        let s = m2();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let v = sampling::random_operator_system(&mut rng, &s, 1, &cfg.tol).unwrap();
        let probes = ProbeSet::generate(&v, 2, 1, &cfg).unwrap();
        let r = build_system(&v, probes, &cfg).unwrap();
        let report = verify_complete_isometry(&r, &v, 2, 2, &cfg).unwrap();
        assert!(report.levels.iter().any(|l| l.probes_checked > 0));
        assert!(report.levels.iter().all(|l| l.holdouts_checked == 2));
        assert_all(&report.checks);
    }

    #[test]
    fn kind_preconditions_are_enforced() {
        let cfg = Config::default();
        let plain = Subspace::new(
            m2(),
            vec![diag_pm1().entry(0, 0).clone()],
            SubspaceFlags::default(),
            &cfg.tol,
        )
        .unwrap();
        let star_only = {
            let h = diag_pm1().entry(0, 0).clone();
            Subspace::new(m2(), vec![h], SubspaceFlags::star(), &cfg.tol).unwrap()
        };
        let system = span_identity();
        let probes = |v: &Subspace| ProbeSet::from_elements(vec![corner_unit()], v, &cfg).unwrap();

        assert!(build_star(&plain, probes(&plain), &cfg).is_err());
        assert!(build_system(&star_only, probes(&star_only), &cfg).is_err());
        assert!(build_subalgebra(&system, probes(&system), &cfg).is_err());

        assert!(build_star(&star_only, probes(&star_only), &cfg).is_ok());
        let general = build_general(&plain, probes(&plain), &cfg).unwrap();
        assert!(general
            .leibniz_seminorm(&AlgebraElement::unit(&m2()))
            .is_err());
        assert!(general.jordan_checks(&cfg.tol).is_err());
        assert!(general.cp_average_checks(&cfg.tol).is_err());
    }

    #[test]
    fn generated_probe_family_counts() {
        let cfg = Config::default();
        let v = span_identity();
        let probes = ProbeSet::generate(&v, 2, 1, &cfg).unwrap();
        // Basis (4) + per level: general + adjoint + Hermitian (3 × 2 levels).
        assert_eq!(probes.len(), 10);
        assert_eq!(probes.max_level(), 2);
        assert_eq!(probes.shape(), &m2());
    }
}
