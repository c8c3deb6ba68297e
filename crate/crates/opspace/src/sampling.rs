//! Seeded random generators for algebra elements, amplified matrices, and
//! structured subspaces (star-closed spans, operator systems, subalgebras).
//!
//! Every generator draws from a caller-provided RNG, so any produced
//! instance is reproducible from the seed that created the RNG. The
//! subspace generators return [`Subspace`] values whose declared flags are
//! guaranteed by construction and re-verified by `Subspace::new`.

use crate::algebra::{AlgebraElement, AlgebraShape, AmplifiedElement, Subspace, SubspaceFlags};
use crate::config::Tolerances;
use crate::error::Result;
use crate::matrix::{ComplexMatrix, C64};
use rand::Rng;

/// A block element with entries drawn uniformly from the unit square
/// `[-1, 1] × [-1, 1]i`, row-major block by block.
pub fn random_element(rng: &mut impl Rng, s: &AlgebraShape) -> AlgebraElement {
    let blocks = s
        .block_dims()
        .iter()
        .map(|&d| {
            ComplexMatrix::from_fn(d, d, |_, _| {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            })
        })
        .collect();
    AlgebraElement::new(s.clone(), blocks).unwrap()
}

/// The Hermitian part `(g + g*)/2` of a random element.
pub fn random_hermitian(rng: &mut impl Rng, s: &AlgebraShape) -> AlgebraElement {
    let g = random_element(rng, s);
    g.add(&g.adjoint()).unwrap().scaled(C64::new(0.5, 0.0))
}

/// A level-`n` matrix over the algebra with independent random entries.
pub fn random_amplified(rng: &mut impl Rng, s: &AlgebraShape, n: usize) -> AmplifiedElement {
    let entries = (0..n * n).map(|_| random_element(rng, s)).collect();
    AmplifiedElement::new(n, s.clone(), entries).unwrap()
}

/// The Hermitian part `(G + G†)/2` of a random level-`n` matrix.
pub fn random_hermitian_amplified(
    rng: &mut impl Rng,
    s: &AlgebraShape,
    n: usize,
) -> AmplifiedElement {
    let g = random_amplified(rng, s, n);
    g.add(&g.adjoint()).unwrap().scaled(C64::new(0.5, 0.0))
}

/// A Haar-ish random unitary: orthonormalized columns of a random matrix.
pub fn random_unitary(rng: &mut impl Rng, d: usize) -> ComplexMatrix {
    loop {
        let cols: Vec<Vec<C64>> = (0..d)
            .map(|_| {
                (0..d)
                    .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect()
            })
            .collect();
        let ortho = crate::matrix::orthonormalize(&cols, 1e-12);
        if ortho.len() == d {
            return ComplexMatrix::from_fn(d, d, |r, c| ortho[c][r]);
        }
    }
}

/// A star-closed subspace spanned by `k` random elements and their
/// adjoints (`dim ≤ 2k`; dependent directions are retried).
pub fn random_star_subspace(
    rng: &mut impl Rng,
    s: &AlgebraShape,
    k: usize,
    tol: &Tolerances,
) -> Result<Subspace> {
    loop {
        let mut basis = Vec::new();
        for _ in 0..k {
            let g = random_element(rng, s);
            basis.push(g.adjoint());
            basis.push(g);
        }
        match Subspace::new(s.clone(), basis, SubspaceFlags::star(), tol) {
            Ok(v) => return Ok(v),
            Err(_) => continue,
        }
    }
}

/// An operator system spanned by the unit and `k` random Hermitian
/// elements.
pub fn random_operator_system(
    rng: &mut impl Rng,
    s: &AlgebraShape,
    k: usize,
    tol: &Tolerances,
) -> Result<Subspace> {
    loop {
        let mut basis = vec![AlgebraElement::unit(s)];
        for _ in 0..k {
            basis.push(random_hermitian(rng, s));
        }
        match Subspace::new(s.clone(), basis, SubspaceFlags::operator_system(), tol) {
            Ok(v) => return Ok(v),
            Err(_) => continue,
        }
    }
}

/// A unital C*-subalgebra: inside each block of dimension `d ≥ 2` a random
/// split point partitions the coordinates into two ranges, and the basis
/// consists of all matrix units within each range conjugated by a random
/// block unitary (a `M_p ⊕ M_{d−p}` subalgebra in disguise); blocks of
/// dimension 1 contribute their unit. The result is proper in every block
/// of dimension ≥ 2.
pub fn random_subalgebra(
    rng: &mut impl Rng,
    s: &AlgebraShape,
    tol: &Tolerances,
) -> Result<Subspace> {
    let mut basis = Vec::new();
    for (i, &d) in s.block_dims().iter().enumerate() {
        if d == 1 {
            basis.push(AlgebraElement::from_block(s, i, ComplexMatrix::identity(1))?);
            continue;
        }
        let split = rng.gen_range(1..d);
        let u = random_unitary(rng, d);
        for range in [0..split, split..d] {
            for r in range.clone() {
                for c in range.clone() {
                    let mut e = ComplexMatrix::zeros(d, d);
                    e.set(r, c, C64::new(1.0, 0.0));
                    let m = u.mul(&e).mul(&u.adjoint());
                    basis.push(AlgebraElement::from_block(s, i, m)?);
                }
            }
        }
    }
    Subspace::new(s.clone(), basis, SubspaceFlags::subalgebra(), tol)
}
