//! From a functional to a representation.
//!
//! A norm-one functional `ψ` on `M_n(A)` factors through a representation
//! `π` of `A` on a finite-dimensional Hilbert space `H`: there are vector
//! tuples `ξ, η` (unit rows in `Hⁿ`) with `ψ(C) = ⟨π_n(C) ξ, η⟩`. The
//! factorization is the engine that turns dual certificates of quotient
//! norms into concrete realizations: the spans of the tuple segments give
//! projections `P` (from `ξ`) and `Q` (from `η`), and the compression
//! `Q π(a) P` kills the subspace the functional annihilates.
//!
//! Run with: cargo run --example gns_functional

use opspace::algebra::AlgebraShape;
use opspace::gns::represent_functional;
use opspace::matrix::{self, ComplexMatrix};
use opspace::quotient::quotient_norm;
use opspace::sampling;
use opspace::Config;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> opspace::Result<()> {
    let cfg = Config::default();
    let shape = AlgebraShape::new(vec![2, 3])?;

    // Get an interesting functional: the dual certificate of a random
    // quotient-norm instance over a star-closed subspace of M₂ ⊕ M₃.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let v = sampling::random_star_subspace(&mut rng, &shape, 2, &cfg.tol)?;
    let c = sampling::random_amplified(&mut rng, &shape, 2);
    let cert = quotient_norm(&c, &v, &cfg)?;
    let psi = cert.certificate.expect("nonzero quotient norm");
    println!(
        "certificate of a level-{} quotient norm over M2 ⊕ M3 (value {:.9})",
        psi.level(),
        cert.value
    );
    println!("  functional norm    : {:.12}", psi.norm());

    // Factor it.
    let (rep, xi, eta) = represent_functional(&psi, &shape, &cfg.tol)?;
    println!("  multiplicities     : {:?}", rep.multiplicities());
    println!("  dim H              : {}", rep.hilbert_dim());
    println!(
        "  tuple lengths      : xi {} x dim {}, eta {} x dim {}",
        xi.len(),
        rep.hilbert_dim(),
        eta.len(),
        rep.hilbert_dim()
    );

    // The defining identity ψ(C') = ⟨π_n(C') ξ, η⟩ on random elements.
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let probe = sampling::random_amplified(&mut rng, &shape, psi.level());
        let big = rep.represent_amplified(&probe)?;
        let h = rep.hilbert_dim();
        // Assemble the level-n tuples into single vectors of H ⊗ Cⁿ.
        let stack = |rows: &[Vec<opspace::matrix::C64>]| {
            let mut out = vec![opspace::matrix::C64::new(0.0, 0.0); rows.len() * h];
            for (s, row) in rows.iter().enumerate() {
                out[s * h..(s + 1) * h].copy_from_slice(row);
            }
            out
        };
        let lhs = psi.apply(&probe)?;
        let rhs = matrix::inner(&big.apply(&stack(&xi)), &stack(&eta));
        worst = worst.max((lhs - rhs).norm());
    }
    println!("  reconstruction     : worst residual {worst:.3e} over 20 probes");

    // The representation itself is faithful and unital, blockwise.
    for check in rep.validate(&cfg.tol)? {
        println!(
            "  [{}] {}: residual {:.3e} (tolerance {:.1e})",
            if check.pass { "ok" } else { "FAIL" },
            check.name,
            check.residual,
            check.tolerance
        );
    }

    // Where the projections come from: the ξ-segments of block i span a
    // subspace of multiplicity-many copies of C^{d_i}.
    let h = rep.hilbert_dim();
    let fp = matrix::orthonormalize(&xi, cfg.tol.rank_cutoff);
    let fq = matrix::orthonormalize(&eta, cfg.tol.rank_cutoff);
    println!(
        "  rank P (from xi)   : {} of dim H = {h}",
        fp.len()
    );
    println!("  rank Q (from eta)  : {} of dim H = {h}", fq.len());

    // Compressions Q π(d) P vanish for d ∈ V — the annihilation carries
    // from the functional to the operators.
    let mut kill = 0.0f64;
    for b in v.basis() {
        let m = rep.represent(b)?;
        let mut compressed = ComplexMatrix::zeros(fq.len(), fp.len());
        for (r, q) in fq.iter().enumerate() {
            for (col, p) in fp.iter().enumerate() {
                compressed.set(r, col, matrix::inner(&m.apply(p), q));
            }
        }
        kill = kill.max(compressed.max_abs());
    }
    println!("  Q pi(V) P          : max entry {kill:.3e} over the basis of V");

    Ok(())
}
