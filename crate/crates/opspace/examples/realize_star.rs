//! The symmetric realization `Ψ(a) = P U π(a) P` for star-closed `V`.
//!
//! When `V* = V`, doubling the Hilbert space produces a single projection
//! `P` and a self-adjoint unitary `U` commuting with `π` such that
//! `Ψ(a) = P U π(a) P` kills `V`, reproduces probe quotient norms, and is
//! a genuine *-map: `Ψ(a*) = Ψ(a)*`. Because of that symmetry, exactness
//! on a probe automatically extends to the probe's adjoint.
//!
//! Splitting `U = E − F` into its eigenprojections decomposes `Ψ` as a
//! difference of two completely positive compressions (a Jordan
//! decomposition); their blockwise Choi matrices are positive
//! semidefinite, which this example verifies.
//!
//! Run with: cargo run --example realize_star

use opspace::algebra::AlgebraShape;
use opspace::quotient::quotient_norm;
use opspace::realization::{build_star, ProbeSet};
use opspace::sampling;
use opspace::Config;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> opspace::Result<()> {
    let mut cfg = Config::default();
    cfg.seed = 33;
    let shape = AlgebraShape::new(vec![2, 2])?;

    // A random star-closed subspace (adjoint pairs of random elements).
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let v = sampling::random_star_subspace(&mut rng, &shape, 1, &cfg.tol)?;
    println!("V* = V, dim V = {}", v.dim());

    // One deliberately non-Hermitian probe.
    let c = sampling::random_amplified(&mut rng, &shape, 1);
    let probes = ProbeSet::from_elements(vec![c.clone()], &v, &cfg)?;
    let r = build_star(&v, probes, &cfg)?;
    println!(
        "realization: dim H = {} (doubled), rank P = {}",
        r.hilbert_dim(),
        r.projection_rank()
    );

    // The structural battery: P projection, U self-adjoint unitary
    // commuting with pi, Psi kills V, and Psi(a*) = Psi(a)* on the whole
    // algebra basis.
    for check in r.validate(&v, &cfg.tol)? {
        println!(
            "  [{}] {}: residual {:.3e}",
            if check.pass { "ok" } else { "FAIL" },
            check.name,
            check.residual
        );
    }

    // Exactness transfers to the adjoint without symmetrizing the family.
    let adj = c.adjoint();
    let want = quotient_norm(&adj, &v, &cfg)?.value;
    let got = r.map_norm(&adj)?;
    println!("\nexactness on the probe's adjoint (not itself a probe):");
    println!("  quotient norm of C*: {want:.12}");
    println!("  realized norm      : {got:.12}");
    println!("  deviation          : {:.3e}", (got - want).abs());

    // Jordan decomposition: U = E − F, each compression completely
    // positive; blockwise Choi matrices stay PSD.
    println!("\nJordan decomposition through the eigenprojections of U:");
    for check in r.jordan_checks(&cfg.tol)? {
        println!(
            "  [{}] {}: residual {:.3e}",
            if check.pass { "ok" } else { "FAIL" },
            check.name,
            check.residual
        );
    }

    Ok(())
}
