//! The commutator realization `Ψ(a) = ½ P [Z, π(a)] P` for operator systems.
//!
//! When `V` is an operator system (star-closed and containing the unit),
//! the symmetric construction can be rewritten through a single operator
//! `Z = [P, U]`: an antisymmetry (`Z* = −Z`) of norm at most 1 that swaps
//! the two sides of `P` (`PZ = Z(I−P)`). Because `1 ∈ V`, the compression
//! `PUP = Ψ(1)` vanishes, and the commutator form
//! `Ψ(a) = ½ P [Z, π(a)] P` agrees with `P U π(a) P` exactly.
//!
//! Run with: cargo run --example realize_system

use opspace::algebra::{AlgebraElement, AlgebraShape, AmplifiedElement};
use opspace::matrix::spectral_norm;
use opspace::realization::{build_system, verify_complete_isometry, ProbeSet};
use opspace::sampling;
use opspace::Config;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> opspace::Result<()> {
    let mut cfg = Config::default();
    cfg.seed = 8;
    let shape = AlgebraShape::new(vec![3])?;

    // An operator system in M₃: the unit plus one random Hermitian.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let v = sampling::random_operator_system(&mut rng, &shape, 1, &cfg.tol)?;
    println!("operator system V ⊆ M3, dim V = {}", v.dim());

    let probes = ProbeSet::generate(&v, 2, 1, &cfg)?;
    let r = build_system(&v, probes, &cfg)?;
    println!(
        "realization: dim H = {}, rank P = {}",
        r.hilbert_dim(),
        r.projection_rank()
    );

    let z = r.z().expect("system realizations carry Z");
    println!("\nthe operator Z = [P, U]:");
    println!("  ‖Z‖                 : {:.12} (≤ 1)", spectral_norm(z));
    println!(
        "  antisymmetry        : ‖Z + Z*‖∞ = {:.3e}",
        z.add(&z.adjoint()).max_abs()
    );

    // The full battery: Z properties, PUP = 0, and agreement of the
    // commutator form with the underlying symmetric form.
    for check in r.validate(&v, &cfg.tol)? {
        println!(
            "  [{}] {}: residual {:.3e}",
            if check.pass { "ok" } else { "FAIL" },
            check.name,
            check.residual
        );
    }

    // Ψ(1) = 0: the unit (being in V) is annihilated, through the
    // commutator form itself.
    let unit = AmplifiedElement::from_element(AlgebraElement::unit(&shape));
    println!("\n  ‖Ψ(1)‖              : {:.3e}", r.map_norm(&unit)?);

    // Probe exactness and held-out truncation behavior at levels 1 and 2.
    println!("\nisometry sweep:");
    let report = verify_complete_isometry(&r, &v, 2, 3, &cfg)?;
    for row in &report.levels {
        println!(
            "  level {}: {} probes (max deviation {:.3e}), {} holdouts, overshoot {:.3e}, slack {:.3e}",
            row.level,
            row.probes_checked,
            row.max_probe_deviation,
            row.holdouts_checked,
            row.max_overshoot,
            row.max_truncation_slack
        );
    }
    for check in &report.checks {
        println!(
            "  [{}] {}: residual {:.3e}",
            if check.pass { "ok" } else { "FAIL" },
            check.name,
            check.residual
        );
    }

    Ok(())
}
