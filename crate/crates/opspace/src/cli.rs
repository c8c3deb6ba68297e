//! Batch front door: `quotient`, `realize`, and `verify` subcommands over
//! JSON problem files.
//!
//! Exit codes: `0` success, `1` binding invariant failure, `2` input
//! error, `3` solver non-convergence. The JSON report goes to `--out`
//! when given, otherwise to stdout; human-readable progress and
//! diagnostics go to stderr. Identical problem file, seed, and tolerances
//! produce byte-identical reports.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

use crate::algebra::Subspace;
use crate::check::InvariantCheck;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::problem::{Overrides, ProblemSpec, ResolvedProblem};
use crate::quotient::oracle_quotient_norm;
use crate::realization::{
    build_realization, verify_complete_isometry, ProbeSet, Realization, RealizationKind,
};
use crate::report::{
    truncation_rows, ConfigEcho, ProblemEcho, QuotientEntry, RealizationFile, Report,
    REPORT_SCHEMA,
};

/// Random held-out elements drawn per level by the isometry sweep.
const HOLDOUTS_PER_LEVEL: usize = 3;
/// Random pairs in the Leibniz product-inequality sweep.
const LEIBNIZ_PAIRS: usize = 50;

#[derive(Parser, Debug)]
#[command(
    name = "opspace",
    about = "Certified quotient norms of operator spaces and their concrete realizations",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Certify the quotient norm of every probe, with an independent
    /// derivative-free cross-check where the budget allows.
    Quotient(CommonArgs),
    /// Build the realization named by the problem's kind tag and run its
    /// full invariant suite.
    Realize(RealizeArgs),
    /// Re-verify a realization (freshly built, or loaded from a file)
    /// against its problem: structural invariants, probe exactness, the
    /// per-level isometry sweep, and the kind's extra checks.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Problem description (JSON, schema opspace/problem-v1).
    #[arg(long, value_name = "PATH")]
    spec: PathBuf,
    /// Write the JSON report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Override the problem file's seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Override a tolerance, e.g. --tol quotient_gap=1e-4 (repeatable).
    #[arg(long, value_name = "NAME=VALUE")]
    tol: Vec<String>,
    /// Override the probe auto-generation depth (matrix levels 1..=N).
    #[arg(long, value_name = "N")]
    levels: Option<usize>,
    /// Override the random probes drawn per auto-generated level.
    #[arg(long, value_name = "N")]
    probes: Option<usize>,
}

#[derive(Args, Debug)]
struct RealizeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Persist the built realization (JSON, schema opspace/realization-v1).
    #[arg(long, value_name = "PATH")]
    save_realization: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Verify this persisted realization instead of rebuilding one.
    #[arg(long, value_name = "PATH")]
    realization: Option<PathBuf>,
}

fn parse_tol_flags(flags: &[String]) -> Result<Vec<(String, f64)>> {
    flags
        .iter()
        .map(|s| {
            let (name, value) = s.split_once('=').ok_or_else(|| {
                Error::InvalidInput(format!("--tol expects NAME=VALUE, got `{s}`"))
            })?;
            let value: f64 = value.parse().map_err(|_| {
                Error::InvalidInput(format!("--tol {name}: `{value}` is not a number"))
            })?;
            Ok((name.to_string(), value))
        })
        .collect()
}

fn resolve(common: &CommonArgs) -> Result<ResolvedProblem> {
    let spec = ProblemSpec::from_path(&common.spec)?;
    let over = Overrides {
        seed: common.seed,
        tolerances: parse_tol_flags(&common.tol)?,
        levels: common.levels,
        randoms_per_level: common.probes,
    };
    spec.resolve(&over)
}

/// Assemble the probe family a resolved problem asks for: auto-generated
/// probes (levels ≥ 1) merged with any explicit elements.
fn assemble_probes(p: &ResolvedProblem) -> Result<ProbeSet> {
    let explicit = ProbeSet::from_elements(
        p.explicit_probes.clone(),
        &p.subspace,
        &p.config,
    )?;
    if p.levels == 0 {
        if explicit.is_empty() {
            return Err(Error::InvalidInput(
                "problem defines no probes and disables auto-generation".into(),
            ));
        }
        return Ok(explicit);
    }
    let auto = ProbeSet::generate(&p.subspace, p.levels, p.randoms_per_level, &p.config)?;
    auto.merge(explicit)
}

fn report_skeleton(command: &str, p: &ResolvedProblem, probe_count: usize) -> Report {
    Report {
        schema: REPORT_SCHEMA.to_string(),
        command: command.to_string(),
        status: String::new(),
        problem: ProblemEcho {
            shape: p.subspace.shape().block_dims().to_vec(),
            kind: p.kind.as_str().to_string(),
            subspace_dim: p.subspace.dim(),
            probe_count,
        },
        config: ConfigEcho {
            seed: p.config.seed,
            levels: p.levels,
            randoms_per_level: p.randoms_per_level,
            tolerances: p.config.tol.clone(),
        },
        quotients: Vec::new(),
        realization: None,
        invariants: Vec::new(),
        truncation: Vec::new(),
    }
}

fn prefixed(prefix: &str, checks: Vec<InvariantCheck>) -> Vec<InvariantCheck> {
    checks
        .into_iter()
        .map(|mut c| {
            c.name = format!("{prefix}{}", c.name);
            c
        })
        .collect()
}

/// Quotient entries (and per-certificate checks) for an already-certified
/// probe family. Certificates computed during probe assembly are reused;
/// probes with zero quotient norm carry no certificate and contribute a
/// zero row.
fn quotient_entries(
    probes: &ProbeSet,
    v: &Subspace,
    cfg: &Config,
    with_oracle: bool,
) -> Result<(Vec<QuotientEntry>, Vec<InvariantCheck>)> {
    let mut entries = Vec::new();
    let mut checks = Vec::new();
    for (i, probe) in probes.probes().iter().enumerate() {
        let (value, duality_gap, certificate_norm, annihilation_defect) =
            match &probe.certificate {
                Some(cert) => {
                    checks.extend(prefixed(
                        &format!("probe_{i}_"),
                        cert.validate(&probe.element, v, cfg)?,
                    ));
                    (
                        cert.value,
                        cert.duality_gap,
                        cert.certificate.as_ref().map(|f| f.norm()),
                        cert.certificate
                            .as_ref()
                            .map(|f| f.annihilation_defect(v))
                            .transpose()?,
                    )
                }
                None => (0.0, 0.0, None, None),
            };
        let oracle_value = if with_oracle {
            match oracle_quotient_norm(
                &probe.element,
                v,
                cfg.solver.oracle_budget,
                cfg.seed ^ 0x6f72_6163_6c65,
            ) {
                Ok(o) => {
                    let scale = value.max(1.0);
                    checks.push(InvariantCheck::new(
                        format!("probe_{i}_oracle_agreement"),
                        (value - o.value).abs() / scale,
                        cfg.tol.oracle_agreement_rel,
                    ));
                    Some(o.value)
                }
                // Instances beyond the oracle's search-dimension budget
                // keep their certificate-based checks only.
                Err(Error::ContractViolation(_)) => None,
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        entries.push(QuotientEntry {
            probe: i,
            level: probe.level(),
            value,
            duality_gap,
            certificate_norm,
            annihilation_defect,
            oracle_value,
        });
    }
    Ok((entries, checks))
}

/// The invariant battery shared by `realize` and `verify`.
fn verification_battery(
    r: &Realization,
    p: &ResolvedProblem,
) -> Result<(Vec<InvariantCheck>, Vec<crate::report::TruncationRow>)> {
    let cfg = &p.config;
    let mut checks = r.validate(&p.subspace, &cfg.tol)?;
    checks.extend(r.probe_exactness(&cfg.tol)?);
    match r.kind() {
        RealizationKind::Star | RealizationKind::System => {
            checks.extend(prefixed("jordan_", r.jordan_checks(&cfg.tol)?));
        }
        RealizationKind::Subalgebra => {
            checks.extend(r.leibniz_sweep(&p.subspace, LEIBNIZ_PAIRS, cfg)?);
            checks.extend(r.cp_average_checks(&cfg.tol)?);
        }
        RealizationKind::General => {}
    }
    let sweep_levels = r.probes().max_level().max(1);
    let iso = verify_complete_isometry(r, &p.subspace, sweep_levels, HOLDOUTS_PER_LEVEL, cfg)?;
    checks.extend(iso.checks.clone());
    Ok((checks, truncation_rows(&iso)))
}

fn cmd_quotient(args: &CommonArgs) -> Result<Report> {
    let p = resolve(args)?;
    let probes = assemble_probes(&p)?;
    let mut report = report_skeleton("quotient", &p, probes.len());
    let (entries, checks) = quotient_entries(&probes, &p.subspace, &p.config, true)?;
    report.quotients = entries;
    report.invariants = checks;
    report.seal();
    Ok(report)
}

fn realization_summary(r: &Realization) -> crate::report::RealizationSummary {
    crate::report::RealizationSummary {
        kind: r.kind().as_str().to_string(),
        hilbert_dim: r.hilbert_dim(),
        projection_rank: r.projection_rank(),
        multiplicities: r.rep().multiplicities().to_vec(),
    }
}

fn cmd_realize(args: &RealizeArgs) -> Result<(Report, Option<String>)> {
    let p = resolve(&args.common)?;
    let probes = assemble_probes(&p)?;
    let mut report = report_skeleton("realize", &p, probes.len());
    let r = build_realization(p.kind, &p.subspace, probes, &p.config)?;
    report.realization = Some(realization_summary(&r));
    let (entries, cert_checks) = quotient_entries(r.probes(), &p.subspace, &p.config, false)?;
    report.quotients = entries;
    let (checks, truncation) = verification_battery(&r, &p)?;
    report.invariants = cert_checks;
    report.invariants.extend(checks);
    report.truncation = truncation;
    report.seal();
    let saved = args
        .save_realization
        .is_some()
        .then(|| RealizationFile::from_realization(&r).to_json());
    Ok((report, saved))
}

fn cmd_verify(args: &VerifyArgs) -> Result<Report> {
    let p = resolve(&args.common)?;
    let r = match &args.realization {
        Some(path) => {
            let file = RealizationFile::load(path)?;
            let loaded = file.to_realization(&p.subspace, &p.config)?;
            if loaded.kind() != p.kind {
                return Err(Error::InvalidInput(format!(
                    "realization file has kind `{}`, problem says `{}`",
                    loaded.kind().as_str(),
                    p.kind.as_str()
                )));
            }
            loaded
        }
        None => {
            let probes = assemble_probes(&p)?;
            build_realization(p.kind, &p.subspace, probes, &p.config)?
        }
    };
    let mut report = report_skeleton("verify", &p, r.probes().len());
    report.realization = Some(realization_summary(&r));
    let (entries, cert_checks) = quotient_entries(r.probes(), &p.subspace, &p.config, false)?;
    report.quotients = entries;
    let (checks, truncation) = verification_battery(&r, &p)?;
    report.invariants = cert_checks;
    report.invariants.extend(checks);
    report.truncation = truncation;
    report.seal();
    Ok(report)
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::SolverNonConvergence { .. } | Error::Convergence { .. } => 3,
        Error::InvariantFailure(_) => 1,
        _ => 2,
    }
}

fn summarize(report: &Report) {
    eprintln!(
        "{}: shape {:?}, kind {}, subspace dim {}, {} probes",
        report.command,
        report.problem.shape,
        report.problem.kind,
        report.problem.subspace_dim,
        report.problem.probe_count,
    );
    for q in &report.quotients {
        eprintln!(
            "  probe {} (level {}): quotient norm {:.9} (gap {:.3e})",
            q.probe, q.level, q.value, q.duality_gap
        );
    }
    if let Some(r) = &report.realization {
        eprintln!(
            "  realization: dim H = {}, rank P = {}, multiplicities {:?}",
            r.hilbert_dim, r.projection_rank, r.multiplicities
        );
    }
    let failed: Vec<&InvariantCheck> =
        report.invariants.iter().filter(|c| !c.pass).collect();
    eprintln!(
        "  invariants: {} checked, {} failed",
        report.invariants.len(),
        failed.len()
    );
    for c in failed {
        eprintln!(
            "    FAIL {} (residual {:.3e}, tolerance {:.3e})",
            c.name, c.residual, c.tolerance
        );
    }
    for row in &report.truncation {
        eprintln!(
            "  level {}: {} probes (max deviation {:.3e}), {} holdouts (overshoot {:.3e}, truncation slack {:.3e})",
            row.level,
            row.probes_checked,
            row.max_probe_deviation,
            row.holdouts_checked,
            row.max_overshoot,
            row.max_truncation_slack
        );
    }
    eprintln!("  status: {}", report.status);
}

fn write_output(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn dispatch(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Quotient(args) => {
            let report = cmd_quotient(args)?;
            write_output(args.out.as_ref(), &report.to_json())?;
            Ok(report)
        }
        Command::Realize(args) => {
            let (report, saved) = cmd_realize(args)?;
            if let (Some(path), Some(text)) = (&args.save_realization, saved) {
                std::fs::write(path, text)?;
            }
            write_output(args.common.out.as_ref(), &report.to_json())?;
            Ok(report)
        }
        Command::Verify(args) => {
            let report = cmd_verify(args)?;
            write_output(args.common.out.as_ref(), &report.to_json())?;
            Ok(report)
        }
    }
}

/// Run with explicit arguments (first entry is the program name);
/// returns the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Clap handles --help/--version as "errors" with exit code 0.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(report) => {
            summarize(&report);
            if report.all_pass() {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Entry point for the binary: parse `std::env::args`.
pub fn run() -> i32 {
    run_from(std::env::args())
}
