//! Command-line surface of the workbench: validation, positive-definiteness
//! checks, norm brackets, Morita transfer, span reconstruction, witness
//! transfer, and the worked-example gallery.
//!
//! Exit codes: 0 when every check passes, 1 when a mathematical check fails
//! (the report carries the witness), 2 on input or usage errors.

use anyhow::{anyhow, bail, Context};
use bsigma_core::algebra::ScalarTolerance;
use bsigma_core::amenability::{transfer_witness, validate_witness};
use bsigma_core::bundle::{parse_bundles, write_bundle, Bundle, MoritaEntry};
use bsigma_core::equivariant::validate_equivariant;
use bsigma_core::fourier::{pd_check_cross, pd_check_sampled, sup_norm, CoeffMap, PDVerdict};
use bsigma_core::gallery::{gallery, GALLERY_NAMES};
use bsigma_core::morita::{
    partition_of_unity, span_reconstruct, transfer, validate_compatible_action, CompatibleAction,
    Frame, TransferMode,
};
use bsigma_core::system::revalidate_system;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "bsigma", about = "Finite-scale workbench for twisted C*-dynamical systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Choi,
    Sample,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Full,
    Single,
}

#[derive(Subcommand)]
enum Command {
    /// Validate every object in the given bundles.
    Validate {
        bundles: Vec<PathBuf>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Decide positive definiteness of a coefficient map.
    PdCheck {
        bundles: Vec<PathBuf>,
        #[arg(long)]
        coeff: Option<String>,
        #[arg(long, value_enum, default_value_t = Method::Choi)]
        method: Method,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Norm bracket (exact for positive-definite maps).
    SupNorm {
        bundles: Vec<PathBuf>,
        #[arg(long)]
        coeff: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Transfer a coefficient map across a Morita equivalence.
    Transfer {
        bundles: Vec<PathBuf>,
        #[arg(long)]
        morita: Option<String>,
        #[arg(long)]
        coeff: Option<String>,
        #[arg(long, value_enum, default_value_t = Mode::Full)]
        mode: Mode,
        /// Frame pair indices `i,j` for single mode.
        #[arg(long, default_value = "0,0")]
        pair: String,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Reconstruct a coefficient map over Θ from its pulled-back components.
    Reconstruct {
        bundles: Vec<PathBuf>,
        #[arg(long)]
        morita: Option<String>,
        #[arg(long)]
        coeff: Option<String>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Transfer an amenability witness across a Morita equivalence.
    WitnessTransfer {
        bundles: Vec<PathBuf>,
        #[arg(long)]
        morita: Option<String>,
        #[arg(long)]
        witness: Option<String>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Emit a worked-example bundle.
    Gallery {
        name: String,
        /// Output directory.
        #[arg(short, long, default_value = ".")]
        output: PathBuf,
    },
}

struct Report {
    lines: Vec<String>,
    ok: bool,
    machine: serde_json::Value,
}

fn main() {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok((report, output)) => {
            for line in &report.lines {
                println!("{line}");
            }
            if let Some(path) = output {
                if let Err(e) = std::fs::write(
                    &path,
                    serde_json::to_string_pretty(&report.machine).expect("machine report"),
                ) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    std::process::exit(2);
                }
            }
            std::process::exit(if report.ok { 0 } else { 1 });
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    }
}

fn run(command: Command) -> anyhow::Result<(Report, Option<PathBuf>)> {
    match command {
        Command::Validate { bundles, tol, output } => {
            let bundle = load(&bundles)?;
            Ok((cmd_validate(&bundle, tol), output))
        }
        Command::PdCheck { bundles, coeff, method, samples, seed, tol, output } => {
            let bundle = load(&bundles)?;
            if samples == 0 {
                bail!("--samples must be at least 1");
            }
            let (name, t) = pick(&bundle.coeffs, coeff.as_deref(), "coeff")?;
            Ok((cmd_pd_check(name, t, method, samples, seed, tol)?, output))
        }
        Command::SupNorm { bundles, coeff, seed, tol, output } => {
            let bundle = load(&bundles)?;
            let (name, t) = pick(&bundle.coeffs, coeff.as_deref(), "coeff")?;
            let bracket = sup_norm(t, &ScalarTolerance::uniform(tol), seed);
            let line = match bracket.exact {
                Some(e) => format!("sup-norm {name}: exact {e:.12e} (positive definite)"),
                None => format!(
                    "sup-norm {name}: bracket [{:.12e}, {:.12e}]",
                    bracket.lower, bracket.upper
                ),
            };
            let machine = json!({
                "command": "sup-norm",
                "coeff": name,
                "lower": bracket.lower,
                "upper": bracket.upper,
                "exact": bracket.exact,
            });
            Ok((Report { lines: vec![line], ok: true, machine }, output))
        }
        Command::Transfer { bundles, morita, coeff, mode, pair, tol, output } => {
            let bundle = load(&bundles)?;
            Ok((cmd_transfer(&bundle, morita.as_deref(), coeff.as_deref(), mode, &pair, tol)?, output))
        }
        Command::Reconstruct { bundles, morita, coeff, tol, output } => {
            let bundle = load(&bundles)?;
            Ok((cmd_reconstruct(&bundle, morita.as_deref(), coeff.as_deref(), tol)?, output))
        }
        Command::WitnessTransfer { bundles, morita, witness, tol, output } => {
            let bundle = load(&bundles)?;
            Ok((cmd_witness_transfer(&bundle, morita.as_deref(), witness.as_deref(), tol)?, output))
        }
        Command::Gallery { name, output } => {
            let bundle =
                gallery(&name).map_err(|e| anyhow!("{e}; known names: {}", GALLERY_NAMES.join(", ")))?;
            std::fs::create_dir_all(&output)
                .with_context(|| format!("creating {}", output.display()))?;
            let path = output.join(format!("{name}.json"));
            write_bundle(&bundle, &path).map_err(|e| anyhow!("{e}"))?;
            let report = Report {
                lines: vec![format!("gallery {name}: wrote {}", path.display())],
                ok: true,
                machine: json!({ "command": "gallery", "name": name, "path": path.display().to_string() }),
            };
            Ok((report, None))
        }
    }
}

fn load(paths: &[PathBuf]) -> anyhow::Result<Bundle> {
    if paths.is_empty() {
        bail!("at least one bundle file is required");
    }
    parse_bundles(paths).map_err(|e| anyhow!("{e}"))
}

fn pick<'a, T>(
    map: &'a BTreeMap<String, T>,
    name: Option<&str>,
    what: &str,
) -> anyhow::Result<(&'a str, &'a T)> {
    match name {
        Some(n) => map
            .get_key_value(n)
            .map(|(k, v)| (k.as_str(), v))
            .ok_or_else(|| anyhow!("no {what} named `{n}` in the bundles")),
        None => {
            if map.len() == 1 {
                let (k, v) = map.iter().next().expect("len 1");
                Ok((k.as_str(), v))
            } else {
                bail!(
                    "--{what} is required when the bundles contain {} candidates",
                    map.len()
                )
            }
        }
    }
}

fn build_action(
    bundle: &Bundle,
    entry: &MoritaEntry,
    tol: &ScalarTolerance,
) -> anyhow::Result<(CompatibleAction, Frame)> {
    let sigma = bundle
        .systems
        .get(&entry.sigma)
        .ok_or_else(|| anyhow!("missing system {}", entry.sigma))?;
    let theta = bundle
        .systems
        .get(&entry.theta)
        .ok_or_else(|| anyhow!("missing system {}", entry.theta))?;
    let action =
        validate_compatible_action(sigma, theta, entry.bimodule.clone(), entry.delta.clone(), tol)
            .map_err(|e| anyhow!("morita data invalid: {e}"))?;
    let frame = match &entry.frame {
        Some(pairs) => {
            let mut sum = action.theta.algebra.zero();
            let mut k = 0.0f64;
            for (z, zp) in pairs {
                sum = sum.add(&action.bimodule.inner_right(z, zp));
                k += action.bimodule.vector_norm(z) * action.bimodule.vector_norm(zp);
            }
            let residual = sum.distance(&action.theta.algebra.unit());
            if residual > tol.at_scale(1.0).max(1e-9) {
                bail!("supplied frame residual {residual:.3e} above tolerance");
            }
            Frame { pairs: pairs.clone(), k: k * k, residual }
        }
        None => partition_of_unity(&action.bimodule, tol).map_err(|e| anyhow!("{e}"))?,
    };
    Ok((action, frame))
}

fn cmd_validate(bundle: &Bundle, tol: f64) -> Report {
    let tol = ScalarTolerance::uniform(tol);
    let mut lines = Vec::new();
    let mut ok = true;
    let mut results = BTreeMap::new();
    for (name, sys) in &bundle.systems {
        match revalidate_system(sys, &tol) {
            Ok(()) => {
                lines.push(format!(
                    "system {name}: OK (|G| = {}, dim A = {})",
                    sys.group.order(),
                    sys.algebra.total_dim()
                ));
                results.insert(format!("system:{name}"), json!("ok"));
            }
            Err(e) => {
                ok = false;
                lines.push(format!("system {name}: FAIL ({e})"));
                results.insert(format!("system:{name}"), json!(format!("{e}")));
            }
        }
    }
    for name in bundle.reps.keys() {
        match bundle
            .build_rep(name)
            .map_err(|e| e.to_string())
            .and_then(|(sys, rep)| {
                validate_equivariant(&sys, &rep, &tol).map_err(|e| e.to_string()).map(|_| rep.dim())
            }) {
            Ok(dim) => {
                lines.push(format!("rep {name}: OK (carrier dim {dim})"));
                results.insert(format!("rep:{name}"), json!("ok"));
            }
            Err(e) => {
                ok = false;
                lines.push(format!("rep {name}: FAIL ({e})"));
                results.insert(format!("rep:{name}"), json!(e));
            }
        }
    }
    for (name, coeff) in &bundle.coeffs {
        lines.push(format!(
            "coeff {name}: structurally valid (support size {})",
            coeff.support(1e-12).len()
        ));
        results.insert(format!("coeff:{name}"), json!("ok"));
    }
    for (name, entry) in &bundle.morita {
        match build_action(bundle, entry, &tol) {
            Ok((_, frame)) => {
                lines.push(format!(
                    "morita {name}: OK (frame size {}, residual {:.3e}, K = {:.6})",
                    frame.pairs.len(),
                    frame.residual,
                    frame.k
                ));
                results.insert(format!("morita:{name}"), json!({ "k": frame.k, "residual": frame.residual }));
            }
            Err(e) => {
                ok = false;
                lines.push(format!("morita {name}: FAIL ({e})"));
                results.insert(format!("morita:{name}"), json!(format!("{e}")));
            }
        }
    }
    for (name, entry) in &bundle.witnesses {
        let members: Vec<CoeffMap> =
            entry.members.iter().filter_map(|m| bundle.coeffs.get(m).cloned()).collect();
        match validate_witness(&members, tol.atol.max(1e-9), &tol) {
            Ok((w, _)) => {
                lines.push(format!(
                    "witness {name}: OK (members {}, bound {:.6}, max residual {:.3e})",
                    w.net.len(),
                    w.bound,
                    w.convergence.iter().flatten().fold(0.0f64, |a, &b| a.max(b))
                ));
                results.insert(format!("witness:{name}"), json!("ok"));
            }
            Err(e) => {
                ok = false;
                lines.push(format!("witness {name}: FAIL ({e})"));
                results.insert(format!("witness:{name}"), json!(format!("{e}")));
            }
        }
    }
    lines.push(if ok { "all checks passed".into() } else { "some checks FAILED".into() });
    Report { lines, ok, machine: json!({ "command": "validate", "results": results, "ok": ok }) }
}

fn verdict_json(v: &PDVerdict) -> serde_json::Value {
    json!({
        "positive": v.positive,
        "min_eigenvalue": v.min_eigenvalue,
        "certificate": v.certificate.as_ref().map(|c| json!({
            "eigenvalue": c.eigenvalue,
            "tuple_len": c.tuple.len(),
            "group_elements": c.tuple.iter().map(|(g, _)| *g).collect::<Vec<_>>(),
        })),
    })
}

fn cmd_pd_check(
    name: &str,
    t: &CoeffMap,
    method: Method,
    samples: usize,
    seed: u64,
    tol: f64,
) -> anyhow::Result<Report> {
    let tol = ScalarTolerance::uniform(tol);
    let verdict = match method {
        Method::Choi => pd_check_cross(t, samples.min(50), seed, &tol).map_err(|e| anyhow!("{e}"))?,
        Method::Sample => pd_check_sampled(t, samples, seed, &tol).map_err(|e| anyhow!("{e}"))?,
    };
    let mut lines = Vec::new();
    if verdict.positive {
        lines.push(format!(
            "pd-check {name}: positive definite (min eigenvalue {:.6e})",
            verdict.min_eigenvalue
        ));
    } else {
        lines.push(format!(
            "pd-check {name}: NOT positive definite (min eigenvalue {:.6e})",
            verdict.min_eigenvalue
        ));
        match &verdict.certificate {
            Some(c) => {
                let gs: Vec<String> = c.tuple.iter().map(|(g, _)| g.to_string()).collect();
                lines.push(format!(
                    "  counterexample tuple of length {} over group elements [{}], eigenvalue {:.6e}",
                    c.tuple.len(),
                    gs.join(", "),
                    c.eigenvalue
                ));
            }
            None => lines.push("  no concrete counterexample tuple extracted".into()),
        }
    }
    let machine = json!({ "command": "pd-check", "coeff": name, "verdict": verdict_json(&verdict) });
    Ok(Report { lines, ok: verdict.positive, machine })
}

fn matrix_json(m: &bsigma_core::algebra::CMatrix) -> serde_json::Value {
    json!((0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| vec![m[(i, j)].re, m[(i, j)].im]).collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

fn cmd_transfer(
    bundle: &Bundle,
    morita: Option<&str>,
    coeff: Option<&str>,
    mode: Mode,
    pair: &str,
    tol: f64,
) -> anyhow::Result<Report> {
    let tol = ScalarTolerance::uniform(tol);
    let (mname, entry) = pick(&bundle.morita, morita, "morita")?;
    let (cname, t) = pick(&bundle.coeffs, coeff, "coeff")?;
    let (action, frame) = build_action(bundle, entry, &tol)?;
    let mode = match mode {
        Mode::Full => TransferMode::Full,
        Mode::Single => {
            let parts: Vec<usize> = pair
                .split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<Result<_, _>>()
                .context("--pair must be two comma-separated indices")?;
            if parts.len() != 2 || parts.iter().any(|&i| i >= frame.pairs.len()) {
                bail!("--pair indices out of range for frame of size {}", frame.pairs.len());
            }
            TransferMode::Single {
                z: frame.pairs[parts[0]].0.clone(),
                zp: frame.pairs[parts[0]].1.clone(),
                zeta: frame.pairs[parts[1]].0.clone(),
                zetap: frame.pairs[parts[1]].1.clone(),
            }
        }
    };
    let out = transfer(&action, &frame, t, &mode, &tol).map_err(|e| anyhow!("{e}"))?;
    let lines = vec![format!(
        "transfer {cname} across {mname}: OK (K = {:.6}, output support size {})",
        frame.k,
        out.support(1e-12).len()
    )];
    let machine = json!({
        "command": "transfer",
        "morita": mname,
        "coeff": cname,
        "k": frame.k,
        "result": { "system": entry.theta, "per_g": out.per_g.iter().map(matrix_json).collect::<Vec<_>>() },
    });
    Ok(Report { lines, ok: true, machine })
}

fn cmd_reconstruct(
    bundle: &Bundle,
    morita: Option<&str>,
    coeff: Option<&str>,
    tol: f64,
) -> anyhow::Result<Report> {
    let tol = ScalarTolerance::uniform(tol);
    let (mname, entry) = pick(&bundle.morita, morita, "morita")?;
    let (cname, t) = pick(&bundle.coeffs, coeff, "coeff")?;
    let (action, frame) = build_action(bundle, entry, &tol)?;
    match span_reconstruct(&action, &frame, t, &tol) {
        Ok(d) => {
            let lines = vec![format!(
                "reconstruct {cname} across {mname}: OK ({} components, residual {:.3e})",
                d.components.len(),
                d.residual
            )];
            let machine = json!({
                "command": "reconstruct",
                "morita": mname,
                "coeff": cname,
                "components": d.components.len(),
                "residual": d.residual,
            });
            Ok(Report { lines, ok: true, machine })
        }
        Err(bsigma_core::morita::MoritaError::ReconstructionResidual(r)) => {
            let lines = vec![format!("reconstruct {cname} across {mname}: FAIL (residual {r:.3e})")];
            let machine = json!({ "command": "reconstruct", "residual": r, "ok": false });
            Ok(Report { lines, ok: false, machine })
        }
        Err(e) => Err(anyhow!("{e}")),
    }
}

fn cmd_witness_transfer(
    bundle: &Bundle,
    morita: Option<&str>,
    witness: Option<&str>,
    tol: f64,
) -> anyhow::Result<Report> {
    let tol = ScalarTolerance::uniform(tol);
    let (mname, entry) = pick(&bundle.morita, morita, "morita")?;
    let (wname, wentry) = pick(&bundle.witnesses, witness, "witness")?;
    let (action, frame) = build_action(bundle, entry, &tol)?;
    let members: Vec<CoeffMap> = wentry
        .members
        .iter()
        .map(|m| bundle.coeffs.get(m).cloned().ok_or_else(|| anyhow!("missing coeff {m}")))
        .collect::<anyhow::Result<_>>()?;
    let (witness_in, _) =
        validate_witness(&members, tol.atol.max(1e-9), &tol).map_err(|e| anyhow!("{e}"))?;
    match transfer_witness(&action, &frame, &witness_in, &tol) {
        Ok(out) => {
            let max_res =
                out.witness.convergence.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
            let lines = vec![format!(
                "witness-transfer {wname} across {mname}: OK (K = {:.6}, bound ratio {:.6}, max residual {:.3e})",
                out.k, out.bound_ratio, max_res
            )];
            let machine = json!({
                "command": "witness-transfer",
                "witness": wname,
                "morita": mname,
                "k": out.k,
                "bound_ratio": out.bound_ratio,
                "transferred_epsilon": out.transferred_epsilon,
                "max_residual": max_res,
            });
            Ok(Report { lines, ok: true, machine })
        }
        Err(e) => {
            let lines = vec![format!("witness-transfer {wname} across {mname}: FAIL ({e})")];
            Ok(Report { lines, ok: false, machine: json!({ "command": "witness-transfer", "error": format!("{e}") }) })
        }
    }
}
