//! `mpogauge`: build MPO symmetry bundles, gauge or symmetrize states, and
//! run the identity suite.
//!
//! Exit codes:
//! 0 success, 1 verification failure or other error, 2 invalid input
//! (group, cocycle, tensor or dimension), 3 group law fails for a built
//! representation, 4 gauging refused for anomalous data, 5 size guard.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mpogauge::category::CategoryMpoRep;
use mpogauge::fixtures::group_by_name;
use mpogauge::group::{check_cocycle3, Cocycle3, FiniteGroup, GroupJson};
use mpogauge::io::{cocycle_from_json, read_json, read_state, write_json, Bundle, GaugedStateJson, Pair};
use mpogauge::linalg::Mat;
use mpogauge::mpo::{build_anomalous_mpo, build_onsite_mpo, regular_rep, verify_group_law, MpoGroupRep, DENSE_GUARD};
use mpogauge::report::{tolerance_from_env, Report};
use mpogauge::suite::{gauge_pipeline, level_lengths, symmetrize_category_pipeline, symmetrize_pipeline, verify_category_rep, verify_group_rep, PipelineOutput};
use mpogauge::{Error, Tensor, C64};

/// Dense budget for d^L·χ^L at the command-line boundary.
const CLI_GUARD: usize = 1 << 16;

#[derive(Parser)]
#[command(name = "mpogauge", version, about = "MPO symmetries, fusion data and gauging at small sizes")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a representation bundle.
    BuildRep(BuildArgs),
    /// Gauge or symmetrize a matter state.
    Gauge(GaugeArgs),
    /// Run the identity suite on one or more bundles.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Onsite,
    Anomalous,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Gauge,
    Symmetrize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Level {
    Quick,
    Full,
}

#[derive(clap::Args)]
struct BuildArgs {
    /// Zn, S3, or a group JSON file.
    #[arg(long, conflicts_with = "category", required_unless_present = "category")]
    group: Option<String>,
    #[arg(long, value_enum, default_value = "onsite")]
    kind: Kind,
    /// regular, diag:v1,v2,... (cyclic groups; entries are reals or e:p/q for e^{2πi p/q}), or a JSON file of matrices.
    #[arg(long, default_value = "regular")]
    u: String,
    /// trivial, nontrivial (cyclic groups), or a JSON file of [re, im] pairs.
    #[arg(long, default_value = "trivial")]
    cocycle: String,
    /// fibonacci or trivial.
    #[arg(long)]
    category: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct GaugeArgs {
    #[arg(long)]
    rep: PathBuf,
    /// State vector in tensor JSON.
    #[arg(long)]
    state: PathBuf,
    #[arg(long)]
    length: usize,
    /// JSON list of element indices.
    #[arg(long)]
    subgroup: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "gauge")]
    mode: Mode,
    /// Gauge-leg state for symmetrize mode, in tensor JSON.
    #[arg(long)]
    phi: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(clap::Args)]
struct VerifyArgs {
    #[arg(long, required = true)]
    rep: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "quick")]
    level: Level,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    report: PathBuf,
}

struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn new(code: u8, msg: impl Into<String>) -> Self {
        Failure { code, msg: msg.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Anomalous => 4,
            Error::SizeGuard(_) => 5,
            Error::InvalidGroup(_)
            | Error::InvalidCocycle(_)
            | Error::DimensionMismatch { .. }
            | Error::Json(_)
            | Error::InvalidTensor(_)
            | Error::InvalidCategory(_) => 2,
            _ => 1,
        };
        let msg = match &e {
            Error::Anomalous => format!("{e}; gauging needs a trivial 3-cocycle class, use --mode symmetrize instead"),
            _ => e.to_string(),
        };
        Failure { code, msg }
    }
}

type CmdResult = std::result::Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match cli.cmd {
        Cmd::BuildRep(a) => build_rep(a),
        Cmd::Gauge(a) => gauge(a),
        Cmd::Verify(a) => verify(a),
    };
    match out {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn load_group(spec: &str) -> Result<FiniteGroup, Failure> {
    if Path::new(spec).is_file() {
        let j: GroupJson = read_json(spec)?;
        return Ok(FiniteGroup::try_from(j)?);
    }
    Ok(group_by_name(spec)?)
}

/// Generator of a cyclic group, i.e. an element of full order.
fn cyclic_generator(g: &FiniteGroup) -> Option<usize> {
    let n = g.order();
    g.elements().find(|&a| {
        let mut x = a;
        let mut k = 1;
        while x != 0 {
            x = g.mul(x, a);
            k += 1;
        }
        k == n
    })
}

fn parse_phase(s: &str) -> Result<C64, Failure> {
    let bad = || Failure::new(2, format!("cannot parse diagonal entry `{s}`"));
    if let Some(frac) = s.strip_prefix("e:") {
        let (p, q) = frac.split_once('/').ok_or_else(bad)?;
        let (p, q): (f64, f64) = (p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?);
        return Ok(C64::from_polar(1.0, 2.0 * std::f64::consts::PI * p / q));
    }
    Ok(C64::new(s.trim().parse().map_err(|_| bad())?, 0.0))
}

fn onsite_matrices(grp: &FiniteGroup, spec: &str) -> Result<Vec<Mat>, Failure> {
    if spec == "regular" {
        return Ok(regular_rep(grp));
    }
    if let Some(list) = spec.strip_prefix("diag:") {
        let v = list.split(',').map(parse_phase).collect::<Result<Vec<_>, _>>()?;
        let gen = cyclic_generator(grp).ok_or_else(|| Failure::new(2, "diag: needs a cyclic group"))?;
        let mut us = vec![Mat::identity(v.len(), v.len()); grp.order()];
        let mut x = gen;
        for k in 1..grp.order() {
            us[x] = Mat::from_fn(v.len(), v.len(), |r, c| if r == c { v[r].powu(k as u32) } else { C64::new(0.0, 0.0) });
            x = grp.mul(x, gen);
        }
        return Ok(us);
    }
    let ts: Vec<Tensor> = read_json(spec)?;
    if ts.len() != grp.order() {
        return Err(Failure::new(2, format!("expected {} matrices, got {}", grp.order(), ts.len())));
    }
    Ok(ts.iter().map(|t| t.to_matrix()).collect::<mpogauge::Result<_>>()?)
}

fn cocycle(grp: &FiniteGroup, spec: &str) -> Result<Cocycle3, Failure> {
    let n = grp.order();
    let w = match spec {
        "trivial" => Cocycle3::trivial(n),
        "nontrivial" => {
            let gen = cyclic_generator(grp).ok_or_else(|| Failure::new(2, "no built-in nontrivial cocycle for a non-cyclic group; pass a file"))?;
            if n < 2 {
                return Err(Failure::new(2, "the trivial group has no nontrivial cocycle"));
            }
            // Pull the standard Z_n representative back along k ↦ gen^k.
            let mut power = vec![0; n];
            let mut x = 0;
            for k in 0..n {
                power[x] = k;
                x = grp.mul(x, gen);
            }
            let base = Cocycle3::cyclic(n, 1);
            Cocycle3::from_fn(n, |a, b, c| base.get(power[a], power[b], power[c]))
        }
        path => {
            let p: Vec<Pair> = read_json(path)?;
            cocycle_from_json(n, &p)?
        }
    };
    if !check_cocycle3(grp, &w) {
        return Err(Failure::new(2, "cocycle condition fails or ω is not normalized"));
    }
    Ok(w)
}

fn build_rep(a: BuildArgs) -> CmdResult {
    let bundle = if let Some(name) = &a.category {
        let rep = match name.to_ascii_lowercase().as_str() {
            "fibonacci" => CategoryMpoRep::fibonacci(),
            "trivial" => CategoryMpoRep::from_group_rep(&mpogauge::fixtures::regular_onsite(&FiniteGroup::cyclic(1))),
            other => return Err(Failure::new(2, format!("unknown category {other}"))),
        };
        let tol = tolerance_from_env();
        let r = rep.verify_dense(2, tol)?;
        if !r.all_pass() {
            return Err(Failure::new(3, "category algebra fails at L=2"));
        }
        Bundle::from_category_rep(&rep)
    } else {
        let grp = load_group(a.group.as_deref().expect("clap enforces group or category"))?;
        let rep = match a.kind {
            Kind::Onsite => build_onsite_mpo(&grp, onsite_matrices(&grp, &a.u)?),
            Kind::Anomalous => build_anomalous_mpo(&grp, &cocycle(&grp, &a.cocycle)?),
        }
        .map_err(|e| match e {
            Error::NotRepresentation(m) => Failure::new(3, format!("not a representation: {m}")),
            e => e.into(),
        })?;
        check_group_law(&rep)?;
        Bundle::from_group_rep(&rep)
    };
    write_json(&a.out, &bundle)?;
    println!("{}", a.out.display());
    println!("bundle written");
    Ok(0)
}

fn check_group_law(rep: &MpoGroupRep) -> Result<(), Failure> {
    let len = if rep.phys_dim().pow(2) <= DENSE_GUARD { 2 } else { 1 };
    let r = verify_group_law(rep, len, tolerance_from_env())?;
    if !r.all_pass() {
        return Err(Failure::new(3, format!("group law fails at L={len}: max residual {:e}", r.max_residual())));
    }
    Ok(())
}

fn guard(d: usize, chi: usize, len: usize) -> Result<(), Failure> {
    let size = (d.saturating_mul(chi) as f64).powi(len as i32);
    if size > CLI_GUARD as f64 {
        return Err(Failure::new(5, format!("d^L·χ^L = {size} exceeds the dense budget {CLI_GUARD}")));
    }
    Ok(())
}

fn check_len(v: &[C64], expected: usize) -> Result<(), Failure> {
    if v.len() != expected {
        return Err(Error::DimensionMismatch { expected, got: v.len() }.into());
    }
    Ok(())
}

fn gauge(a: GaugeArgs) -> CmdResult {
    let tol = tolerance_from_env();
    let bundle: Bundle = read_json(&a.rep)?;
    let psi = read_state(&a.state)?;
    let phi = a.phi.as_ref().map(read_state).transpose()?;
    if a.length == 0 {
        return Err(Failure::new(2, "length must be positive"));
    }
    let out: PipelineOutput = if bundle.is_category() {
        let rep = bundle.to_category_rep()?;
        guard(rep.phys_dim(), rep.total_chi(), a.length)?;
        check_len(&psi, rep.phys_dim().pow(a.length as u32))?;
        if matches!(a.mode, Mode::Gauge) {
            return Err(Failure::new(2, "category bundles support --mode symmetrize only"));
        }
        symmetrize_category_pipeline(&rep, &psi, a.length, phi.as_deref(), tol)?
    } else {
        let rep = bundle.to_group_rep()?;
        guard(rep.phys_dim(), rep.total_chi(), a.length)?;
        check_len(&psi, rep.phys_dim().pow(a.length as u32))?;
        match a.mode {
            Mode::Gauge => {
                let sub: Option<Vec<usize>> = a.subgroup.as_ref().map(read_json).transpose()?;
                gauge_pipeline(&rep, &psi, a.length, sub.as_deref(), tol)?
            }
            Mode::Symmetrize => symmetrize_pipeline(&rep, &psi, a.length, phi.as_deref(), tol)?,
        }
    };
    let mut report = out.report;
    report.meta("length", a.length);
    report.meta("mode", match a.mode {
        Mode::Gauge => "gauge",
        Mode::Symmetrize => "symmetrize",
    });
    write_json(&a.out, &GaugedStateJson::from(&out.state))?;
    let report_path = a.report.unwrap_or_else(|| a.out.with_extension("report.json"));
    write_json(&report_path, &report)?;
    summarize(&report_path, &report);
    Ok(if report.all_pass() { 0 } else { 1 })
}

fn summarize(path: &Path, r: &Report) {
    println!("{}", path.display());
    let failed = r.failures().count();
    println!(
        "{} records, {} failed, max residual {:.3e}{}",
        r.records.len(),
        failed,
        r.max_residual(),
        if r.meta.get("annihilated").map(String::as_str) == Some("true") { ", output annihilated" } else { "" }
    );
}

fn verify(a: VerifyArgs) -> CmdResult {
    let tol = tolerance_from_env();
    let lengths = level_lengths(match a.level {
        Level::Quick => "quick",
        Level::Full => "full",
    })?;
    let mut report = Report::new();
    report.meta("tolerance", tol);
    report.meta("lengths", format!("{lengths:?}"));
    for (k, path) in a.rep.iter().enumerate() {
        let prefix = if a.rep.len() > 1 { format!("[{k}] ") } else { String::new() };
        let sub = match read_json::<Bundle>(path) {
            Err(e) => load_failure(&e),
            Ok(b) if b.is_category() => match b.to_category_rep() {
                Ok(rep) => verify_category_rep(&rep, &lengths, tol, a.seed),
                Err(e) => load_failure(&e),
            },
            Ok(b) => match b.to_group_rep() {
                Ok(rep) => verify_group_rep(&rep, &lengths, tol, a.seed),
                Err(e) => load_failure(&e),
            },
        };
        report.meta(format!("{prefix}fixture"), path.display());
        for rec in sub.records {
            report.push(format!("{prefix}{}", rec.identity), rec.anchor, rec.residual, rec.tolerance);
        }
        for (key, v) in sub.meta {
            report.meta(format!("{prefix}{key}"), v);
        }
    }
    report.sort();
    write_json(&a.report, &report)?;
    summarize(&a.report, &report);
    Ok(if report.all_pass() { 0 } else { 1 })
}

fn load_failure(e: &Error) -> Report {
    let mut r = Report::new();
    r.push("bundle load", "T_g is a valid MPO tensor for every g", f64::INFINITY, 0.0);
    r.meta("error", e);
    r
}
