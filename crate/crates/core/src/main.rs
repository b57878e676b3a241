//! Command-line interface: point evaluations, kernel checks, operator and
//! norm evaluations, weight-pair condition checks, Hardy best constants,
//! and the named verification suites with calibration fixtures.

use anisoharm::conditions::{check_condition, hardy_best_constant, ConditionKind, ConditionScheme};
use anisoharm::error::{Error, Result};
use anisoharm::functions::{builtin_field, builtin_profile, FieldId, ProfileId};
use anisoharm::geometry::AnisotropySpec;
use anisoharm::harness::calibration::Fixtures;
use anisoharm::harness::io;
use anisoharm::harness::suites::{self, Artifact, SuiteId, SuiteOutcome};
use anisoharm::kernels::{builtin_kernel, KernelId, CANCELLATION_TOL};
use anisoharm::operators::{self, QuadratureScheme};
use anisoharm::spaces::{self, NormScheme, Region};
use anisoharm::Ellipsoid;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "anisoharm", version, about = "Anisotropic quasi-metric analysis toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the quasi-distance of a point.
    RhoEval {
        #[arg(long, default_value = "p0-2d")]
        spec: String,
        /// Comma-separated coordinates.
        #[arg(long)]
        point: String,
    },
    /// Print the unit-ellipsoid volume of a spec.
    Volume {
        #[arg(long, default_value = "p0-2d")]
        spec: String,
    },
    /// Cancellation residual and sphere norms of a catalog kernel.
    KernelCheck {
        #[arg(long, default_value = "p0-2d")]
        spec: String,
        #[arg(long)]
        kernel: String,
        /// Exit nonzero when the kernel lacks cancellation.
        #[arg(long)]
        require_cancellation: bool,
    },
    /// Evaluate an operator from a JSON config at the configured points.
    OpEval(ConfigArgs),
    /// Evaluate a norm from a JSON config.
    NormEval(ConfigArgs),
    /// Check a weight-pair condition from a JSON config.
    CheckPair(ConfigArgs),
    /// Compute a weighted Hardy best constant from a JSON config.
    Hardy(ConfigArgs),
    /// Run a verification suite (or `all`).
    Verify {
        suite: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory holding calibration fixtures (default: built-in).
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
    /// Produce calibration fixtures for a ratio suite.
    Calibrate {
        suite: String,
        /// Where to write the fixtures JSON (a directory for `all`).
        #[arg(long)]
        out_fixtures: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize report files previously written to a directory.
    Report {
        #[arg(long)]
        dir: PathBuf,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// Path to the JSON config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for reports (default: print to stdout only).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_spec(name: &str) -> Result<AnisotropySpec> {
    match name {
        "p0-2d" => AnisotropySpec::parabolic(2),
        "p0-3d" => AnisotropySpec::parabolic(3),
        "iso-2d" => AnisotropySpec::isotropic(2),
        "iso-3d" => AnisotropySpec::isotropic(3),
        other => {
            if other.trim_start().starts_with('{') {
                Ok(serde_json::from_str(other)?)
            } else {
                Err(Error::config(format!(
                    "unknown spec '{other}' (expected p0-2d, p0-3d, iso-2d, iso-3d, or JSON)"
                )))
            }
        }
    }
}

fn spec_from_value(v: &serde_json::Value) -> Result<AnisotropySpec> {
    match v {
        serde_json::Value::String(s) => parse_spec(s),
        serde_json::Value::Null => AnisotropySpec::parabolic(2),
        other => Ok(serde_json::from_value(other.clone())?),
    }
}

fn parse_point(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|c| {
            c.trim()
                .parse::<f64>()
                .map_err(|e| Error::config(format!("bad coordinate '{c}': {e}")))
        })
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::RhoEval { spec, point } => {
            let spec = parse_spec(&spec)?;
            let x = parse_point(&point)?;
            let value = spec.rho(&x)?;
            println!("{value:.11e}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Volume { spec } => {
            let spec = parse_spec(&spec)?;
            println!("{:.11e}", spec.unit_volume()?);
            Ok(ExitCode::SUCCESS)
        }
        Command::KernelCheck {
            spec,
            kernel,
            require_cancellation,
        } => {
            let spec = parse_spec(&spec)?;
            let k = builtin_kernel(&spec, &KernelId(kernel.clone()))?;
            let residual = k.cancellation_residual()?;
            let s2 = k.sphere_s_norm(2.0)?;
            let sinf = k.sphere_s_norm(f64::INFINITY)?;
            println!("kernel         : {}", k.label);
            println!("residual       : {residual:.11e}");
            println!("L2 sphere norm : {s2:.11e}");
            println!("sup sphere norm: {sinf:.11e}");
            if residual.abs() <= CANCELLATION_TOL {
                println!("cancellation   : ok");
            } else if require_cancellation {
                println!("cancellation   : FAILED (|residual| > {CANCELLATION_TOL:e})");
                return Ok(ExitCode::FAILURE);
            } else {
                println!("cancellation   : not satisfied (projection available)");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::OpEval(args) => op_eval(&args),
        Command::NormEval(args) => norm_eval(&args),
        Command::CheckPair(args) => check_pair(&args),
        Command::Hardy(args) => hardy_cmd(&args),
        Command::Verify {
            suite,
            out,
            fixtures,
        } => verify_cmd(&suite, out.as_deref(), fixtures.as_deref()),
        Command::Calibrate {
            suite,
            out_fixtures,
            out,
        } => calibrate_cmd(&suite, &out_fixtures, out.as_deref()),
        Command::Report { dir } => report_cmd(&dir),
    }
}

#[derive(Deserialize)]
struct OpConfig {
    #[serde(default)]
    spec: serde_json::Value,
    kernel: String,
    field: FieldId,
    #[serde(default)]
    b: Option<FieldId>,
    op: String,
    points: Vec<Vec<f64>>,
    #[serde(default)]
    scheme: Option<QuadratureScheme>,
    #[serde(default)]
    c0: Option<f64>,
}

fn op_eval(args: &ConfigArgs) -> Result<ExitCode> {
    let cfg: OpConfig = serde_json::from_str(&std::fs::read_to_string(&args.config)?)?;
    let spec = spec_from_value(&cfg.spec)?;
    let kernel = builtin_kernel(&spec, &KernelId(cfg.kernel.clone()))?;
    let f = builtin_field(&spec, &cfg.field)?;
    let b = cfg.b.as_ref().map(|id| builtin_field(&spec, id)).transpose()?;
    let scheme = cfg.scheme.clone().unwrap_or_default();
    let mut results = Vec::new();
    for x in &cfg.points {
        let need_b = || {
            b.clone()
                .ok_or_else(|| Error::config("this operator needs a symbol field 'b'"))
        };
        let r = match cfg.op.as_str() {
            "maximal" => operators::maximal(&kernel, &f, x, &scheme)?,
            "singular" => operators::singular_pv(&kernel, &f, x, &scheme)?,
            "commutator" => operators::commutator_singular(&need_b()?, &kernel, &f, x, &scheme)?,
            "commutator-identity" => {
                operators::commutator_singular_identity(&need_b()?, &kernel, &f, x, &scheme)?
            }
            "maximal-commutator" => {
                operators::maximal_commutator(&need_b()?, &kernel, &f, x, &scheme)?
            }
            "marcinkiewicz" => operators::marcinkiewicz(&kernel, &f, x, &scheme)?,
            "marcinkiewicz-commutator" => {
                operators::marcinkiewicz_commutator(&need_b()?, &kernel, &f, x, &scheme)?
            }
            "e1-majorant" => {
                let v = operators::e1_majorant(&kernel, &f, x, &scheme, cfg.c0.unwrap_or(1.0))?;
                anisoharm::OperatorResult {
                    value: v,
                    est_error: 0.0,
                    pv_converged: true,
                    diagnostics: Default::default(),
                }
            }
            other => return Err(Error::config(format!("unknown op '{other}'"))),
        };
        println!(
            "x = {x:?}: value = {:.11e} (est_error {:.2e})",
            r.value, r.est_error
        );
        results.push(serde_json::json!({"x": x, "result": r}));
    }
    if let Some(dir) = &args.out {
        io::write_json(dir, "op-eval.json", &results)?;
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Deserialize)]
struct NormConfig {
    #[serde(default)]
    spec: serde_json::Value,
    field: FieldId,
    norm: String,
    #[serde(default = "default_p")]
    p: f64,
    #[serde(default)]
    lambda: f64,
    #[serde(default)]
    phi: Option<ProfileId>,
    #[serde(default)]
    x0: Option<Vec<f64>>,
    #[serde(default)]
    window: Option<(f64, f64)>,
    #[serde(default)]
    region_radius: Option<f64>,
    #[serde(default)]
    centers: Option<Vec<Vec<f64>>>,
}

fn default_p() -> f64 {
    1.0
}

fn norm_eval(args: &ConfigArgs) -> Result<ExitCode> {
    let cfg: NormConfig = serde_json::from_str(&std::fs::read_to_string(&args.config)?)?;
    let spec = spec_from_value(&cfg.spec)?;
    let f = builtin_field(&spec, &cfg.field)?;
    let mut scheme = NormScheme::default();
    if let Some((lo, hi)) = cfg.window {
        scheme = NormScheme::with_window(lo, hi);
    }
    let x0 = cfg.x0.clone().unwrap_or_else(|| vec![0.0; spec.dim()]);
    match cfg.norm.as_str() {
        "lp" | "weak-lp" => {
            let region = match cfg.region_radius {
                Some(r) => Region::Ellipsoid(Ellipsoid::new(x0.clone(), r)?),
                None => Region::WholeSpace,
            };
            let v = if cfg.norm == "lp" {
                spaces::lp_norm(&spec, &f, cfg.p, &region, &scheme)?
            } else {
                let e = match region {
                    Region::Ellipsoid(e) => e,
                    Region::WholeSpace => {
                        return Err(Error::config("weak-lp needs region_radius"))
                    }
                };
                spaces::weak_lp_norm(&spec, &f, cfg.p, &e, &scheme)?
            };
            println!("{v:.11e}");
            if let Some(dir) = &args.out {
                io::write_json(dir, "norm-eval.json", &serde_json::json!({"value": v}))?;
            }
        }
        "morrey" | "weak-morrey" => {
            let phi_id = cfg
                .phi
                .clone()
                .ok_or_else(|| Error::config("morrey norms need a 'phi' profile"))?;
            let phi = builtin_profile(&phi_id)?;
            let rep = spaces::local_morrey_norm(
                &spec,
                &f,
                cfg.p,
                &phi,
                &x0,
                cfg.norm == "weak-morrey",
                &scheme,
            )?;
            println!("value = {:.11e} at r = {:?}", rep.value, rep.argsup_r);
            if let Some(dir) = &args.out {
                io::write_json(dir, "norm-eval.json", &rep)?;
                io::write_text(dir, "norm-grid.csv", &io::norm_csv(&rep))?;
            }
        }
        "campanato" => {
            let rep = spaces::local_campanato_norm(&spec, &f, cfg.p, cfg.lambda, &x0, &scheme)?;
            println!("value = {:.11e} at r = {:?}", rep.value, rep.argsup_r);
            if let Some(dir) = &args.out {
                io::write_json(dir, "norm-eval.json", &rep)?;
                io::write_text(dir, "norm-grid.csv", &io::norm_csv(&rep))?;
            }
        }
        "bmo" => {
            let centers = cfg
                .centers
                .clone()
                .unwrap_or_else(|| vec![vec![0.0; spec.dim()]]);
            let rep = spaces::bmo_norm_sampled(&spec, &f, cfg.p, &centers, &scheme)?;
            println!("value = {:.11e}", rep.value);
            if let Some(dir) = &args.out {
                io::write_json(dir, "norm-eval.json", &rep)?;
                io::write_text(dir, "norm-grid.csv", &io::norm_csv(&rep))?;
            }
        }
        other => return Err(Error::config(format!("unknown norm '{other}'"))),
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Deserialize)]
struct PairConfig {
    kind: ConditionKind,
    phi1: ProfileId,
    #[serde(default)]
    phi2: Option<ProfileId>,
    base_window: (f64, f64),
    extended_window: (f64, f64),
    #[serde(default)]
    scheme: Option<ConditionScheme>,
}

fn check_pair(args: &ConfigArgs) -> Result<ExitCode> {
    let cfg: PairConfig = serde_json::from_str(&std::fs::read_to_string(&args.config)?)?;
    let phi1 = builtin_profile(&cfg.phi1)?;
    let phi2 = cfg.phi2.as_ref().map(builtin_profile).transpose()?;
    let rep = check_condition(
        &cfg.kind,
        &phi1,
        phi2.as_ref(),
        cfg.base_window,
        cfg.extended_window,
        &cfg.scheme.unwrap_or_default(),
    )?;
    println!(
        "{}: verdict {:?}, c_sup = {:.6e}, growth = {:.4}",
        rep.kind.tag.as_str(),
        rep.verdict,
        rep.c_sup,
        rep.growth_ratio
    );
    if let Some(dir) = &args.out {
        io::write_json(dir, "condition.json", &serde_json::to_value(&rep)?)?;
        io::write_text(dir, "condition.csv", &io::condition_csv(&rep))?;
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Deserialize)]
struct HardyConfig {
    v1: ProfileId,
    v2: ProfileId,
    omega: ProfileId,
    #[serde(default)]
    log_weighted: bool,
    window: (f64, f64),
    #[serde(default)]
    scheme: Option<ConditionScheme>,
}

fn hardy_cmd(args: &ConfigArgs) -> Result<ExitCode> {
    let cfg: HardyConfig = serde_json::from_str(&std::fs::read_to_string(&args.config)?)?;
    let v1 = builtin_profile(&cfg.v1)?;
    let v2 = builtin_profile(&cfg.v2)?;
    let omega = builtin_profile(&cfg.omega)?;
    let b = hardy_best_constant(
        &v1,
        &v2,
        &omega,
        cfg.log_weighted,
        cfg.window,
        &cfg.scheme.unwrap_or_default(),
    )?;
    println!("B = {b:.11e}");
    if let Some(dir) = &args.out {
        io::write_json(dir, "hardy.json", &serde_json::json!({"B": b}))?;
    }
    Ok(ExitCode::SUCCESS)
}

/// Built-in fixtures shipped with the crate; `calibrate` regenerates them.
fn builtin_fixtures(name: &str) -> Option<&'static str> {
    match name {
        "local-estimate" => Some(include_str!("../fixtures/local-estimate.json")),
        "weak-type" => Some(include_str!("../fixtures/weak-type.json")),
        "commutator" => Some(include_str!("../fixtures/commutator.json")),
        "lp-bound" => Some(include_str!("../fixtures/lp-bound.json")),
        _ => None,
    }
}

fn load_fixtures(id: SuiteId, dir: Option<&Path>) -> Result<Option<Fixtures>> {
    if !id.needs_fixtures() {
        return Ok(None);
    }
    if let Some(dir) = dir {
        let path = dir.join(format!("{}.json", id.name()));
        return Ok(Some(Fixtures::load(&path)?));
    }
    let text = builtin_fixtures(id.name())
        .ok_or_else(|| Error::config(format!("no built-in fixtures for suite '{}'", id.name())))?;
    Ok(Some(serde_json::from_str(text)?))
}

fn write_outcome(dir: &Path, outcome: &SuiteOutcome) -> Result<()> {
    let sub = dir.join(&outcome.suite);
    std::fs::create_dir_all(&sub)?;
    io::write_json(
        &sub,
        "summary.json",
        &serde_json::json!({
            "suite": outcome.suite,
            "pass": outcome.pass,
            "config_hash": outcome.config_hash,
            "lines": outcome.lines,
            "observed": outcome.observed,
        }),
    )?;
    for artifact in &outcome.artifacts {
        match artifact {
            Artifact::Ratio(rep) => {
                let stem = io::sanitize(&rep.case_id);
                io::write_json(&sub, &format!("{stem}.json"), rep)?;
                io::write_text(&sub, &format!("{stem}.csv"), &io::ratio_csv(rep))?;
            }
            Artifact::Condition(name, rep) => {
                let stem = io::sanitize(name);
                io::write_json(&sub, &format!("{stem}.json"), &serde_json::to_value(rep)?)?;
                io::write_text(&sub, &format!("{stem}.csv"), &io::condition_csv(rep))?;
            }
            Artifact::Json(name, value) => {
                io::write_json(&sub, &format!("{}.json", io::sanitize(name)), value)?;
            }
        }
    }
    Ok(())
}

fn verify_cmd(suite: &str, out: Option<&Path>, fixtures_dir: Option<&Path>) -> Result<ExitCode> {
    let ids = SuiteId::parse(suite)?;
    let mut all_pass = true;
    for id in ids {
        let fixtures = load_fixtures(id, fixtures_dir)?;
        let outcome = suites::run_suite(id, fixtures.as_ref())?;
        println!(
            "== suite {} : {}",
            outcome.suite,
            if outcome.pass { "PASS" } else { "FAIL" }
        );
        for line in &outcome.lines {
            println!("   {line}");
        }
        if let Some(dir) = out {
            write_outcome(dir, &outcome)?;
        }
        all_pass &= outcome.pass;
    }
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn calibrate_cmd(suite: &str, out_fixtures: &Path, out: Option<&Path>) -> Result<ExitCode> {
    let single = suite != "all";
    let ids = SuiteId::parse(suite)?;
    for id in ids {
        if !id.needs_fixtures() {
            continue;
        }
        let (outcome, fixtures) = suites::calibrate_suite(id)?;
        let path = if single {
            out_fixtures.to_path_buf()
        } else {
            out_fixtures.join(format!("{}.json", id.name()))
        };
        fixtures.save(&path)?;
        println!(
            "calibrated {}: {} caps written to {}",
            outcome.suite,
            fixtures.caps.len(),
            path.display()
        );
        if let Some(dir) = out {
            write_outcome(dir, &outcome)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn report_cmd(dir: &Path) -> Result<ExitCode> {
    let mut any_fail = false;
    let mut entries: Vec<PathBuf> = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            let summary = path.join("summary.json");
            if summary.exists() {
                entries.push(summary);
            }
        } else if path.file_name().and_then(|n| n.to_str()) == Some("summary.json") {
            entries.push(path);
        }
    }
    entries.sort();
    if entries.is_empty() {
        return Err(Error::config(format!(
            "no summary.json files under {}",
            dir.display()
        )));
    }
    for path in entries {
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path)?)?;
        let pass = v["pass"].as_bool().unwrap_or(false);
        any_fail |= !pass;
        println!(
            "{:<20} {}",
            v["suite"].as_str().unwrap_or("?"),
            if pass { "PASS" } else { "FAIL" }
        );
        if let Some(lines) = v["lines"].as_array() {
            for line in lines {
                if let Some(s) = line.as_str() {
                    println!("   {s}");
                }
            }
        }
    }
    Ok(if any_fail {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    })
}
