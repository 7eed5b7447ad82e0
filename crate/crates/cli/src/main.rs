use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use setreg::bundled;
use setreg::checks::{run_checks, CHECKS};
use setreg::dual::{subreg_dual_certificate, uniform_dual_constant, DualReport};
use setreg::geometry::{parse_scene, Scene};
use setreg::mappings::{parse_mapping, verify_bridge_prop8, verify_bridge_thm5, SvMapping};
use setreg::moduli::{estimate_all, per_rho_csv, Estimates, EstimatorParams};
use setreg::projections::{cyclic_project, rate_vs_zeta};
use setreg::report::stable_json;
use setreg::Error;

const EXIT_FAIL: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(name = "setreg", version, about = "Regularity moduli of collections of closed sets")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    #[arg(long, global = true)]
    rho_max: Option<f64>,
    #[arg(long, global = true)]
    rho_min: Option<f64>,
    #[arg(long, global = true)]
    rho_factor: Option<f64>,
    /// Grid points per axis of the outer sampling grids.
    #[arg(long, global = true)]
    grid: Option<usize>,
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Size of the worker pool; defaults to the number of cores.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Directory for artifacts; results go to stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Classification threshold.
    #[arg(long, global = true, default_value_t = 0.05)]
    threshold: f64,
}

#[derive(Args)]
struct SceneArg {
    /// Scene file.
    #[arg(long, conflicts_with = "example")]
    scene: Option<PathBuf>,
    /// Bundled scene name.
    #[arg(long)]
    example: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Estimate theta, zeta, theta_hat and the slope constant.
    Estimate {
        #[command(flatten)]
        scene: SceneArg,
    },
    /// Uniform dual constant and the dual subregularity certificate.
    Dual {
        #[command(flatten)]
        scene: SceneArg,
        #[arg(long, default_value_t = 0.3)]
        delta: f64,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
    },
    /// Compare a scene with its product mapping, or a mapping with its
    /// graph scene.
    Bridge {
        #[command(flatten)]
        scene: SceneArg,
        /// Mapping file.
        #[arg(long, conflicts_with_all = ["scene", "example", "example_mapping"])]
        mapping: Option<PathBuf>,
        /// Bundled mapping name.
        #[arg(long, conflicts_with_all = ["scene", "example"])]
        example_mapping: Option<String>,
        /// Previous report to compare against.
        #[arg(long)]
        expect: Option<PathBuf>,
    },
    /// Run cyclic projections and fit convergence rates.
    Project {
        #[command(flatten)]
        scene: SceneArg,
        /// Start point as comma separated coordinates; repeatable.
        #[arg(long, required = true, value_delimiter = ';', allow_hyphen_values = true)]
        start: Vec<String>,
        #[arg(long, default_value_t = 200)]
        iters: usize,
    },
    /// Run the bundled regression suite.
    VerifyPaper {
        /// List the checks without running them.
        #[arg(long)]
        list: bool,
        /// Run only these checks.
        #[arg(long)]
        only: Vec<String>,
    },
}

enum Failure {
    Input(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Numeric(e.to_string())
        }
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn params(c: &Common) -> Res<EstimatorParams> {
    let mut p = EstimatorParams { seed: c.seed, ..EstimatorParams::default() };
    if let Some(v) = c.rho_max {
        p.schedule.rho_max = v;
    }
    if let Some(v) = c.rho_min {
        p.schedule.rho_min = v;
    }
    if let Some(v) = c.rho_factor {
        p.schedule.factor = v;
    }
    if let Some(n) = c.grid {
        p.ball_samples.points_per_axis = n;
    }
    p.validate()?;
    if !(c.threshold > 0.0) {
        return Err(Failure::Input("threshold must be positive".into()));
    }
    Ok(p)
}

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_scene(a: &SceneArg) -> Res<Scene> {
    match (&a.scene, &a.example) {
        (Some(p), _) => Ok(parse_scene(&read(p)?)?),
        (None, Some(n)) => Ok(bundled::scene(n)?),
        (None, None) => Err(Failure::Input("pass --scene or --example".into())),
    }
}

fn load_mapping(path: &Option<PathBuf>, name: &Option<String>) -> Res<Option<SvMapping>> {
    match (path, name) {
        (Some(p), _) => Ok(Some(parse_mapping(&read(p)?)?)),
        (None, Some(n)) => Ok(Some(bundled::mapping(n)?)),
        _ => Ok(None),
    }
}

/// Writes to `out/name`, or to stdout without an output directory.
fn emit(c: &Common, name: &str, text: &str) -> Res<()> {
    match &c.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
            let path = dir.join(name);
            fs::write(&path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct EstimateOut<'a> {
    scene: Option<&'a str>,
    seed: u64,
    params: &'a EstimatorParams,
    threshold: f64,
    estimates: &'a Estimates,
    semiregular: bool,
    subregular: bool,
    uniformly_regular: bool,
}

fn cmd_estimate(c: &Common, a: &SceneArg) -> Res<u8> {
    let p = params(c)?;
    let sc = load_scene(a)?;
    let e = estimate_all(&sc, &p)?;
    if e.all().iter().any(|m| m.value.is_nan()) {
        return Err(Failure::Numeric("estimate is NaN".into()));
    }
    let csv = per_rho_csv(&e.all())?;
    let json = stable_json(&EstimateOut {
        scene: sc.name.as_deref(),
        seed: p.seed,
        params: &p,
        threshold: c.threshold,
        estimates: &e,
        semiregular: e.theta.value > c.threshold,
        subregular: e.zeta.value > c.threshold,
        uniformly_regular: e.theta_hat.value > c.threshold,
    })?;
    if c.out.is_some() {
        emit(c, "estimate.json", &json)?;
        emit(c, "per_rho.csv", &csv)?;
    } else if c.format == Format::Csv {
        emit(c, "", &csv)?;
    } else {
        emit(c, "", &json)?;
    }
    Ok(0)
}

#[derive(Serialize)]
struct DualOut<'a> {
    scene: Option<&'a str>,
    seed: u64,
    uniform: DualReport,
    certificate: DualReport,
}

fn cmd_dual(c: &Common, a: &SceneArg, delta: f64, alpha: f64) -> Res<u8> {
    let p = params(c)?;
    let sc = load_scene(a)?;
    let uniform = uniform_dual_constant(&sc, delta, &p)?;
    let certificate = subreg_dual_certificate(&sc, alpha, delta, &p)?;
    let code = if certificate.pass == Some(true) { 0 } else { EXIT_FAIL };
    let out = DualOut { scene: sc.name.as_deref(), seed: p.seed, uniform, certificate };
    if c.format == Format::Csv {
        let rows = [&out.uniform, &out.certificate]
            .iter()
            .map(|r| {
                vec![
                    r.constant_kind.clone(),
                    setreg::report::fmt_f64(r.value),
                    r.pass.map_or(String::new(), |b| if b { "PASS" } else { "FAIL" }.into()),
                    r.flags.join("|"),
                ]
            })
            .collect::<Vec<_>>();
        emit(c, "dual.csv", &setreg::report::csv_string(&["kind", "value", "result", "flags"], &rows)?)?;
    } else {
        emit(c, "dual.json", &stable_json(&out)?)?;
    }
    Ok(code)
}

/// First place where `actual` differs from `expected`; numbers are compared
/// to a relative 1e-6 and keys missing from `expected` are ignored.
fn mismatch(expected: &Value, actual: &Value, path: &str) -> Option<String> {
    match (expected, actual) {
        (Value::Object(e), Value::Object(a)) => e.iter().find_map(|(k, v)| match a.get(k) {
            Some(w) => mismatch(v, w, &format!("{path}.{k}")),
            None => Some(format!("{path}.{k} missing")),
        }),
        (Value::Array(e), Value::Array(a)) => {
            if e.len() != a.len() {
                return Some(format!("{path}: length {} vs {}", e.len(), a.len()));
            }
            e.iter().zip(a).enumerate().find_map(|(i, (v, w))| mismatch(v, w, &format!("{path}[{i}]")))
        }
        (Value::Number(e), Value::Number(a)) => {
            let (x, y) = (e.as_f64().unwrap_or(f64::NAN), a.as_f64().unwrap_or(f64::NAN));
            ((x - y).abs() > 1e-6 * x.abs().max(1.0)).then(|| format!("{path}: expected {x}, got {y}"))
        }
        (e, a) => (e != a).then(|| format!("{path}: expected {e}, got {a}")),
    }
}

fn cmd_bridge(c: &Common, a: &SceneArg, f: Option<SvMapping>, expect: &Option<PathBuf>) -> Res<u8> {
    let p = params(c)?;
    let report = match f {
        Some(f) => verify_bridge_thm5(&f, &p)?,
        None => verify_bridge_prop8(&load_scene(a)?, &p)?,
    };
    let json = stable_json(&report)?;
    let mut code = if report.passed() { 0 } else { EXIT_FAIL };
    if c.out.is_some() || c.format == Format::Csv {
        println!("{:<48} {:>6} {:>14}", "inequality", "result", "slack");
        for i in &report.inequalities {
            let verdict = if i.satisfied { "PASS" } else { "FAIL" };
            println!("{:<48} {:>6} {:>14}", i.name, verdict, setreg::report::fmt_f64(i.slack));
        }
    }
    if c.out.is_some() || c.format == Format::Json {
        emit(c, "bridge.json", &json)?;
    }
    if let Some(path) = expect {
        let want: Value =
            serde_json::from_str(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        let got: Value = serde_json::from_str(&json).map_err(|e| Failure::Numeric(e.to_string()))?;
        if let Some(m) = mismatch(&want, &got, "$") {
            eprintln!("mismatch against {}: {m}", path.display());
            code = EXIT_FAIL;
        }
    }
    Ok(code)
}

fn parse_point(s: &str) -> Res<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| Failure::Input(format!("bad coordinate {t:?}: {e}"))))
        .collect()
}

fn cmd_project(c: &Common, a: &SceneArg, starts: &[String], iters: usize) -> Res<u8> {
    let p = params(c)?;
    let sc = load_scene(a)?;
    let starts: Vec<Vec<f64>> = starts.iter().map(|s| parse_point(s)).collect::<Res<_>>()?;
    for (k, s) in starts.iter().enumerate() {
        let t = cyclic_project(&sc, s, iters)?;
        let name = format!("trajectory_{k}.csv");
        if c.out.is_some() || c.format == Format::Csv {
            emit(c, &name, &t.to_csv()?)?;
        }
    }
    let report = rate_vs_zeta(&sc, &p, &starts, iters, c.threshold)?;
    if c.out.is_some() || c.format == Format::Json {
        emit(c, "rates.json", &stable_json(&report)?)?;
    }
    Ok(if report.holds == Some(false) { EXIT_FAIL } else { 0 })
}

fn cmd_verify(c: &Common, list: bool, only: &[String]) -> Res<u8> {
    if list {
        for (name, desc) in CHECKS {
            println!("{name:<24} {desc}");
        }
        return Ok(0);
    }
    let p = params(c)?;
    let report = run_checks(&p, only)?;
    for ch in &report.checks {
        let verdict = if ch.passed { "PASS" } else { "FAIL" };
        println!("{verdict}  {:<24} {}", ch.name, ch.detail);
    }
    let passed = report.checks.iter().filter(|ch| ch.passed).count();
    println!("{passed}/{} checks passed", report.checks.len());
    let json = stable_json(&report)?;
    if c.out.is_some() {
        emit(c, "verify.json", &json)?;
    } else if c.format == Format::Json {
        eprint!("{json}");
    }
    Ok(if report.passed { 0 } else { EXIT_FAIL })
}

fn run(cli: &Cli) -> Res<u8> {
    let c = &cli.common;
    if let Some(w) = c.workers {
        if w == 0 {
            return Err(Failure::Input("--workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| Failure::Numeric(e.to_string()))?;
    }
    match &cli.cmd {
        Cmd::Estimate { scene } => cmd_estimate(c, scene),
        Cmd::Dual { scene, delta, alpha } => cmd_dual(c, scene, *delta, *alpha),
        Cmd::Bridge { scene, mapping, example_mapping, expect } => {
            let f = load_mapping(mapping, example_mapping)?;
            cmd_bridge(c, scene, f, expect)
        }
        Cmd::Project { scene, start, iters } => cmd_project(c, scene, start, *iters),
        Cmd::VerifyPaper { list, only } => cmd_verify(c, *list, only),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Numeric(m)) => {
            eprintln!("numerical diagnostic: {m}");
            ExitCode::from(EXIT_NUMERIC)
        }
    }
}
