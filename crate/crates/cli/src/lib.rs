//! Command-line front end: `fit`, `error-curve`, `verify`, `project`.
//!
//! Commands return an [`Outcome`] holding the process exit code and the text
//! written to stdout, so they can be exercised in-process.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sisfit::io::{self, fmt_f64, InputLayout, ModelFile};
use sisfit::{
    apply_weights, direct_error, error_curve, fiberize, synthesize, synthesize_weighted,
    Error, GridSpec, SignalSet, SisModel, Tolerances, WeightVector, C64,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

const PARSEVAL_TOL: f64 = 1e-9;
const CONTAINMENT_TOL: f64 = 1e-10;
const CROSS_TOL: f64 = 1e-10;
const FORMULA_TOL: f64 = 1e-9;
const PARSEVAL_TRIALS: usize = 32;
const PARSEVAL_SEED: u64 = 0x5151;

#[derive(Debug, Parser)]
#[command(name = "sisfit", version, about = "Fit shift-invariant spaces to sampled signals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit an optimal model and write it to a model file.
    Fit(FitArgs),
    /// Print the error curve E(n) for n = 0..=m.
    ErrorCurve(CurveArgs),
    /// Check a model file against a data set.
    Verify(VerifyArgs),
    /// Project signals onto a model's space.
    Project(ProjectArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Signal table: one column per signal, one row per sample.
    #[arg(long)]
    pub input: PathBuf,
    /// Per-axis sizes, row-major (axis 0 slowest). Defaults to one axis.
    #[arg(long, value_delimiter = ',')]
    pub axes: Option<Vec<usize>>,
    /// Per-axis phase counts; each must divide its axis size.
    #[arg(long, value_delimiter = ',', required = true)]
    pub phases: Vec<usize>,
    /// Columns are (re, im) pairs.
    #[arg(long)]
    pub complex: bool,
    /// Positive per-signal weights, whitespace or comma separated.
    #[arg(long)]
    pub weights: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TolArgs {
    #[arg(long)]
    pub rank_tol: Option<f64>,
    #[arg(long)]
    pub gap_tol: Option<f64>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("order").required(true).args(["gens", "gamma"])))]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub tol: TolArgs,
    /// Number of generators.
    #[arg(long)]
    pub gens: Option<usize>,
    /// Select n by minimizing E(n) + gamma·n.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub tol: TolArgs,
    /// Also report the order minimizing E(n) + gamma·n.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Write the curve (one value per line) to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Data set on the model's grid.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub complex: bool,
    /// Required when the model was fitted with weights.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Signals on the model's grid.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub complex: bool,
    /// Projected signals, written as (re, im) column pairs.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

/// Exit code plus everything meant for stdout.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { code: EXIT_OK, stdout }
    }
}

/// Error with the exit code it maps to.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Failure { code: EXIT_CONFIG, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } => EXIT_PARSE,
            Error::InvalidInput(_) | Error::DimensionMismatch { .. } | Error::GridMismatch(_) => {
                EXIT_CONFIG
            }
            Error::NonFinite(_) | Error::NoConvergence { .. } | Error::Io(_) => EXIT_NUMERICAL,
        };
        Failure { code, message: e.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I) -> (Outcome, Option<String>)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => (Outcome::ok(text), None),
                _ => (Outcome { code: EXIT_CONFIG, stdout: String::new() }, Some(text)),
            };
        }
    };
    match run(&cli.command) {
        Ok(out) => (out, None),
        Err(f) => (
            Outcome { code: f.code, stdout: String::new() },
            Some(format!("error: {}", f.message)),
        ),
    }
}

pub fn run(command: &Command) -> CliResult<Outcome> {
    match command {
        Command::Fit(a) => cmd_fit(a),
        Command::ErrorCurve(a) => cmd_error_curve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Project(a) => cmd_project(a),
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| Failure {
        code: EXIT_NUMERICAL,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

fn tolerances(t: &TolArgs) -> CliResult<Tolerances> {
    let mut tol = Tolerances::default();
    for (name, value, slot) in [
        ("--rank-tol", t.rank_tol, &mut tol.rank),
        ("--gap-tol", t.gap_tol, &mut tol.gap),
    ] {
        if let Some(v) = value {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Failure::config(format!("{name} must be finite and >= 0, got {v}")));
            }
            *slot = v;
        }
    }
    Ok(tol)
}

fn load_data(d: &DataArgs) -> CliResult<(SignalSet, Option<WeightVector>)> {
    let layout = InputLayout {
        axes: d.axes.clone(),
        phases: d.phases.clone(),
        complex: d.complex,
    };
    let set = io::parse_signals_str(&read(&d.input)?, &layout)?;
    let weights = match &d.weights {
        Some(p) => Some(io::parse_weights_str(&read(p)?)?),
        None => None,
    };
    Ok((set, weights))
}

/// Reads a table whose row count must equal the model grid size.
fn load_on_grid(path: &Path, complex: bool, grid: &GridSpec) -> CliResult<SignalSet> {
    let layout = InputLayout { axes: None, phases: vec![1], complex };
    let raw = io::parse_signals_str(&read(path)?, &layout)?;
    if raw.grid().len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "{} has {} samples per signal, model grid has {}",
            path.display(),
            raw.grid().len(),
            grid.len()
        ))
        .into());
    }
    Ok(SignalSet::new(grid.clone(), raw.into_samples())?)
}

fn load_model(path: &Path) -> CliResult<ModelFile> {
    Ok(ModelFile::parse(&read(path)?)?)
}

fn weighted_data(set: &SignalSet, weights: Option<&WeightVector>) -> CliResult<SignalSet> {
    Ok(match weights {
        Some(w) => apply_weights(set, w)?,
        None => set.clone(),
    })
}

fn grid_text(grid: &GridSpec) -> String {
    let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    format!(
        "axes={} phases={} P={} Q={}",
        join(grid.axes()),
        join(grid.phases()),
        grid.fiber_count(),
        grid.fiber_len()
    )
}

fn json_f64(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::String(if x > 0.0 { "inf".into() } else { "-inf".into() })
    }
}

fn render_json(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values always serialize") + "\n"
}

pub fn cmd_fit(a: &FitArgs) -> CliResult<Outcome> {
    let tol = tolerances(&a.tol)?;
    let (set, weights) = load_data(&a.data)?;
    let data = weighted_data(&set, weights.as_ref())?;
    let n = match (a.gens, a.gamma) {
        (Some(n), _) => n,
        (None, Some(gamma)) => error_curve(&data, &tol)?.select_order(gamma)?,
        (None, None) => return Err(Failure::config("one of --gens or --gamma is required")),
    };
    let model = match &weights {
        Some(w) => synthesize_weighted(&set, w, n, &tol)?,
        None => synthesize(&set, n, &tol)?,
    };
    let file = ModelFile::from_model(&model);
    write(&a.out, &file.render())?;
    Ok(Outcome::ok(fit_report(&model, &data, a.format)?))
}

fn fit_report(model: &SisModel, data: &SignalSet, format: Format) -> CliResult<String> {
    let report = model.report(PARSEVAL_TRIALS, PARSEVAL_SEED)?;
    let energy = data.energy();
    Ok(match format {
        Format::Json => render_json(&json!({
            "command": "fit",
            "axes": model.grid().axes(),
            "phases": model.grid().phases(),
            "signals": model.signal_count(),
            "n": report.n,
            "generators": model.generators().len(),
            "error": report.error,
            "energy": energy,
            "relative_error": if energy > 0.0 { report.error / energy } else { 0.0 },
            "unique": report.unique,
            "min_gap": json_f64(report.min_gap),
            "r_min": report.r_min,
            "r_max": report.r_max,
            "length": report.length_actual,
            "weighted": report.weighted,
            "frame_bounds": report.frame_bounds.map(|b| json!([b.lower, b.upper])),
            "curve": report.curve,
        })),
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "grid = {}", grid_text(model.grid()));
            let _ = writeln!(s, "signals = {}", model.signal_count());
            let _ = writeln!(s, "n = {}", report.n);
            let _ = writeln!(s, "generators = {}", model.generators().len());
            let _ = writeln!(s, "error = {}", fmt_f64(report.error));
            let _ = writeln!(s, "energy = {}", fmt_f64(energy));
            let _ = writeln!(s, "unique = {}", report.unique);
            let _ = writeln!(s, "min_gap = {}", fmt_f64(report.min_gap));
            let _ = writeln!(s, "r_min = {}", report.r_min);
            let _ = writeln!(s, "r_max = {}", report.r_max);
            let _ = writeln!(s, "length = {}", report.length_actual);
            let _ = writeln!(s, "weighted = {}", report.weighted);
            match report.frame_bounds {
                Some(b) => {
                    let _ = writeln!(s, "frame_bounds = {} {}", fmt_f64(b.lower), fmt_f64(b.upper));
                }
                None => {
                    let _ = writeln!(s, "frame_bounds = none");
                }
            }
            push_curve(&mut s, &report.curve);
            s
        }
    })
}

fn push_curve(s: &mut String, curve: &[f64]) {
    for (n, e) in curve.iter().enumerate() {
        let _ = writeln!(s, "curve[{n}] = {}", fmt_f64(*e));
    }
}

pub fn cmd_error_curve(a: &CurveArgs) -> CliResult<Outcome> {
    let tol = tolerances(&a.tol)?;
    let (set, weights) = load_data(&a.data)?;
    let data = weighted_data(&set, weights.as_ref())?;
    let curve = error_curve(&data, &tol)?;
    let selected = a.gamma.map(|g| curve.select_order(g)).transpose()?;
    if let Some(out) = &a.out {
        let text: String = curve.values.iter().map(|&e| fmt_f64(e) + "\n").collect();
        write(out, &text)?;
    }
    Ok(Outcome::ok(match a.format {
        Format::Json => render_json(&json!({
            "command": "error-curve",
            "energy": data.energy(),
            "curve": curve.values,
            "gamma": a.gamma,
            "selected": selected,
        })),
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "energy = {}", fmt_f64(data.energy()));
            push_curve(&mut s, &curve.values);
            if let (Some(g), Some(n)) = (a.gamma, selected) {
                let _ = writeln!(s, "gamma = {}", fmt_f64(g));
                let _ = writeln!(s, "selected = {n}");
            }
            s
        }
    }))
}

/// One row of the verification table.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    /// `None` when the check does not apply (empty model).
    pub pass: Option<bool>,
}

pub fn cmd_verify(a: &VerifyArgs) -> CliResult<Outcome> {
    let file = load_model(&a.model)?;
    let grid = file.grid()?;
    let system = file.system()?;
    let set = load_on_grid(&a.input, a.complex, &grid)?;
    let weights = match (&a.weights, file.weighted) {
        (Some(p), _) => Some(io::parse_weights_str(&read(p)?)?),
        (None, true) => {
            return Err(Failure::config("model was fitted with weights; pass --weights"))
        }
        (None, false) => None,
    };
    let data = weighted_data(&set, weights.as_ref())?;

    let mut checks = Vec::new();
    if system.is_empty() {
        checks.push(Check { name: "parseval", value: 0.0, tolerance: PARSEVAL_TOL, pass: None });
    } else {
        let b = system.verify_parseval(PARSEVAL_TRIALS, PARSEVAL_SEED)?;
        let dev = (b.lower - 1.0).abs().max((b.upper - 1.0).abs());
        checks.push(Check {
            name: "parseval",
            value: dev,
            tolerance: PARSEVAL_TOL,
            pass: Some(dev <= PARSEVAL_TOL),
        });
    }
    let contain = system.containment_defect(&fiberize(&data))?;
    checks.push(Check {
        name: "containment",
        value: contain,
        tolerance: CONTAINMENT_TOL,
        pass: Some(contain <= CONTAINMENT_TOL),
    });
    let cross = system.cross_orthogonality_defect();
    checks.push(Check {
        name: "cross_orthogonality",
        value: cross,
        tolerance: CROSS_TOL,
        pass: Some(cross <= CROSS_TOL),
    });
    let stored = file.error();
    let direct = direct_error(&system, &data)?;
    let gap = (stored - direct).abs() / (1.0 + stored);
    checks.push(Check {
        name: "formula_vs_direct",
        value: gap,
        tolerance: FORMULA_TOL,
        pass: Some(gap <= FORMULA_TOL),
    });

    let all = checks.iter().all(|c| c.pass != Some(false));
    let stdout = match a.format {
        Format::Json => render_json(&json!({
            "command": "verify",
            "passed": all,
            "stored_error": stored,
            "direct_error": direct,
            "checks": checks.iter().map(|c| json!({
                "name": c.name,
                "value": c.value,
                "tolerance": c.tolerance,
                "pass": c.pass,
            })).collect::<Vec<_>>(),
        })),
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "{:<20} {:>24} {:>10}  result", "check", "value", "tol");
            for c in &checks {
                let result = match c.pass {
                    Some(true) => "PASS",
                    Some(false) => "FAIL",
                    None => "n/a",
                };
                let _ = writeln!(
                    s,
                    "{:<20} {:>24} {:>10.0e}  {result}",
                    c.name,
                    fmt_f64(c.value),
                    c.tolerance
                );
            }
            let _ = writeln!(s, "stored_error = {}", fmt_f64(stored));
            let _ = writeln!(s, "direct_error = {}", fmt_f64(direct));
            let _ = writeln!(s, "verified = {all}");
            s
        }
    };
    Ok(Outcome {
        code: if all { EXIT_OK } else { EXIT_VERIFY },
        stdout,
    })
}

pub fn cmd_project(a: &ProjectArgs) -> CliResult<Outcome> {
    let file = load_model(&a.model)?;
    let grid = file.grid()?;
    let system = file.system()?;
    let set = load_on_grid(&a.input, a.complex, &grid)?;
    let mut projected = Vec::with_capacity(set.count());
    let mut residuals = Vec::with_capacity(set.count());
    for f in set.signals() {
        let p = system.project(f)?;
        residuals.push(residual_norm(f, &p));
        projected.push(p);
    }
    if let Some(out) = &a.out {
        write(out, &io::render_signals(&projected, true))?;
    }
    Ok(Outcome::ok(match a.format {
        Format::Json => render_json(&json!({
            "command": "project",
            "residual_norms": residuals,
        })),
        Format::Text => {
            let mut s = String::new();
            for (j, r) in residuals.iter().enumerate() {
                let _ = writeln!(s, "residual[{j}] = {}", fmt_f64(*r));
            }
            s
        }
    }))
}

/// `‖f − p‖`, summed the same way as [`sisfit::direct_error`].
pub fn residual_norm(f: &[C64], p: &[C64]) -> f64 {
    let r: Vec<C64> = f.iter().zip(p).map(|(a, b)| a - b).collect();
    sisfit::linalg::norm_sqr(&r).sqrt()
}
