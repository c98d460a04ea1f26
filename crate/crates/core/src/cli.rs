//! Command-line front end: argument definitions, command execution and report rendering.
//!
//! [`execute`] never writes anywhere; it returns the rendered report and the exit code
//! so the binary and the tests share one code path.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::constants::{alpha_general, alpha_k, lemma3_sides, problem_gap_check, PinchingProfile, SpaceFormContext};
use crate::error::{usage, Result};
use crate::gap::{band_sweep, classify_with_tol, nearest_model, GapTag, CLASSIFY_REL_TOL};
use crate::range::{IntRange, RealRange};
use crate::report::{sig12, VerificationReport, IDENTITY_TOL, MARGIN_TOL};
use crate::spectrum::SearchConfig;
use crate::suites::{run_suite, Suite, SuiteConfig};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit code when every check passed.
pub const EXIT_OK: i32 = 0;
/// Exit code when at least one check failed.
pub const EXIT_FAILED: i32 = 1;
/// Exit code for usage and precondition errors.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "cmc-gap", version, about = "Pinching constants and gap-theorem checks for CMC hypersurfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate α, α̊, β, α_k, λ_k, B_n and δ over a grid.
    Constants(ConstantsArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Place (n, H, c, S) relative to α and α + δ.
    Classify(ClassifyArgs),
    /// Sweep the band inequalities and the Problem-1 margin over (n, H).
    Scan(ScanArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ConstantsArgs {
    /// Dimension or range `a..b[:step]`.
    #[arg(long)]
    pub n: IntRange,
    /// Mean curvature or range `a..b:step`.
    #[arg(long = "H", allow_hyphen_values = true)]
    pub h: RealRange,
    /// Ambient curvature or range `a..b:step`.
    #[arg(long, allow_hyphen_values = true, default_value = "1")]
    pub c: RealRange,
    /// Report only `α_k` and `λ_k` for this `k`.
    #[arg(long)]
    pub k: Option<usize>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value = "all", value_parser = Suite::NAMES)]
    pub suite: String,
    /// Dimensions searched by the lemma suites.
    #[arg(long)]
    pub n: Option<IntRange>,
    /// Random starts per search.
    #[arg(long, default_value_t = SuiteConfig::default().samples)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Points per band sweep.
    #[arg(long, default_value_t = SuiteConfig::default().grid)]
    pub grid: usize,
    /// Points per envelope sweep.
    #[arg(long, default_value_t = SuiteConfig::default().envelope_grid)]
    pub envelope_grid: usize,
    /// Initial descent step.
    #[arg(long, default_value_t = SearchConfig::default().initial_step)]
    pub step: f64,
    /// Descent iterations per start.
    #[arg(long, default_value_t = SearchConfig::default().max_iters)]
    pub max_iters: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long = "H", allow_hyphen_values = true)]
    pub h: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    pub c: f64,
    /// Squared norm of the second fundamental form.
    #[arg(long = "S", allow_hyphen_values = true)]
    pub s: f64,
    /// Relative tolerance for `S = α`, scaled by `max(1, α)`.
    #[arg(long, default_value_t = CLASSIFY_REL_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[arg(long)]
    pub n: IntRange,
    #[arg(long = "H", allow_hyphen_values = true)]
    pub h: RealRange,
    #[arg(long, allow_hyphen_values = true, default_value = "1")]
    pub c: RealRange,
    /// Points per band sweep.
    #[arg(long, default_value_t = 1000)]
    pub grid: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

impl Command {
    pub fn output(&self) -> &OutputArgs {
        match self {
            Self::Constants(a) => &a.out,
            Self::Verify(a) => &a.out,
            Self::Classify(a) => &a.out,
            Self::Scan(a) => &a.out,
        }
    }
}

/// A rendered report and the exit code it implies.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub body: String,
    pub exit_code: i32,
}

/// Tabular command output before rendering.
struct Table {
    command: &'static str,
    config: Value,
    header: &'static [&'static str],
    rows: Vec<Vec<Value>>,
    passed: u64,
    failed: u64,
    worst_margin: Option<f64>,
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let format = cli.command.output().format;
    let table = match &cli.command {
        Command::Constants(a) => constants_table(a)?,
        Command::Verify(a) => verify_table(a)?,
        Command::Classify(a) => classify_table(a)?,
        Command::Scan(a) => scan_table(a)?,
    };
    let exit_code = if table.failed > 0 { EXIT_FAILED } else { EXIT_OK };
    let body = match format {
        Format::Json => render_json(&table),
        Format::Csv => render_csv(&table)?,
        Format::Text => render_text(&table),
    };
    Ok(Outcome { body, exit_code })
}

/// Parses `args` (program name first) and executes; clap errors become usage errors.
pub fn run_args<I, T>(args: I) -> Result<Outcome>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| usage(e.to_string()))?;
    execute(&cli)
}

const CONSTANTS_HEADER: &[&str] = &[
    "n", "H", "c", "alpha", "ring_alpha", "beta", "B_n", "delta", "band_top", "lemma3_residual", "k", "alpha_k", "lambda_k",
];

fn constants_table(a: &ConstantsArgs) -> Result<Table> {
    let mut rows = Vec::new();
    let (mut passed, mut failed) = (0, 0);
    let mut worst: Option<f64> = None;
    for n in a.n.values() {
        if let Some(k) = a.k {
            if k == 0 || k >= n {
                return Err(usage(format!("k={k} must satisfy 1 <= k <= n-1 for n={n}")));
            }
        }
        for h in a.h.values() {
            for c in a.c.values() {
                let ctx = SpaceFormContext::new(n, c)?;
                let p = PinchingProfile::new(ctx, h)?;
                // the identity needs H² + c > 0; report null outside that domain
                let residual = lemma3_sides(ctx, h).ok().map(|s| s.relative_residual());
                if let Some(r) = residual {
                    let margin = -r;
                    worst = Some(worst.map_or(margin, |w: f64| w.min(margin)));
                    if r <= IDENTITY_TOL {
                        passed += 1;
                    } else {
                        failed += 1;
                    }
                }
                let (ks, ak, lk): (Vec<usize>, Vec<f64>, Vec<f64>) = match a.k {
                    Some(k) => (vec![k], vec![p.alpha_k[k - 1]], vec![p.lambda_k[k - 1]]),
                    None => ((1..n).collect(), p.alpha_k.clone(), p.lambda_k.clone()),
                };
                rows.push(vec![
                    json!(n),
                    json!(h),
                    json!(c),
                    json!(p.alpha),
                    json!(p.ring_alpha),
                    json!(p.beta),
                    json!(p.b_n),
                    json!(p.delta),
                    json!(p.band_top()),
                    json!(residual),
                    json!(ks),
                    json!(ak),
                    json!(lk),
                ]);
            }
        }
    }
    Ok(Table {
        command: "constants",
        config: json!({ "n": a.n.values(), "H": a.h.values(), "c": a.c.values(), "k": a.k }),
        header: CONSTANTS_HEADER,
        rows,
        passed,
        failed,
        worst_margin: worst,
    })
}

const VERIFY_HEADER: &[&str] =
    &["check_id", "passed", "worst_margin", "tolerance", "samples", "seed", "witness", "metrics"];

fn verify_table(a: &VerifyArgs) -> Result<Table> {
    let suite: Suite = a.suite.parse()?;
    if !(a.step > 0.0) || !a.step.is_finite() {
        return Err(usage(format!("step must be positive, got {}", a.step)));
    }
    if a.max_iters == 0 {
        return Err(usage("max-iters must be at least 1"));
    }
    let dims = a.n.as_ref().map(IntRange::values);
    if dims.as_ref().is_some_and(|d| d.is_empty()) {
        return Err(usage("dimension range is empty"));
    }
    let cfg = SuiteConfig {
        samples: a.samples,
        seed: a.seed,
        grid: a.grid,
        envelope_grid: a.envelope_grid,
        dims: dims.clone(),
        search: SearchConfig { initial_step: a.step, max_iters: a.max_iters, ..SearchConfig::default() },
    };
    let reports = run_suite(suite, &cfg)?;
    let passed = reports.iter().filter(|r| r.passed).count() as u64;
    let failed = reports.len() as u64 - passed;
    let worst = reports.iter().map(|r| r.worst_margin).reduce(f64::min);
    let rows = reports.iter().map(report_row).collect();
    Ok(Table {
        command: "verify",
        config: json!({
            "suite": suite.as_str(),
            "n": dims,
            "samples": a.samples,
            "seed": a.seed,
            "grid": a.grid,
            "envelope_grid": a.envelope_grid,
            "step": a.step,
            "max_iters": a.max_iters,
        }),
        header: VERIFY_HEADER,
        rows,
        passed,
        failed,
        worst_margin: worst,
    })
}

fn report_row(r: &VerificationReport) -> Vec<Value> {
    vec![
        json!(r.check_id),
        json!(r.passed),
        json!(r.worst_margin),
        json!(r.tolerance),
        json!(r.samples),
        json!(r.seed),
        serde_json::to_value(&r.witness).unwrap_or(Value::Null),
        serde_json::to_value(&r.metrics).unwrap_or(Value::Null),
    ]
}

const CLASSIFY_HEADER: &[&str] = &[
    "n", "H", "c", "S", "region", "alpha", "band_top", "to_alpha", "to_band_top", "tolerance", "model_k", "model_lambda",
    "model_S",
];

fn classify_table(a: &ClassifyArgs) -> Result<Table> {
    for (name, v) in [("H", a.h), ("c", a.c), ("S", a.s), ("tol", a.tol)] {
        if !v.is_finite() {
            return Err(usage(format!("{name} must be finite, got {v}")));
        }
    }
    let ctx = SpaceFormContext::new(a.n, a.c)?;
    let region = classify_with_tol(ctx, a.h, a.s, a.tol)?;
    let model = match region.tag {
        GapTag::RigidBoundary | GapTag::Above => Some(nearest_model(ctx, a.h, a.s)?),
        _ => None,
    };
    let row = vec![
        json!(a.n),
        json!(a.h),
        json!(a.c),
        json!(a.s),
        json!(region.tag.as_str()),
        json!(region.alpha),
        json!(region.band_top),
        json!(region.to_alpha),
        json!(region.to_band_top),
        json!(region.tolerance),
        json!(model.map(|m| m.k)),
        json!(model.map(|m| m.lambda)),
        json!(model.map(|m| m.s)),
    ];
    Ok(Table {
        command: "classify",
        config: json!({ "n": a.n, "H": a.h, "c": a.c, "S": a.s, "tol": a.tol }),
        header: CLASSIFY_HEADER,
        rows: vec![row],
        passed: 1,
        failed: 0,
        worst_margin: None,
    })
}

const SCAN_HEADER: &[&str] = &[
    "n",
    "H",
    "c",
    "alpha",
    "band_top",
    "alpha_2",
    "alpha_half",
    "problem_bound",
    "problem_margin",
    "band_phi_margin",
    "band_eta_margin",
    "passed",
];

fn scan_table(a: &ScanArgs) -> Result<Table> {
    if a.grid == 0 {
        return Err(usage("grid must be at least 1"));
    }
    let mut rows = Vec::new();
    let (mut passed, mut failed) = (0, 0);
    let mut worst: Option<f64> = None;
    let mut track = |m: f64| worst = Some(worst.map_or(m, |w: f64| w.min(m)));
    for n in a.n.values() {
        for h in a.h.values() {
            for c in a.c.values() {
                let ctx = SpaceFormContext::new(n, c)?;
                ctx.require_theorem_range()?;
                let nf = n as f64;
                let bound = 2.0 * nf + 3.0 * nf * h * h;
                let problem = problem_gap_check(n, h)?;
                let alpha_2 = alpha_k(n, h, 2)?;
                let alpha_half = alpha_k(n, h, n / 2)?;
                // α and the band need H² + c > 0
                let (alpha, band_top, phi, eta) = if ctx.admits(h) {
                    let p = PinchingProfile::new(ctx, h)?;
                    let sweep = band_sweep(ctx, h, a.grid)?;
                    (Some(p.alpha), Some(p.band_top()), Some(sweep.phi_margin), Some(sweep.eta_margin))
                } else {
                    (alpha_general(ctx, h).ok(), None, None, None)
                };
                track(problem);
                phi.into_iter().chain(eta).for_each(&mut track);
                let ok = problem > 0.0 && phi.is_none_or(|m| m >= -MARGIN_TOL) && eta.is_none_or(|m| m >= -MARGIN_TOL);
                if ok {
                    passed += 1;
                } else {
                    failed += 1;
                }
                rows.push(vec![
                    json!(n),
                    json!(h),
                    json!(c),
                    json!(alpha),
                    json!(band_top),
                    json!(alpha_2),
                    json!(alpha_half),
                    json!(bound),
                    json!(problem),
                    json!(phi),
                    json!(eta),
                    json!(ok),
                ]);
            }
        }
    }
    Ok(Table {
        command: "scan",
        config: json!({ "n": a.n.values(), "H": a.h.values(), "c": a.c.values(), "grid": a.grid }),
        header: SCAN_HEADER,
        rows,
        passed,
        failed,
        worst_margin: worst,
    })
}

/// Rounds every float in `v` to 12 significant digits.
fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| serde_json::Number::from_f64(sig12(x)))
            .map_or(Value::Null, Value::Number),
        Value::Array(a) => Value::Array(a.into_iter().map(round_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_floats(v))).collect()),
        other => other,
    }
}

fn render_json(t: &Table) -> String {
    let results: Vec<Value> = t
        .rows
        .iter()
        .map(|row| Value::Object(t.header.iter().map(|h| h.to_string()).zip(row.iter().cloned()).collect()))
        .collect();
    let doc = json!({
        "tool_version": TOOL_VERSION,
        "command": t.command,
        "config": t.config,
        "results": results,
        "summary": { "passed": t.passed, "failed": t.failed, "worst_margin": t.worst_margin },
    });
    let mut s = serde_json::to_string_pretty(&round_floats(doc)).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// 12 significant digits; scientific notation outside `[1e−4, 1e15)`.
pub fn fmt_num(x: f64) -> String {
    let x = sig12(x);
    if x == 0.0 {
        "0".to_string()
    } else if x.is_finite() && (x.abs() < 1e-4 || x.abs() >= 1e15) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

/// Scalar cell text: numbers at 12 significant digits, lists joined by `;`,
/// objects as compact JSON, null as empty.
fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => fmt_num(x),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        Value::Array(a) => a.iter().map(cell).collect::<Vec<_>>().join(";"),
        Value::Object(_) => round_floats(v.clone()).to_string(),
    }
}

fn render_csv(t: &Table) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| usage(format!("cannot write CSV: {e}"));
    w.write_record(t.header).map_err(io)?;
    for row in &t.rows {
        w.write_record(row.iter().map(cell)).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| usage(format!("cannot write CSV: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV cells are UTF-8"))
}

fn render_text(t: &Table) -> String {
    let mut s = String::new();
    for row in &t.rows {
        if t.command == "verify" {
            let status = if row[1] == json!(true) { "PASS" } else { "FAIL" };
            s.push_str(&format!(
                "{status}  {:<36} worst_margin={:<22} tol={}\n",
                cell(&row[0]),
                cell(&row[2]),
                cell(&row[3])
            ));
            continue;
        }
        let fields: Vec<String> = t.header.iter().zip(row).map(|(h, v)| format!("{h}={}", cell(v))).collect();
        s.push_str(&fields.join("  "));
        s.push('\n');
    }
    let worst = t.worst_margin.map_or_else(|| "n/a".to_string(), fmt_num);
    s.push_str(&format!("summary: {} passed, {} failed, worst margin {worst}\n", t.passed, t.failed));
    s
}
