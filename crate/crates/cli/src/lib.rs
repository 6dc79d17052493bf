//! Command-line front end for the zetalab toolkit.
//!
//! Every command produces one JSON object (or CSV with a header row) and maps
//! its outcome to an exit status: 0 ok, 1 error or failed check, 2 inconclusive,
//! 64 usage error, 65 violated precondition.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use zetalab::bounds_engine::{
    best_alpha, corollary_bound, gamma_from_rho, prime_chain, theorem_a_bound, theorem_bound, BoundsEngine, Height,
    KappaPreset, Mode, TheoremInput,
};
use zetalab::fourier_lab::{least_positive_root, verify_decay, DecayEnvelope, DecayStatus};
use zetalab::prime_tools::{sieve, PrimeTable, MAX_LIMIT};
use zetalab::selberg_moments::{moments, sample_grid, tsang_detect, CheckStatus, DetectionStatus, DirichletPoly};
use zetalab::test_functions::TestFunction;
use zetalab::zeta_eval::scan_max;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_PRECONDITION: i32 = 65;

/// Directory for cached prime tables.
pub const SIEVE_CACHE_ENV: &str = "ZETALAB_SIEVE_CACHE";

/// Reference bracket for the least positive root of the half-order transform.
pub const RHO_BRACKET: (f64, f64) = (2.37689234, 2.37689235);

#[derive(Parser, Debug)]
#[command(name = "zetalab", version, about = "Large values of zeta on the critical line: numerical experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format (defaults per command: csv for tables, json otherwise).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Least positive root of the half-order transform.
    Rho(RhoArgs),
    /// Exponent 1/(2 + 1/(pi rho)).
    Gamma(GammaArgs),
    /// One of the four closed-form lower bounds.
    Bound(BoundArgs),
    /// Parameters and level of the general moment bound.
    TheoremA(TheoremAArgs),
    /// Check |Phi-hat| against an explicit decay envelope.
    VerifyDecay(DecayArgs),
    /// Mertens remainder theta(x).
    Mertens(MertensArgs),
    /// Check p_n < n(ln n + ln ln n).
    PrimeUpper(PrimeUpperArgs),
    /// Maximum of |zeta(1/2+it)| on [T, T+H].
    ScanMax(ScanArgs),
    /// Smoothed ln|zeta| against the prime-power side.
    Convolution(ConvolutionArgs),
    /// Moments of the Dirichlet polynomial and large-value detection.
    Moments(MomentArgs),
}

#[derive(Args, Debug)]
pub struct RhoArgs {
    #[arg(long, default_value_t = 2.3)]
    pub lo: f64,
    #[arg(long, default_value_t = 2.45)]
    pub hi: f64,
}

#[derive(Args, Debug)]
pub struct GammaArgs {
    /// Use this rho instead of computing it.
    #[arg(long)]
    pub rho: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct HeightArgs {
    #[arg(long = "H")]
    pub h: Option<f64>,
    #[arg(long = "ln-h")]
    pub ln_h: Option<f64>,
    #[arg(long = "lnln-h")]
    pub lnln_h: Option<f64>,
}

impl HeightArgs {
    fn resolve(&self) -> Result<Height, CliError> {
        match (self.h, self.ln_h, self.lnln_h) {
            (Some(h), None, None) => Ok(Height::from_h(h)?),
            (None, Some(l), None) => Ok(Height::from_ln(l)?),
            (None, None, Some(ll)) => Ok(Height::from_lnln(ll)?),
            _ => Err(CliError::Precondition("give exactly one of --H, --ln-h, --lnln-h".into())),
        }
    }
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    pub theorem: u8,
    #[command(flatten)]
    pub height: HeightArgs,
    #[arg(long, default_value_t = 1)]
    pub m: u32,
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    /// Constant in the rational-weight bound (not known explicitly).
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Exponent for the half-order bound; computed from rho when omitted.
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct FamilyArgs {
    /// Test function, e.g. power:m=1 or rational:p=1,q=2.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub p: Option<u32>,
    #[arg(long)]
    pub q: Option<u32>,
}

impl FamilyArgs {
    fn resolve(&self, default: TestFunction) -> Result<TestFunction, CliError> {
        match (&self.family, self.m, self.p, self.q) {
            (Some(s), None, None, None) => Ok(s.parse()?),
            (None, Some(m), None, None) => Ok(TestFunction::power(m)?),
            (None, None, Some(p), Some(q)) => Ok(TestFunction::rational(p, q)?),
            (None, None, None, None) => Ok(default),
            _ => Err(CliError::Precondition("give --family, or --m, or both --p and --q".into())),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum EnvelopeChoice {
    /// Power bound for power families, rational bound otherwise.
    Default,
    /// exp(-(pi/(1+delta)) lambda ln lambda), for rational:p=1,q=2 only.
    HalfOrder,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Full,
    Half,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum PresetArg {
    Stated,
    Derived,
}

#[derive(Args, Debug)]
pub struct TheoremAArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, value_enum, default_value_t = EnvelopeChoice::Default)]
    pub envelope: EnvelopeChoice,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Required unless --corollary or --alpha-grid is given.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[command(flatten)]
    pub height: HeightArgs,
    #[arg(long, value_enum, default_value_t = ModeArg::Full)]
    pub mode: ModeArg,
    /// Evaluate the bound at the least positive root instead of a fixed alpha.
    #[arg(long)]
    pub corollary: bool,
    #[arg(long, value_enum, default_value_t = PresetArg::Stated)]
    pub preset: PresetArg,
    /// Pick the best alpha on lo:hi:n (n equal steps).
    #[arg(long)]
    pub alpha_grid: Option<String>,
    /// Also check the reciprocal-prime chain (needs e^(alpha tau) <= --limit).
    #[arg(long)]
    pub prime_chain: bool,
    #[arg(long, default_value_t = 10_000_000)]
    pub limit: u64,
}

#[derive(Args, Debug)]
pub struct DecayArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, value_enum, default_value_t = EnvelopeChoice::Default)]
    pub envelope: EnvelopeChoice,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Onset; defaults to the first integer inside the bound's domain.
    #[arg(long)]
    pub lambda0: Option<f64>,
    #[arg(long, default_value_t = 100.0)]
    pub lambda_max: f64,
    #[arg(long, default_value_t = 1.0)]
    pub step: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct MertensArgs {
    /// Points x (comma separated or repeated).
    #[arg(long, value_delimiter = ',', required = true)]
    pub x: Vec<f64>,
    /// Sieve limit; defaults to the largest x.
    #[arg(long)]
    pub limit: Option<u64>,
}

#[derive(Args, Debug)]
pub struct PrimeUpperArgs {
    #[arg(long, default_value_t = 6)]
    pub n_min: usize,
    #[arg(long, default_value_t = 100_000)]
    pub n_max: usize,
}

#[derive(Args, Debug)]
#[allow(non_snake_case)]
pub struct ScanArgs {
    #[arg(long = "T")]
    pub T: f64,
    #[arg(long = "H")]
    pub H: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub target_err: f64,
}

#[derive(Args, Debug)]
pub struct ConvolutionArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, default_value_t = 2.0)]
    pub tau: f64,
    #[arg(long)]
    pub t: f64,
    #[arg(long, default_value_t = 30.0)]
    pub window: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Args, Debug)]
#[allow(non_snake_case)]
pub struct MomentArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, default_value_t = 2.0)]
    pub tau: f64,
    #[arg(long = "X")]
    pub X: f64,
    #[arg(long = "T")]
    pub T: f64,
    #[arg(long = "H")]
    pub H: f64,
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    /// Quadrature cell; defaults to pi/(2 ln X).
    #[arg(long)]
    pub grid_step: Option<f64>,
    /// Also run the large-value detection on a sample grid of this spacing.
    #[arg(long)]
    pub detect_step: Option<f64>,
}

/// Failure classes that decide the exit status.
#[derive(Debug)]
pub enum CliError {
    Precondition(String),
    Other(anyhow::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Precondition(m) => write!(f, "precondition violated: {m}"),
            CliError::Other(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<zetalab::Error> for CliError {
    fn from(e: zetalab::Error) -> Self {
        if e.is_precondition() {
            CliError::Precondition(e.to_string())
        } else {
            CliError::Other(e.into())
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Other(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Precondition(_) => EXIT_PRECONDITION,
            CliError::Other(_) => EXIT_ERROR,
        }
    }
}

fn pre(msg: impl Into<String>) -> CliError {
    CliError::Precondition(msg.into())
}

/// What a command produced.
pub struct Artifact {
    pub command: &'static str,
    pub reference: &'static str,
    pub metadata: Value,
    pub result: Value,
    /// Rows for CSV output; a single flattened row of `result` when None.
    pub rows: Option<Vec<Value>>,
    pub default_format: Format,
    pub exit: i32,
}

impl Artifact {
    fn new(command: &'static str, reference: &'static str, metadata: Value, result: Value) -> Self {
        Artifact { command, reference, metadata, result, rows: None, default_format: Format::Json, exit: EXIT_OK }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "paper_ref": self.reference,
            "metadata": self.metadata,
            "result": self.result,
        })
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json()).expect("json");
                s.push('\n');
                s
            }
            Format::Csv => {
                let rows = match &self.rows {
                    Some(r) => r.clone(),
                    None => vec![self.result.clone()],
                };
                to_csv(&rows)
            }
        }
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(a) => {
            let parts: Vec<String> = a.iter().map(scalar).collect();
            out.push((prefix.to_string(), parts.join(";")));
        }
        _ => out.push((prefix.to_string(), scalar(v))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => n.to_string(),
        other => other.to_string(),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Header row from the first row's keys, then one line per row.
pub fn to_csv(rows: &[Value]) -> String {
    let flat: Vec<Vec<(String, String)>> = rows
        .iter()
        .map(|r| {
            let mut out = Vec::new();
            flatten("", r, &mut out);
            out
        })
        .collect();
    let Some(first) = flat.first() else { return String::new() };
    let header: Vec<String> = first.iter().map(|(k, _)| csv_field(k)).collect();
    let mut s = header.join(",");
    s.push('\n');
    for row in &flat {
        let cells: Vec<String> = row.iter().map(|(_, v)| csv_field(v)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

/// Non-finite floats have no JSON form; record them as strings.
fn finite_or_string(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

fn check_finite(name: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(pre(format!("--{name} must be finite (got {x})")))
    }
}

fn prime_table(limit: u64) -> Result<PrimeTable, CliError> {
    if !(2..=MAX_LIMIT).contains(&limit) {
        return Err(pre(format!("sieve limit must lie in [2, {MAX_LIMIT}] (got {limit})")));
    }
    match std::env::var_os(SIEVE_CACHE_ENV) {
        Some(dir) if !dir.is_empty() => Ok(PrimeTable::load_or_build(limit, Path::new(&dir))?),
        _ => Ok(sieve(limit)?),
    }
}

fn half_family() -> TestFunction {
    TestFunction::Rational { p: 1, q: 2 }
}

fn compute_rho(lo: f64, hi: f64) -> Result<zetalab::fourier_lab::RootEstimate, CliError> {
    Ok(least_positive_root(&half_family(), (lo, hi))?)
}

fn envelope(f: TestFunction, choice: EnvelopeChoice, delta: f64) -> Result<DecayEnvelope, CliError> {
    Ok(match choice {
        EnvelopeChoice::Default => DecayEnvelope::default_for(f),
        EnvelopeChoice::HalfOrder => DecayEnvelope::half_order(f, delta)?,
    })
}

fn cmd_rho(a: &RhoArgs) -> Result<Artifact, CliError> {
    let r = compute_rho(a.lo, a.hi)?;
    let inside = r.lo > RHO_BRACKET.0 && r.hi < RHO_BRACKET.1;
    let result = json!({
        "rho": format!("{:.9}", r.root),
        "rho_value": r.root,
        "bracket_lo": r.lo,
        "bracket_hi": r.hi,
        "bracket_width": r.hi - r.lo,
        "transform_at_root": r.value_at_root,
        "transform_err_at_root": r.err_at_root,
        "earlier_root_scan_step": r.scan_step,
        "reference_lo": RHO_BRACKET.0,
        "reference_hi": RHO_BRACKET.1,
        "inside_reference": inside,
    });
    let meta = json!({"family": half_family().to_string(), "search_lo": a.lo, "search_hi": a.hi});
    let mut art = Artifact::new("rho", "least positive zero of the half-order transform", meta, result);
    if !inside {
        art.exit = EXIT_ERROR;
    }
    Ok(art)
}

fn cmd_gamma(a: &GammaArgs) -> Result<Artifact, CliError> {
    let (rho, source) = match a.rho {
        Some(r) => (r, "argument"),
        None => (compute_rho(2.3, 2.45)?.root, "computed"),
    };
    let g = gamma_from_rho(rho)?;
    let meta = json!({"rho_source": source});
    let result = json!({"rho": rho, "gamma": g, "gamma_8dp": format!("{g:.8}")});
    Ok(Artifact::new("gamma", "half-order growth exponent 1/(2 + 1/(pi rho))", meta, result))
}

fn cmd_bound(a: &BoundArgs) -> Result<Artifact, CliError> {
    let h = a.height.resolve()?;
    let mut meta = json!({"theorem": a.theorem, "ln_h": h.ln_h});
    let (input, reference) = match a.theorem {
        1 => (TheoremInput::PowerWeight { m: a.m }, "power-weight bound exp(0.05 sqrt(ln H)/(2m lnln H)^m)"),
        2 => (
            TheoremInput::RationalWeight { epsilon: a.epsilon, c: a.c },
            "rational-weight bound exp(sqrt(ln H) exp(-c (lnln H)^(1-eps/2)))",
        ),
        3 => {
            let gamma = match a.gamma {
                Some(g) => g,
                None => {
                    let g = gamma_from_rho(compute_rho(2.3, 2.45)?.root)?;
                    meta["gamma_source"] = json!("computed from rho");
                    g
                }
            };
            (TheoremInput::HalfOrderWeight { epsilon: a.epsilon, gamma }, "half-order bound exp((ln H)^(gamma-eps))")
        }
        _ => (TheoremInput::HalfCondition { epsilon: a.epsilon }, "half-condition bound exp(exp((lnln H)^(eps/2))/2)"),
    };
    let b = theorem_bound(input, h)?;
    meta["m"] = json!(a.m);
    meta["epsilon"] = json!(a.epsilon);
    meta["c"] = json!(a.c);
    meta["note"] = json!("conditional on RH and on T beyond a non-effective threshold");
    let result = json!({
        "input": to_value(&b.input),
        "ln_h": b.ln_h,
        "value": finite_or_string(b.value),
        "ln_value": b.ln_value,
        "conditional": b.conditional,
    });
    Ok(Artifact::new("bound", reference, meta, result))
}

fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || pre(format!("--alpha-grid must be lo:hi:n (got '{s}')"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    let n: usize = parts[2].parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi >= lo && (1..=10_000).contains(&n)) {
        return Err(bad());
    }
    Ok((0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect())
}

fn cmd_theorem_a(a: &TheoremAArgs) -> Result<Artifact, CliError> {
    let f = a.family.resolve(TestFunction::gaussian())?;
    let env = envelope(f, a.envelope, a.delta)?;
    let h = a.height.resolve()?;
    let mode = match a.mode {
        ModeArg::Full => Mode::Full,
        ModeArg::Half => Mode::Half,
    };
    let engine = BoundsEngine::new();
    let mut meta = json!({
        "family": f.to_string(),
        "envelope": to_value(&env),
        "mode": to_value(&mode),
        "ln_h": h.ln_h,
        "transform_tol": zetalab::fourier_lab::MIN_TOL,
        "kappa_reading": "kappa = max(61, 4/alpha) (full), max(0.5, 4/alpha) (half)",
        "mu_tau_power": "e^(0.5 alpha tau)/tau in the full-mode level",
    });
    if a.corollary {
        let preset = match a.preset {
            PresetArg::Stated => KappaPreset::Stated,
            PresetArg::Derived => KappaPreset::Derived,
        };
        let r = compute_rho(2.3, 2.45)?.root;
        let c = corollary_bound(&engine, &env, r, h, mode, preset)?;
        meta["preset"] = to_value(&preset);
        meta["derivative_steps"] = json!([1e-5, 5e-6]);
        let result = to_value(&c);
        return Ok(Artifact::new("theorem-a", "large-value level at the least positive root", meta, result));
    }
    let params = match (&a.alpha_grid, a.alpha) {
        (Some(g), None) => {
            let grid = parse_grid(g)?;
            meta["alpha_grid"] = json!(grid);
            best_alpha(&engine, &env, h, mode, &grid)?.ok_or_else(|| anyhow!("no valid alpha on the grid"))?
        }
        (None, Some(alpha)) => {
            check_finite("alpha", alpha)?;
            theorem_a_bound(&engine, &env, alpha, h, mode)?
        }
        _ => return Err(pre("give exactly one of --alpha, --alpha-grid (or use --corollary)")),
    };
    let mut result = to_value(&params);
    if a.prime_chain && params.tau.is_finite() {
        let upper = (params.alpha * params.tau).exp();
        if upper > a.limit as f64 {
            return Err(pre(format!("prime chain needs e^(alpha tau) = {upper:.3e} <= --limit {}", a.limit)));
        }
        let table = prime_table(a.limit)?;
        let (sum, thr) = prime_chain(&table, &params)?;
        result["prime_chain"] = json!({"sum": sum, "threshold": thr, "holds": sum > thr});
        meta["limit"] = json!(a.limit);
    }
    let mut art = Artifact::new("theorem-a", "general moment bound level (mu* full, mu** half)", meta, result);
    if !params.valid {
        art.exit = EXIT_INCONCLUSIVE;
    }
    Ok(art)
}

fn cmd_verify_decay(a: &DecayArgs) -> Result<Artifact, CliError> {
    let f = a.family.resolve(TestFunction::Power { m: 2 })?;
    let env = envelope(f, a.envelope, a.delta)?;
    if !(a.step > 0.0 && a.lambda_max > 0.0 && a.lambda_max / a.step <= 1e6) {
        return Err(pre("need step > 0, lambda-max > 0 and at most 1e6 grid points"));
    }
    let lambda0 = a.lambda0.unwrap_or_else(|| (env.domain_min() + 1.0).floor().max(1.0));
    check_finite("lambda0", lambda0)?;
    let env = env.with_onset(lambda0);
    let n = ((a.lambda_max - lambda0) / a.step + 1e-9).floor().max(0.0) as usize;
    let grid: Vec<f64> = (0..=n).map(|i| lambda0 + a.step * i as f64).collect();
    let rep = verify_decay(&f, &env, &grid, a.tol)?;
    let rows: Vec<Value> = rep
        .points
        .iter()
        .map(|p| {
            json!({
                "lambda": p.lambda,
                "transform_abs": p.transform_abs,
                "envelope": p.envelope,
                "ratio": finite_or_string(p.ratio),
                "ln_transform_upper": p.ln_transform_upper,
                "ln_envelope": p.ln_envelope,
                "status": to_value(&p.status),
            })
        })
        .collect();
    let meta = json!({
        "family": f.to_string(),
        "envelope": to_value(&env),
        "lambda0": lambda0,
        "lambda_max": a.lambda_max,
        "step": a.step,
        "tol": a.tol,
    });
    let result = json!({"passed": rep.passed, "failed": rep.failed, "skipped": rep.skipped, "points": rows});
    let mut art = Artifact::new("verify-decay", "explicit decay envelope for the transform", meta, result);
    art.rows = Some(rows);
    art.default_format = Format::Csv;
    if rep.points.iter().any(|p| p.status == DecayStatus::Fail) {
        art.exit = EXIT_ERROR;
    }
    Ok(art)
}

fn cmd_mertens(a: &MertensArgs) -> Result<Artifact, CliError> {
    for &x in &a.x {
        if !(x >= 3.0 && x.is_finite()) {
            return Err(pre(format!("x must be at least 3 (got {x})")));
        }
    }
    let xmax = a.x.iter().cloned().fold(0.0, f64::max);
    let limit = a.limit.unwrap_or(xmax.ceil() as u64);
    if (limit as f64) < xmax {
        return Err(pre(format!("--limit {limit} is below the largest x = {xmax}")));
    }
    let table = prime_table(limit)?;
    let mut rows = Vec::new();
    for &x in &a.x {
        let theta = table.mertens_theta(x)?;
        rows.push(json!({
            "x": x,
            "sum_recip": table.sum_recip(x),
            "theta": theta,
            "in_range": theta > -0.5 && theta < 1.0,
        }));
    }
    let meta = json!({"limit": limit, "mertens_constant": zetalab::prime_tools::MERTENS});
    let result = json!({"points": rows});
    let mut art = Artifact::new("mertens", "Mertens remainder theta(x) for the sum of 1/p", meta, result);
    art.rows = Some(rows);
    art.default_format = Format::Csv;
    Ok(art)
}

fn cmd_prime_upper(a: &PrimeUpperArgs) -> Result<Artifact, CliError> {
    if a.n_min < 6 || a.n_max < a.n_min || a.n_max > 40_000_000 {
        return Err(pre(format!("need 6 <= n-min <= n-max <= 4e7 (got {}..{})", a.n_min, a.n_max)));
    }
    let nf = a.n_max as f64;
    let limit = (nf * (nf.ln() + nf.ln().ln())).ceil() as u64 + 10;
    let table = prime_table(limit)?;
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    let mut worst_n = a.n_min;
    for n in a.n_min..=a.n_max {
        let r = table.check_prime_upper(n)?;
        if !r.pass {
            failures.push(n);
        }
        let ratio = r.prime as f64 / r.bound;
        if ratio > worst {
            worst = ratio;
            worst_n = n;
        }
    }
    let result = json!({
        "n_min": a.n_min,
        "n_max": a.n_max,
        "checked": a.n_max - a.n_min + 1,
        "failures": failures.len(),
        "first_failure": failures.first(),
        "worst_ratio": worst,
        "worst_n": worst_n,
    });
    let meta = json!({"limit": limit});
    let mut art = Artifact::new("prime-upper", "n-th prime upper bound n(ln n + ln ln n)", meta, result);
    art.default_format = Format::Csv;
    if !failures.is_empty() {
        art.exit = EXIT_ERROR;
    }
    Ok(art)
}

fn cmd_scan_max(a: &ScanArgs) -> Result<Artifact, CliError> {
    check_finite("T", a.T)?;
    check_finite("H", a.H)?;
    let r = scan_max(a.T, a.H, a.target_err)?;
    let meta = json!({"T": a.T, "H": a.H, "target_err": a.target_err, "window": "[T, T+H]"});
    Ok(Artifact::new("scan-max", "maximum of |zeta(1/2+it)| on a window", meta, to_value(&r)))
}

fn cmd_convolution(a: &ConvolutionArgs) -> Result<Artifact, CliError> {
    let f = a.family.resolve(TestFunction::gaussian())?;
    check_finite("t", a.t)?;
    let c = zetalab::selberg_moments::convolution_check(&f, a.tau, a.t, a.window, a.tol)?;
    let meta = json!({"family": f.to_string(), "tau": a.tau, "t": a.t, "window": a.window, "tol": a.tol});
    let mut art = Artifact::new("convolution", "smoothed ln|zeta| convolution identity", meta, to_value(&c));
    art.exit = match c.status {
        CheckStatus::Pass => EXIT_OK,
        CheckStatus::Fail => EXIT_ERROR,
        CheckStatus::Inconclusive => EXIT_INCONCLUSIVE,
    };
    Ok(art)
}

fn cmd_moments(a: &MomentArgs) -> Result<Artifact, CliError> {
    let f = a.family.resolve(TestFunction::gaussian())?;
    for (name, x) in [("tau", a.tau), ("X", a.X), ("T", a.T), ("H", a.H)] {
        check_finite(name, x)?;
    }
    if !(a.X >= 2.0 && a.X <= 1e7) {
        return Err(pre(format!("X must lie in [2, 1e7] (got {})", a.X)));
    }
    let step = a.grid_step.unwrap_or(std::f64::consts::PI / (2.0 * a.X.ln()));
    let table = prime_table(a.X.ceil() as u64)?;
    let r = moments(&table, &f, a.tau, a.X, a.T, a.H, a.k, step)?;
    let mut result = to_value(&r);
    let mut meta = json!({
        "family": f.to_string(),
        "tau": a.tau,
        "X": a.X,
        "T": a.T,
        "H": a.H,
        "k": a.k,
        "grid_step": step,
        "window": "[T, T+H]",
        "level": "M = (I_k/H)^(1/2k) (1 - 1e-6)",
    });
    if let Some(ds) = a.detect_step {
        if !(ds > 0.0 && a.H / ds <= 1e8) {
            return Err(pre("--detect-step must be positive with at most 1e8 samples"));
        }
        let poly = DirichletPoly::new(&table, &f, a.tau, a.X)?;
        let samples = sample_grid(|t| poly.eval(t), a.T, a.H, ds);
        let d = tsang_detect(&r, &samples);
        if d.status == DetectionStatus::Detected {
            result["detected_t"] = json!(d.t);
        }
        result["detection"] = to_value(&d);
        meta["detect_step"] = json!(ds);
    }
    Ok(Artifact::new("moments", "even and odd moments with large-value detection", meta, result))
}

/// Runs one parsed command.
pub fn dispatch(cli: &Cli) -> Result<Artifact, CliError> {
    match &cli.command {
        Command::Rho(a) => cmd_rho(a),
        Command::Gamma(a) => cmd_gamma(a),
        Command::Bound(a) => cmd_bound(a),
        Command::TheoremA(a) => cmd_theorem_a(a),
        Command::VerifyDecay(a) => cmd_verify_decay(a),
        Command::Mertens(a) => cmd_mertens(a),
        Command::PrimeUpper(a) => cmd_prime_upper(a),
        Command::ScanMax(a) => cmd_scan_max(a),
        Command::Convolution(a) => cmd_convolution(a),
        Command::Moments(a) => cmd_moments(a),
    }
}

fn emit(text: &str, output: Option<&Path>) -> anyhow::Result<()> {
    match output {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

/// Parses `args`, runs the command, writes the artifact and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(&cli) {
        Ok(art) => {
            let format = cli.format.unwrap_or(art.default_format);
            if let Err(e) = emit(&art.render(format), cli.output.as_deref()) {
                eprintln!("error: {e:#}");
                return EXIT_ERROR;
            }
            art.exit
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
