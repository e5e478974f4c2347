//! Command-line front end.
//!
//! Subcommands: `sweep`, `allocate`, `kkt-check`, `selftest`. Every flag can
//! also be set through an `OFDMIM_*` environment variable; flags win over the
//! environment, which wins over `--config` file values, which win over the
//! built-in defaults.
//!
//! Exit codes: 0 success, 1 check failure, 2 validation error, 3 I/O error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::capacity::{average_capacity_over_patterns, PatternPolicy, Strategy, DEFAULT_ENUMERATION_CAP};
use crate::channel::ChannelRealization;
use crate::error::Error;
use crate::experiment::{run_sweep, run_sweep_with_workers, SweepConfig, SweepResult};
use crate::mapping::{build_selection, SelectionMode};
use crate::waterfill::{sum_capacity, uniform_allocation, verify_kkt, waterfill, AllocationProblem, PowerAllocation};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Exact CSV header of sweep output.
pub const CSV_HEADER: &str = "snr_db,mode,strategy,n_t,n_s,mean_capacity,std_error,trials";

#[derive(Debug, Parser)]
#[command(name = "ofdmim", version, about = "Power allocation for adaptive OFDM index modulation in two-hop DF relay networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo sweep of average network capacity against P_t/N0
    Sweep(SweepArgs),
    /// Allocate power over a list of gains and print the result
    Allocate(AllocateArgs),
    /// Check the KKT conditions of a given allocation
    KktCheck(KktArgs),
    /// Run built-in known-value checks
    Selftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Flat `key = value` config file using SweepConfig field names
    #[arg(long, env = "OFDMIM_CONFIG")]
    pub config: Option<PathBuf>,
    /// Result file; the run manifest goes to `<out>.manifest.json`
    #[arg(long, env = "OFDMIM_OUT", default_value = "sweep.csv")]
    pub out: PathBuf,
    #[arg(long, env = "OFDMIM_FORMAT", value_enum, default_value = "csv")]
    pub format: SweepFormat,
    /// Master seed
    #[arg(long, env = "OFDMIM_SEED")]
    pub seed: Option<u64>,
    /// Trials per SNR point
    #[arg(long, env = "OFDMIM_TRIALS")]
    pub trials: Option<u64>,
    /// Number of subcarriers N_T
    #[arg(long, env = "OFDMIM_NT")]
    pub nt: Option<usize>,
    /// Comma-separated N_S values
    #[arg(long, env = "OFDMIM_NS")]
    pub ns: Option<String>,
    /// Comma-separated P_t/N0 values in dB, or START:STEP:STOP
    #[arg(long = "snr-db", env = "OFDMIM_SNR_DB", allow_hyphen_values = true)]
    pub snr_db: Option<String>,
    /// Comma-separated selection modes (decentralized, centralized)
    #[arg(long, env = "OFDMIM_MODE")]
    pub mode: Option<String>,
    /// Comma-separated strategies (dynamic, uniform)
    #[arg(long, env = "OFDMIM_STRATEGY")]
    pub strategy: Option<String>,
    #[arg(long, env = "OFDMIM_MU1")]
    pub mu1: Option<f64>,
    #[arg(long, env = "OFDMIM_MU2")]
    pub mu2: Option<f64>,
    #[arg(long, env = "OFDMIM_N0")]
    pub n0: Option<f64>,
    /// `exact`, or a number of sampled patterns per realization
    #[arg(long, env = "OFDMIM_PATTERNS")]
    pub patterns: Option<String>,
    /// Largest 2^N_S allowed under exact enumeration
    #[arg(long = "enum-cap", env = "OFDMIM_ENUM_CAP")]
    pub enum_cap: Option<u64>,
    /// Worker threads (default: all available); results do not depend on it
    #[arg(long, env = "OFDMIM_WORKERS")]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AllocateArgs {
    /// Comma-separated channel gains
    #[arg(long, env = "OFDMIM_GAINS")]
    pub gains: String,
    #[arg(long, env = "OFDMIM_N0", default_value = "1")]
    pub n0: String,
    #[arg(long, env = "OFDMIM_BUDGET")]
    pub budget: String,
    #[arg(long, env = "OFDMIM_STRATEGY", default_value = "dynamic")]
    pub strategy: String,
    #[arg(long, env = "OFDMIM_FORMAT", value_enum, default_value = "text")]
    pub format: ReportFormat,
}

#[derive(Debug, Args)]
pub struct KktArgs {
    #[arg(long, env = "OFDMIM_GAINS")]
    pub gains: String,
    /// Comma-separated powers, one per gain
    #[arg(long, env = "OFDMIM_POWERS")]
    pub powers: String,
    #[arg(long, env = "OFDMIM_N0", default_value = "1")]
    pub n0: String,
    #[arg(long, env = "OFDMIM_BUDGET")]
    pub budget: String,
    #[arg(long, env = "OFDMIM_TOL", default_value = "1e-9")]
    pub tol: String,
    #[arg(long, env = "OFDMIM_FORMAT", value_enum, default_value = "text")]
    pub format: ReportFormat,
}

/// Provenance written next to every sweep output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: SweepConfig,
    pub tool_version: String,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
    pub output_path: String,
}

/// Failure of a command, mapped to an exit code.
#[derive(Debug)]
enum Failure {
    Validation(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

/// Formats like C's `%.{sig}g`: shortest of fixed or exponent notation,
/// trailing zeros removed.
pub fn format_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sig = sig.max(1);
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= sig as i32 {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn num(x: f64) -> String {
    format_sig(x, 12)
}

fn parse_f64(field: &str, s: &str) -> Result<f64, Error> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::config(field, format!("{s:?} is not a finite number")))
}

fn parse_list<T, F>(field: &str, s: &str, parse: F) -> Result<Vec<T>, Error>
where
    F: Fn(&str) -> Result<T, Error>,
{
    let items: Vec<&str> = s.split(',').map(str::trim).filter(|x| !x.is_empty()).collect();
    if items.is_empty() {
        return Err(Error::config(field, "list is empty"));
    }
    items.into_iter().map(parse).collect()
}

fn parse_f64_list(field: &str, s: &str) -> Result<Vec<f64>, Error> {
    parse_list(field, s, |x| parse_f64(field, x))
}

fn parse_usize(field: &str, s: &str) -> Result<usize, Error> {
    s.trim()
        .parse()
        .map_err(|_| Error::config(field, format!("{s:?} is not a nonnegative integer")))
}

fn parse_u64(field: &str, s: &str) -> Result<u64, Error> {
    s.trim()
        .parse()
        .map_err(|_| Error::config(field, format!("{s:?} is not a nonnegative integer")))
}

/// Comma-separated dB values, or an inclusive `START:STEP:STOP` range.
pub fn parse_snr_points(s: &str) -> Result<Vec<f64>, Error> {
    const FIELD: &str = "snr_db";
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, step, stop] => {
            let (start, step, stop) = (parse_f64(FIELD, start)?, parse_f64(FIELD, step)?, parse_f64(FIELD, stop)?);
            if !(step > 0.0) || stop < start {
                return Err(Error::config(FIELD, format!("range {s:?} needs step > 0 and stop >= start")));
            }
            let steps = ((stop - start) / step + 1e-9).floor();
            if steps > 1e6 {
                return Err(Error::config(FIELD, format!("range {s:?} has too many points")));
            }
            Ok((0..=steps as usize).map(|i| start + i as f64 * step).collect())
        }
        [_] => parse_f64_list(FIELD, s),
        _ => Err(Error::config(FIELD, format!("{s:?} is neither a list nor START:STEP:STOP"))),
    }
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

/// Serialises a config to the flat `key = value` format.
///
/// Floats use Rust's shortest round-trip representation so parsing the text
/// back yields the identical config.
pub fn config_to_text(config: &SweepConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "n_t = {}", config.n_t);
    let _ = writeln!(s, "n_s_list = {}", join(&config.n_s_list));
    let _ = writeln!(s, "snr_points_db = {}", join(&config.snr_points_db));
    let _ = writeln!(s, "trials = {}", config.trials);
    let _ = writeln!(s, "mu_1 = {}", config.mu_1);
    let _ = writeln!(s, "mu_2 = {}", config.mu_2);
    let _ = writeln!(s, "n_0 = {}", config.n_0);
    let _ = writeln!(s, "modes = {}", join(&config.modes));
    let _ = writeln!(s, "strategies = {}", join(&config.strategies));
    let _ = writeln!(s, "master_seed = {}", config.master_seed);
    let _ = writeln!(s, "pattern_policy = {}", config.pattern_policy);
    let _ = writeln!(s, "enumeration_cap = {}", config.enumeration_cap);
    s
}

fn set_config_key(config: &mut SweepConfig, key: &str, value: &str) -> Result<(), Error> {
    match key {
        "n_t" => config.n_t = parse_usize(key, value)?,
        "n_s_list" | "n_s" => config.n_s_list = parse_list("n_s", value, |x| parse_usize("n_s", x))?,
        "snr_points_db" | "snr_db" => config.snr_points_db = parse_snr_points(value)?,
        "trials" => config.trials = parse_u64(key, value)?,
        "mu_1" => config.mu_1 = parse_f64(key, value)?,
        "mu_2" => config.mu_2 = parse_f64(key, value)?,
        "n_0" => config.n_0 = parse_f64(key, value)?,
        "modes" | "mode" => {
            config.modes = parse_list("mode", value, |x| {
                x.parse::<SelectionMode>().map_err(|e| Error::config("mode", e.to_string()))
            })?
        }
        "strategies" | "strategy" => {
            config.strategies = parse_list("strategy", value, |x| {
                x.parse::<Strategy>().map_err(|e| Error::config("strategy", e.to_string()))
            })?
        }
        "master_seed" | "seed" => config.master_seed = parse_u64("master_seed", value)?,
        "pattern_policy" | "patterns" => {
            config.pattern_policy = value
                .parse::<PatternPolicy>()
                .map_err(|e| Error::config("pattern_policy", e.to_string()))?
        }
        "enumeration_cap" => config.enumeration_cap = parse_u64(key, value)?,
        other => return Err(Error::config(other, "unknown config key")),
    }
    Ok(())
}

/// Parses the flat config format on top of the defaults. `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<SweepConfig, Error> {
    let mut config = SweepConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::config(
                format!("line {}", lineno + 1),
                format!("expected `key = value`, got {line:?}"),
            ));
        };
        set_config_key(&mut config, key.trim(), value.trim())?;
    }
    Ok(config)
}

fn build_sweep_config(args: &SweepArgs) -> Result<SweepConfig, Failure> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Io(format!("cannot read config {}: {e}", path.display())))?;
            parse_config_text(&text)?
        }
        None => SweepConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if let Some(trials) = args.trials {
        config.trials = trials;
    }
    if let Some(nt) = args.nt {
        config.n_t = nt;
    }
    let overrides = [
        ("n_s", &args.ns),
        ("snr_db", &args.snr_db),
        ("mode", &args.mode),
        ("strategy", &args.strategy),
        ("patterns", &args.patterns),
    ];
    for (key, value) in overrides {
        if let Some(value) = value {
            set_config_key(&mut config, key, value)?;
        }
    }
    if let Some(mu1) = args.mu1 {
        config.mu_1 = mu1;
    }
    if let Some(mu2) = args.mu2 {
        config.mu_2 = mu2;
    }
    if let Some(n0) = args.n0 {
        config.n_0 = n0;
    }
    if let Some(cap) = args.enum_cap {
        config.enumeration_cap = cap;
    }
    config.validate()?;
    Ok(config)
}

/// Sweep result as CSV with [`CSV_HEADER`].
pub fn sweep_to_csv(result: &SweepResult) -> String {
    let mut s = String::with_capacity(64 * (result.rows.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in &result.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            num(r.snr_db),
            r.mode,
            r.strategy,
            r.n_t,
            r.n_s,
            num(r.mean_capacity),
            num(r.std_error),
            r.trials
        );
    }
    s
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

fn cmd_sweep(args: &SweepArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let config = build_sweep_config(args)?;
    if args.workers == Some(0) {
        return Err(Failure::Validation("invalid config: workers: must be at least 1".into()));
    }
    let started_at = Utc::now();
    let result = match args.workers {
        Some(w) => run_sweep_with_workers(&config, w)?,
        None => run_sweep(&config)?,
    };
    let finished_at = Utc::now();
    let body = match args.format {
        SweepFormat::Csv => sweep_to_csv(&result),
        SweepFormat::Json => serde_json::to_string_pretty(&result).expect("sweep result serialises") + "\n",
    };
    write_file(&args.out, &body)?;
    let manifest = RunManifest {
        config,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        started_at,
        finished_at,
        output_path: args.out.display().to_string(),
    };
    let manifest_json = serde_json::to_string_pretty(&manifest).expect("manifest serialises") + "\n";
    write_file(&manifest_path(&args.out), &manifest_json)?;
    writeln!(stdout, "wrote {} rows to {}", result.rows.len(), args.out.display())
        .map_err(|e| Failure::Io(e.to_string()))?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct AllocationReport<'a> {
    strategy: Strategy,
    gains: &'a [f64],
    n0: f64,
    budget: f64,
    powers: &'a [f64],
    water_level: Option<f64>,
    snr: Vec<f64>,
    capacity: Vec<f64>,
    total_capacity: f64,
}

fn cmd_allocate(args: &AllocateArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let gains = parse_f64_list("gains", &args.gains)?;
    let n0 = parse_f64("n0", &args.n0)?;
    let budget = parse_f64("budget", &args.budget)?;
    if !(n0 > 0.0) {
        return Err(Error::config("n0", "must be > 0").into());
    }
    if !(budget > 0.0) {
        return Err(Error::config("budget", "must be > 0").into());
    }
    let strategy: Strategy = args.strategy.parse()?;
    let problem = AllocationProblem::new(gains, n0, budget)?;
    let alloc: PowerAllocation = match strategy {
        Strategy::Dynamic => waterfill(&problem)?,
        Strategy::Uniform => uniform_allocation(problem.len(), budget)?,
    };
    let snr: Vec<f64> = problem
        .gains()
        .iter()
        .zip(&alloc.powers)
        .map(|(g, p)| p * g / n0)
        .collect();
    let capacity: Vec<f64> = problem
        .gains()
        .iter()
        .zip(&alloc.powers)
        .map(|(g, p)| sum_capacity(&[*g], &[*p], n0))
        .collect();
    let report = AllocationReport {
        strategy,
        gains: problem.gains(),
        n0,
        budget,
        powers: &alloc.powers,
        water_level: alloc.water_level,
        snr,
        capacity,
        total_capacity: problem.objective(&alloc.powers),
    };
    let text = match args.format {
        ReportFormat::Json => serde_json::to_string_pretty(&report).expect("report serialises") + "\n",
        ReportFormat::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "strategy: {}", report.strategy);
            if let Some(level) = report.water_level {
                let _ = writeln!(s, "water_level: {}", num(level));
            }
            let _ = writeln!(s, "powers: {}", report.powers.iter().map(|p| num(*p)).collect::<Vec<_>>().join(","));
            let _ = writeln!(s, "position,gain,power,snr,capacity");
            for n in 0..report.powers.len() {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    n,
                    num(report.gains[n]),
                    num(report.powers[n]),
                    num(report.snr[n]),
                    num(report.capacity[n])
                );
            }
            let _ = writeln!(s, "total_capacity: {}", num(report.total_capacity));
            s
        }
    };
    stdout.write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string()))?;
    Ok(EXIT_OK)
}

fn cmd_kkt_check(args: &KktArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let gains = parse_f64_list("gains", &args.gains)?;
    let powers = parse_f64_list("powers", &args.powers)?;
    let n0 = parse_f64("n0", &args.n0)?;
    let budget = parse_f64("budget", &args.budget)?;
    let tol = parse_f64("tol", &args.tol)?;
    if powers.len() != gains.len() {
        return Err(Error::DimensionMismatch {
            expected: gains.len(),
            actual: powers.len(),
        }
        .into());
    }
    let problem = AllocationProblem::new(gains, n0, budget)?;
    let alloc = PowerAllocation {
        support: (0..powers.len()).filter(|&n| powers[n] > 0.0).collect(),
        powers,
        water_level: None,
    };
    let report = verify_kkt(&problem, &alloc, tol)?;
    let text = match args.format {
        ReportFormat::Json => serde_json::to_string_pretty(&report).expect("report serialises") + "\n",
        ReportFormat::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "epsilon: {}", num(report.epsilon));
            let _ = writeln!(
                s,
                "epsilon_n: {}",
                report.epsilon_n.iter().map(|e| num(*e)).collect::<Vec<_>>().join(",")
            );
            let _ = writeln!(s, "stationarity_residual: {}", num(report.stationarity_residual));
            let _ = writeln!(s, "complementarity_residual: {}", num(report.complementarity_residual));
            let _ = writeln!(s, "dual_residual: {}", num(report.dual_residual));
            let _ = writeln!(s, "primal_residual: {}", num(report.primal_residual));
            let _ = writeln!(s, "budget_residual: {}", num(report.budget_residual));
            let _ = writeln!(s, "tolerance: {}", num(report.tolerance));
            let _ = writeln!(s, "passed: {}", report.passed);
            s
        }
    };
    stdout.write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string()))?;
    Ok(if report.passed { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn selftest_checks() -> Vec<(&'static str, bool)> {
    let mut checks = Vec::new();

    let problem = AllocationProblem::new(vec![1.0, 0.5], 1.0, 3.0).expect("valid problem");
    let alloc = waterfill(&problem).expect("solvable");
    checks.push((
        "waterfill [1, 0.5] budget 3 -> [2, 1]",
        (alloc.powers[0] - 2.0).abs() < 1e-12 && (alloc.powers[1] - 1.0).abs() < 1e-12,
    ));
    checks.push((
        "dynamic capacity 1/2 (log2 3 + log2 1.5)",
        (problem.objective(&alloc.powers) - 0.5 * (3f64.log2() + 1.5f64.log2())).abs() < 1e-12,
    ));
    checks.push((
        "KKT certificate of the waterfill output",
        verify_kkt(&problem, &alloc, 1e-9).map(|r| r.passed).unwrap_or(false),
    ));
    let uniform = uniform_allocation(2, 3.0).expect("valid");
    checks.push((
        "uniform split fails the KKT check",
        verify_kkt(&problem, &uniform, 1e-6).map(|r| !r.passed).unwrap_or(false),
    ));

    let average = ChannelRealization::new(vec![1.0, 0.5], vec![1.0, 0.5])
        .and_then(|r| build_selection(&r, 1, SelectionMode::Centralized))
        .and_then(|sel| {
            average_capacity_over_patterns(
                &sel,
                2.0,
                1.0,
                Strategy::Dynamic,
                PatternPolicy::Exact,
                DEFAULT_ENUMERATION_CAP,
                &mut crate::channel::trial_stream(0, 0),
            )
        });
    checks.push((
        "N_S = 1 centralized average 1/4 (1 + log2 3)",
        average.map(|c| (c - 0.25 * (1.0 + 3f64.log2())).abs() < 1e-10).unwrap_or(false),
    ));

    let config = SweepConfig {
        n_t: 6,
        n_s_list: vec![2],
        snr_points_db: vec![0.0, 20.0],
        trials: 64,
        ..SweepConfig::default()
    };
    let a = run_sweep_with_workers(&config, 1).map(|r| sweep_to_csv(&r));
    let b = run_sweep_with_workers(&config, 2).map(|r| sweep_to_csv(&r));
    checks.push(("sweep CSV independent of worker count", matches!((&a, &b), (Ok(x), Ok(y)) if x == y)));
    checks
}

fn cmd_selftest(stdout: &mut dyn Write) -> Result<i32, Failure> {
    let checks = selftest_checks();
    let mut all = true;
    for (name, ok) in &checks {
        all &= *ok;
        writeln!(stdout, "[{}] {name}", if *ok { "PASS" } else { "FAIL" }).map_err(|e| Failure::Io(e.to_string()))?;
    }
    Ok(if all { EXIT_OK } else { EXIT_CHECK_FAILED })
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Sweep(args) => cmd_sweep(args, stdout),
        Command::Allocate(args) => cmd_allocate(args, stdout),
        Command::KktCheck(args) => cmd_kkt_check(args, stdout),
        Command::Selftest => cmd_selftest(stdout),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure::Validation(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_VALIDATION
        }
        Err(Failure::Io(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_IO
        }
    }
}
