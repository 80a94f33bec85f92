//! `oco-bench` command line: one subcommand per experiment plus `selftest`.
//!
//! Exit codes: 0 success, 1 a self-test check failed, 2 usage, 3 I/O,
//! 4 numerical failure.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bench::checks::{limits, run_all, Scale};
use crate::bench::experiments::{run_experiment, ExperimentConfig, ExperimentId};
use crate::error::OcoError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "oco-bench", version, about = "Run online convex optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Linear losses under an L1 constraint.
    Toy(RunArgs),
    /// Approximation by doubly-stochastic matrices.
    Dsm(RunArgs),
    /// Three-generator economic dispatch with an emission cap.
    Dispatch(RunArgs),
    /// Adaptive PCA on a segmented subspace stream.
    Pca(RunArgs),
    /// Tracking a jumping minimiser with forgetting-factor learners.
    Tracking(RunArgs),
    /// The random-sign lower-bound stream.
    Adversarial(RunArgs),
    /// Run the self-test checks and report one line per check.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Default, Args)]
struct RunArgs {
    #[arg(long)]
    horizon: Option<usize>,
    /// First seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of consecutive seeds starting at --seed.
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// `t,demand` CSV for the dispatch experiment.
    #[arg(long)]
    demand: Option<PathBuf>,
    /// Comma-separated algorithm roster.
    #[arg(long, value_delimiter = ',')]
    algos: Option<Vec<String>>,
    #[arg(long)]
    jobs: Option<usize>,
    /// TOML file with the same keys as the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
struct SelftestArgs {
    /// Run every check at full size instead of the reduced size.
    #[arg(long)]
    full: bool,
}

/// Failure of a CLI invocation, carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

/// Exit code for an error raised while running an experiment.
pub fn exit_code(e: &OcoError) -> i32 {
    match e {
        OcoError::Io { .. } | OcoError::Parse { .. } => EXIT_IO,
        OcoError::InvalidParameter { .. } | OcoError::UnknownExperiment(_) => EXIT_USAGE,
        _ => EXIT_NUMERICAL,
    }
}

fn run_error(e: OcoError) -> CliError {
    CliError {
        code: exit_code(&e),
        message: e.to_string(),
    }
}

/// Values read from a `--config` file. Every key is optional.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileConfig {
    pub horizon: Option<usize>,
    pub seed: Option<u64>,
    pub seeds: Option<usize>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub kappa: Option<f64>,
    pub out: Option<PathBuf>,
    pub demand: Option<PathBuf>,
    pub algos: Option<Vec<String>>,
    pub jobs: Option<usize>,
    pub dispatch: Vec<(String, Vec<f64>)>,
}

const CONFIG_KEYS: [&str; 11] = [
    "horizon", "seed", "seeds", "beta", "gamma", "kappa", "out", "demand", "algos", "jobs", "dispatch",
];
const DISPATCH_KEYS: [&str; 7] = ["a", "b", "d", "e", "e_max", "xi", "theta_max"];

fn config_parse_error(path: &Path, reason: String) -> CliError {
    CliError::usage(format!("{}: {reason}", path.display()))
}

fn as_count(path: &Path, key: &str, v: &toml::Value) -> Result<u64, CliError> {
    v.as_integer()
        .and_then(|i| u64::try_from(i).ok())
        .ok_or_else(|| config_parse_error(path, format!("`{key}` must be a non-negative integer")))
}

fn as_float(path: &Path, key: &str, v: &toml::Value) -> Result<f64, CliError> {
    v.as_float()
        .or_else(|| v.as_integer().map(|i| i as f64))
        .ok_or_else(|| config_parse_error(path, format!("`{key}` must be a number")))
}

fn as_string(path: &Path, key: &str, v: &toml::Value) -> Result<String, CliError> {
    v.as_str()
        .map(str::to_string)
        .ok_or_else(|| config_parse_error(path, format!("`{key}` must be a string")))
}

/// Parse the text of a config file. Unknown keys are rejected.
pub fn parse_config(path: &Path, text: &str) -> Result<FileConfig, CliError> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| config_parse_error(path, e.message().to_string()))?;
    let mut cfg = FileConfig::default();
    for (key, v) in &table {
        match key.as_str() {
            "horizon" => cfg.horizon = Some(as_count(path, key, v)? as usize),
            "seed" => cfg.seed = Some(as_count(path, key, v)?),
            "seeds" => cfg.seeds = Some(as_count(path, key, v)? as usize),
            "jobs" => cfg.jobs = Some(as_count(path, key, v)? as usize),
            "beta" => cfg.beta = Some(as_float(path, key, v)?),
            "gamma" => cfg.gamma = Some(as_float(path, key, v)?),
            "kappa" => cfg.kappa = Some(as_float(path, key, v)?),
            "out" => cfg.out = Some(PathBuf::from(as_string(path, key, v)?)),
            "demand" => cfg.demand = Some(PathBuf::from(as_string(path, key, v)?)),
            "algos" => {
                let list = match v {
                    toml::Value::Array(items) => {
                        items.iter().map(|i| as_string(path, key, i)).collect::<Result<Vec<_>, _>>()?
                    }
                    _ => as_string(path, key, v)?.split(',').map(|s| s.trim().to_string()).collect(),
                };
                cfg.algos = Some(list);
            }
            "dispatch" => {
                let inner = v
                    .as_table()
                    .ok_or_else(|| config_parse_error(path, "`dispatch` must be a table".into()))?;
                for (k, item) in inner {
                    if !DISPATCH_KEYS.contains(&k.as_str()) {
                        return Err(config_parse_error(
                            path,
                            format!("unknown dispatch key `{k}` (expected one of {})", DISPATCH_KEYS.join(", ")),
                        ));
                    }
                    let values = match item {
                        toml::Value::Array(xs) => {
                            xs.iter().map(|x| as_float(path, k, x)).collect::<Result<Vec<_>, _>>()?
                        }
                        other => vec![as_float(path, k, other)?],
                    };
                    cfg.dispatch.push((k.clone(), values));
                }
            }
            other => {
                return Err(config_parse_error(
                    path,
                    format!("unknown key `{other}` (expected one of {})", CONFIG_KEYS.join(", ")),
                ))
            }
        }
    }
    Ok(cfg)
}

fn scalar(key: &str, values: &[f64]) -> Result<f64, CliError> {
    match values {
        [v] => Ok(*v),
        _ => Err(CliError::usage(format!("dispatch.{key} must be a single number"))),
    }
}

/// Merge flags over the config file over the built-in defaults.
fn resolve(experiment: ExperimentId, args: &RunArgs) -> Result<ExperimentConfig, CliError> {
    let file = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError {
                code: EXIT_IO,
                message: format!("{}: {e}", path.display()),
            })?;
            parse_config(path, &text)?
        }
        None => FileConfig::default(),
    };
    let mut cfg = ExperimentConfig::new(experiment);
    if let Some(h) = args.horizon.or(file.horizon) {
        cfg.horizon = h;
    }
    let first = args.seed.or(file.seed).unwrap_or(0);
    let count = args.seeds.or(file.seeds).unwrap_or(1);
    if count == 0 {
        return Err(CliError::usage("--seeds must be at least 1"));
    }
    cfg.seeds = (0..count as u64).map(|i| first + i).collect();
    if let Some(b) = args.beta.or(file.beta) {
        cfg.beta = b;
    }
    if let Some(k) = file.kappa {
        cfg.kappa = k;
    }
    cfg.gamma = args.gamma.or(file.gamma);
    if let Some(out) = args.out.clone().or(file.out) {
        cfg.out = out;
    }
    cfg.demand = args.demand.clone().or(file.demand);
    if cfg.demand.is_some() && experiment != ExperimentId::Dispatch {
        return Err(CliError::usage("--demand only applies to the dispatch experiment"));
    }
    if cfg.gamma.is_some() && !matches!(experiment, ExperimentId::Tracking | ExperimentId::Adversarial) {
        return Err(CliError::usage("--gamma only applies to the tracking and adversarial experiments"));
    }
    if let Some(algos) = args.algos.clone().or(file.algos) {
        cfg.algorithms = algos.into_iter().filter(|a| !a.is_empty()).collect();
    }
    if let Some(j) = args.jobs.or(file.jobs) {
        cfg.jobs = j;
    }
    for (key, values) in &file.dispatch {
        let m = &mut cfg.dispatch;
        match key.as_str() {
            "a" => m.a = values.clone(),
            "b" => m.b = values.clone(),
            "d" => m.d = values.clone(),
            "e" => m.e = values.clone(),
            "theta_max" => m.theta_max = values.clone(),
            "e_max" => m.e_max = scalar(key, values)?,
            "xi" => m.xi = scalar(key, values)?,
            _ => unreachable!("dispatch keys are checked while parsing"),
        }
    }
    cfg.validate().map_err(|e| CliError::usage(e.to_string()))?;
    Ok(cfg)
}

fn run(command: Command) -> Result<i32, CliError> {
    let (experiment, args) = match command {
        Command::Selftest(a) => return Ok(selftest(if a.full { Scale::Full } else { Scale::Reduced })),
        Command::Toy(a) => (ExperimentId::Toy, a),
        Command::Dsm(a) => (ExperimentId::Dsm, a),
        Command::Dispatch(a) => (ExperimentId::Dispatch, a),
        Command::Pca(a) => (ExperimentId::Pca, a),
        Command::Tracking(a) => (ExperimentId::Tracking, a),
        Command::Adversarial(a) => (ExperimentId::Adversarial, a),
    };
    let cfg = resolve(experiment, &args)?;
    let out = run_experiment(&cfg).map_err(run_error)?;
    for c in &out.cells {
        let s = &c.summary;
        println!(
            "{experiment} {} seed {}: regret {:.4}, clipped violation {:.4}",
            s.algorithm, s.seed, s.regret, s.violation_clipped
        );
    }
    println!("summary written to {}", out.summary_file.display());
    Ok(EXIT_OK)
}

fn selftest(scale: Scale) -> i32 {
    let started = std::time::Instant::now();
    let checks = run_all(scale);
    for c in &checks {
        println!("{c}");
    }
    let elapsed = started.elapsed().as_secs_f64();
    let within = elapsed < limits::SELFTEST_SECONDS;
    println!(
        "[{}] 12 selftest wall time {elapsed:.1}s (limit {:.0}s)",
        if within { "PASS" } else { "FAIL" },
        limits::SELFTEST_SECONDS
    );
    let failed = checks.iter().filter(|c| !c.passed).count() + usize::from(!within);
    println!("{} of {} checks passed", checks.len() + 1 - failed, checks.len() + 1);
    if failed == 0 {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

/// Parse `argv` (including the program name), run, and return the exit code.
pub fn parse_and_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("oco-bench: {}", e.message);
            e.code
        }
    }
}
