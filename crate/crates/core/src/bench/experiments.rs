//! Experiment definitions and CSV emission.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::accounting::RoundTrace;
use crate::bench::offline::{best_compression_loss, offline_oracle, offline_oracle_constrained, FollowTheLeaderPca};
use crate::bench::streams::{
    adversarial_comparators, gen_adversarial_stream, gen_dispatch_stream, gen_jump_stream, gen_permutation_stream,
    gen_subspace_stream, gen_toy_stream, read_demand_csv, substream, synthetic_demand, DispatchModel, DEMAND_HIGH,
};
use crate::constrained::{queue_carryover, Aggregate, ClippedRule, ClippedState};
use crate::error::{OcoError, Result};
use crate::gd::{gamma_for_path, GdState, StepRule};
use crate::geometry::FeasibleSet;
use crate::linalg::{outer, sym_eigen};
use crate::meta::{lambda_for, DiscountGrid, LossFamily, MetaState};
use crate::ons::{NewtonMode, NewtonState};
use crate::oracle::LossRound;
use crate::profile::CurvatureProfile;
use crate::spectral::{PcaState, PRACTICAL_ALPHA, PRACTICAL_ETA};
use crate::{path_length, run_learner, Matrix, OnlineLearner, Vector};

/// Ambient dimension, kept rank and segment count of the subspace experiment.
pub const PCA_DIM: usize = 20;
pub const PCA_RANK: usize = 2;
pub const PCA_SEGMENTS: usize = 3;
/// Side of the doubly-stochastic matrices.
pub const DSM_DIM: usize = 5;
/// Noise level of the adversarial stream.
pub const ADVERSARIAL_SIGMA: f64 = 0.5;
/// Dimension and piece count of the tracking stream.
pub const TRACKING_DIM: usize = 2;
pub const TRACKING_PIECES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentId {
    Toy,
    Dsm,
    Dispatch,
    Pca,
    Tracking,
    Adversarial,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 6] = [
        ExperimentId::Toy,
        ExperimentId::Dsm,
        ExperimentId::Dispatch,
        ExperimentId::Pca,
        ExperimentId::Tracking,
        ExperimentId::Adversarial,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::Toy => "toy",
            ExperimentId::Dsm => "dsm",
            ExperimentId::Dispatch => "dispatch",
            ExperimentId::Pca => "pca",
            ExperimentId::Tracking => "tracking",
            ExperimentId::Adversarial => "adversarial",
        }
    }

    pub fn default_horizon(self) -> usize {
        match self {
            ExperimentId::Toy => 8000,
            ExperimentId::Dsm => 4000,
            ExperimentId::Dispatch => 2880,
            ExperimentId::Pca => 600,
            ExperimentId::Tracking => 600,
            ExperimentId::Adversarial => 1000,
        }
    }

    pub fn algorithms(self) -> &'static [&'static str] {
        match self {
            ExperimentId::Toy => &["clipped", "mahdavi"],
            ExperimentId::Dsm | ExperimentId::Dispatch => &["clipped", "strong", "mahdavi"],
            ExperimentId::Pca => &["adaptive", "static", "ftl"],
            ExperimentId::Tracking => &["forgetting", "classic", "newton", "meta"],
            ExperimentId::Adversarial => &["forgetting", "classic", "meta"],
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = OcoError;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| OcoError::UnknownExperiment(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub horizon: usize,
    pub seeds: Vec<u64>,
    pub algorithms: Vec<String>,
    pub out: PathBuf,
    /// Step exponent of the clipped and baseline learners.
    pub beta: f64,
    /// Trade-off constant of the clipped learners.
    pub kappa: f64,
    /// Discount override for the forgetting and Newton learners.
    pub gamma: Option<f64>,
    pub demand: Option<PathBuf>,
    pub dispatch: DispatchModel,
    pub jobs: usize,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentId) -> Self {
        ExperimentConfig {
            experiment,
            horizon: experiment.default_horizon(),
            seeds: vec![0],
            algorithms: experiment.algorithms().iter().map(|s| s.to_string()).collect(),
            out: PathBuf::from("runs"),
            beta: crate::constrained::DEFAULT_BETA,
            kappa: crate::constrained::DEFAULT_KAPPA,
            gamma: None,
            demand: None,
            dispatch: DispatchModel::default(),
            jobs: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon < 2 {
            return Err(OcoError::invalid("horizon", format!("need T >= 2, got {}", self.horizon)));
        }
        if self.seeds.is_empty() {
            return Err(OcoError::invalid("seeds", "need at least one seed"));
        }
        if self.algorithms.is_empty() {
            return Err(OcoError::invalid("algos", "the algorithm roster is empty"));
        }
        let known = self.experiment.algorithms();
        if let Some(a) = self.algorithms.iter().find(|a| !known.contains(&a.as_str())) {
            return Err(OcoError::invalid(
                "algos",
                format!("`{a}` is not available for {} (choose from {})", self.experiment, known.join(",")),
            ));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(OcoError::invalid("beta", format!("must lie in (0,1), got {}", self.beta)));
        }
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return Err(OcoError::invalid("kappa", format!("must lie in (0,1), got {}", self.kappa)));
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g < 1.0) {
                return Err(OcoError::invalid("gamma", format!("must lie in (0,1), got {g}")));
            }
        }
        if self.jobs == 0 {
            return Err(OcoError::invalid("jobs", "must be at least 1"));
        }
        match self.experiment {
            ExperimentId::Pca if !self.horizon.is_multiple_of(PCA_SEGMENTS) => Err(OcoError::invalid(
                "horizon",
                format!("the subspace stream needs T divisible by {PCA_SEGMENTS}"),
            )),
            ExperimentId::Tracking if !self.horizon.is_multiple_of(TRACKING_PIECES) => Err(OcoError::invalid(
                "horizon",
                format!("the tracking stream needs T divisible by {TRACKING_PIECES}"),
            )),
            ExperimentId::Dispatch => self.dispatch.validate(),
            _ => Ok(()),
        }
    }
}

/// One row of a trace CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t: usize,
    pub loss: f64,
    pub cum_loss: f64,
    pub regret: f64,
    pub violation_signed: f64,
    pub violation_clipped: f64,
    pub step_size: f64,
}

/// One row of the summary CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub algorithm: String,
    pub seed: u64,
    pub horizon: usize,
    pub cumulative_loss: f64,
    pub comparator_loss: f64,
    pub regret: f64,
    pub path_length: Option<f64>,
    pub violation_clipped: f64,
    pub violation_signed: f64,
    pub violation_clipped_squared: f64,
    pub violation_max_step: f64,
    pub violation_queue: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub rows: Vec<TraceRow>,
    pub summary: SummaryRow,
    pub runtime_secs: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub trace_files: Vec<PathBuf>,
    pub summary_file: PathBuf,
    pub timing_file: PathBuf,
    pub cells: Vec<CellResult>,
}

/// Aggregated constraint value of a round, `maxᵢ gᵢ`, or zero without constraints.
fn aggregated(violations: &[f64]) -> f64 {
    if violations.is_empty() {
        0.0
    } else {
        violations.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Turn per-round losses, comparator losses and constraint values into rows
/// and a summary.
pub fn assemble(
    algorithm: &str,
    seed: u64,
    trace: &[RoundTrace],
    comparator_losses: &[f64],
    path: Option<f64>,
) -> Result<(Vec<TraceRow>, SummaryRow)> {
    if trace.len() != comparator_losses.len() {
        return Err(OcoError::LengthMismatch {
            what: "trace vs comparator losses",
            left: trace.len(),
            right: comparator_losses.len(),
        });
    }
    let mut rows = Vec::with_capacity(trace.len());
    let (mut cum, mut cmp) = (0.0, 0.0);
    let mut signed = Vec::with_capacity(trace.len());
    for (r, c) in trace.iter().zip(comparator_losses) {
        if !r.loss.is_finite() {
            return Err(OcoError::NonFinite("round loss"));
        }
        cum += r.loss;
        cmp += c;
        let g = aggregated(&r.violations);
        signed.push(g);
        rows.push(TraceRow {
            t: r.round_index,
            loss: r.loss,
            cum_loss: cum,
            regret: cum - cmp,
            violation_signed: g,
            violation_clipped: g.max(0.0),
            step_size: r.step_size_used,
        });
    }
    let summary = SummaryRow {
        algorithm: algorithm.to_string(),
        seed,
        horizon: trace.len(),
        cumulative_loss: cum,
        comparator_loss: cmp,
        regret: cum - cmp,
        path_length: path,
        violation_clipped: signed.iter().map(|g| g.max(0.0)).sum(),
        violation_signed: signed.iter().sum(),
        violation_clipped_squared: signed.iter().map(|g| g.max(0.0).powi(2)).sum(),
        violation_max_step: signed.iter().fold(0.0f64, |m, g| m.max(*g)),
        violation_queue: queue_carryover(&signed),
    };
    Ok((rows, summary))
}

fn toy_profile() -> Result<CurvatureProfile> {
    CurvatureProfile::new(2f64.sqrt(), 2.0, 1.0)?.with_constraint_count(1)
}

/// One multiplier per doubly-stochastic inequality, so `m = 4·dim + dim²`.
pub fn dsm_profile(dim: usize) -> Result<CurvatureProfile> {
    let r = (dim as f64).sqrt();
    CurvatureProfile::new(2.0 * r, 2.0 * r, r)?
        .with_strong_convexity(1.0)?
        .with_constraint_count(4 * dim + dim * dim)
}

fn dispatch_profile(model: &DispatchModel) -> Result<CurvatureProfile> {
    let r = model.upper().norm();
    CurvatureProfile::new(model.grad_bound(DEMAND_HIGH), r.max(1.0), r)?
        .with_strong_convexity(model.strong_convexity())?
        .with_constraint_count(1)
}

/// Clipped, strongly convex or baseline learner on a constrained stream.
pub fn constrained_learner(
    algorithm: &str,
    profile: &CurvatureProfile,
    horizon: usize,
    kappa: f64,
    beta: f64,
    set: FeasibleSet,
    dim: usize,
    aggregate: Aggregate,
) -> Result<ClippedState> {
    let rule = match algorithm {
        "clipped" => ClippedRule::convex_experiment(profile, horizon, kappa, beta)?,
        "strong" => ClippedRule::strongly_convex(profile)?,
        "mahdavi" => ClippedRule::mahdavi(profile, horizon, kappa, beta)?,
        other => return Err(OcoError::invalid("algorithm", format!("unknown constrained learner `{other}`"))),
    };
    ClippedState::new(dim, rule, set, aggregate)
}

/// Gradient-descent expert: the strongly convex rule, or the classic rule at `γ = 1`.
pub fn gd_expert(gamma: f64, profile: &CurvatureProfile, set: &FeasibleSet, start: Vector) -> Result<GdState> {
    let rule = if gamma >= 1.0 {
        StepRule::Classic
    } else {
        StepRule::StronglyConvex { gamma }
    };
    GdState::new(start, rule, profile.clone(), set.clone())
}

fn tracking_learner(
    algorithm: &str,
    gamma: f64,
    profile: &CurvatureProfile,
    set: &FeasibleSet,
    dim: usize,
    horizon: usize,
) -> Result<Box<dyn OnlineLearner>> {
    let start = set.center(dim);
    Ok(match algorithm {
        "forgetting" => Box::new(gd_expert(gamma, profile, set, start)?),
        "classic" => Box::new(GdState::new(start, StepRule::Classic, profile.clone(), set.clone())?),
        "newton" => Box::new(NewtonState::new(start, gamma, 1.0, 1.0, NewtonMode::Full, set.clone())?),
        "meta" => {
            let grid = DiscountGrid::build(horizon, profile.diameter, true)?;
            let lambda = lambda_for(profile, LossFamily::StronglyConvex)?;
            Box::new(MetaState::from_grid(&grid, lambda, |g| gd_expert(g, profile, set, start.clone()))?)
        }
        other => return Err(OcoError::invalid("algorithm", format!("unknown learner `{other}`"))),
    })
}

fn run_cell(config: &ExperimentConfig, algorithm: &str, seed: u64) -> Result<CellResult> {
    let started = Instant::now();
    let t = config.horizon;
    let (rows, summary) = match config.experiment {
        ExperimentId::Toy => {
            let rounds = gen_toy_stream(t, seed);
            let best = offline_oracle(&rounds, &FeasibleSet::L1Ball { radius: 1.0 }, 2, 1e-10)?;
            let cmp: Vec<f64> = rounds.iter().map(|r| r.value(&best.point)).collect();
            let set = FeasibleSet::ball(1.0)?;
            let mut learner = constrained_learner(algorithm, &toy_profile()?, t, config.kappa, config.beta, set, 2, Aggregate::Max)?;
            let trace = run_learner(&mut learner, &rounds)?;
            assemble(algorithm, seed, &trace, &cmp, None)?
        }
        ExperimentId::Dsm => {
            let rounds = gen_permutation_stream(t, DSM_DIM, seed)?;
            let n = DSM_DIM * DSM_DIM;
            let mean = rounds.iter().fold(Vector::zeros(n), |acc, r| acc - r.gradient(&Vector::zeros(n))) / t as f64;
            let cmp: Vec<f64> = rounds.iter().map(|r| r.value(&mean)).collect();
            let profile = dsm_profile(DSM_DIM)?;
            let set = FeasibleSet::ball(profile.radius)?;
            let mut learner =
                constrained_learner(algorithm, &profile, t, config.kappa, config.beta, set, n, Aggregate::Separate)?;
            let trace = run_learner(&mut learner, &rounds)?;
            assemble(algorithm, seed, &trace, &cmp, None)?
        }
        ExperimentId::Dispatch => {
            let demand = match &config.demand {
                Some(path) => read_demand_csv(path)?.into_iter().cycle().take(t).collect(),
                None => synthetic_demand(t, seed),
            };
            let rounds = gen_dispatch_stream(&config.dispatch, &demand)?;
            let set = FeasibleSet::boxed(Vector::zeros(config.dispatch.dim()), config.dispatch.upper())?;
            let best = offline_oracle_constrained(&rounds, &set, config.dispatch.dim(), &rounds[0].constraints, 1e-9)?;
            let cmp: Vec<f64> = rounds.iter().map(|r| r.value(&best.point)).collect();
            let profile = dispatch_profile(&config.dispatch)?;
            let mut learner =
                constrained_learner(algorithm, &profile, t, config.kappa, config.beta, set, config.dispatch.dim(), Aggregate::Max)?;
            let trace = run_learner(&mut learner, &rounds)?;
            assemble(algorithm, seed, &trace, &cmp, None)?
        }
        ExperimentId::Pca => pca_cell(algorithm, t, seed)?,
        ExperimentId::Tracking => {
            let stream = gen_jump_stream(t, TRACKING_DIM, 1.0, TRACKING_PIECES, seed)?;
            let (rounds, centers): (Vec<LossRound>, Vec<Vector>) = stream.into_iter().unzip();
            let profile = CurvatureProfile::new(2.0, 2.0, 1.0)?.with_strong_convexity(1.0)?.with_smoothness(1.0)?;
            let path = path_length(&centers)?;
            let gamma = match config.gamma {
                Some(g) => g,
                None => gamma_for_path(t as f64, profile.diameter, path)?,
            };
            let set = FeasibleSet::ball(1.0)?;
            let mut learner = tracking_learner(algorithm, gamma, &profile, &set, TRACKING_DIM, t)?;
            let trace = run_learner(learner.as_mut(), &rounds)?;
            let cmp: Vec<f64> = rounds.iter().zip(&centers).map(|(r, c)| r.value(c)).collect();
            assemble(algorithm, seed, &trace, &cmp, Some(path))?
        }
        ExperimentId::Adversarial => {
            let sigma = ADVERSARIAL_SIGMA;
            let (rounds, eps) = gen_adversarial_stream(t, sigma, seed)?;
            let z = adversarial_comparators(&eps);
            let radius = 2.0 * sigma;
            let profile = CurvatureProfile::new(4.0 * radius, 2.0 * radius, radius)?
                .with_strong_convexity(2.0)?
                .with_smoothness(2.0)?;
            let path = path_length(&z)?;
            let gamma = match config.gamma {
                Some(g) => g,
                None => gamma_for_path(t as f64, profile.diameter, path)?,
            };
            let set = FeasibleSet::ball(radius)?;
            let mut learner = tracking_learner(algorithm, gamma, &profile, &set, 1, t)?;
            let trace = run_learner(learner.as_mut(), &rounds)?;
            let cmp: Vec<f64> = rounds.iter().zip(&z).map(|(r, c)| r.value(c)).collect();
            assemble(algorithm, seed, &trace, &cmp, Some(path))?
        }
    };
    Ok(CellResult {
        rows,
        summary,
        runtime_secs: started.elapsed().as_secs_f64(),
    })
}

/// Compression losses and the per-round comparator losses of the best fixed
/// rank-`k` projection for one PCA learner.
pub fn pca_losses(algorithm: &str, xs: &[Vector], k: usize, seed: u64) -> Result<Vec<f64>> {
    let n = xs.first().ok_or(OcoError::Empty("data"))?.len();
    let mut rng = substream(seed, &format!("pca/{algorithm}"));
    match algorithm {
        "adaptive" | "static" => {
            let alpha = if algorithm == "adaptive" { PRACTICAL_ALPHA } else { 0.0 };
            let mut s = PcaState::new(n, k, PRACTICAL_ETA, alpha)?;
            xs.iter().map(|x| Ok(s.pca_round(x, &mut rng)?.expected_loss)).collect()
        }
        "ftl" => {
            let mut f = FollowTheLeaderPca::new(n, k)?;
            Ok(xs.iter().map(|x| f.round(x)).collect())
        }
        other => Err(OcoError::invalid("algorithm", format!("unknown PCA learner `{other}`"))),
    }
}

fn pca_cell(algorithm: &str, horizon: usize, seed: u64) -> Result<(Vec<TraceRow>, SummaryRow)> {
    let xs = gen_subspace_stream(horizon, PCA_DIM, PCA_RANK, PCA_SEGMENTS, seed)?;
    let losses = pca_losses(algorithm, &xs, PCA_RANK, seed)?;
    let mut scatter = Matrix::zeros(PCA_DIM, PCA_DIM);
    for x in &xs {
        scatter += outer(x);
    }
    let (_, basis) = sym_eigen(&scatter);
    let top = basis.columns(0, PCA_RANK).into_owned();
    let cmp: Vec<f64> = xs.iter().map(|x| (x - &top * (top.transpose() * x)).norm_squared()).collect();
    debug_assert!((cmp.iter().sum::<f64>() - best_compression_loss(&xs, PCA_RANK)?).abs() < 1e-6);
    let trace: Vec<RoundTrace> = losses
        .iter()
        .enumerate()
        .map(|(i, &loss)| RoundTrace {
            round_index: i + 1,
            iterate: Vector::zeros(0),
            loss,
            violations: Vec::new(),
            step_size_used: PRACTICAL_ETA,
        })
        .collect();
    assemble(algorithm, seed, &trace, &cmp, None)
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> OcoError + '_ {
    move |e| OcoError::Io {
        path: path.display().to_string(),
        source: e,
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> OcoError + '_ {
    move |e| OcoError::Io {
        path: path.display().to_string(),
        source: std::io::Error::other(e.to_string()),
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

pub const TRACE_HEADER: [&str; 7] = ["t", "loss", "cum_loss", "regret", "violation_signed", "violation_clipped", "step_size"];
pub const SUMMARY_HEADER: [&str; 12] = [
    "algorithm",
    "seed",
    "horizon",
    "cumulative_loss",
    "comparator_loss",
    "regret",
    "path_length",
    "violation_clipped",
    "violation_signed",
    "violation_clipped_squared",
    "violation_max_step",
    "violation_queue",
];

pub fn write_trace(path: &Path, rows: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(TRACE_HEADER).map_err(csv_err(path))?;
    for r in rows {
        w.write_record([
            r.t.to_string(),
            num(r.loss),
            num(r.cum_loss),
            num(r.regret),
            num(r.violation_signed),
            num(r.violation_clipped),
            num(r.step_size),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(SUMMARY_HEADER).map_err(csv_err(path))?;
    for r in rows {
        w.write_record([
            r.algorithm.clone(),
            r.seed.to_string(),
            r.horizon.to_string(),
            num(r.cumulative_loss),
            num(r.comparator_loss),
            num(r.regret),
            r.path_length.map(num).unwrap_or_default(),
            num(r.violation_clipped),
            num(r.violation_signed),
            num(r.violation_clipped_squared),
            num(r.violation_max_step),
            num(r.violation_queue),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Run every (algorithm, seed) cell and write one trace CSV per cell, a
/// summary CSV and a separate timing CSV (wall-clock times are the only
/// non-deterministic output, so they stay out of the summary).
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    fs::create_dir_all(&config.out).map_err(io_err(&config.out))?;
    let cells: Vec<(String, u64)> = config
        .algorithms
        .iter()
        .flat_map(|a| config.seeds.iter().map(move |&s| (a.clone(), s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| OcoError::invalid("jobs", e.to_string()))?;
    let exp = config.experiment.name();
    let results: Vec<Result<(CellResult, PathBuf)>> = pool.install(|| {
        cells
            .par_iter()
            .map(|(algorithm, seed)| {
                let cell = run_cell(config, algorithm, *seed)?;
                let path = config.out.join(format!("{exp}_{algorithm}_seed{seed}.csv"));
                write_trace(&path, &cell.rows)?;
                Ok((cell, path))
            })
            .collect()
    });
    let mut trace_files = Vec::with_capacity(results.len());
    let mut out_cells = Vec::with_capacity(results.len());
    for r in results {
        let (cell, path) = r?;
        trace_files.push(path);
        out_cells.push(cell);
    }
    let summary_file = config.out.join(format!("{exp}_summary.csv"));
    let summaries: Vec<SummaryRow> = out_cells.iter().map(|c| c.summary.clone()).collect();
    write_summary(&summary_file, &summaries)?;

    let timing_file = config.out.join(format!("{exp}_timing.csv"));
    let mut w = csv::Writer::from_path(&timing_file).map_err(csv_err(&timing_file))?;
    w.write_record(["algorithm", "seed", "runtime_secs"]).map_err(csv_err(&timing_file))?;
    for c in &out_cells {
        w.write_record([c.summary.algorithm.clone(), c.summary.seed.to_string(), num(c.runtime_secs)])
            .map_err(csv_err(&timing_file))?;
    }
    w.flush().map_err(io_err(&timing_file))?;

    Ok(ExperimentOutput {
        trace_files,
        summary_file,
        timing_file,
        cells: out_cells,
    })
}
