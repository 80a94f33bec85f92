//! Self-test suite: one numerical check per acceptance property, run at a
//! full size or at a reduced size that fits the selftest time budget.

use std::fmt;
use std::time::Instant;

use rand::Rng;

use crate::accounting::violation_metrics;
use crate::bench::experiments::{constrained_learner, dsm_profile, pca_losses};
use crate::constrained::Aggregate;
use crate::bench::offline::{best_compression_loss, offline_oracle_constrained, FollowTheLeaderPca};
use crate::bench::streams::{
    gen_dispatch_stream, gen_jump_stream, gen_permutation_stream, gen_quadratic_stream, gen_subspace_stream,
    gen_toy_stream, substream, synthetic_demand, DispatchModel, DEMAND_HIGH,
};
use crate::error::Result;
use crate::gd::{gamma_for_path, GdState, StepRule};
use crate::geometry::{cap_probability, mixture_decompose, project_pnorm_ball, FeasibleSet};
use crate::linalg::sym_eigen;
use crate::meta::{DiscountGrid, MetaState, TRACKING_TOLERANCE};
use crate::ons::{eta_for_case, practical_epsilon, CurvatureCase, NewtonMode, NewtonState};
use crate::oracle::{LossRound, Objective, Quadratic};
use crate::profile::CurvatureProfile;
use crate::spectral::{PcaState, PRACTICAL_ALPHA, PRACTICAL_ETA};
use crate::{path_length, run_learner, Matrix, OnlineLearner, Vector};

/// Pinned tolerances and thresholds.
pub mod limits {
    pub const RLS_MATCH: f64 = 1e-10;
    pub const NEWTON_MATCH: f64 = 1e-6;
    pub const CONTRACTION: f64 = 1e-9;
    pub const STATIC_GROWTH_RATIO: f64 = 1.9;
    pub const TRACKING_RATIO: f64 = 0.5;
    pub const DECOMPOSITION: f64 = 1e-9;
    pub const CAP_INVARIANT: f64 = 1e-12;
    pub const PNORM_HAND: f64 = 1e-8;
    pub const DENSITY_TRACE: f64 = 1e-9;
    pub const DENSITY_EIGEN: f64 = 1e-9;
    pub const PCA_WIN_FRACTION: f64 = 0.8;
    pub const TOY_STEP_VIOLATION: f64 = 0.05;
    pub const TOY_BASELINE_FRACTION: f64 = 1.0 / 3.0;
    pub const TOY_SQUARE_SLOPE: f64 = 0.6;
    pub const TOY_CANCELLATION: f64 = 0.1;
    pub const DSM_SLOPE: f64 = 0.75;
    pub const DISPATCH_STEP_VIOLATION: f64 = 2.0;
    pub const DISPATCH_WARMUP: usize = 200;
    pub const DISPATCH_GAP: f64 = 0.1;
    pub const MIDPOINT_CONCAVITY: f64 = -1e-10;
    pub const SELFTEST_SECONDS: f64 = 300.0;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Full,
    Reduced,
}

impl Scale {
    fn pick(self, full: usize, reduced: usize) -> usize {
        match self {
            Scale::Full => full,
            Scale::Reduced => reduced,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2} {} ({:.1}s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

pub const CHECK_NAMES: [&str; 11] = [
    "meta-expert tracking bound",
    "discounted least-squares equivalence",
    "contraction per round",
    "static regret growth at gamma = 1",
    "tracking a jumping minimiser",
    "geometry oracles",
    "adaptive PCA against static and FTL",
    "clipped constraint on the toy stream",
    "strongly convex clipped on doubly-stochastic stream",
    "economic dispatch",
    "strong convexity implies exp-concavity",
];

type CheckFn = fn(Scale) -> Result<(bool, String)>;

const CHECKS: [CheckFn; 11] = [
    meta_tracking,
    rls_equivalence,
    contraction,
    static_growth,
    tracking,
    geometry,
    adaptive_pca,
    toy_clipped,
    dsm_strong,
    dispatch,
    exp_concavity,
];

/// Run check `id` (1-based). Errors inside a check count as a failure.
pub fn run_check(id: usize, scale: Scale) -> Option<Check> {
    let f = CHECKS.get(id.checked_sub(1)?)?;
    let started = Instant::now();
    let (passed, detail) = match f(scale) {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    Some(Check {
        id,
        name: CHECK_NAMES[id - 1],
        passed,
        detail,
        seconds: started.elapsed().as_secs_f64(),
    })
}

pub fn run_all(scale: Scale) -> Vec<Check> {
    (1..=CHECKS.len()).filter_map(|id| run_check(id, scale)).collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.max(1e-300).ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

fn unit_quadratic_profile() -> Result<CurvatureProfile> {
    CurvatureProfile::new(2.0, 2.0, 1.0)?
        .with_strong_convexity(1.0)?
        .with_smoothness(1.0)?
        .with_exp_concavity(0.25)
}

fn meta_tracking(scale: Scale) -> Result<(bool, String)> {
    let seeds = scale.pick(10, 3) as u64;
    let horizon = scale.pick(2000, 500);
    let profile = unit_quadratic_profile()?;
    let set = FeasibleSet::ball(1.0)?;
    let eta = eta_for_case(&profile, CurvatureCase::ExpConcave)?;
    let epsilon = practical_epsilon(&profile)?;
    let lambda = profile.alpha()?;
    let grid = DiscountGrid::build(horizon, profile.diameter, true)?;
    let mut worst = f64::INFINITY;
    for seed in 0..seeds {
        let rounds: Vec<LossRound> = gen_quadratic_stream(horizon, 5, 1.0, 0.5, seed).into_iter().map(|(r, _)| r).collect();
        let mut meta = MetaState::from_grid(&grid, lambda, |g| {
            NewtonState::new(Vector::zeros(5), g, eta, epsilon, NewtonMode::Quasi, set.clone())
        })?;
        for r in &rounds {
            meta.meta_round(r)?;
            worst = worst.min(meta.tracking_margin());
        }
    }
    Ok((
        worst >= 0.0,
        format!("{} experts, {seeds} seeds x T={horizon}: smallest margin {worst:.3e} (tolerance {TRACKING_TOLERANCE:e} included)", grid.len()),
    ))
}

fn rls_equivalence(_: Scale) -> Result<(bool, String)> {
    let horizon = 500;
    let gamma = 0.9;
    let profile = unit_quadratic_profile()?;
    let set = FeasibleSet::ball(1.0)?;
    let stream = gen_quadratic_stream(horizon, 3, 1.0, 0.6, 11);
    let mut gd = GdState::new(Vector::zeros(3), StepRule::DiscountedRls { gamma }, profile, set.clone())?;
    let mut ons = NewtonState::new(Vector::zeros(3), gamma, 1.0, 1e-8, NewtonMode::Full, set)?;
    let (mut num, mut den) = (Vector::zeros(3), 0.0);
    let (mut gd_err, mut ons_err) = (0.0f64, 0.0f64);
    for (round, y) in &stream {
        gd.observe(round)?;
        ons.observe(round)?;
        num = num * gamma + y;
        den = den * gamma + 1.0;
        let closed = &num / den;
        gd_err = gd_err.max((gd.iterate() - &closed).amax());
        ons_err = ons_err.max((ons.iterate() - &closed).amax().max((ons.iterate() - gd.iterate()).amax()));
    }
    Ok((
        gd_err <= limits::RLS_MATCH && ons_err <= limits::NEWTON_MATCH,
        format!("gd max error {gd_err:.2e}, full Newton max error {ons_err:.2e}"),
    ))
}

fn random_spd<R: Rng>(n: usize, ell: f64, u: f64, rng: &mut R) -> Matrix {
    let raw = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let q = raw.qr().q();
    let mut d: Vec<f64> = (0..n).map(|_| rng.random_range(ell..=u)).collect();
    d[0] = ell;
    d[n - 1] = u;
    &q * Matrix::from_diagonal(&Vector::from_vec(d)) * q.transpose()
}

fn contraction(scale: Scale) -> Result<(bool, String)> {
    let seeds = scale.pick(5, 2) as u64;
    let horizon = 1000;
    let n = 3;
    let (ell, u) = (0.5, 2.0);
    let mut quad_gap = 0.0f64;
    let mut general_gap = f64::NEG_INFINITY;
    for seed in 0..seeds {
        let mut rng = substream(seed, "selftest/contraction");
        let gamma = rng.random_range(0.8..0.99);
        let set = FeasibleSet::ball(1.0)?;

        let profile = unit_quadratic_profile()?;
        let mut gd = GdState::new(Vector::zeros(n), StepRule::DiscountedRls { gamma }, profile, set.clone())?;
        for t in 1..=horizon {
            let y = set.random_point(n, &mut rng);
            let before = (gd.iterate() - &y).norm();
            gd.observe(&LossRound::new(Quadratic::isotropic(y.clone())))?;
            let g_t = gamma.powi(t);
            let factor = (gamma - g_t) / (1.0 - g_t);
            quad_gap = quad_gap.max(((gd.iterate() - &y).norm() - factor * before).abs());
        }

        let profile = CurvatureProfile::new(2.0 * u, 2.0, 1.0)?.with_strong_convexity(ell)?.with_smoothness(u)?;
        let mut gd = GdState::new(Vector::zeros(n), StepRule::SmoothStronglyConvex { gamma }, profile, set.clone())?;
        let factor = (1.0 - ell * (1.0 - gamma) / (u * (1.0 - gamma) + ell * gamma)).sqrt();
        for _ in 0..horizon {
            let y = set.random_point(n, &mut rng);
            let a = random_spd(n, ell, u, &mut rng);
            let before = (gd.iterate() - &y).norm();
            gd.observe(&LossRound::new(Quadratic::new(a, y.clone())))?;
            general_gap = general_gap.max((gd.iterate() - &y).norm() - factor * before);
        }
    }
    Ok((
        quad_gap <= limits::CONTRACTION && general_gap <= limits::CONTRACTION,
        format!("{seeds} seeds x T={horizon}: equality gap {quad_gap:.2e}, inequality excess {general_gap:.2e}"),
    ))
}

/// Static regret of γ = 1 full Newton against the best fixed point of every prefix.
fn static_growth(_: Scale) -> Result<(bool, String)> {
    let (short, long) = (250, 2000);
    let seeds = 10u64;
    let set = FeasibleSet::ball(1.0)?;
    let (mut r_short, mut r_long) = (0.0, 0.0);
    for seed in 0..seeds {
        let stream = gen_quadratic_stream(long, 5, 1.0, 0.5, seed);
        let (rounds, ys): (Vec<LossRound>, Vec<Vector>) = stream.into_iter().unzip();
        let mut ons = NewtonState::new(Vector::zeros(5), 1.0, 1.0, 1.0, NewtonMode::Full, set.clone())?;
        let trace = run_learner(&mut ons, &rounds)?;
        for (prefix, acc) in [(short, &mut r_short), (long, &mut r_long)] {
            let mean = ys[..prefix].iter().fold(Vector::zeros(5), |a, y| a + y) / prefix as f64;
            let best = set.project(&mean);
            let incurred: f64 = trace[..prefix].iter().map(|r| r.loss).sum();
            let cmp: f64 = rounds[..prefix].iter().map(|r| r.value(&best)).sum();
            *acc += incurred - cmp;
        }
    }
    let ratio = r_long / r_short;
    Ok((
        r_short > 0.0 && ratio <= limits::STATIC_GROWTH_RATIO,
        format!("summed regret {r_short:.3} at T={short}, {r_long:.3} at T={long}, ratio {ratio:.3}"),
    ))
}

fn tracking(_: Scale) -> Result<(bool, String)> {
    let horizon = 600;
    let seeds = 10u64;
    let profile = unit_quadratic_profile()?;
    let set = FeasibleSet::ball(1.0)?;
    let (mut tuned, mut classic) = (0.0, 0.0);
    for seed in 0..seeds {
        let (rounds, centers): (Vec<LossRound>, Vec<Vector>) = gen_jump_stream(horizon, 2, 1.0, 3, seed)?.into_iter().unzip();
        let v = path_length(&centers)?;
        let gamma = gamma_for_path(horizon as f64, profile.diameter, v)?;
        for (rule, acc) in [(StepRule::StronglyConvex { gamma }, &mut tuned), (StepRule::Classic, &mut classic)] {
            let mut gd = GdState::new(set.center(2), rule, profile.clone(), set.clone())?;
            let trace = run_learner(&mut gd, &rounds)?;
            let regret: f64 = trace.iter().zip(&rounds).zip(&centers).map(|((t, r), c)| t.loss - r.value(c)).sum();
            *acc += regret / seeds as f64;
        }
    }
    let ratio = tuned / classic;
    Ok((
        ratio <= limits::TRACKING_RATIO,
        format!("mean dynamic regret {tuned:.3} (tuned) vs {classic:.3} (classic), ratio {ratio:.3}"),
    ))
}

fn geometry(scale: Scale) -> Result<(bool, String)> {
    let trials = scale.pick(1000, 200);
    let mut rng = substream(0, "selftest/geometry");
    let (mut recon, mut corners_ok, mut cap_err) = (0.0f64, true, 0.0f64);
    for _ in 0..trials {
        let n = rng.random_range(2..=12);
        let d = rng.random_range(1..n);
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let raw: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let capped = cap_probability(&raw, d)?;
        let w = capped.weights();
        let sum: f64 = w.iter().sum();
        let over = w.iter().fold(0.0f64, |m, v| m.max(v - 1.0 / d as f64));
        cap_err = cap_err.max((sum - 1.0).abs()).max(over);
        let dec = mixture_decompose(&capped)?;
        corners_ok &= dec.len() <= n;
        let mut back = vec![0.0; n];
        for (p, c) in &dec {
            for (b, v) in back.iter_mut().zip(c.to_weights()) {
                *b += p * v;
            }
        }
        recon = recon.max(back.iter().zip(w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }

    let p = Matrix::from_diagonal(&Vector::from_vec(vec![4.0, 1.0]));
    let hand = project_pnorm_ball(&p, &Vector::from_vec(vec![2.0, 0.0]), 1.0)?;
    let hand_err = (hand.point[0] - 1.0).abs().max(hand.point[1].abs()).max((hand.multiplier - 4.0).abs());

    let mut beaten = true;
    let ball = FeasibleSet::ball(1.0)?;
    for _ in 0..trials.min(200) {
        let a = random_spd(3, 0.1, 5.0, &mut rng);
        let y = Vector::from_fn(3, |_, _| rng.random_range(-3.0..3.0));
        let z = project_pnorm_ball(&a, &y, 1.0)?.point;
        let obj = |x: &Vector| (x - &y).dot(&(&a * (x - &y)));
        let best = obj(&z);
        for _ in 0..100 {
            beaten &= obj(&ball.random_point(3, &mut rng)) >= best - 1e-12;
        }
    }
    Ok((
        recon <= limits::DECOMPOSITION
            && corners_ok
            && cap_err <= limits::CAP_INVARIANT
            && hand_err <= limits::PNORM_HAND
            && beaten,
        format!(
            "{trials} decompositions: reconstruction {recon:.1e}, corner counts ok {corners_ok}; cap error {cap_err:.1e}; hand case error {hand_err:.1e}; P-norm optimal {beaten}"
        ),
    ))
}

fn adaptive_pca(scale: Scale) -> Result<(bool, String)> {
    let seeds = scale.pick(10, 5);
    let (horizon, n, k) = (600, 20, 2);
    let (mut beat_static, mut beat_ftl) = (0usize, 0usize);
    let (mut trace_err, mut eig_excess) = (0.0f64, f64::NEG_INFINITY);
    let cap = 1.0 / (n - k) as f64;
    for seed in 0..seeds as u64 {
        let xs = gen_subspace_stream(horizon, n, k, 3, seed)?;
        let mut rng = substream(seed, "pca/adaptive");
        let mut state = PcaState::new(n, k, PRACTICAL_ETA, PRACTICAL_ALPHA)?;
        let mut adaptive = 0.0;
        for x in &xs {
            adaptive += state.pca_round(x, &mut rng)?.expected_loss;
            let w = state.density().matrix();
            trace_err = trace_err.max((w.trace() - 1.0).abs());
            let (values, _) = sym_eigen(w);
            for v in values.iter() {
                eig_excess = eig_excess.max(v - cap).max(-v);
            }
        }
        let fixed: f64 = pca_losses("static", &xs, k, seed)?.iter().sum();
        let mut ftl = FollowTheLeaderPca::new(n, k)?;
        let leader: f64 = xs.iter().map(|x| ftl.round(x)).sum();
        beat_static += usize::from(adaptive < fixed);
        beat_ftl += usize::from(adaptive < leader);
        debug_assert!(best_compression_loss(&xs, k)? <= leader + 1e-9);
    }
    let need = (limits::PCA_WIN_FRACTION * seeds as f64).ceil() as usize;
    Ok((
        beat_static >= need
            && beat_ftl >= need
            && trace_err <= limits::DENSITY_TRACE
            && eig_excess <= limits::DENSITY_EIGEN,
        format!(
            "adaptive below static in {beat_static}/{seeds}, below FTL in {beat_ftl}/{seeds} (need {need}); trace error {trace_err:.1e}, eigenvalue excess {eig_excess:.1e}"
        ),
    ))
}

fn toy_profile() -> Result<CurvatureProfile> {
    CurvatureProfile::new(2f64.sqrt(), 2.0, 1.0)?.with_constraint_count(1)
}

fn toy_run(algorithm: &str, horizon: usize, seed: u64) -> Result<Vec<f64>> {
    let rounds = gen_toy_stream(horizon, seed);
    let mut learner = constrained_learner(
        algorithm,
        &toy_profile()?,
        horizon,
        crate::constrained::DEFAULT_KAPPA,
        crate::constrained::DEFAULT_BETA,
        FeasibleSet::ball(1.0)?,
        2,
        Aggregate::Max,
    )?;
    let trace = run_learner(&mut learner, &rounds)?;
    Ok(trace.iter().map(|r| r.violations[0]).collect())
}

fn toy_clipped(_: Scale) -> Result<(bool, String)> {
    let horizon = 8000;
    let clipped = toy_run("clipped", horizon, 0)?;
    let baseline = toy_run("mahdavi", horizon, 0)?;
    let late_max = |g: &[f64]| g[1000..].iter().fold(0.0f64, |m, v| m.max(*v));
    let (ours, theirs) = (late_max(&clipped), late_max(&baseline));
    let a = ours < limits::TOY_STEP_VIOLATION && ours < limits::TOY_BASELINE_FRACTION * theirs;

    let sizes = [1000.0, 4000.0, 16000.0];
    let mut squares = Vec::new();
    for &t in &sizes {
        let g = toy_run("clipped", t as usize, 0)?;
        squares.push(g.iter().map(|v| v.max(0.0).powi(2)).sum::<f64>());
    }
    let slope = loglog_slope(&sizes, &squares);
    let b = slope <= limits::TOY_SQUARE_SLOPE;

    let signed: f64 = baseline.iter().sum();
    let clip: f64 = baseline.iter().map(|v| v.max(0.0)).sum();
    let c = signed.abs() < limits::TOY_CANCELLATION * clip;
    Ok((
        a && b && c,
        format!(
            "(a) late max step {ours:.4} vs baseline {theirs:.4} [{}]; (b) squared slope {slope:.3} [{}]; (c) baseline |sum g| {:.3} vs sum [g]+ {clip:.3} [{}]",
            verdict(a),
            verdict(b),
            signed.abs(),
            verdict(c)
        ),
    ))
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "fail"
    }
}

fn dsm_strong(_: Scale) -> Result<(bool, String)> {
    let (dim, horizon, seed) = (5, 4000, 0);
    let rounds = gen_permutation_stream(horizon, dim, seed)?;
    let n = dim * dim;
    let r = (dim as f64).sqrt();
    let profile = dsm_profile(dim)?;
    let mean = rounds.iter().fold(Vector::zeros(n), |a, l| a - l.gradient(&Vector::zeros(n))) / horizon as f64;
    let cmp: f64 = rounds.iter().map(|l| l.value(&mean)).sum();
    let mut regret = Vec::new();
    let mut strong_clip = Vec::new();
    for algorithm in ["clipped", "strong"] {
        let mut learner = constrained_learner(
            algorithm,
            &profile,
            horizon,
            crate::constrained::DEFAULT_KAPPA,
            crate::constrained::DEFAULT_BETA,
            FeasibleSet::ball(r)?,
            n,
            Aggregate::Separate,
        )?;
        let trace = run_learner(&mut learner, &rounds)?;
        regret.push(trace.iter().map(|t| t.loss).sum::<f64>() - cmp);
        if algorithm == "strong" {
            let aggregated: Vec<f64> = trace
                .iter()
                .map(|t| t.violations.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v)).max(0.0))
                .collect();
            debug_assert!(violation_metrics(&trace).is_ok());
            strong_clip = aggregated;
        }
    }
    let prefixes = [500.0, 1000.0, 2000.0, 4000.0];
    let sums: Vec<f64> = prefixes.iter().map(|&p| strong_clip[..p as usize].iter().sum()).collect();
    let slope = loglog_slope(&prefixes, &sums);
    Ok((
        regret[1] <= regret[0] && slope <= limits::DSM_SLOPE,
        format!(
            "static regret strong {:.2} vs clipped {:.2}; strong sum of max [g]+ {:.3} at T={horizon}, prefix slope {slope:.3}",
            regret[1], regret[0], sums[3]
        ),
    ))
}

fn dispatch(_: Scale) -> Result<(bool, String)> {
    let horizon = 2880;
    let model = DispatchModel::default();
    let demand = synthetic_demand(horizon, 0);
    let rounds = gen_dispatch_stream(&model, &demand)?;
    let set = FeasibleSet::boxed(Vector::zeros(model.dim()), model.upper())?;
    let r = model.upper().norm();
    let profile = CurvatureProfile::new(model.grad_bound(DEMAND_HIGH), r, r)?
        .with_strong_convexity(model.strong_convexity())?
        .with_constraint_count(1)?;
    let mut learner = constrained_learner(
        "clipped",
        &profile,
        horizon,
        crate::constrained::DEFAULT_KAPPA,
        crate::constrained::DEFAULT_BETA,
        set.clone(),
        model.dim(),
        Aggregate::Max,
    )?;
    let trace = run_learner(&mut learner, &rounds)?;
    let late = trace[limits::DISPATCH_WARMUP..]
        .iter()
        .fold(0.0f64, |m, t| m.max(t.violations[0]));
    let average = trace.iter().map(|t| t.loss).sum::<f64>() / horizon as f64;
    let best = offline_oracle_constrained(&rounds, &set, model.dim(), &rounds[0].constraints, 1e-9)?;
    let gap = (average - best.average_loss).abs() / best.average_loss;
    Ok((
        late <= limits::DISPATCH_STEP_VIOLATION && gap <= limits::DISPATCH_GAP,
        format!(
            "max [g]+ after t={} is {late:.3}; running average {average:.3} vs oracle {:.3} (gap {:.2}%)",
            limits::DISPATCH_WARMUP,
            best.average_loss,
            100.0 * gap
        ),
    ))
}

fn exp_concavity(scale: Scale) -> Result<(bool, String)> {
    let functions = scale.pick(100, 50);
    let segments = 100;
    let n = 3;
    let mut rng = substream(0, "selftest/exp-concavity");
    let ball = FeasibleSet::ball(1.0)?;
    let mut worst = f64::INFINITY;
    for _ in 0..functions {
        let (ell, u) = (rng.random_range(0.1..1.0), rng.random_range(1.0..4.0));
        let a = random_spd(n, ell, u, &mut rng);
        let c = ball.random_point(n, &mut rng);
        let q = Quadratic::new(a, c.clone());
        // ‖A(x − c)‖ ≤ u‖x − c‖ ≤ 2u on the unit ball
        let g = 2.0 * u;
        let alpha = ell / (g * g);
        let h = |x: &Vector| (-alpha * q.value(x)).exp();
        for _ in 0..segments {
            let x = ball.random_point(n, &mut rng);
            let y = ball.random_point(n, &mut rng);
            let mid = (&x + &y) * 0.5;
            worst = worst.min(h(&mid) - 0.5 * (h(&x) + h(&y)));
        }
    }
    Ok((
        worst >= limits::MIDPOINT_CONCAVITY,
        format!("{functions} quadratics x {segments} segments: smallest midpoint gap {worst:.2e}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_a_power_law() {
        let xs = [1.0, 10.0, 100.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(0.5)).collect();
        assert!((loglog_slope(&xs, &ys) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn unknown_check_ids_are_none() {
        assert!(run_check(0, Scale::Reduced).is_none());
        assert!(run_check(12, Scale::Reduced).is_none());
    }

    #[test]
    fn quick_checks_pass() {
        for id in [2, 6, 11] {
            let c = run_check(id, Scale::Reduced).unwrap();
            assert!(c.passed, "{c}");
        }
    }
}
