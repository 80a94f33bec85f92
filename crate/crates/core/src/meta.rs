//! Exponentially weighted experts over a grid of discount factors.

use crate::error::{OcoError, Result};
use crate::oracle::LossRound;
use crate::profile::CurvatureProfile;
use crate::{OnlineLearner, Vector};

/// Slack added to the expert-tracking bound to absorb rounding.
pub const TRACKING_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscountGrid {
    gammas: Vec<f64>,
    priors: Vec<f64>,
    include_one: bool,
    warnings: Vec<String>,
}

impl DiscountGrid {
    /// `η_i = ½·(ln T/(T√(2D)))·2^{i−1}` for `i = 1..N`,
    /// `N = ⌈½log₂(2DT²/ln²T)⌉ + 1`, and `γ_i = 1 − η_i`.
    ///
    /// Entries with `η_i ≥ 1` are dropped and reported in [`warnings`](Self::warnings).
    /// Priors follow `C/(i(i+1))` over the sorted grid and are renormalised to sum to one.
    pub fn build(horizon: usize, diameter: f64, include_one: bool) -> Result<Self> {
        if horizon < 2 {
            return Err(OcoError::invalid("horizon", format!("need T >= 2, got {horizon}")));
        }
        if !(diameter > 0.0 && diameter.is_finite()) {
            return Err(OcoError::invalid("diameter", format!("must be positive, got {diameter}")));
        }
        let mut warnings = Vec::new();
        let mut gammas = Vec::new();
        if include_one {
            gammas.push(1.0);
        }
        for (i, eta) in grid_etas(horizon, diameter).into_iter().enumerate() {
            if eta >= 1.0 {
                let msg = format!("dropped grid entry {} with eta {eta} >= 1", i + 1);
                log::warn!("{msg}");
                warnings.push(msg);
            } else {
                gammas.push(1.0 - eta);
            }
        }
        let c = 1.0 + 1.0 / gammas.len() as f64;
        let raw: Vec<f64> = (1..=gammas.len()).map(|i| c / (i * (i + 1)) as f64).collect();
        let total: f64 = raw.iter().sum();
        let priors = raw.into_iter().map(|w| w / total).collect();
        Ok(DiscountGrid {
            gammas,
            priors,
            include_one,
            warnings,
        })
    }

    /// Descending.
    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn include_one(&self) -> bool {
        self.include_one
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }
}

/// Raw `η_1..η_N` before any are dropped.
pub fn grid_etas(horizon: usize, diameter: f64) -> Vec<f64> {
    let t = horizon as f64;
    let ln_t = t.ln();
    let count = (0.5 * (2.0 * diameter * t * t / (ln_t * ln_t)).log2()).ceil().max(0.0) as usize + 1;
    let base = 0.5 * ln_t / (t * (2.0 * diameter).sqrt());
    (0..count).map(|i| base * 2f64.powi(i as i32)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossFamily {
    ExpConcave,
    StronglyConvex,
}

/// Learning rate of the weights: `α`, or `ℓ/G²` for strongly convex losses.
pub fn lambda_for(profile: &CurvatureProfile, family: LossFamily) -> Result<f64> {
    match family {
        LossFamily::ExpConcave => profile.alpha(),
        LossFamily::StronglyConvex => {
            let g = profile.grad_bound;
            Ok(profile.ell()? / (g * g))
        }
    }
}

#[derive(Debug, Clone)]
pub struct MetaState<L> {
    experts: Vec<L>,
    log_weights: Vec<f64>,
    weights: Vec<f64>,
    log_priors: Vec<f64>,
    lambda: f64,
    round: usize,
    played: Vector,
    meta_loss: f64,
    expert_loss: Vec<f64>,
}

impl<L: OnlineLearner> MetaState<L> {
    pub fn new(experts: Vec<L>, priors: &[f64], lambda: f64) -> Result<Self> {
        if experts.is_empty() {
            return Err(OcoError::Empty("experts"));
        }
        if experts.len() != priors.len() {
            return Err(OcoError::LengthMismatch {
                what: "experts and priors",
                left: experts.len(),
                right: priors.len(),
            });
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(OcoError::invalid("lambda", format!("must be positive, got {lambda}")));
        }
        if priors.iter().any(|&w| !(w > 0.0)) {
            return Err(OcoError::invalid("priors", "must be positive"));
        }
        let dim = experts[0].iterate().len();
        if let Some(e) = experts.iter().find(|e| e.iterate().len() != dim) {
            return Err(OcoError::DimensionMismatch {
                expected: dim,
                got: e.iterate().len(),
            });
        }
        let log_priors: Vec<f64> = priors.iter().map(|w| w.ln()).collect();
        let (log_weights, weights) = normalize_log(&log_priors);
        let n = experts.len();
        let mut state = MetaState {
            experts,
            log_weights,
            weights,
            log_priors,
            lambda,
            round: 1,
            played: Vector::zeros(dim),
            meta_loss: 0.0,
            expert_loss: vec![0.0; n],
        };
        state.played = state.mix();
        Ok(state)
    }

    /// One expert per grid entry, built by `make(γ)`.
    pub fn from_grid<F>(grid: &DiscountGrid, lambda: f64, mut make: F) -> Result<Self>
    where
        F: FnMut(f64) -> Result<L>,
    {
        let experts = grid.gammas().iter().map(|&g| make(g)).collect::<Result<Vec<_>>>()?;
        Self::new(experts, grid.priors(), lambda)
    }

    fn mix(&self) -> Vector {
        let mut out = Vector::zeros(self.played.len());
        for (w, e) in self.weights.iter().zip(&self.experts) {
            out.axpy(*w, e.iterate(), 1.0);
        }
        out
    }

    pub fn experts(&self) -> &[L] {
        &self.experts
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn played(&self) -> &Vector {
        &self.played
    }

    /// Cumulative losses of the played points and of each expert so far.
    pub fn cumulative_losses(&self) -> (f64, &[f64]) {
        (self.meta_loss, &self.expert_loss)
    }

    /// Play the weighted average, charge every expert its own loss, advance
    /// every expert on its own gradient and reweight. Returns the played point.
    pub fn meta_round(&mut self, round: &LossRound) -> Result<Vector> {
        let played = self.played.clone();
        let meta_loss = round.value(&played);
        if !meta_loss.is_finite() {
            return Err(OcoError::NonFinite("meta loss"));
        }
        let mut losses = Vec::with_capacity(self.experts.len());
        for expert in self.experts.iter_mut() {
            let loss = round.value(expert.iterate());
            if !loss.is_finite() {
                return Err(OcoError::NonFinite("expert loss"));
            }
            expert.observe(round)?;
            losses.push(loss);
        }
        for (lw, loss) in self.log_weights.iter_mut().zip(&losses) {
            *lw -= self.lambda * loss;
        }
        let (log_weights, weights) = normalize_log(&self.log_weights);
        self.log_weights = log_weights;
        self.weights = weights;
        self.meta_loss += meta_loss;
        for (acc, loss) in self.expert_loss.iter_mut().zip(&losses) {
            *acc += loss;
        }
        self.round += 1;
        self.played = self.mix();
        Ok(played)
    }

    /// Smallest margin in `Σf(θ_t) − Σf(θ^γ_t) ≤ ln(1/w₁^γ)/λ + tol` over the
    /// experts. Negative means the bound is violated.
    pub fn tracking_margin(&self) -> f64 {
        self.expert_loss
            .iter()
            .zip(&self.log_priors)
            .map(|(loss, lp)| -lp / self.lambda + TRACKING_TOLERANCE - (self.meta_loss - loss))
            .fold(f64::INFINITY, f64::min)
    }
}

impl<L: OnlineLearner> OnlineLearner for MetaState<L> {
    fn iterate(&self) -> &Vector {
        &self.played
    }

    fn observe(&mut self, round: &LossRound) -> Result<f64> {
        self.meta_round(round)?;
        Ok(self.lambda)
    }
}

fn normalize_log(log_weights: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let shifted: Vec<f64> = log_weights.iter().map(|v| v - max).collect();
    let total: f64 = shifted.iter().map(|v| v.exp()).sum();
    let ln_total = total.ln();
    let logs: Vec<f64> = shifted.iter().map(|v| v - ln_total).collect();
    let weights = shifted.iter().map(|v| v.exp() / total).collect();
    (logs, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gd::{GdState, StepRule};
    use crate::geometry::{project_ball, FeasibleSet};
    use crate::ons::{eta_for_case, CurvatureCase, NewtonMode, NewtonState};
    use crate::oracle::{FnObjective, Linear, Quadratic};
    use nalgebra::dvector;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Learner that never moves.
    struct Fixed(Vector);

    impl OnlineLearner for Fixed {
        fn iterate(&self) -> &Vector {
            &self.0
        }
        fn observe(&mut self, _: &LossRound) -> Result<f64> {
            Ok(0.0)
        }
    }

    #[test]
    fn grid_for_t100() {
        let etas = grid_etas(100, 1.0);
        assert_eq!(etas.len(), 6);
        let expected = 0.5 * 100f64.ln() / (100.0 * 2f64.sqrt());
        assert!((etas[0] - expected).abs() < 1e-15);
        assert!((etas[0] - 0.016283).abs() < 2e-6);
        let grid = DiscountGrid::build(100, 1.0, true).unwrap();
        assert_eq!(grid.len(), 7);
        assert_eq!(grid.gammas()[0], 1.0);
        assert!((grid.gammas()[1] - (1.0 - etas[0])).abs() < 1e-15);
    }

    #[test]
    fn grid_priors_are_normalised_and_ordered() {
        let grid = DiscountGrid::build(1000, 2.0, true).unwrap();
        let total: f64 = grid.priors().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(grid.gammas().windows(2).all(|w| w[0] > w[1]));
        assert!(grid.priors().windows(2).all(|w| w[0] > w[1]));
        assert!((grid.priors()[0] / grid.priors()[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn grid_covering_sweep() {
        for t in [2usize, 3, 5, 10, 50, 100, 1000, 10_000, 100_000] {
            for d in [1.0, 1.5, 2.0, 10.0, 100.0] {
                let grid = DiscountGrid::build(t, d, false).unwrap();
                assert!(grid.gammas().iter().all(|&g| g > 0.0 && g < 1.0));
                let top = grid_etas(t, d).last().copied().unwrap();
                assert!(top >= 0.5, "T={t} D={d} top eta {top}");
                let kept = 1.0 - grid.gammas().last().unwrap();
                assert!(kept >= 0.5, "T={t} D={d} kept eta {kept}");
            }
        }
    }

    #[test]
    fn grid_drops_large_etas() {
        let grid = DiscountGrid::build(2, 0.01, false).unwrap();
        let raw = grid_etas(2, 0.01);
        let dropped = raw.iter().filter(|&&e| e >= 1.0).count();
        assert!(dropped > 0);
        assert_eq!(grid.warnings().len(), dropped);
        assert_eq!(grid.len(), raw.len() - dropped);
        assert!(DiscountGrid::build(1, 1.0, true).is_err());
        assert!(DiscountGrid::build(10, 0.0, true).is_err());
    }

    #[test]
    fn lambda_examples() {
        let p = CurvatureProfile::new(1.0, 1.0, 1.0).and_then(|p| p.with_exp_concavity(0.25)).unwrap();
        assert_eq!(lambda_for(&p, LossFamily::ExpConcave).unwrap(), 0.25);
        let q = CurvatureProfile::new(4.0, 1.0, 1.0).and_then(|p| p.with_strong_convexity(2.0)).unwrap();
        assert_eq!(lambda_for(&q, LossFamily::StronglyConvex).unwrap(), 0.125);
        assert!(lambda_for(&q, LossFamily::ExpConcave).is_err());
        assert!(lambda_for(&p, LossFamily::StronglyConvex).is_err());
    }

    #[test]
    fn single_expert_plays_its_iterate() {
        let mut m = MetaState::new(vec![Fixed(dvector![0.3, -0.2])], &[1.0], 1.0).unwrap();
        let round = LossRound::new(Linear { coefficients: dvector![1.0, 1.0] });
        let p = m.meta_round(&round).unwrap();
        assert_eq!(p, dvector![0.3, -0.2]);
        assert_eq!(m.weights(), &[1.0]);
    }

    #[test]
    fn equal_losses_keep_equal_weights() {
        let experts = vec![Fixed(dvector![1.0]), Fixed(dvector![-1.0])];
        let mut m = MetaState::new(experts, &[0.5, 0.5], 1.0).unwrap();
        let round = LossRound::new(Quadratic::isotropic(dvector![0.0]));
        m.meta_round(&round).unwrap();
        assert!((m.weights()[0] - 0.5).abs() < 1e-15);
        assert_eq!(m.played(), &dvector![0.0]);
    }

    #[test]
    fn losses_zero_one_with_ln2() {
        let experts = vec![Fixed(dvector![0.0]), Fixed(dvector![1.0])];
        let mut m = MetaState::new(experts, &[0.5, 0.5], 2f64.ln()).unwrap();
        m.meta_round(&LossRound::new(Linear { coefficients: dvector![1.0] })).unwrap();
        assert!((m.weights()[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.weights()[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn huge_losses_do_not_underflow() {
        let experts = vec![Fixed(dvector![0.0]), Fixed(dvector![1.0])];
        let mut m = MetaState::new(experts, &[0.5, 0.5], 1.0).unwrap();
        let round = LossRound::new(Linear { coefficients: dvector![1e6] });
        m.meta_round(&round).unwrap();
        m.meta_round(&round).unwrap();
        assert_eq!(m.weights()[0], 1.0);
        assert!(m.weights().iter().all(|w| w.is_finite()));
    }

    #[test]
    fn non_finite_loss_is_an_error() {
        let mut m = MetaState::new(vec![Fixed(dvector![0.0])], &[1.0], 1.0).unwrap();
        let bad = LossRound::new(FnObjective::new(|_| f64::NAN, |x| x.clone()));
        assert!(m.meta_round(&bad).is_err());
    }

    #[test]
    fn single_expert_grid_is_bit_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let set = FeasibleSet::ball(1.0).unwrap();
        let profile = CurvatureProfile::new(2.0, 2.0, 1.0).and_then(|p| p.with_strong_convexity(1.0)).unwrap();
        let make = || GdState::new(Vector::zeros(2), StepRule::StronglyConvex { gamma: 0.9 }, profile.clone(), set.clone()).unwrap();
        let mut alone = make();
        let mut meta = MetaState::new(vec![make()], &[1.0], 0.25).unwrap();
        for _ in 0..200 {
            let y = project_ball(&dvector![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)], 1.0);
            let round = LossRound::new(Quadratic::isotropic(y));
            let p = meta.meta_round(&round).unwrap();
            assert_eq!(&p, alone.iterate());
            alone.observe(&round).unwrap();
        }
    }

    #[test]
    fn tracking_bound_with_newton_experts() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (n, horizon) = (2, 400);
        let set = FeasibleSet::ball(1.0).unwrap();
        let profile = CurvatureProfile::new(2.0, 2.0, 1.0).and_then(|p| p.with_exp_concavity(0.25)).unwrap();
        let grid = DiscountGrid::build(horizon, profile.diameter, true).unwrap();
        let eta = eta_for_case(&profile, CurvatureCase::ExpConcave).unwrap();
        let lambda = lambda_for(&profile, LossFamily::ExpConcave).unwrap();
        let mut meta = MetaState::from_grid(&grid, lambda, |g| {
            NewtonState::new(Vector::zeros(n), g, eta, 1.0, NewtonMode::Quasi, set.clone())
        })
        .unwrap();
        let mut center = dvector![0.5, 0.0];
        for t in 0..horizon {
            if t % 100 == 0 {
                center = -center;
            }
            let y = project_ball(&(&center + dvector![rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3)]), 1.0);
            meta.meta_round(&LossRound::new(Quadratic::isotropic(y))).unwrap();
            assert!(meta.tracking_margin() >= 0.0);
            let total: f64 = meta.weights().iter().sum();
            assert!((total - 1.0).abs() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn weights_stay_a_distribution(losses in prop::collection::vec(prop::collection::vec(0.0..50.0f64, 3), 1..40), lambda in 0.01..5.0f64) {
            let experts = vec![Fixed(dvector![0.0]), Fixed(dvector![1.0]), Fixed(dvector![2.0])];
            let mut m = MetaState::new(experts, &[0.2, 0.3, 0.5], lambda).unwrap();
            for l in losses {
                let obj = FnObjective::new(move |x: &Vector| l[x[0].round() as usize % 3], |x: &Vector| x * 0.0);
                m.meta_round(&LossRound::new(obj)).unwrap();
                let total: f64 = m.weights().iter().sum();
                prop_assert!((total - 1.0).abs() < 1e-10);
                prop_assert!(m.weights().iter().all(|&w| (0.0..=1.0).contains(&w)));
            }
        }
    }
}
