//! Projected online gradient descent with forgetting-factor step sizes.
//!
//! Every discounted rule uses a step that starts large and decays towards a
//! floor set by the discount `γ`, so the learner keeps tracking a drifting
//! minimiser instead of freezing like the classic `1/(ℓt)` schedule.

use crate::error::{OcoError, Result};
use crate::geometry::FeasibleSet;
use crate::linalg::all_finite;
use crate::oracle::LossRound;
use crate::profile::CurvatureProfile;
use crate::{OnlineLearner, Vector};

/// Step-size schedule. Discounted rules carry their discount factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    /// `η_t = (1−γ)/(1−γ^t)`: discounted recursive least squares on `½‖θ−y‖²`.
    DiscountedRls { gamma: f64 },
    /// `η_t = (1−γ)/(ℓ(γ−γ^t) + u(1−γ))` for ℓ-strongly convex, u-smooth losses.
    SmoothStronglyConvex { gamma: f64 },
    /// `η_t = (1−γ)/(ℓ(1−γ^t))` for ℓ-strongly convex losses.
    StronglyConvex { gamma: f64 },
    /// `η_t = 1/(ℓt)`.
    Classic,
}

impl StepRule {
    pub fn gamma(&self) -> Option<f64> {
        match *self {
            StepRule::DiscountedRls { gamma }
            | StepRule::SmoothStronglyConvex { gamma }
            | StepRule::StronglyConvex { gamma } => Some(gamma),
            StepRule::Classic => None,
        }
    }

    fn validate(&self, profile: &CurvatureProfile) -> Result<()> {
        if let Some(g) = self.gamma() {
            if !(g > 0.0 && g < 1.0) {
                return Err(OcoError::invalid("gamma", format!("must lie in (0,1), got {g}")));
            }
        }
        match self {
            StepRule::DiscountedRls { .. } => Ok(()),
            StepRule::SmoothStronglyConvex { .. } => profile.ell().and(profile.u()).map(|_| ()),
            StepRule::StronglyConvex { .. } | StepRule::Classic => profile.ell().map(|_| ()),
        }
    }
}

/// The rule's step size at round `t ≥ 1`.
pub fn step_size(rule: StepRule, t: usize, profile: &CurvatureProfile) -> Result<f64> {
    rule.validate(profile)?;
    if t == 0 {
        return Err(OcoError::invalid("t", "rounds are numbered from 1"));
    }
    let t_pow = |g: f64| g.powi(t as i32);
    Ok(match rule {
        StepRule::DiscountedRls { gamma } => (1.0 - gamma) / (1.0 - t_pow(gamma)),
        StepRule::SmoothStronglyConvex { gamma } => {
            let (ell, u) = (profile.ell()?, profile.u()?);
            (1.0 - gamma) / (ell * (gamma - t_pow(gamma)) + u * (1.0 - gamma))
        }
        StepRule::StronglyConvex { gamma } => {
            (1.0 - gamma) / (profile.ell()? * (1.0 - t_pow(gamma)))
        }
        StepRule::Classic => 1.0 / (profile.ell()? * t as f64),
    })
}

/// `γ = 1 − T^{−β}`, trading static regret `O(T^{1−β})` against tracking.
pub fn gamma_for_beta(horizon: usize, beta: f64) -> Result<f64> {
    if horizon < 2 {
        return Err(OcoError::invalid("horizon", format!("need T >= 2, got {horizon}")));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(OcoError::invalid("beta", format!("must lie in (0,1), got {beta}")));
    }
    Ok(1.0 - (horizon as f64).powf(-beta))
}

/// `γ = 1 − ½·√(max{V, ln²T/T} / (2DT))` for a known path-length budget `V`.
pub fn gamma_for_path(horizon: f64, diameter: f64, path_budget: f64) -> Result<f64> {
    if !(horizon >= 2.0) {
        return Err(OcoError::invalid("horizon", format!("need T >= 2, got {horizon}")));
    }
    if !(diameter > 0.0) {
        return Err(OcoError::invalid("diameter", format!("must be positive, got {diameter}")));
    }
    if !(path_budget >= 0.0) {
        return Err(OcoError::invalid("path_budget", format!("must be >= 0, got {path_budget}")));
    }
    let floor = horizon.ln().powi(2) / horizon;
    let gamma = 1.0 - 0.5 * (path_budget.max(floor) / (2.0 * diameter * horizon)).sqrt();
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(OcoError::invalid(
            "path_budget",
            format!("V = {path_budget} gives γ = {gamma} outside (0,1)"),
        ));
    }
    Ok(gamma)
}

/// State of one gradient-descent learner.
#[derive(Debug, Clone, PartialEq)]
pub struct GdState {
    iterate: Vector,
    round: usize,
    rule: StepRule,
    profile: CurvatureProfile,
    set: FeasibleSet,
}

impl GdState {
    pub fn new(
        start: Vector,
        rule: StepRule,
        profile: CurvatureProfile,
        set: FeasibleSet,
    ) -> Result<Self> {
        rule.validate(&profile)?;
        let iterate = set.project(&start);
        Ok(GdState {
            iterate,
            round: 1,
            rule,
            profile,
            set,
        })
    }

    pub fn iterate(&self) -> &Vector {
        &self.iterate
    }

    /// Index of the round about to be played (starts at 1).
    pub fn round(&self) -> usize {
        self.round
    }

    pub fn rule(&self) -> StepRule {
        self.rule
    }

    pub fn step_size(&self) -> f64 {
        step_size(self.rule, self.round, &self.profile).expect("rule validated at construction")
    }

    /// `θ_{t+1} = Π_S(θ_t − η_t ∇)`; returns the step size used.
    pub fn gd_round(&mut self, gradient: &Vector) -> Result<f64> {
        if gradient.len() != self.iterate.len() {
            return Err(OcoError::DimensionMismatch {
                expected: self.iterate.len(),
                got: gradient.len(),
            });
        }
        if !all_finite(gradient) {
            return Err(OcoError::NonFinite("gradient"));
        }
        let eta = self.step_size();
        self.iterate = self.set.project(&(&self.iterate - gradient * eta));
        self.round += 1;
        Ok(eta)
    }
}

impl OnlineLearner for GdState {
    fn iterate(&self) -> &Vector {
        &self.iterate
    }

    fn observe(&mut self, round: &LossRound) -> Result<f64> {
        let g = round.gradient(&self.iterate);
        self.gd_round(&g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::Quadratic;
    use crate::run_learner;
    use nalgebra::dvector;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn profile(ell: f64, u: f64) -> CurvatureProfile {
        CurvatureProfile::new(1.0, 1.0, 1.0)
            .and_then(|p| p.with_smoothness(u))
            .and_then(|p| p.with_strong_convexity(ell))
            .unwrap()
    }

    #[test]
    fn step_size_examples() {
        let p = profile(2.0, 4.0);
        for g in [0.1, 0.5, 0.99] {
            let eta = step_size(StepRule::DiscountedRls { gamma: g }, 1, &p).unwrap();
            assert!((eta - 1.0).abs() < 1e-15);
        }
        let eta = step_size(StepRule::DiscountedRls { gamma: 0.5 }, 2, &p).unwrap();
        assert!((eta - 2.0 / 3.0).abs() < 1e-15);
        let eta = step_size(StepRule::StronglyConvex { gamma: 0.5 }, 2, &p).unwrap();
        assert!((eta - 1.0 / 3.0).abs() < 1e-15);
        let eta = step_size(StepRule::SmoothStronglyConvex { gamma: 0.5 }, 1, &p).unwrap();
        assert!((eta - 0.25).abs() < 1e-15);
        assert!((step_size(StepRule::Classic, 4, &p).unwrap() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn missing_constants_and_bad_gamma() {
        let bare = CurvatureProfile::new(1.0, 1.0, 1.0).unwrap();
        assert!(step_size(StepRule::StronglyConvex { gamma: 0.5 }, 1, &bare).is_err());
        let only_ell = bare.clone().with_strong_convexity(1.0).unwrap();
        assert!(step_size(StepRule::SmoothStronglyConvex { gamma: 0.5 }, 1, &only_ell).is_err());
        assert!(step_size(StepRule::DiscountedRls { gamma: 1.0 }, 1, &bare).is_err());
    }

    #[test]
    fn gamma_for_beta_examples() {
        assert!((gamma_for_beta(100, 0.5).unwrap() - 0.9).abs() < 1e-15);
        assert!(gamma_for_beta(10_000, 1.0).is_err());
        assert!((gamma_for_beta(16, 0.25).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gamma_for_path_examples() {
        let e2 = std::f64::consts::E.powi(2);
        let g = gamma_for_path(e2, 0.5, 0.0).unwrap();
        assert!((g - (1.0 - 1.0 / e2)).abs() < 1e-12);
        let (t, d) = (100.0, 1.5);
        assert!((gamma_for_path(t, d, 2.0 * d * t).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gamma_for_path_stays_in_upper_half() {
        for t in [2.0, 3.0, 10.0, 1e3, 1e6] {
            for d in [0.5, 1.0, 7.0] {
                for frac in [0.0, 0.1, 0.5, 1.0] {
                    let v = frac * 2.0 * d * t;
                    let g = gamma_for_path(t, d, v).unwrap();
                    assert!((0.5..1.0).contains(&g), "T={t} D={d} V={v} γ={g}");
                }
            }
        }
    }

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let set = FeasibleSet::ball(1.0).unwrap();
        let mut s = GdState::new(dvector![0.3, 0.1], StepRule::Classic, profile(1.0, 1.0), set).unwrap();
        s.gd_round(&dvector![0.0, 0.0]).unwrap();
        assert_eq!(s.iterate(), &dvector![0.3, 0.1]);
        assert_eq!(s.round(), 2);
        assert!(s.gd_round(&dvector![f64::NAN, 0.0]).is_err());
        assert!(s.gd_round(&dvector![0.0]).is_err());
    }

    #[test]
    fn leaving_the_ball_lands_on_the_boundary() {
        let set = FeasibleSet::ball(1.0).unwrap();
        let mut s = GdState::new(
            dvector![0.9, 0.0],
            StepRule::DiscountedRls { gamma: 0.5 },
            profile(1.0, 1.0),
            set,
        )
        .unwrap();
        s.gd_round(&dvector![-5.0, -5.0]).unwrap();
        assert!((s.iterate().norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn discounted_rls_matches_weighted_mean_over_50_rounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let gamma = 0.8;
        let ys: Vec<Vector> = (0..50)
            .map(|_| Vector::from_fn(3, |_, _| rng.random_range(-0.5..0.5)))
            .collect();
        let set = FeasibleSet::ball(1.0).unwrap();
        let mut s = GdState::new(Vector::zeros(3), StepRule::DiscountedRls { gamma }, profile(1.0, 1.0), set).unwrap();
        for (k, y) in ys.iter().enumerate() {
            let t = k + 1;
            s.gd_round(&(s.iterate() - y)).unwrap();
            // argmin of Σ_{i≤t} γ^{t−i} ½‖θ − y_i‖² is the discounted mean
            let mut num = Vector::zeros(3);
            let mut den = 0.0;
            for (i, yi) in ys[..t].iter().enumerate() {
                let w = gamma.powi((t - 1 - i) as i32);
                num += yi * w;
                den += w;
            }
            assert!((s.iterate() - num / den).amax() < 1e-10);
        }
    }

    #[test]
    fn quadratic_contraction_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let gamma = 0.9;
        let set = FeasibleSet::ball(1.0).unwrap();
        let mut s = GdState::new(dvector![0.5, -0.5], StepRule::DiscountedRls { gamma }, profile(1.0, 1.0), set).unwrap();
        for t in 1..=200 {
            let y = crate::geometry::project_ball(&Vector::from_fn(2, |_, _| rng.random_range(-1.0..1.0)), 1.0);
            let before = (s.iterate() - &y).norm();
            s.gd_round(&(s.iterate() - &y)).unwrap();
            let ratio = (gamma - gamma.powi(t)) / (1.0 - gamma.powi(t));
            assert!(((s.iterate() - &y).norm() - ratio * before).abs() < 1e-9);
        }
    }

    #[test]
    fn run_learner_records_each_round() {
        let set = FeasibleSet::ball(2.0).unwrap();
        let mut s = GdState::new(dvector![0.0], StepRule::Classic, profile(1.0, 1.0), set).unwrap();
        let rounds: Vec<_> = (0..5).map(|_| LossRound::new(Quadratic::isotropic(dvector![1.0]))).collect();
        let trace = run_learner(&mut s, &rounds).unwrap();
        assert_eq!(trace.len(), 5);
        assert_eq!(trace[0].loss, 0.5);
        assert_eq!(trace[4].round_index, 5);
        // classic rule on a fixed quadratic reaches the minimiser after one step
        assert!((s.iterate()[0] - 1.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn step_sizes_never_increase(gamma in 0.01f64..0.99, ell in 0.1f64..2.0, extra in 0.0f64..3.0) {
            let p = profile(ell, ell + extra);
            for rule in [
                StepRule::DiscountedRls { gamma },
                StepRule::SmoothStronglyConvex { gamma },
                StepRule::StronglyConvex { gamma },
                StepRule::Classic,
            ] {
                let mut prev = f64::INFINITY;
                for t in 1..200 {
                    let eta = step_size(rule, t, &p).unwrap();
                    prop_assert!(eta <= prev * (1.0 + 1e-12));
                    prev = eta;
                }
            }
        }
    }
}
