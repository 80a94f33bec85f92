//! Discounted online Newton step.
//!
//! The curvature matrix is a discounted sum `P_t = γP_{t−1} + ∇_t∇_tᵀ`
//! (quasi-Newton) or `P_t = γP_{t−1} + H_t` (full Newton), started from `εI`.
//! The step `θ − (1/η)P_t⁻¹∇_t` is projected back in the `P_t` norm.

use crate::error::{OcoError, Result};
use crate::geometry::FeasibleSet;
use crate::linalg::{all_finite, outer, spd_inverse, symmetrize};
use crate::oracle::LossRound;
use crate::profile::CurvatureProfile;
use crate::{Matrix, OnlineLearner, Vector};

/// Quasi-mode inverses are rebuilt from `P` this often to bound drift.
pub const REFACTOR_EVERY: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NewtonMode {
    Quasi,
    Full,
}

/// Loss families with a known admissible `η`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvatureCase {
    /// α-exp-concave losses, quasi-Newton updates.
    ExpConcave,
    /// ℓ-strongly convex, u-smooth losses, full-Newton updates.
    StronglyConvexSmooth,
    /// Exp-concave losses with a quadratic lower bound, full-Newton updates.
    QuadraticLike,
}

/// Largest `η` each case admits: `½min{1/(4GD), α}`, `ℓ/u` and `1`.
pub fn eta_for_case(profile: &CurvatureProfile, case: CurvatureCase) -> Result<f64> {
    match case {
        CurvatureCase::ExpConcave => Ok(exp_concave_rho(profile)?),
        CurvatureCase::StronglyConvexSmooth => Ok(profile.ell()? / profile.u()?),
        CurvatureCase::QuadraticLike => Ok(1.0),
    }
}

fn exp_concave_rho(profile: &CurvatureProfile) -> Result<f64> {
    let gd = 4.0 * profile.grad_bound * profile.diameter;
    Ok(0.5 * (1.0 / gd).min(profile.alpha()?))
}

/// Initial scale `ε = 1/(ρ²D²)` with `ρ = ½min{1/(4GD), α}`, the practical
/// alternative to `ε = 1`.
pub fn practical_epsilon(profile: &CurvatureProfile) -> Result<f64> {
    let rho = exp_concave_rho(profile)?;
    Ok(1.0 / (rho * rho * profile.diameter * profile.diameter))
}

/// `(γP + ∇∇ᵀ)⁻¹` from `P⁻¹` via the matrix inversion lemma.
pub fn inverse_rank_one_update(p_inverse: &Matrix, gradient: &Vector, gamma: f64) -> Result<Matrix> {
    if !(gamma > 0.0) {
        return Err(OcoError::invalid("gamma", format!("must be positive, got {gamma}")));
    }
    let u = p_inverse * gradient;
    let denom = gamma + gradient.dot(&u);
    if !(denom > 0.0) {
        return Err(OcoError::NotPositiveDefinite("inverse curvature"));
    }
    Ok(symmetrize(&((p_inverse - outer(&u) / denom) / gamma)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonState {
    iterate: Vector,
    p: Matrix,
    p_inverse: Matrix,
    round: usize,
    gamma: f64,
    eta: f64,
    epsilon: f64,
    mode: NewtonMode,
    set: FeasibleSet,
}

impl NewtonState {
    pub fn new(
        start: Vector,
        gamma: f64,
        eta: f64,
        epsilon: f64,
        mode: NewtonMode,
        set: FeasibleSet,
    ) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(OcoError::invalid("gamma", format!("must lie in (0,1], got {gamma}")));
        }
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(OcoError::invalid("eta", format!("must be positive, got {eta}")));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(OcoError::invalid("epsilon", format!("must be positive, got {epsilon}")));
        }
        if matches!(set, FeasibleSet::L1Ball { .. }) {
            return Err(OcoError::invalid("set", "Newton steps support balls and boxes only"));
        }
        let n = start.len();
        Ok(NewtonState {
            iterate: set.project(&start),
            p: Matrix::identity(n, n) * epsilon,
            p_inverse: Matrix::identity(n, n) / epsilon,
            round: 1,
            gamma,
            eta,
            epsilon,
            mode,
            set,
        })
    }

    pub fn iterate(&self) -> &Vector {
        &self.iterate
    }

    pub fn curvature(&self) -> &Matrix {
        &self.p
    }

    pub fn curvature_inverse(&self) -> &Matrix {
        &self.p_inverse
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn mode(&self) -> NewtonMode {
        self.mode
    }

    /// One discounted Newton update. Returns the scalar step `1/η`.
    pub fn newton_round(&mut self, gradient: &Vector, hessian: Option<&Matrix>) -> Result<f64> {
        let n = self.iterate.len();
        if gradient.len() != n {
            return Err(OcoError::DimensionMismatch {
                expected: n,
                got: gradient.len(),
            });
        }
        if !all_finite(gradient) {
            return Err(OcoError::NonFinite("gradient"));
        }
        match self.mode {
            NewtonMode::Quasi => {
                self.p = symmetrize(&(&self.p * self.gamma + outer(gradient)));
                if self.round.is_multiple_of(REFACTOR_EVERY) {
                    self.p_inverse = spd_inverse(&self.p, "discounted curvature")?;
                } else {
                    self.p_inverse = inverse_rank_one_update(&self.p_inverse, gradient, self.gamma)?;
                }
            }
            NewtonMode::Full => {
                let h = hessian.ok_or(OcoError::MissingConstant("hessian"))?;
                if h.nrows() != n || h.ncols() != n {
                    return Err(OcoError::DimensionMismatch {
                        expected: n,
                        got: h.nrows(),
                    });
                }
                self.p = symmetrize(&(&self.p * self.gamma + h));
                self.p_inverse = spd_inverse(&self.p, "discounted curvature")?;
            }
        }
        let target = &self.iterate - (&self.p_inverse * gradient) / self.eta;
        self.iterate = self.set.project_in_norm(&self.p, &target)?;
        self.round += 1;
        Ok(1.0 / self.eta)
    }

    /// `‖P P⁻¹ − I‖_∞`.
    pub fn inverse_residual(&self) -> f64 {
        let n = self.p.nrows();
        (&self.p * &self.p_inverse - Matrix::identity(n, n)).amax()
    }
}

impl OnlineLearner for NewtonState {
    fn iterate(&self) -> &Vector {
        &self.iterate
    }

    fn observe(&mut self, round: &LossRound) -> Result<f64> {
        let g = round.gradient(&self.iterate);
        match self.mode {
            NewtonMode::Quasi => self.newton_round(&g, None),
            NewtonMode::Full => {
                let h = round.hessian(&self.iterate);
                self.newton_round(&g, h.as_ref())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gd::{GdState, StepRule};
    use crate::linalg::sym_spectral_norm;
    use crate::oracle::Quadratic;
    use nalgebra::{dmatrix, dvector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_point(n: usize, r: f64, rng: &mut ChaCha8Rng) -> Vector {
        crate::geometry::project_ball(&Vector::from_fn(n, |_, _| rng.random_range(-r..r)), r)
    }

    #[test]
    fn one_dimensional_hand_step() {
        let set = FeasibleSet::ball(2.0).unwrap();
        let mut s = NewtonState::new(dvector![1.0], 0.5, 1.0, 1.0, NewtonMode::Quasi, set).unwrap();
        s.newton_round(&dvector![2.0], None).unwrap();
        assert!((s.curvature()[(0, 0)] - 4.5).abs() < 1e-15);
        assert!((s.iterate()[0] - (1.0 - 2.0 / 4.5)).abs() < 1e-15);
    }

    #[test]
    fn zero_gradient_shrinks_curvature_only() {
        let set = FeasibleSet::ball(1.0).unwrap();
        let mut s = NewtonState::new(dvector![0.2, 0.1], 0.5, 1.0, 2.0, NewtonMode::Quasi, set).unwrap();
        s.newton_round(&dvector![0.0, 0.0], None).unwrap();
        assert_eq!(s.iterate(), &dvector![0.2, 0.1]);
        assert!((s.curvature() - Matrix::identity(2, 2)).amax() < 1e-15);
    }

    #[test]
    fn full_mode_needs_a_hessian() {
        let set = FeasibleSet::ball(1.0).unwrap();
        let mut s = NewtonState::new(dvector![0.0], 0.5, 1.0, 1.0, NewtonMode::Full, set).unwrap();
        assert!(s.newton_round(&dvector![1.0], None).is_err());
        let neg = dmatrix![-5.0];
        assert!(matches!(
            s.newton_round(&dvector![1.0], Some(&neg)),
            Err(OcoError::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn undiscounted_quasi_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 3;
        let set = FeasibleSet::ball(1.0).unwrap();
        let mut s = NewtonState::new(Vector::zeros(n), 1.0, 0.5, 1.0, NewtonMode::Quasi, set).unwrap();
        let mut direct = Matrix::identity(n, n);
        for _ in 0..50 {
            let y = random_point(n, 1.0, &mut rng);
            let g = s.iterate() - &y;
            direct += outer(&g);
            s.newton_round(&g, None).unwrap();
            assert!((s.curvature() - &direct).amax() < 1e-9);
            let inv = direct.clone().try_inverse().unwrap();
            assert!((s.curvature_inverse() - inv).amax() < 1e-9);
        }
    }

    #[test]
    fn inverse_update_examples() {
        let p_inv = dmatrix![0.5, 0.1; 0.1, 0.25];
        let z = inverse_rank_one_update(&p_inv, &dvector![0.0, 0.0], 0.5).unwrap();
        assert!((z - &p_inv * 2.0).amax() < 1e-15);
        let s = inverse_rank_one_update(&dmatrix![0.5], &dvector![1.0], 0.5).unwrap();
        assert!((s[(0, 0)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn inverse_update_tracks_direct_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 5;
        let a = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let mut p = &a * a.transpose() + Matrix::identity(n, n);
        let mut p_inv = p.clone().try_inverse().unwrap();
        let gamma = 0.95;
        for _ in 0..100 {
            let g = Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            p = &p * gamma + outer(&g);
            p_inv = inverse_rank_one_update(&p_inv, &g, gamma).unwrap();
        }
        let direct = p.try_inverse().unwrap();
        assert!((&p_inv - &direct).amax() <= 1e-6 * direct.amax());
    }

    #[test]
    fn eta_cases() {
        let p = CurvatureProfile::new(1.0, 1.0, 1.0)
            .and_then(|p| p.with_exp_concavity(1.0))
            .and_then(|p| p.with_smoothness(4.0))
            .and_then(|p| p.with_strong_convexity(1.0))
            .unwrap();
        assert_eq!(eta_for_case(&p, CurvatureCase::ExpConcave).unwrap(), 0.125);
        assert_eq!(eta_for_case(&p, CurvatureCase::StronglyConvexSmooth).unwrap(), 0.25);
        assert_eq!(eta_for_case(&p, CurvatureCase::QuadraticLike).unwrap(), 1.0);
        let bare = CurvatureProfile::new(1.0, 1.0, 1.0).unwrap();
        assert!(eta_for_case(&bare, CurvatureCase::ExpConcave).is_err());
    }

    #[test]
    fn curvature_norm_bounds_hold_every_round() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let (n, gamma, eps) = (4, 0.9, 1.0);
        let set = FeasibleSet::ball(1.0).unwrap();
        let mut quasi = NewtonState::new(Vector::zeros(n), gamma, 0.1, eps, NewtonMode::Quasi, set.clone()).unwrap();
        let mut full = NewtonState::new(Vector::zeros(n), gamma, 1.0, eps, NewtonMode::Full, set).unwrap();
        // ½‖θ−y‖² on the unit ball: ‖∇‖ ≤ G = 2, u = 1
        let (g_bound, u) = (2.0, 1.0);
        for t in 1..=1500 {
            let y = random_point(n, 1.0, &mut rng);
            let loss = LossRound::new(Quadratic::isotropic(y));
            quasi.observe(&loss).unwrap();
            full.observe(&loss).unwrap();
            assert!(sym_spectral_norm(quasi.curvature()) <= eps + g_bound * g_bound / (1.0 - gamma) + 1e-9);
            assert!(sym_spectral_norm(full.curvature()) <= eps + u / (1.0 - gamma) + 1e-9);
            if t % REFACTOR_EVERY == 0 {
                assert!(quasi.inverse_residual() <= 1e-6);
            }
        }
        assert!(quasi.inverse_residual() <= 1e-6);
    }

    #[test]
    fn full_newton_reproduces_discounted_rls() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let gamma = 0.7;
        let n = 2;
        let set = FeasibleSet::ball(1.0).unwrap();
        let mut ons = NewtonState::new(Vector::zeros(n), gamma, 1.0, 1e-8, NewtonMode::Full, set.clone()).unwrap();
        let profile = CurvatureProfile::new(1.0, 1.0, 1.0).unwrap();
        let mut gd = GdState::new(Vector::zeros(n), StepRule::DiscountedRls { gamma }, profile, set).unwrap();
        for _ in 0..300 {
            let loss = LossRound::new(Quadratic::isotropic(random_point(n, 1.0, &mut rng)));
            ons.observe(&loss).unwrap();
            gd.observe(&loss).unwrap();
            assert!((ons.iterate() - gd.iterate()).amax() < 1e-6);
        }
    }

    #[test]
    fn undiscounted_quasi_regret_grows_sublinearly() {
        let n = 3;
        let mut ratios = Vec::new();
        for seed in 0..3 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let center = random_point(n, 0.5, &mut rng);
            let ys: Vec<Vector> = (0..2000)
                .map(|_| crate::geometry::project_ball(&(&center + random_point(n, 0.5, &mut rng)), 1.0))
                .collect();
            let profile = CurvatureProfile::new(2.0, 2.0, 1.0)
                .and_then(|p| p.with_exp_concavity(0.25))
                .unwrap();
            let eta = eta_for_case(&profile, CurvatureCase::ExpConcave).unwrap();
            let set = FeasibleSet::ball(1.0).unwrap();
            let mut s = NewtonState::new(Vector::zeros(n), 1.0, eta, 1.0, NewtonMode::Quasi, set.clone()).unwrap();
            let rounds: Vec<LossRound> = ys.iter().map(|y| LossRound::new(Quadratic::isotropic(y.clone()))).collect();
            let trace = crate::run_learner(&mut s, &rounds).unwrap();
            let per_round = |t: usize| {
                let mean = ys[..t].iter().fold(Vector::zeros(n), |a, y| a + y) / t as f64;
                let best = set.project(&mean);
                crate::static_regret(&trace[..t], &best, &rounds[..t]).unwrap().regret / t as f64
            };
            ratios.push(per_round(2000) / per_round(250));
        }
        for r in ratios {
            assert!(r < 0.5, "average regret ratio {r}");
        }
    }
}
