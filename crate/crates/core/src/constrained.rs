//! Online convex optimization with long-term constraints.
//!
//! The clipped learners penalise `[g(θ)]₊` rather than `g(θ)`, so a
//! constraint satisfied with slack in one round cannot pay for a violation in
//! another. The primal-dual baseline of Mahdavi et al. is included for
//! comparison.

use std::sync::Arc;

use crate::error::{OcoError, Result};
use crate::geometry::FeasibleSet;
use crate::linalg::all_finite;
use crate::oracle::{Constraint, LossRound};
use crate::profile::CurvatureProfile;
use crate::{OnlineLearner, Vector};

/// Trade-off constant used by the experiments.
pub const DEFAULT_KAPPA: f64 = 0.5;
/// Exponent in the experiment step `1/(T^β G√(R(m+1)))`.
pub const DEFAULT_BETA: f64 = 0.5;

/// `g(θ) = maxᵢ gᵢ(θ)`, with the subgradient of the first active maximiser.
pub struct MaxConstraint {
    parts: Vec<Arc<dyn Constraint>>,
}

impl Constraint for MaxConstraint {
    fn value(&self, x: &Vector) -> f64 {
        self.parts.iter().map(|c| c.value(x)).fold(f64::NEG_INFINITY, f64::max)
    }

    fn subgradient(&self, x: &Vector) -> Vector {
        let mut best = 0;
        let mut best_value = f64::NEG_INFINITY;
        for (i, c) in self.parts.iter().enumerate() {
            let v = c.value(x);
            if v > best_value {
                best = i;
                best_value = v;
            }
        }
        self.parts[best].subgradient(x)
    }
}

/// `ḡ(θ) = ln Σᵢ exp gᵢ(θ)`, evaluated with max-subtraction.
pub struct LogSumExpConstraint {
    parts: Vec<Arc<dyn Constraint>>,
}

impl LogSumExpConstraint {
    fn shifted(&self, x: &Vector) -> (f64, Vec<f64>) {
        let values: Vec<f64> = self.parts.iter().map(|c| c.value(x)).collect();
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (max, values.into_iter().map(|v| (v - max).exp()).collect())
    }
}

impl Constraint for LogSumExpConstraint {
    fn value(&self, x: &Vector) -> f64 {
        let (max, e) = self.shifted(x);
        max + e.iter().sum::<f64>().ln()
    }

    fn subgradient(&self, x: &Vector) -> Vector {
        let (_, e) = self.shifted(x);
        let total: f64 = e.iter().sum();
        let mut out = Vector::zeros(x.len());
        for (c, w) in self.parts.iter().zip(&e) {
            out.axpy(w / total, &c.subgradient(x), 1.0);
        }
        out
    }
}

pub fn max_aggregate(constraints: &[Arc<dyn Constraint>]) -> Result<Arc<dyn Constraint>> {
    if constraints.is_empty() {
        return Err(OcoError::Empty("constraints"));
    }
    Ok(Arc::new(MaxConstraint {
        parts: constraints.to_vec(),
    }))
}

pub fn logsumexp_aggregate(constraints: &[Arc<dyn Constraint>]) -> Result<Arc<dyn Constraint>> {
    if constraints.is_empty() {
        return Err(OcoError::Empty("constraints"));
    }
    Ok(Arc::new(LogSumExpConstraint {
        parts: constraints.to_vec(),
    }))
}

/// How a round's constraints are presented to the learner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregate {
    /// One multiplier per constraint.
    Separate,
    Max,
    LogSumExp,
}

/// `∂f + Σᵢ λᵢ·∂[gᵢ]₊`, where `∂[g]₊ = 0` whenever `g ≤ 0`.
pub fn clipped_lagrangian_grad(
    theta: &Vector,
    lambda: &[f64],
    round: &LossRound,
    constraints: &[Arc<dyn Constraint>],
) -> Result<Vector> {
    if lambda.len() != constraints.len() {
        return Err(OcoError::LengthMismatch {
            what: "multipliers vs constraints",
            left: lambda.len(),
            right: constraints.len(),
        });
    }
    let mut grad = round.gradient(theta);
    for (l, c) in lambda.iter().zip(constraints) {
        if *l != 0.0 && c.value(theta) > 0.0 {
            grad.axpy(*l, &c.subgradient(theta), 1.0);
        }
    }
    Ok(grad)
}

/// Comparator class of the time-varying-constraint bounds: `K` of the `T`
/// comparators are feasible and their path length is at most `V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicComparatorSpec {
    pub feasible_rounds: usize,
    pub path_budget: f64,
    pub horizon: usize,
}

impl DynamicComparatorSpec {
    pub fn new(feasible_rounds: usize, path_budget: f64, horizon: usize) -> Result<Self> {
        if horizon < 2 {
            return Err(OcoError::invalid("horizon", format!("need T >= 2, got {horizon}")));
        }
        if feasible_rounds > horizon {
            return Err(OcoError::invalid("feasible_rounds", format!("K = {feasible_rounds} exceeds T = {horizon}")));
        }
        if !(path_budget >= 0.0 && path_budget.is_finite()) {
            return Err(OcoError::invalid("path_budget", format!("must be >= 0, got {path_budget}")));
        }
        Ok(DynamicComparatorSpec {
            feasible_rounds,
            path_budget,
            horizon,
        })
    }
}

/// Update rule and its constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClippedRule {
    /// Fixed `η`, `λ_{t+1} = [g(θ_{t+1})]₊/(ση)`.
    Convex { eta: f64, sigma: f64 },
    /// `η_t = 1/(H₁t)`, `φ_t = scale·η_t`, `λ_{t+1} = [g(θ_{t+1})]₊/φ_{t+1}`.
    StronglyConvex { h1: f64, scale: f64 },
    /// Primal descent on `f + λg − (ση/2)λ²`, projected dual ascent on λ.
    Mahdavi { eta: f64, sigma: f64 },
    /// `λ_t = [g_t(θ_t)]₊/(ση)` before a fixed-`η` primal step.
    DynamicConvex { eta: f64, sigma: f64 },
    /// `η_t = (1−γ)/(ℓ(1−γ^t))`, `λ_t = [g_t(θ_t)]₊/(scale·η_t)` before the step.
    DynamicStrongly { gamma: f64, ell: f64, scale: f64 },
}

fn sigma_for(profile: &CurvatureProfile, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(OcoError::invalid("kappa", format!("must lie in (0,1), got {kappa}")));
    }
    let m = profile.constraint_count as f64;
    let g = profile.grad_bound;
    Ok((m + 1.0) * g * g / (2.0 * (1.0 - kappa)))
}

fn check_horizon(horizon: usize) -> Result<f64> {
    if horizon == 0 {
        return Err(OcoError::invalid("horizon", "must be at least 1"));
    }
    Ok(horizon as f64)
}

impl ClippedRule {
    /// `σ = (m+1)G²/(2(1−κ))`, `η = 1/(G√((m+1)RT))`.
    pub fn convex_theorem(profile: &CurvatureProfile, horizon: usize, kappa: f64) -> Result<Self> {
        let t = check_horizon(horizon)?;
        let sigma = sigma_for(profile, kappa)?;
        let m = profile.constraint_count as f64;
        let eta = 1.0 / (profile.grad_bound * ((m + 1.0) * profile.radius * t).sqrt());
        Ok(ClippedRule::Convex { eta, sigma })
    }

    /// Same `σ`, with `η = 1/(T^β G√(R(m+1)))`.
    pub fn convex_experiment(profile: &CurvatureProfile, horizon: usize, kappa: f64, beta: f64) -> Result<Self> {
        let sigma = sigma_for(profile, kappa)?;
        let eta = experiment_eta(profile, horizon, beta)?;
        Ok(ClippedRule::Convex { eta, sigma })
    }

    /// `H₁ = ℓ`, `φ_t = (m+1)G²η_t`.
    pub fn strongly_convex(profile: &CurvatureProfile) -> Result<Self> {
        let m = profile.constraint_count as f64;
        let g = profile.grad_bound;
        Ok(ClippedRule::StronglyConvex {
            h1: profile.ell()?,
            scale: (m + 1.0) * g * g,
        })
    }

    /// Baseline with the experiment constants.
    pub fn mahdavi(profile: &CurvatureProfile, horizon: usize, kappa: f64, beta: f64) -> Result<Self> {
        let sigma = sigma_for(profile, kappa)?;
        let eta = experiment_eta(profile, horizon, beta)?;
        Ok(ClippedRule::Mahdavi { eta, sigma })
    }

    /// `σ = 2G²`, `η = c_η√((T−K+1+V)/T)` with `c_η = 1/(2G)` unless given.
    pub fn dynamic_convex(profile: &CurvatureProfile, spec: &DynamicComparatorSpec, c_eta: Option<f64>) -> Result<Self> {
        let g = profile.grad_bound;
        let c_eta = c_eta.unwrap_or(1.0 / (2.0 * g));
        if !(c_eta > 0.0) {
            return Err(OcoError::invalid("c_eta", format!("must be positive, got {c_eta}")));
        }
        let t = spec.horizon as f64;
        let slack = t - spec.feasible_rounds as f64 + 1.0 + spec.path_budget;
        Ok(ClippedRule::DynamicConvex {
            eta: c_eta * (slack / t).sqrt(),
            sigma: 2.0 * g * g,
        })
    }

    /// `γ = 1 − ½√(max{V+T−K, ln²T/T}/((D+1)T))`, `φ_t = 2G²η_t`.
    pub fn dynamic_strongly(profile: &CurvatureProfile, spec: &DynamicComparatorSpec) -> Result<Self> {
        let ell = profile.ell()?;
        let g = profile.grad_bound;
        Ok(ClippedRule::DynamicStrongly {
            gamma: dynamic_gamma(profile.diameter, spec)?,
            ell,
            scale: 2.0 * g * g,
        })
    }

    /// Primal step size used in round `t` (1-based).
    pub fn eta_at(&self, t: usize) -> f64 {
        match *self {
            ClippedRule::Convex { eta, .. } | ClippedRule::Mahdavi { eta, .. } | ClippedRule::DynamicConvex { eta, .. } => eta,
            ClippedRule::StronglyConvex { h1, .. } => 1.0 / (h1 * t as f64),
            ClippedRule::DynamicStrongly { gamma, ell, .. } => (1.0 - gamma) / (ell * (1.0 - gamma.powi(t as i32))),
        }
    }

    /// Divisor turning `[g]₊` into a multiplier in round `t`: `ση` or `φ_t`.
    pub fn penalty_at(&self, t: usize) -> Option<f64> {
        match *self {
            ClippedRule::Convex { eta, sigma } | ClippedRule::DynamicConvex { eta, sigma } => Some(sigma * eta),
            ClippedRule::StronglyConvex { scale, .. } | ClippedRule::DynamicStrongly { scale, .. } => {
                Some(scale * self.eta_at(t))
            }
            ClippedRule::Mahdavi { .. } => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            ClippedRule::Convex { eta, sigma }
            | ClippedRule::Mahdavi { eta, sigma }
            | ClippedRule::DynamicConvex { eta, sigma } => eta > 0.0 && sigma > 0.0 && eta.is_finite() && sigma.is_finite(),
            ClippedRule::StronglyConvex { h1, scale } => h1 > 0.0 && scale > 0.0,
            ClippedRule::DynamicStrongly { gamma, ell, scale } => gamma > 0.0 && gamma < 1.0 && ell > 0.0 && scale > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(OcoError::invalid("rule", format!("{self:?} has out-of-range constants")))
        }
    }
}

/// `1/(T^β G√(R(m+1)))`.
pub fn experiment_eta(profile: &CurvatureProfile, horizon: usize, beta: f64) -> Result<f64> {
    let t = check_horizon(horizon)?;
    if !(beta > 0.0 && beta < 1.0) {
        return Err(OcoError::invalid("beta", format!("must lie in (0,1), got {beta}")));
    }
    let m = profile.constraint_count as f64;
    Ok(1.0 / (t.powf(beta) * profile.grad_bound * (profile.radius * (m + 1.0)).sqrt()))
}

/// `1 − ½√(max{V+T−K, ln²T/T}/((D+1)T))`.
pub fn dynamic_gamma(diameter: f64, spec: &DynamicComparatorSpec) -> Result<f64> {
    let t = spec.horizon as f64;
    let budget = spec.path_budget + t - spec.feasible_rounds as f64;
    let floor = t.ln().powi(2) / t;
    let gamma = 1.0 - 0.5 * (budget.max(floor) / ((diameter + 1.0) * t)).sqrt();
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(OcoError::invalid("path_budget", format!("gives γ = {gamma} outside (0,1)")));
    }
    Ok(gamma)
}

/// `Q_T` of `Q_t = [Q_{t−1} + g_t]₊`, `Q_0 = 0`.
pub fn queue_carryover(violations: &[f64]) -> f64 {
    violations.iter().fold(0.0, |q, g| (q + g).max(0.0))
}

#[derive(Debug, Clone)]
pub struct ClippedState {
    iterate: Vector,
    lambda: Vec<f64>,
    rule: ClippedRule,
    set: FeasibleSet,
    aggregate: Aggregate,
    round: usize,
}

impl ClippedState {
    /// Start at the centre of `set` with zero multipliers.
    pub fn new(dim: usize, rule: ClippedRule, set: FeasibleSet, aggregate: Aggregate) -> Result<Self> {
        let start = set.center(dim);
        Self::with_start(start, rule, set, aggregate)
    }

    pub fn with_start(start: Vector, rule: ClippedRule, set: FeasibleSet, aggregate: Aggregate) -> Result<Self> {
        rule.validate()?;
        if matches!(set, FeasibleSet::Unbounded) {
            return Err(OcoError::invalid("set", "clipped learners need a bounded set"));
        }
        Ok(ClippedState {
            iterate: set.project(&start),
            lambda: Vec::new(),
            rule,
            set,
            aggregate,
            round: 1,
        })
    }

    pub fn iterate(&self) -> &Vector {
        &self.iterate
    }

    /// Multipliers carried into the next round (empty before the first round).
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn rule(&self) -> &ClippedRule {
        &self.rule
    }

    pub fn round(&self) -> usize {
        self.round
    }

    fn effective_constraints(&self, round: &LossRound) -> Result<Vec<Arc<dyn Constraint>>> {
        if round.constraints.is_empty() {
            return Ok(Vec::new());
        }
        Ok(match self.aggregate {
            Aggregate::Separate => round.constraints.clone(),
            Aggregate::Max => vec![max_aggregate(&round.constraints)?],
            Aggregate::LogSumExp => vec![logsumexp_aggregate(&round.constraints)?],
        })
    }

    fn primal_step(&mut self, grad: &Vector, eta: f64) -> Result<()> {
        if !all_finite(grad) {
            return Err(OcoError::NonFinite("Lagrangian subgradient"));
        }
        self.iterate = self.set.project(&(&self.iterate - grad * eta));
        Ok(())
    }

    /// Advance one round. Returns the primal step size used.
    pub fn clipped_round(&mut self, round: &LossRound) -> Result<f64> {
        let cs = self.effective_constraints(round)?;
        if self.lambda.len() != cs.len() {
            if self.round == 1 {
                self.lambda = vec![0.0; cs.len()];
            } else {
                return Err(OcoError::LengthMismatch {
                    what: "multipliers vs constraints",
                    left: self.lambda.len(),
                    right: cs.len(),
                });
            }
        }
        let t = self.round;
        let eta = self.rule.eta_at(t);
        match self.rule {
            ClippedRule::Convex { .. } | ClippedRule::StronglyConvex { .. } => {
                let grad = clipped_lagrangian_grad(&self.iterate, &self.lambda, round, &cs)?;
                self.primal_step(&grad, eta)?;
                let penalty = self.rule.penalty_at(t + 1).expect("clipped rule");
                self.lambda = cs.iter().map(|c| c.value(&self.iterate).max(0.0) / penalty).collect();
            }
            ClippedRule::DynamicConvex { .. } | ClippedRule::DynamicStrongly { .. } => {
                let penalty = self.rule.penalty_at(t).expect("clipped rule");
                self.lambda = cs.iter().map(|c| c.value(&self.iterate).max(0.0) / penalty).collect();
                let grad = clipped_lagrangian_grad(&self.iterate, &self.lambda, round, &cs)?;
                self.primal_step(&grad, eta)?;
            }
            ClippedRule::Mahdavi { sigma, .. } => {
                let values: Vec<f64> = cs.iter().map(|c| c.value(&self.iterate)).collect();
                let mut grad = round.gradient(&self.iterate);
                for (l, c) in self.lambda.iter().zip(&cs) {
                    if *l != 0.0 {
                        grad.axpy(*l, &c.subgradient(&self.iterate), 1.0);
                    }
                }
                self.primal_step(&grad, eta)?;
                for (l, g) in self.lambda.iter_mut().zip(values) {
                    *l = (*l + eta * (g - sigma * eta * *l)).max(0.0);
                }
            }
        }
        if self.lambda.iter().any(|l| !l.is_finite()) {
            return Err(OcoError::NonFinite("multiplier"));
        }
        self.round += 1;
        Ok(eta)
    }
}

impl OnlineLearner for ClippedState {
    fn iterate(&self) -> &Vector {
        &self.iterate
    }

    fn observe(&mut self, round: &LossRound) -> Result<f64> {
        self.clipped_round(round)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{Affine, FnConstraint, L1Norm, Linear, Quadratic};
    use nalgebra::dvector;
    use proptest::prelude::{prop, prop_assert, proptest};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn shift(bound: f64) -> Affine {
        Affine {
            normal: dvector![1.0],
            bound,
        }
    }

    fn zero_loss(n: usize) -> LossRound {
        LossRound::new(Linear {
            coefficients: Vector::zeros(n),
        })
    }

    fn arcs(cs: Vec<Arc<dyn Constraint>>) -> Vec<Arc<dyn Constraint>> {
        cs
    }

    #[test]
    fn clipped_grad_examples() {
        let round = LossRound::new(Linear {
            coefficients: dvector![0.5],
        })
        .with_constraint(shift(1.0));
        let cs = round.constraints.clone();
        let g = clipped_lagrangian_grad(&dvector![0.0], &[3.0], &round, &cs).unwrap();
        assert_eq!(g, dvector![0.5]);
        let g = clipped_lagrangian_grad(&dvector![2.0], &[0.0], &round, &cs).unwrap();
        assert_eq!(g, dvector![0.5]);
        let zero = zero_loss(1).with_constraint(shift(1.0));
        let g = clipped_lagrangian_grad(&dvector![2.0], &[3.0], &zero, &zero.constraints).unwrap();
        assert_eq!(g, dvector![3.0]);
        let g = clipped_lagrangian_grad(&dvector![1.0], &[3.0], &zero, &zero.constraints).unwrap();
        assert_eq!(g, dvector![0.0]);
        assert!(clipped_lagrangian_grad(&dvector![1.0], &[], &zero, &zero.constraints).is_err());
    }

    #[test]
    fn multiplier_from_next_violation() {
        let set = FeasibleSet::ball(5.0).unwrap();
        let rule = ClippedRule::Convex { eta: 0.1, sigma: 2.0 };
        let mut s = ClippedState::with_start(dvector![1.3], rule, set, Aggregate::Separate).unwrap();
        s.clipped_round(&zero_loss(1).with_constraint(shift(1.0))).unwrap();
        assert!((s.lambda()[0] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn feasible_runs_reduce_to_projected_ogd() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let set = FeasibleSet::ball(1.0).unwrap();
        for rule in [
            ClippedRule::Convex { eta: 0.05, sigma: 4.0 },
            ClippedRule::StronglyConvex { h1: 1.0, scale: 2.0 },
        ] {
            let mut s = ClippedState::new(2, rule, set.clone(), Aggregate::Separate).unwrap();
            let mut plain = Vector::zeros(2);
            for t in 1..=200 {
                let y = dvector![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                let round = LossRound::new(Quadratic::isotropic(y.clone())).with_constraint(L1Norm { radius: 10.0 });
                s.clipped_round(&round).unwrap();
                plain = set.project(&(&plain - (&plain - &y) * rule.eta_at(t)));
                assert_eq!(s.lambda(), &[0.0]);
                assert!((s.iterate() - &plain).amax() < 1e-15);
            }
        }
    }

    #[test]
    fn strongly_convex_schedule_start() {
        let p = CurvatureProfile::new(1.0, 1.0, 1.0)
            .and_then(|p| p.with_strong_convexity(1.0))
            .and_then(|p| p.with_constraint_count(1))
            .unwrap();
        let rule = ClippedRule::strongly_convex(&p).unwrap();
        assert_eq!(rule.eta_at(1), 1.0);
        assert_eq!(rule.penalty_at(1), Some(2.0));
        assert_eq!(rule.eta_at(4), 0.25);
        let bare = CurvatureProfile::new(1.0, 1.0, 1.0).unwrap();
        assert!(ClippedRule::strongly_convex(&bare).is_err());
    }

    #[test]
    fn theorem_and_experiment_constants() {
        let p = CurvatureProfile::new(2f64.sqrt(), 2.0, 1.0)
            .and_then(|p| p.with_constraint_count(1))
            .unwrap();
        match ClippedRule::convex_theorem(&p, 100, 0.5).unwrap() {
            ClippedRule::Convex { eta, sigma } => {
                assert!((sigma - 4.0).abs() < 1e-12);
                assert!((eta - 1.0 / (2f64.sqrt() * 200f64.sqrt())).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
        match ClippedRule::convex_experiment(&p, 100, 0.5, 0.5).unwrap() {
            ClippedRule::Convex { eta, .. } => assert!((eta - 1.0 / (10.0 * 2.0)).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
        assert!(ClippedRule::convex_experiment(&p, 100, 0.5, 1.5).is_err());
        assert!(ClippedRule::convex_experiment(&p, 100, 1.0, 0.5).is_err());
    }

    #[test]
    fn logsumexp_examples() {
        let single = logsumexp_aggregate(&arcs(vec![Arc::new(shift(1.0))])).unwrap();
        assert!((single.value(&dvector![3.0]) - 2.0).abs() < 1e-15);
        let two = logsumexp_aggregate(&arcs(vec![Arc::new(shift(1.0)), Arc::new(shift(1.0))])).unwrap();
        assert!((two.value(&dvector![1.0]) - 2f64.ln()).abs() < 1e-15);
        assert!(logsumexp_aggregate(&[]).is_err());
    }

    #[test]
    fn logsumexp_dominates_max_and_stays_finite() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cs: Vec<Arc<dyn Constraint>> = (0..4)
            .map(|_| {
                Arc::new(Affine {
                    normal: dvector![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
                    bound: rng.random_range(-1.0..1.0),
                }) as Arc<dyn Constraint>
            })
            .collect();
        let lse = logsumexp_aggregate(&cs).unwrap();
        let mx = max_aggregate(&cs).unwrap();
        for _ in 0..1000 {
            let x = dvector![rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
            assert!(lse.value(&x) >= mx.value(&x));
        }
        for v in [-700.0, 0.0, 700.0] {
            let flat: Vec<Arc<dyn Constraint>> = (0..3).map(|_| Arc::new(FnConstraint::new(move |_| v, |x: &Vector| x.clone())) as Arc<dyn Constraint>).collect();
            let lse = logsumexp_aggregate(&flat).unwrap();
            let val = lse.value(&dvector![1.0]);
            assert!((val - (v + 3f64.ln())).abs() < 1e-9);
            assert!(lse.subgradient(&dvector![1.0]).iter().all(|g| g.is_finite()));
        }
    }

    #[test]
    fn mahdavi_examples() {
        let set = FeasibleSet::ball(5.0).unwrap();
        let rule = ClippedRule::Mahdavi { eta: 0.1, sigma: 1.0 };
        let mut s = ClippedState::with_start(dvector![0.0], rule, set.clone(), Aggregate::Separate).unwrap();
        s.clipped_round(&zero_loss(1).with_constraint(shift(1.0))).unwrap();
        assert_eq!(s.lambda(), &[0.0]);
        let mut s = ClippedState::with_start(dvector![2.0], rule, set, Aggregate::Separate).unwrap();
        s.clipped_round(&zero_loss(1).with_constraint(shift(1.0))).unwrap();
        assert!((s.lambda()[0] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn dynamic_constants() {
        let p = CurvatureProfile::new(1.0, 1.0, 1.0).unwrap();
        let spec = DynamicComparatorSpec::new(100, 0.0, 100).unwrap();
        match ClippedRule::dynamic_convex(&p, &spec, None).unwrap() {
            ClippedRule::DynamicConvex { eta, sigma } => {
                assert!((eta - 0.05).abs() < 1e-15);
                assert_eq!(sigma, 2.0);
            }
            other => panic!("{other:?}"),
        }
        assert!(DynamicComparatorSpec::new(101, 0.0, 100).is_err());

        let q = CurvatureProfile::new(1.0, 2.0, 1.0).and_then(|p| p.with_strong_convexity(0.5)).unwrap();
        let rule = ClippedRule::dynamic_strongly(&q, &spec).unwrap();
        let t = 100f64;
        let expected = 1.0 - 0.5 * ((t.ln().powi(2) / t) / (3.0 * t)).sqrt();
        match rule {
            ClippedRule::DynamicStrongly { gamma, .. } => assert!((gamma - expected).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
        assert!((rule.eta_at(1) - 2.0).abs() < 1e-12);
        assert!(ClippedRule::dynamic_strongly(&p, &spec).is_err());
    }

    #[test]
    fn dynamic_convex_time_invariant_reduction() {
        let set = FeasibleSet::ball(3.0).unwrap();
        let (eta, sigma) = (0.05, 2.0);
        let mut dynamic = ClippedState::new(1, ClippedRule::DynamicConvex { eta, sigma }, set.clone(), Aggregate::Separate).unwrap();
        let mut plain = ClippedState::new(1, ClippedRule::Convex { eta, sigma }, set, Aggregate::Separate).unwrap();
        let round = LossRound::new(Quadratic::isotropic(dvector![2.0])).with_constraint(shift(1.0));
        for _ in 0..100 {
            let before = dynamic.iterate().clone();
            dynamic.clipped_round(&round).unwrap();
            // the dynamic rule uses λ_t from θ_t, the listing carries λ_{t+1} from θ_{t+1}
            assert!((dynamic.lambda()[0] - (before[0] - 1.0).max(0.0) / (sigma * eta)).abs() < 1e-12);
            assert!((plain.iterate() - &before).amax() < 1e-12);
            plain.clipped_round(&round).unwrap();
        }
    }

    #[test]
    fn queue_examples() {
        assert_eq!(queue_carryover(&[-1.0, -0.5]), 0.0);
        assert_eq!(queue_carryover(&[1.0, -2.0, 1.0]), 1.0);
        assert_eq!(queue_carryover(&[1.0, 1.0]), 2.0);
        assert_eq!(queue_carryover(&[]), 0.0);
    }

    fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
        let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
        let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
        let n = lx.len() as f64;
        let mx = lx.iter().sum::<f64>() / n;
        let my = ly.iter().sum::<f64>() / n;
        let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
        let var: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
        cov / var
    }

    fn budget_run(horizon: usize, strongly: bool) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(horizon as u64);
        let set = FeasibleSet::ball(3.0).unwrap();
        let profile = CurvatureProfile::new(6.0, 3.0, 3.0).and_then(|p| p.with_strong_convexity(1.0)).unwrap();
        let spec = DynamicComparatorSpec::new(horizon, 1.0, horizon).unwrap();
        let rule = if strongly {
            ClippedRule::dynamic_strongly(&profile, &spec).unwrap()
        } else {
            ClippedRule::dynamic_convex(&profile, &spec, None).unwrap()
        };
        let mut s = ClippedState::new(2, rule, set, Aggregate::Separate).unwrap();
        let mut signed = Vec::with_capacity(horizon);
        for t in 0..horizon {
            let y = dvector![2.0 + rng.random_range(-0.2..0.2), 2.0 + rng.random_range(-0.2..0.2)];
            let budget = 1.0 + 0.5 / (1.0 + t as f64 / 1000.0);
            let round = LossRound::new(Quadratic::isotropic(y)).with_constraint(Affine {
                normal: dvector![1.0, 1.0],
                bound: budget,
            });
            signed.push(round.constraints[0].value(s.iterate()));
            s.clipped_round(&round).unwrap();
            assert!(s.iterate().norm() <= 3.0 + 1e-10);
            assert!(s.lambda().iter().all(|&l| l >= 0.0));
        }
        let clipped = signed.iter().map(|g| g.max(0.0)).collect();
        (signed, clipped)
    }

    #[test]
    fn dynamic_convex_violation_is_sublinear_on_shrinking_budgets() {
        let horizons = [1000usize, 4000, 16000];
        let totals: Vec<f64> = horizons.iter().map(|&t| budget_run(t, false).1.iter().sum()).collect();
        let xs: Vec<f64> = horizons.iter().map(|&t| t as f64).collect();
        let slope = log_slope(&xs, &totals);
        assert!(slope < 0.95, "slope {slope}, totals {totals:?}");
    }

    #[test]
    fn constraint_type_ordering_holds() {
        for strongly in [false, true] {
            let (signed, clipped) = budget_run(2000, strongly);
            let q = queue_carryover(&signed);
            let clip_sum: f64 = clipped.iter().sum();
            let signed_sum: f64 = signed.iter().sum();
            assert!(q <= clip_sum + 1e-12);
            assert!(signed_sum <= clip_sum + 1e-12);
        }
    }

    proptest! {
        #[test]
        fn queue_bounded_by_clipped_sum(g in prop::collection::vec(-3.0..3.0f64, 0..60)) {
            let q = queue_carryover(&g);
            let clip: f64 = g.iter().map(|v| v.max(0.0)).sum();
            let signed: f64 = g.iter().sum();
            prop_assert!(q >= 0.0);
            prop_assert!(q <= clip + 1e-12);
            prop_assert!(signed <= clip + 1e-12);
        }

        #[test]
        fn multipliers_nonnegative_and_iterates_inside(seed in 0u64..1000, which in 0usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let profile = CurvatureProfile::new(3.0, 2.0, 1.0).and_then(|p| p.with_strong_convexity(1.0)).unwrap();
            let spec = DynamicComparatorSpec::new(50, 2.0, 50).unwrap();
            let rule = match which {
                0 => ClippedRule::convex_experiment(&profile, 50, 0.5, 0.5).unwrap(),
                1 => ClippedRule::strongly_convex(&profile).unwrap(),
                2 => ClippedRule::mahdavi(&profile, 50, 0.5, 0.5).unwrap(),
                3 => ClippedRule::dynamic_convex(&profile, &spec, None).unwrap(),
                _ => ClippedRule::dynamic_strongly(&profile, &spec).unwrap(),
            };
            let set = FeasibleSet::ball(1.0).unwrap();
            let mut s = ClippedState::new(2, rule, set, Aggregate::Separate).unwrap();
            for _ in 0..50 {
                let y = dvector![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
                let round = LossRound::new(Quadratic::isotropic(y))
                    .with_constraint(L1Norm { radius: 0.5 })
                    .with_constraint(Affine { normal: dvector![1.0, -1.0], bound: 0.2 });
                s.clipped_round(&round).unwrap();
                prop_assert!(s.lambda().iter().all(|&l| l >= 0.0));
                prop_assert!(s.iterate().norm() <= 1.0 + 1e-10);
            }
        }
    }
}
