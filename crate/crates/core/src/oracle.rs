//! Loss and constraint oracles handed to learners one round at a time.

use std::fmt;
use std::sync::Arc;

use crate::{Matrix, Vector};

/// First- and optionally second-order access to a round's loss.
pub trait Objective: Send + Sync {
    fn value(&self, x: &Vector) -> f64;
    fn gradient(&self, x: &Vector) -> Vector;
    fn hessian(&self, _x: &Vector) -> Option<Matrix> {
        None
    }
}

/// A convex constraint `g(x) <= 0` with a subgradient oracle.
pub trait Constraint: Send + Sync {
    fn value(&self, x: &Vector) -> f64;
    fn subgradient(&self, x: &Vector) -> Vector;
}

/// One round of feedback: the loss plus the constraints in force that round.
#[derive(Clone)]
pub struct LossRound {
    pub objective: Arc<dyn Objective>,
    pub constraints: Vec<Arc<dyn Constraint>>,
}

impl fmt::Debug for LossRound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LossRound")
            .field("constraints", &self.constraints.len())
            .finish_non_exhaustive()
    }
}

impl LossRound {
    pub fn new(objective: impl Objective + 'static) -> Self {
        LossRound {
            objective: Arc::new(objective),
            constraints: Vec::new(),
        }
    }

    pub fn with_constraint(mut self, c: impl Constraint + 'static) -> Self {
        self.constraints.push(Arc::new(c));
        self
    }

    pub fn with_shared_constraints(mut self, cs: &[Arc<dyn Constraint>]) -> Self {
        self.constraints.extend(cs.iter().cloned());
        self
    }

    pub fn value(&self, x: &Vector) -> f64 {
        self.objective.value(x)
    }

    pub fn gradient(&self, x: &Vector) -> Vector {
        self.objective.gradient(x)
    }

    pub fn hessian(&self, x: &Vector) -> Option<Matrix> {
        self.objective.hessian(x)
    }

    /// Signed constraint values `g_i(x)`.
    pub fn constraint_values(&self, x: &Vector) -> Vec<f64> {
        self.constraints.iter().map(|c| c.value(x)).collect()
    }
}

/// `f(x) = ½ (x − center)ᵀ A (x − center) + offset`.
#[derive(Debug, Clone)]
pub struct Quadratic {
    pub curvature: Matrix,
    pub center: Vector,
    pub offset: f64,
}

impl Quadratic {
    /// `½‖x − center‖²`.
    pub fn isotropic(center: Vector) -> Self {
        Self::scaled(center, 1.0)
    }

    /// `½ s ‖x − center‖²`.
    pub fn scaled(center: Vector, s: f64) -> Self {
        let n = center.len();
        Quadratic {
            curvature: Matrix::identity(n, n) * s,
            center,
            offset: 0.0,
        }
    }

    pub fn new(curvature: Matrix, center: Vector) -> Self {
        Quadratic {
            curvature,
            center,
            offset: 0.0,
        }
    }
}

impl Objective for Quadratic {
    fn value(&self, x: &Vector) -> f64 {
        let d = x - &self.center;
        0.5 * d.dot(&(&self.curvature * &d)) + self.offset
    }

    fn gradient(&self, x: &Vector) -> Vector {
        &self.curvature * (x - &self.center)
    }

    fn hessian(&self, _x: &Vector) -> Option<Matrix> {
        Some(self.curvature.clone())
    }
}

/// `f(x) = cᵀx`.
#[derive(Debug, Clone)]
pub struct Linear {
    pub coefficients: Vector,
}

impl Objective for Linear {
    fn value(&self, x: &Vector) -> f64 {
        self.coefficients.dot(x)
    }

    fn gradient(&self, _x: &Vector) -> Vector {
        self.coefficients.clone()
    }

    fn hessian(&self, x: &Vector) -> Option<Matrix> {
        Some(Matrix::zeros(x.len(), x.len()))
    }
}

/// `g(x) = aᵀx − b`.
#[derive(Debug, Clone)]
pub struct Affine {
    pub normal: Vector,
    pub bound: f64,
}

impl Constraint for Affine {
    fn value(&self, x: &Vector) -> f64 {
        self.normal.dot(x) - self.bound
    }

    fn subgradient(&self, _x: &Vector) -> Vector {
        self.normal.clone()
    }
}

/// `g(x) = ‖x‖₁ − radius`.
#[derive(Debug, Clone)]
pub struct L1Norm {
    pub radius: f64,
}

impl Constraint for L1Norm {
    fn value(&self, x: &Vector) -> f64 {
        x.iter().map(|v| v.abs()).sum::<f64>() - self.radius
    }

    fn subgradient(&self, x: &Vector) -> Vector {
        x.map(|v| if v > 0.0 { 1.0 } else if v < 0.0 { -1.0 } else { 0.0 })
    }
}

type ValueFn = dyn Fn(&Vector) -> f64 + Send + Sync;
type GradFn = dyn Fn(&Vector) -> Vector + Send + Sync;

/// Closure-backed objective, handy for tests and ad-hoc streams.
pub struct FnObjective {
    value: Box<ValueFn>,
    gradient: Box<GradFn>,
}

impl FnObjective {
    pub fn new(
        value: impl Fn(&Vector) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        FnObjective {
            value: Box::new(value),
            gradient: Box::new(gradient),
        }
    }
}

impl Objective for FnObjective {
    fn value(&self, x: &Vector) -> f64 {
        (self.value)(x)
    }

    fn gradient(&self, x: &Vector) -> Vector {
        (self.gradient)(x)
    }
}

/// Closure-backed constraint.
pub struct FnConstraint {
    value: Box<ValueFn>,
    subgradient: Box<GradFn>,
}

impl FnConstraint {
    pub fn new(
        value: impl Fn(&Vector) -> f64 + Send + Sync + 'static,
        subgradient: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        FnConstraint {
            value: Box::new(value),
            subgradient: Box::new(subgradient),
        }
    }
}

impl Constraint for FnConstraint {
    fn value(&self, x: &Vector) -> f64 {
        (self.value)(x)
    }

    fn subgradient(&self, x: &Vector) -> Vector {
        (self.subgradient)(x)
    }
}
