//! Problem constants consumed by every step-size and schedule formula.

use crate::error::{OcoError, Result};

/// Curvature and size constants of a problem instance.
///
/// `grad_bound` bounds the gradient norm, `diameter` bounds the decision norm,
/// `radius` is the radius of the Euclidean ball containing the feasible set.
/// The optional entries are only needed by the rules that use them.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureProfile {
    pub grad_bound: f64,
    pub diameter: f64,
    pub radius: f64,
    pub strong_convexity: Option<f64>,
    pub smoothness: Option<f64>,
    pub exp_concavity: Option<f64>,
    pub constraint_count: usize,
}

impl CurvatureProfile {
    /// Profile with only the mandatory constants set.
    pub fn new(grad_bound: f64, diameter: f64, radius: f64) -> Result<Self> {
        CurvatureProfile {
            grad_bound,
            diameter,
            radius,
            strong_convexity: None,
            smoothness: None,
            exp_concavity: None,
            constraint_count: 1,
        }
        .validated()
    }

    pub fn with_strong_convexity(mut self, ell: f64) -> Result<Self> {
        self.strong_convexity = Some(ell);
        self.validated()
    }

    pub fn with_smoothness(mut self, u: f64) -> Result<Self> {
        self.smoothness = Some(u);
        self.validated()
    }

    pub fn with_exp_concavity(mut self, alpha: f64) -> Result<Self> {
        self.exp_concavity = Some(alpha);
        self.validated()
    }

    pub fn with_constraint_count(mut self, m: usize) -> Result<Self> {
        self.constraint_count = m;
        self.validated()
    }

    /// Check every invariant; returns the profile unchanged on success.
    pub fn validated(self) -> Result<Self> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(OcoError::invalid(name, format!("must be positive, got {v}")))
            }
        };
        positive("grad_bound", self.grad_bound)?;
        positive("diameter", self.diameter)?;
        positive("radius", self.radius)?;
        if self.diameter < 1.0 {
            return Err(OcoError::invalid(
                "diameter",
                format!("normalised problems need D >= 1, got {}", self.diameter),
            ));
        }
        if let Some(v) = self.strong_convexity {
            positive("strong_convexity", v)?;
        }
        if let Some(v) = self.smoothness {
            positive("smoothness", v)?;
        }
        if let Some(v) = self.exp_concavity {
            positive("exp_concavity", v)?;
        }
        if let (Some(l), Some(u)) = (self.strong_convexity, self.smoothness) {
            if l > u {
                return Err(OcoError::invalid(
                    "strong_convexity",
                    format!("ell = {l} exceeds smoothness u = {u}"),
                ));
            }
        }
        if self.constraint_count == 0 {
            return Err(OcoError::invalid("constraint_count", "must be at least 1"));
        }
        Ok(self)
    }

    pub fn ell(&self) -> Result<f64> {
        self.strong_convexity
            .ok_or(OcoError::MissingConstant("strong_convexity"))
    }

    pub fn u(&self) -> Result<f64> {
        self.smoothness.ok_or(OcoError::MissingConstant("smoothness"))
    }

    pub fn alpha(&self) -> Result<f64> {
        self.exp_concavity
            .ok_or(OcoError::MissingConstant("exp_concavity"))
    }
}
