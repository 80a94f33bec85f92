//! Feasible sets and the projection primitives built on them.

mod density;
mod pnorm;
mod simplex;

pub use density::{cap_density, cap_eigenvalues, CappedDensityMatrix};
pub use pnorm::{project_pnorm_ball, project_pnorm_box, PnormProjection};
pub use simplex::{
    cap_probability, mixture_decompose, sample_corner, CappedSimplexVector, Corner, Decomposition,
};

use crate::error::{OcoError, Result};
use crate::{Matrix, Vector};

/// Convex sets a learner can be confined to.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet {
    Unbounded,
    /// Euclidean ball of the given radius centred at the origin.
    Ball { radius: f64 },
    /// Axis-aligned box `lo ≤ x ≤ hi`.
    Box { lo: Vector, hi: Vector },
    /// ℓ₁ ball of the given radius centred at the origin.
    L1Ball { radius: f64 },
}

impl FeasibleSet {
    pub fn ball(radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(OcoError::invalid("radius", format!("must be positive, got {radius}")));
        }
        Ok(FeasibleSet::Ball { radius })
    }

    pub fn boxed(lo: Vector, hi: Vector) -> Result<Self> {
        check_box(&lo, &hi)?;
        Ok(FeasibleSet::Box { lo, hi })
    }

    /// Euclidean projection.
    pub fn project(&self, y: &Vector) -> Vector {
        match self {
            FeasibleSet::Unbounded => y.clone(),
            FeasibleSet::Ball { radius } => project_ball(y, *radius),
            FeasibleSet::Box { lo, hi } => clamp(y, lo, hi),
            FeasibleSet::L1Ball { radius } => project_l1_ball(y, *radius),
        }
    }

    /// Projection in the norm `‖z − y‖_P`. Only balls and boxes support it.
    pub fn project_in_norm(&self, p: &Matrix, y: &Vector) -> Result<Vector> {
        match self {
            FeasibleSet::Unbounded => Ok(y.clone()),
            FeasibleSet::Ball { radius } => Ok(project_pnorm_ball(p, y, *radius)?.point),
            FeasibleSet::Box { lo, hi } => project_pnorm_box(p, y, lo, hi),
            FeasibleSet::L1Ball { .. } => Err(OcoError::invalid(
                "set",
                "P-norm projection is only available for balls and boxes",
            )),
        }
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        match self {
            FeasibleSet::Unbounded => true,
            FeasibleSet::Ball { radius } => x.norm() <= radius + tol,
            FeasibleSet::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi.iter()))
                .all(|(v, (l, h))| *v >= l - tol && *v <= h + tol),
            FeasibleSet::L1Ball { radius } => x.lp_norm(1) <= radius + tol,
        }
    }

    /// A natural starting point: the centre of the set.
    pub fn center(&self, dim: usize) -> Vector {
        match self {
            FeasibleSet::Box { lo, hi } => (lo + hi) * 0.5,
            _ => Vector::zeros(dim),
        }
    }

    /// Draw a point of the set uniformly in each coordinate of a bounding box
    /// and project it back. Used for optimality spot checks.
    pub fn random_point<R: rand::Rng + ?Sized>(&self, dim: usize, rng: &mut R) -> Vector {
        let (lo, hi) = match self {
            FeasibleSet::Unbounded => (Vector::repeat(dim, -1.0), Vector::repeat(dim, 1.0)),
            FeasibleSet::Ball { radius } | FeasibleSet::L1Ball { radius } => {
                (Vector::repeat(dim, -radius), Vector::repeat(dim, *radius))
            }
            FeasibleSet::Box { lo, hi } => (lo.clone(), hi.clone()),
        };
        let raw = Vector::from_fn(dim, |i, _| rng.random_range(lo[i]..=hi[i]));
        self.project(&raw)
    }
}

/// Radial projection onto the ball of radius `r`.
pub fn project_ball(y: &Vector, r: f64) -> Vector {
    let norm = y.norm();
    if norm <= r {
        y.clone()
    } else {
        y * (r / norm)
    }
}

fn check_box(lo: &Vector, hi: &Vector) -> Result<()> {
    if lo.len() != hi.len() {
        return Err(OcoError::DimensionMismatch {
            expected: lo.len(),
            got: hi.len(),
        });
    }
    if let Some(i) = (0..lo.len()).find(|&i| lo[i] > hi[i]) {
        return Err(OcoError::invalid(
            "box",
            format!("lower bound {} exceeds upper bound {} at {i}", lo[i], hi[i]),
        ));
    }
    Ok(())
}

fn clamp(y: &Vector, lo: &Vector, hi: &Vector) -> Vector {
    Vector::from_fn(y.len(), |i, _| y[i].max(lo[i]).min(hi[i]))
}

/// Componentwise clamp onto `[lo, hi]`.
pub fn project_box(y: &Vector, lo: &Vector, hi: &Vector) -> Result<Vector> {
    check_box(lo, hi)?;
    if y.len() != lo.len() {
        return Err(OcoError::DimensionMismatch {
            expected: lo.len(),
            got: y.len(),
        });
    }
    Ok(clamp(y, lo, hi))
}

/// Euclidean projection onto the ℓ₁ ball by soft-thresholding at the level
/// found from the sorted magnitudes.
pub fn project_l1_ball(y: &Vector, r: f64) -> Vector {
    if y.lp_norm(1) <= r {
        return y.clone();
    }
    let mut mags: Vec<f64> = y.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &m) in mags.iter().enumerate() {
        cumsum += m;
        let candidate = (cumsum - r) / (j as f64 + 1.0);
        if m > candidate {
            theta = candidate;
        } else {
            break;
        }
    }
    y.map(|v| v.signum() * (v.abs() - theta).max(0.0))
}
