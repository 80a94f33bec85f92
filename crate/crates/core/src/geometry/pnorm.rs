//! Projections in the norm induced by a positive definite matrix.

use nalgebra::{Cholesky, SymmetricEigen};

use crate::error::{OcoError, Result};
use crate::linalg::symmetrize;
use crate::{Matrix, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct PnormProjection {
    pub point: Vector,
    /// KKT multiplier of the norm constraint; zero when `y` was feasible.
    pub multiplier: f64,
}

/// `argmin_{‖z‖ ≤ R} (z − y)ᵀ P (z − y)`.
///
/// The minimiser is `z(λ) = (P + λI)⁻¹ P y`; `λ` is bracketed by doubling and
/// then bisected on `‖z(λ)‖ = R`.
pub fn project_pnorm_ball(p: &Matrix, y: &Vector, radius: f64) -> Result<PnormProjection> {
    if !(radius > 0.0) {
        return Err(OcoError::invalid("radius", format!("must be positive, got {radius}")));
    }
    if p.nrows() != y.len() || p.ncols() != y.len() {
        return Err(OcoError::DimensionMismatch {
            expected: y.len(),
            got: p.nrows(),
        });
    }
    let sym = symmetrize(p);
    if Cholesky::new(sym.clone()).is_none() {
        return Err(OcoError::NotPositiveDefinite("projection metric"));
    }
    if y.norm() <= radius {
        return Ok(PnormProjection {
            point: y.clone(),
            multiplier: 0.0,
        });
    }

    let eig = SymmetricEigen::new(sym);
    let coords = eig.eigenvectors.transpose() * y;
    let mu = &eig.eigenvalues;
    let shrunk = |lambda: f64| -> Vector {
        Vector::from_fn(coords.len(), |i, _| mu[i] / (mu[i] + lambda) * coords[i])
    };

    let mut hi = 1.0;
    while shrunk(hi).norm() >= radius {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(OcoError::Numerical("multiplier bracket overflowed".into()));
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-12 * (1.0 + hi) {
        let mid = 0.5 * (lo + hi);
        if shrunk(mid).norm() > radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    Ok(PnormProjection {
        point: &eig.eigenvectors * shrunk(lambda),
        multiplier: lambda,
    })
}

/// `argmin_{lo ≤ z ≤ hi} (z − y)ᵀ P (z − y)` by cyclic coordinate descent,
/// which converges for positive definite `P`.
pub fn project_pnorm_box(p: &Matrix, y: &Vector, lo: &Vector, hi: &Vector) -> Result<Vector> {
    let n = y.len();
    if p.nrows() != n || lo.len() != n || hi.len() != n {
        return Err(OcoError::DimensionMismatch {
            expected: n,
            got: p.nrows(),
        });
    }
    let sym = symmetrize(p);
    if Cholesky::new(sym.clone()).is_none() {
        return Err(OcoError::NotPositiveDefinite("projection metric"));
    }
    let mut z = Vector::from_fn(n, |i, _| y[i].max(lo[i]).min(hi[i]));
    if z == *y {
        return Ok(z);
    }
    let scale = 1.0 + y.amax();
    for _ in 0..100_000 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let coupling: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| sym[(i, j)] * (z[j] - y[j]))
                .sum();
            let next = (y[i] - coupling / sym[(i, i)]).max(lo[i]).min(hi[i]);
            moved = moved.max((next - z[i]).abs());
            z[i] = next;
        }
        if moved <= 1e-14 * scale {
            return Ok(z);
        }
    }
    Err(OcoError::Numerical("box projection did not converge".into()))
}
