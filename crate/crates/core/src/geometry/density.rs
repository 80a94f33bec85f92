use crate::error::{OcoError, Result};
use crate::geometry::simplex::cap_probability;
use crate::linalg::{asymmetry, reassemble, sym_eigen};
use crate::{Matrix, Vector};

/// Symmetric PSD matrix with unit trace and eigenvalues at most `1/d`.
#[derive(Debug, Clone, PartialEq)]
pub struct CappedDensityMatrix {
    matrix: Matrix,
    cap_denominator: usize,
}

impl CappedDensityMatrix {
    pub fn new(matrix: Matrix, d: usize) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(OcoError::DimensionMismatch {
                expected: n,
                got: matrix.ncols(),
            });
        }
        if d == 0 || d > n {
            return Err(OcoError::invalid("d", format!("need 1 <= d <= n = {n}, got {d}")));
        }
        if asymmetry(&matrix) > 1e-10 {
            return Err(OcoError::OutOfDomain("density matrix is not symmetric".into()));
        }
        let trace = matrix.trace();
        if (trace - 1.0).abs() > 1e-9 {
            return Err(OcoError::OutOfDomain(format!("trace {trace} is not 1")));
        }
        let (values, _) = sym_eigen(&matrix);
        let cap = 1.0 / d as f64;
        if values[0] > cap + 1e-9 || values[n - 1] < -1e-9 {
            return Err(OcoError::OutOfDomain(format!(
                "eigenvalues [{}, {}] outside [0, 1/{d}]",
                values[n - 1],
                values[0]
            )));
        }
        Ok(CappedDensityMatrix {
            matrix,
            cap_denominator: d,
        })
    }

    /// `I/n`.
    pub fn maximally_mixed(n: usize, d: usize) -> Result<Self> {
        Self::new(Matrix::identity(n, n) / n as f64, d)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn cap_denominator(&self) -> usize {
        self.cap_denominator
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Cap a spectrum given in some orthonormal basis and reassemble the matrix.
/// Tiny negative eigenvalues (|μ| ≤ 1e−12) are treated as zero.
pub fn cap_eigenvalues(values: &Vector, basis: &Matrix, d: usize) -> Result<CappedDensityMatrix> {
    let mut mu: Vec<f64> = values.iter().copied().collect();
    for v in mu.iter_mut() {
        if *v < 0.0 {
            if *v >= -1e-12 {
                *v = 0.0;
            } else {
                return Err(OcoError::OutOfDomain(format!("negative eigenvalue {v}")));
            }
        }
    }
    let n = mu.len();
    let capped = if mu.iter().all(|&v| v <= 1.0 / d as f64) {
        mu
    } else {
        cap_probability(&mu, d)?.into_weights()
    };
    let m = reassemble(&Vector::from_vec(capped), basis);
    debug_assert_eq!(m.nrows(), n);
    CappedDensityMatrix::new(m, d)
}

/// Cap the eigenvalues of a trace-one symmetric PSD matrix, keeping its
/// eigenvectors.
pub fn cap_density(m: &Matrix, d: usize) -> Result<CappedDensityMatrix> {
    if asymmetry(m) > 1e-8 {
        return Err(OcoError::OutOfDomain("matrix is not symmetric".into()));
    }
    if d == 0 || d >= m.nrows() {
        return Err(OcoError::invalid("d", format!("need 1 <= d < n = {}, got {d}", m.nrows())));
    }
    let (values, basis) = sym_eigen(m);
    cap_eigenvalues(&values, &basis, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
        let a = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        a.qr().q()
    }

    #[test]
    fn already_capped_is_unchanged() {
        let m = Matrix::identity(4, 4) / 4.0;
        let c = cap_density(&m, 2).unwrap();
        assert!((c.matrix() - &m).amax() < 1e-15);
    }

    #[test]
    fn diagonal_case_reduces_to_vector_capping() {
        let m = Matrix::from_diagonal(&dvector![0.6, 0.3, 0.1]);
        let c = cap_density(&m, 2).unwrap();
        let expected = Matrix::from_diagonal(&dvector![0.5, 0.375, 0.125]);
        assert!((c.matrix() - expected).amax() < 1e-12);
    }

    #[test]
    fn rotation_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = random_orthogonal(3, &mut rng);
        let m = Matrix::from_diagonal(&dvector![0.6, 0.3, 0.1]);
        let rotated = &q * &m * q.transpose();
        let c = cap_density(&rotated, 2).unwrap();
        let expected = &q * Matrix::from_diagonal(&dvector![0.5, 0.375, 0.125]) * q.transpose();
        assert!((c.matrix() - expected).amax() < 1e-8);
    }

    #[test]
    fn random_conjugation_commutes_with_capping() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let n = 6;
            let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
            let s: f64 = raw.iter().sum();
            let base = random_orthogonal(n, &mut rng);
            let m = &base * Matrix::from_diagonal(&Vector::from_iterator(n, raw.iter().map(|v| v / s))) * base.transpose();
            let q = random_orthogonal(n, &mut rng);
            let lhs = cap_density(&(&q * &m * q.transpose()), 3).unwrap();
            let rhs = &q * cap_density(&m, 3).unwrap().matrix() * q.transpose();
            assert!((lhs.matrix() - rhs).amax() < 1e-8);
        }
    }

    #[test]
    fn asymmetric_input_is_rejected() {
        let m = dmatrix![0.5, 0.1; 0.0, 0.5];
        assert!(cap_density(&m, 1).is_err());
    }
}
