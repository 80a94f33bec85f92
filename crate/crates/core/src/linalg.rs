//! Small dense helpers over nalgebra shared by the matrix-valued learners.

use nalgebra::SymmetricEigen;

use crate::error::{OcoError, Result};
use crate::{Matrix, Vector};

/// `(M + Mᵀ)/2`.
pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// Largest absolute entry of `M − Mᵀ`.
pub fn asymmetry(m: &Matrix) -> f64 {
    (m - m.transpose()).amax()
}

/// Eigen-decomposition of the symmetric part of `m`, eigenvalues sorted in
/// descending order with the eigenvector columns permuted to match.
pub fn sym_eigen(m: &Matrix) -> (Vector, Matrix) {
    let eig = SymmetricEigen::new(symmetrize(m));
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let values = Vector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// `U diag(values) Uᵀ`, symmetrised.
pub fn reassemble(values: &Vector, basis: &Matrix) -> Matrix {
    let scaled = basis * Matrix::from_diagonal(values);
    symmetrize(&(scaled * basis.transpose()))
}

/// Spectral norm of a symmetric matrix.
pub fn sym_spectral_norm(m: &Matrix) -> f64 {
    SymmetricEigen::new(symmetrize(m))
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// Inverse of a symmetric positive definite matrix via Cholesky.
pub fn spd_inverse(m: &Matrix, what: &'static str) -> Result<Matrix> {
    let chol = nalgebra::Cholesky::new(symmetrize(m)).ok_or(OcoError::NotPositiveDefinite(what))?;
    Ok(symmetrize(&chol.inverse()))
}

pub fn outer(v: &Vector) -> Matrix {
    v * v.transpose()
}

pub fn all_finite(v: &Vector) -> bool {
    v.iter().all(|x| x.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn eigen_is_sorted_and_reassembles() {
        let m = dmatrix![2.0, 1.0, 0.0; 1.0, 3.0, 0.5; 0.0, 0.5, 1.0];
        let (vals, vecs) = sym_eigen(&m);
        assert!(vals[0] >= vals[1] && vals[1] >= vals[2]);
        assert!((reassemble(&vals, &vecs) - &m).amax() < 1e-12);
    }

    #[test]
    fn spd_inverse_rejects_indefinite() {
        assert!(spd_inverse(&dmatrix![1.0, 0.0; 0.0, -1.0], "test").is_err());
        let inv = spd_inverse(&dmatrix![4.0, 0.0; 0.0, 2.0], "test").unwrap();
        assert!((inv - dmatrix![0.25, 0.0; 0.0, 0.5]).amax() < 1e-15);
    }
}
