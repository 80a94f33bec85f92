//! Fixed-share exponentiated-gradient learners over capped simplices and
//! capped density matrices: best subset of experts, online PCA, and online
//! variance minimisation over the unit sphere and the simplex.
//!
//! Matrix exponentials and logarithms go through a symmetric eigendecomposition,
//! which costs O(n³) per round.

use rand::Rng;

use crate::error::{OcoError, Result};
use crate::geometry::{
    cap_eigenvalues, cap_probability, mixture_decompose, sample_corner, CappedDensityMatrix, CappedSimplexVector,
    Corner,
};
use crate::linalg::{asymmetry, outer, reassemble, sym_eigen, symmetrize};
use crate::{Matrix, Vector};

/// Floor applied to eigenvalues before taking logarithms.
pub const LOG_FLOOR: f64 = 1e-300;

/// Defaults used by the subspace demo.
pub const PRACTICAL_ETA: f64 = 1.0;
pub const PRACTICAL_ALPHA: f64 = 1e-5;

/// `α/n + (1−α)v_i`.
pub fn fixed_share(v: &[f64], alpha: f64) -> Vec<f64> {
    let floor = alpha / v.len() as f64;
    v.iter().map(|x| floor + (1.0 - alpha) * x).collect()
}

fn check_rates(eta: f64, alpha: f64) -> Result<()> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(OcoError::invalid("eta", format!("must be non-negative, got {eta}")));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(OcoError::invalid("alpha", format!("must lie in [0,1], got {alpha}")));
    }
    Ok(())
}

fn check_rank(n: usize, k: usize) -> Result<()> {
    if k == 0 || k >= n {
        return Err(OcoError::invalid("k", format!("need 1 <= k < n = {n}, got {k}")));
    }
    Ok(())
}

/// Normalised `exp(ln w − η·ℓ)` computed with max-subtraction.
fn exp_weights(log_values: &[f64]) -> Vec<f64> {
    let max = log_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = log_values.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|v| v / total).collect()
}

/// Spectrum and eigenvectors of `exp(ln W − ηC)/Tr(·)`.
pub fn matrix_eg_step(w: &Matrix, c: &Matrix, eta: f64) -> (Vec<f64>, Matrix) {
    let (mu, basis) = sym_eigen(w);
    let ln_mu = mu.map(|v| v.max(LOG_FLOOR).ln());
    let arg = symmetrize(&(reassemble(&ln_mu, &basis) - c * eta));
    let (values, basis) = sym_eigen(&arg);
    let values: Vec<f64> = values.iter().copied().collect();
    (exp_weights(&values), basis)
}

/// Clean a spectrum into a capped-simplex vector: clip rounding negatives,
/// renormalise, and clip rounding overshoot of the cap.
fn spectrum_as_capped(values: &[f64], d: usize) -> Result<CappedSimplexVector> {
    let clipped: Vec<f64> = values.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    let cap = 1.0 / d as f64;
    let w = clipped.into_iter().map(|v| (v / total).min(cap)).collect();
    CappedSimplexVector::new(w, d)
}

fn check_unit_covariance(c: &Matrix, n: usize) -> Result<()> {
    if c.nrows() != n || c.ncols() != n {
        return Err(OcoError::DimensionMismatch {
            expected: n,
            got: c.nrows(),
        });
    }
    if asymmetry(c) > 1e-9 {
        return Err(OcoError::OutOfDomain("covariance is not symmetric".into()));
    }
    let (values, _) = sym_eigen(c);
    if values[0] > 1.0 + 1e-9 || values[n - 1] < -1e-9 {
        return Err(OcoError::OutOfDomain(format!(
            "covariance eigenvalues [{}, {}] outside [0, 1]",
            values[n - 1],
            values[0]
        )));
    }
    Ok(())
}

/// Decision of one subset-of-experts round.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetDecision {
    /// Corner sampled from `w_t`; the `k` indices outside its support are the chosen experts.
    pub corner: Corner,
    /// `(n−k)·w_tᵀℓ_t`.
    pub expected_loss: f64,
    /// Loss of the sampled corner, `Σ_{i∈support} ℓ_i`.
    pub sampled_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpertSubsetState {
    w: CappedSimplexVector,
    eta: f64,
    alpha: f64,
    k: usize,
    round: usize,
}

impl ExpertSubsetState {
    /// Uniform start over `n` experts, choosing `k` of them each round.
    pub fn new(n: usize, k: usize, eta: f64, alpha: f64) -> Result<Self> {
        check_rank(n, k)?;
        check_rates(eta, alpha)?;
        Ok(ExpertSubsetState {
            w: CappedSimplexVector::uniform(n, n - k)?,
            eta,
            alpha,
            k,
            round: 1,
        })
    }

    pub fn with_weights(w: CappedSimplexVector, k: usize, eta: f64, alpha: f64) -> Result<Self> {
        check_rank(w.len(), k)?;
        check_rates(eta, alpha)?;
        if w.cap_denominator() != w.len() - k {
            return Err(OcoError::invalid("w", "cap denominator must be n - k"));
        }
        Ok(ExpertSubsetState {
            w,
            eta,
            alpha,
            k,
            round: 1,
        })
    }

    pub fn weights(&self) -> &[f64] {
        self.w.weights()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn round(&self) -> usize {
        self.round
    }

    /// Sample the decision from `w_t`, then update with the revealed losses.
    pub fn subset_expert_round<R: Rng + ?Sized>(&mut self, loss: &[f64], rng: &mut R) -> Result<SubsetDecision> {
        let n = self.w.len();
        if loss.len() != n {
            return Err(OcoError::DimensionMismatch {
                expected: n,
                got: loss.len(),
            });
        }
        if loss.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return Err(OcoError::OutOfDomain("expert losses must lie in [0, 1]".into()));
        }
        let d = n - self.k;
        let corner = sample_corner(&mixture_decompose(&self.w)?, rng)?;
        let expected_loss = d as f64 * self.w.weights().iter().zip(loss).map(|(w, l)| w * l).sum::<f64>();
        let sampled_loss = corner.support().iter().map(|&i| loss[i]).sum();

        let logs: Vec<f64> = self
            .w
            .weights()
            .iter()
            .zip(loss)
            .map(|(w, l)| w.max(LOG_FLOOR).ln() - self.eta * l)
            .collect();
        let mut v = exp_weights(&logs);
        for (vi, wi) in v.iter_mut().zip(self.w.weights()) {
            if *wi == 0.0 {
                *vi = 0.0;
            }
        }
        let shared = fixed_share(&v, self.alpha);
        self.w = cap_probability(&shared, d)?;
        self.round += 1;
        Ok(SubsetDecision {
            corner,
            expected_loss,
            sampled_loss,
        })
    }
}

/// Decision of one PCA round.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaDecision {
    /// Rank-`k` projection `P_t = I − R`.
    pub projection: Matrix,
    /// `(n−k)·Tr(W_t x xᵀ)`.
    pub expected_loss: f64,
    /// `‖x − P_t x‖²`.
    pub sampled_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcaState {
    w: CappedDensityMatrix,
    eta: f64,
    alpha: f64,
    k: usize,
    round: usize,
}

impl PcaState {
    /// Start from `I/n`, keeping a rank-`k` subspace.
    pub fn new(n: usize, k: usize, eta: f64, alpha: f64) -> Result<Self> {
        check_rank(n, k)?;
        check_rates(eta, alpha)?;
        Ok(PcaState {
            w: CappedDensityMatrix::maximally_mixed(n, n - k)?,
            eta,
            alpha,
            k,
            round: 1,
        })
    }

    pub fn with_density(w: CappedDensityMatrix, k: usize, eta: f64, alpha: f64) -> Result<Self> {
        check_rank(w.dim(), k)?;
        check_rates(eta, alpha)?;
        if w.cap_denominator() != w.dim() - k {
            return Err(OcoError::invalid("w", "cap denominator must be n - k"));
        }
        Ok(PcaState {
            w,
            eta,
            alpha,
            k,
            round: 1,
        })
    }

    pub fn density(&self) -> &CappedDensityMatrix {
        &self.w
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn round(&self) -> usize {
        self.round
    }

    /// Sample `P_t` from `W_t`, charge the loss of `x`, then update.
    pub fn pca_round<R: Rng + ?Sized>(&mut self, x: &Vector, rng: &mut R) -> Result<PcaDecision> {
        let n = self.w.dim();
        if x.len() != n {
            return Err(OcoError::DimensionMismatch {
                expected: n,
                got: x.len(),
            });
        }
        if x.norm() > 1.0 + 1e-9 {
            return Err(OcoError::OutOfDomain(format!("data point norm {} exceeds 1", x.norm())));
        }
        let d = n - self.k;
        let (projection, expected_loss) = self.sample_projection(x, rng)?;
        let residual = x - &projection * x;
        let sampled_loss = residual.norm_squared();

        let c = outer(x);
        let (values, basis) = matrix_eg_step(self.w.matrix(), &c, self.eta);
        let shared = fixed_share(&values, self.alpha);
        self.w = cap_eigenvalues(&Vector::from_vec(shared), &basis, d)?;
        self.round += 1;
        Ok(PcaDecision {
            projection,
            expected_loss,
            sampled_loss,
        })
    }

    fn sample_projection<R: Rng + ?Sized>(&self, x: &Vector, rng: &mut R) -> Result<(Matrix, f64)> {
        let n = self.w.dim();
        let d = n - self.k;
        let expected_loss = d as f64 * (x.transpose() * self.w.matrix() * x)[(0, 0)];
        let r = sample_complement(&self.w, rng)?;
        Ok((Matrix::identity(n, n) - r, expected_loss))
    }
}

/// Sample a corner `r` of the eigenvalues of `W` and return
/// `R = (n−k)·D̄ diag(r) D̄ᵀ`, the projection onto the discarded directions.
pub fn sample_complement<R: Rng + ?Sized>(w: &CappedDensityMatrix, rng: &mut R) -> Result<Matrix> {
    let d = w.cap_denominator();
    let (values, basis) = sym_eigen(w.matrix());
    let values: Vec<f64> = values.iter().copied().collect();
    let corner = sample_corner(&mixture_decompose(&spectrum_as_capped(&values, d)?)?, rng)?;
    let r = Vector::from_vec(corner.indicator());
    Ok(reassemble(&r, &basis))
}

/// `(α, D, η)` with `α = 1/(T(n−k)+1)`, `D = (n−k)·ln(n(1+(n−k)T)) + 1`,
/// `η = ln(1 + √(2D/L))`.
pub fn pca_params(horizon: usize, n: usize, k: usize, loss_budget: f64) -> Result<(f64, f64, f64)> {
    if horizon == 0 {
        return Err(OcoError::invalid("horizon", "must be at least 1"));
    }
    check_rank(n, k)?;
    if !(loss_budget > 0.0) {
        return Err(OcoError::invalid("loss_budget", format!("must be positive, got {loss_budget}")));
    }
    let m = (n - k) as f64;
    let t = horizon as f64;
    let alpha = 1.0 / (t * m + 1.0);
    let dd = m * (n as f64 * (1.0 + m * t)).ln() + 1.0;
    let eta = (1.0 + (2.0 * dd / loss_budget).sqrt()).ln();
    Ok((alpha, dd, eta))
}

/// Decision of one unit-sphere variance round.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitDecision {
    /// Unit eigenvector of `Y_t`, drawn by its eigenvalue.
    pub direction: Vector,
    /// `Tr(Y_t C_t)`.
    pub expected_loss: f64,
    /// `yᵀC_t y`.
    pub sampled_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarUnitState {
    y: CappedDensityMatrix,
    eta: f64,
    alpha: f64,
    round: usize,
}

impl VarUnitState {
    pub fn new(n: usize, eta: f64, alpha: f64) -> Result<Self> {
        check_rates(eta, alpha)?;
        Ok(VarUnitState {
            y: CappedDensityMatrix::maximally_mixed(n, 1)?,
            eta,
            alpha,
            round: 1,
        })
    }

    pub fn with_density(y: Matrix, eta: f64, alpha: f64) -> Result<Self> {
        check_rates(eta, alpha)?;
        Ok(VarUnitState {
            y: CappedDensityMatrix::new(y, 1)?,
            eta,
            alpha,
            round: 1,
        })
    }

    pub fn density(&self) -> &Matrix {
        self.y.matrix()
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn var_unit_round<R: Rng + ?Sized>(&mut self, c: &Matrix, rng: &mut R) -> Result<UnitDecision> {
        let n = self.y.dim();
        check_unit_covariance(c, n)?;
        let expected_loss = (self.y.matrix() * c).trace();
        let (values, basis) = sym_eigen(self.y.matrix());
        let probs: Vec<f64> = values.iter().map(|v| v.max(0.0)).collect();
        let total: f64 = probs.iter().sum();
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = n - 1;
        for (j, p) in probs.iter().enumerate() {
            acc += p;
            if target < acc {
                pick = j;
                break;
            }
        }
        let direction = basis.column(pick).normalize();
        let sampled_loss = (direction.transpose() * c * &direction)[(0, 0)];

        let (values, basis) = matrix_eg_step(self.y.matrix(), c, self.eta);
        let shared = Vector::from_vec(fixed_share(&values, self.alpha));
        self.y = CappedDensityMatrix::new(reassemble(&shared, &basis), 1)?;
        self.round += 1;
        Ok(UnitDecision {
            direction,
            expected_loss,
            sampled_loss,
        })
    }
}

/// `η = √(ln(n(1+T)))/√T`.
pub fn var_unit_eta_horizon(horizon: usize, n: usize) -> f64 {
    let t = horizon as f64;
    (n as f64 * (1.0 + t)).ln().sqrt() / t.sqrt()
}

/// `(η, α)` for the unit-sphere learner, with `α = 1/(T+1)`.
pub fn var_unit_params(horizon: usize, n: usize) -> (f64, f64) {
    (var_unit_eta_horizon(horizon, n), 1.0 / (horizon as f64 + 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarSimplexState {
    y: Vec<f64>,
    eta: f64,
    alpha: f64,
    round: usize,
}

impl VarSimplexState {
    pub fn new(n: usize, eta: f64, alpha: f64) -> Result<Self> {
        Self::with_weights(vec![1.0 / n as f64; n], eta, alpha)
    }

    pub fn with_weights(y: Vec<f64>, eta: f64, alpha: f64) -> Result<Self> {
        check_rates(eta, alpha)?;
        if y.is_empty() {
            return Err(OcoError::Empty("simplex weights"));
        }
        let total: f64 = y.iter().sum();
        if y.iter().any(|&v| v < 0.0) || (total - 1.0).abs() > 1e-9 {
            return Err(OcoError::OutOfDomain("weights are not on the simplex".into()));
        }
        Ok(VarSimplexState {
            y,
            eta,
            alpha,
            round: 1,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.y
    }

    pub fn round(&self) -> usize {
        self.round
    }

    /// Charge `yᵀCy`, then reweight by `exp(−η(Cy)_i)` and mix.
    pub fn var_simplex_round(&mut self, c: &Matrix) -> Result<f64> {
        let n = self.y.len();
        check_unit_covariance(c, n)?;
        let y = Vector::from_column_slice(&self.y);
        let cy = c * &y;
        let loss = y.dot(&cy);
        let logs: Vec<f64> = self
            .y
            .iter()
            .zip(cy.iter())
            .map(|(w, g)| w.max(LOG_FLOOR).ln() - self.eta * g)
            .collect();
        let mut v = exp_weights(&logs);
        for (vi, wi) in v.iter_mut().zip(&self.y) {
            if *wi == 0.0 {
                *vi = 0.0;
            }
        }
        self.y = fixed_share(&v, self.alpha);
        self.round += 1;
        Ok(loss)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexParams {
    pub c: f64,
    pub b: f64,
    pub a: f64,
    pub eta: f64,
    pub alpha: f64,
}

/// `c = √(2ln((1+T)n)+2)/√L`, `b = c/2`, `a = b/(2b+1)`, `η = 2a`, `α = 1/(T+1)`.
pub fn var_simplex_params(horizon: usize, n: usize, loss_budget: f64) -> Result<SimplexParams> {
    if !(loss_budget > 0.0) {
        return Err(OcoError::invalid("loss_budget", format!("must be positive, got {loss_budget}")));
    }
    let t = horizon as f64;
    let c = (2.0 * ((1.0 + t) * n as f64).ln() + 2.0).sqrt() / loss_budget.sqrt();
    let b = c / 2.0;
    let a = b / (2.0 * b + 1.0);
    Ok(SimplexParams {
        c,
        b,
        a,
        eta: 2.0 * a,
        alpha: 1.0 / (t + 1.0),
    })
}
