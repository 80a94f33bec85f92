//! Seeded loss streams for the experiments.

use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use sha2::{Digest, Sha256};

use crate::error::{OcoError, Result};
use crate::geometry::project_ball;
use crate::oracle::{Affine, Constraint, L1Norm, Linear, LossRound, Objective, Quadratic};
use crate::{Matrix, Vector};

/// Independent generator for the named component of a run, so adding a
/// consumer never shifts another one's draws.
pub fn substream(seed: u64, name: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(name.as_bytes());
    let digest = h.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(key)
}

/// Linear losses `c_tᵀθ` with `c_t` uniform on `[0,1.2]×[0,1]` rescaled to
/// unit norm, under the constraint `|θ₁| + |θ₂| − 1 ≤ 0`.
pub fn gen_toy_stream(horizon: usize, seed: u64) -> Vec<LossRound> {
    let mut rng = substream(seed, "toy/costs");
    let constraint: Arc<dyn Constraint> = Arc::new(L1Norm { radius: 1.0 });
    (0..horizon)
        .map(|_| {
            let c = loop {
                let c = Vector::from_vec(vec![rng.random_range(0.0..1.2), rng.random_range(0.0..1.0)]);
                let norm = c.norm();
                if norm > 1e-12 {
                    break c / norm;
                }
            };
            LossRound::new(Linear { coefficients: c }).with_shared_constraints(std::slice::from_ref(&constraint))
        })
        .collect()
}

/// Points on a piecewise-constant low-rank distribution: each segment draws
/// `x = A z` with `A` an `n×rank` Gaussian matrix and `z ~ N(0, I)`, and
/// points longer than one are rescaled onto the unit sphere.
pub fn gen_subspace_stream(horizon: usize, n: usize, rank: usize, segments: usize, seed: u64) -> Result<Vec<Vector>> {
    if segments == 0 || !horizon.is_multiple_of(segments) {
        return Err(OcoError::invalid("segments", format!("{segments} does not divide T = {horizon}")));
    }
    if rank == 0 || rank > n {
        return Err(OcoError::invalid("rank", format!("need 1 <= rank <= n = {n}, got {rank}")));
    }
    let mut basis_rng = substream(seed, "subspace/basis");
    let mut sample_rng = substream(seed, "subspace/samples");
    let scale = 1.0 / ((n * rank) as f64).sqrt();
    let per = horizon / segments;
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..segments {
        let a = Matrix::from_fn(n, rank, |_, _| {
            let v: f64 = StandardNormal.sample(&mut basis_rng);
            v * scale * (n as f64).sqrt()
        });
        for _ in 0..per {
            let z = Vector::from_fn(rank, |_, _| StandardNormal.sample(&mut sample_rng));
            let x = &a * z;
            out.push(project_ball(&x, 1.0));
        }
    }
    Ok(out)
}

/// `½‖Y_t − X‖²_F` over `X` flattened column-major, with `Y_t` a uniformly
/// random permutation matrix. Row and column sums are split into paired
/// inequalities and nonnegativity is listed entrywise.
pub fn gen_permutation_stream(horizon: usize, dim: usize, seed: u64) -> Result<Vec<LossRound>> {
    if dim < 2 {
        return Err(OcoError::invalid("dim", format!("need dim >= 2, got {dim}")));
    }
    let mut rng = substream(seed, "dsm/permutations");
    let constraints = doubly_stochastic_constraints(dim);
    let mut perm: Vec<usize> = (0..dim).collect();
    Ok((0..horizon)
        .map(|_| {
            perm.shuffle(&mut rng);
            LossRound::new(Quadratic::isotropic(permutation_vector(&perm))).with_shared_constraints(&constraints)
        })
        .collect())
}

/// Column-major flattening of the permutation matrix with `Y[i, perm[i]] = 1`.
pub fn permutation_vector(perm: &[usize]) -> Vector {
    let n = perm.len();
    let mut y = Vector::zeros(n * n);
    for (i, &j) in perm.iter().enumerate() {
        y[j * n + i] = 1.0;
    }
    y
}

pub fn doubly_stochastic_constraints(dim: usize) -> Vec<Arc<dyn Constraint>> {
    let idx = |i: usize, j: usize| j * dim + i;
    let mut out: Vec<Arc<dyn Constraint>> = Vec::new();
    for i in 0..dim {
        let mut row = Vector::zeros(dim * dim);
        let mut col = Vector::zeros(dim * dim);
        for j in 0..dim {
            row[idx(i, j)] = 1.0;
            col[idx(j, i)] = 1.0;
        }
        for a in [row, col] {
            // a·x ≥ 1 and a·x ≤ 1
            out.push(Arc::new(Affine {
                normal: -&a,
                bound: -1.0,
            }));
            out.push(Arc::new(Affine { normal: a, bound: 1.0 }));
        }
    }
    for k in 0..dim * dim {
        let mut e = Vector::zeros(dim * dim);
        e[k] = -1.0;
        out.push(Arc::new(Affine { normal: e, bound: 0.0 }));
    }
    out
}

/// Generator costs, emissions and limits of the three-unit dispatch problem.
#[derive(Debug, Clone, PartialEq)]
pub struct DispatchModel {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub d: Vec<f64>,
    /// Linear emission terms. Unknown for the reference system, so zero by default.
    pub e: Vec<f64>,
    pub e_max: f64,
    pub xi: f64,
    pub theta_max: Vec<f64>,
}

impl Default for DispatchModel {
    fn default() -> Self {
        DispatchModel {
            a: vec![0.2, 0.12, 0.14],
            b: vec![1.5, 1.0, 0.6],
            d: vec![0.26, 0.38, 0.37],
            e: vec![0.0; 3],
            e_max: 100.0,
            xi: 0.5,
            theta_max: vec![20.0, 15.0, 18.0],
        }
    }
}

impl DispatchModel {
    pub fn validate(&self) -> Result<()> {
        let n = self.a.len();
        for (name, v) in [("b", &self.b), ("d", &self.d), ("e", &self.e), ("theta_max", &self.theta_max)] {
            if v.len() != n {
                return Err(OcoError::LengthMismatch {
                    what: name,
                    left: n,
                    right: v.len(),
                });
            }
        }
        if n == 0 {
            return Err(OcoError::Empty("generators"));
        }
        if self.a.iter().any(|&v| !(v > 0.0)) || self.theta_max.iter().any(|&v| !(v > 0.0)) {
            return Err(OcoError::invalid("dispatch model", "a and theta_max must be positive"));
        }
        if self.d.iter().any(|&v| v < 0.0) || !(self.xi >= 0.0) || !(self.e_max > 0.0) {
            return Err(OcoError::invalid("dispatch model", "d, xi must be >= 0 and e_max > 0"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    /// `c_i(θ) = ½a_iθ² + b_iθ`.
    pub fn unit_cost(&self, i: usize, theta: f64) -> f64 {
        0.5 * self.a[i] * theta * theta + self.b[i] * theta
    }

    pub fn upper(&self) -> Vector {
        Vector::from_column_slice(&self.theta_max)
    }

    /// Gradient-norm bound over the box for demands in `[0, max_demand]`,
    /// covering both the loss and the emission constraint.
    pub fn grad_bound(&self, max_demand: f64) -> f64 {
        let total: f64 = self.theta_max.iter().sum();
        let imbalance = total.max(max_demand);
        let loss: f64 = (0..self.dim())
            .map(|i| (self.a[i] * self.theta_max[i] + self.b[i].abs() + 2.0 * self.xi * imbalance).powi(2))
            .sum::<f64>()
            .sqrt();
        let emission: f64 = (0..self.dim())
            .map(|i| (2.0 * self.d[i] * self.theta_max[i] + self.e[i].abs()).powi(2))
            .sum::<f64>()
            .sqrt();
        loss.max(emission)
    }

    /// Strong convexity of every round's loss, `min a_i`.
    pub fn strong_convexity(&self) -> f64 {
        self.a.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `Σ(½a_iθ_i² + b_iθ_i) + ξ(Σθ_i − d_t)²`.
#[derive(Debug, Clone)]
pub struct DispatchLoss {
    model: Arc<DispatchModel>,
    demand: f64,
}

impl DispatchLoss {
    pub fn demand(&self) -> f64 {
        self.demand
    }
}

impl Objective for DispatchLoss {
    fn value(&self, x: &Vector) -> f64 {
        let m = &self.model;
        let cost: f64 = x.iter().enumerate().map(|(i, &v)| m.unit_cost(i, v)).sum();
        let gap = x.sum() - self.demand;
        cost + m.xi * gap * gap
    }

    fn gradient(&self, x: &Vector) -> Vector {
        let m = &self.model;
        let gap = x.sum() - self.demand;
        Vector::from_fn(x.len(), |i, _| m.a[i] * x[i] + m.b[i] + 2.0 * m.xi * gap)
    }

    fn hessian(&self, x: &Vector) -> Option<Matrix> {
        let n = x.len();
        let m = &self.model;
        Some(Matrix::from_fn(n, n, |i, j| 2.0 * m.xi + if i == j { m.a[i] } else { 0.0 }))
    }
}

/// `Σ(d_iθ_i² + e_iθ_i) − E_max ≤ 0`.
#[derive(Debug, Clone)]
pub struct EmissionCap {
    model: Arc<DispatchModel>,
}

impl Constraint for EmissionCap {
    fn value(&self, x: &Vector) -> f64 {
        let m = &self.model;
        x.iter().enumerate().map(|(i, &v)| m.d[i] * v * v + m.e[i] * v).sum::<f64>() - m.e_max
    }

    fn subgradient(&self, x: &Vector) -> Vector {
        let m = &self.model;
        Vector::from_fn(x.len(), |i, _| 2.0 * m.d[i] * x[i] + m.e[i])
    }
}

pub fn gen_dispatch_stream(model: &DispatchModel, demand: &[f64]) -> Result<Vec<LossRound>> {
    model.validate()?;
    if let Some(bad) = demand.iter().find(|&&d| !(d >= 0.0 && d.is_finite())) {
        return Err(OcoError::OutOfDomain(format!("demand {bad} is not a finite nonnegative value")));
    }
    let shared = Arc::new(model.clone());
    let cap: Arc<dyn Constraint> = Arc::new(EmissionCap { model: shared.clone() });
    Ok(demand
        .iter()
        .map(|&d| {
            LossRound::new(DispatchLoss {
                model: shared.clone(),
                demand: d,
            })
            .with_shared_constraints(std::slice::from_ref(&cap))
        })
        .collect())
}

/// Samples per day of five-minute demand data.
pub const SAMPLES_PER_DAY: usize = 288;
pub const DEMAND_LOW: f64 = 10.0;
pub const DEMAND_HIGH: f64 = 45.0;

/// Daily sinusoid with a slower weekly drift and Gaussian noise, rescaled to
/// `[10, 45]`.
pub fn synthetic_demand(horizon: usize, seed: u64) -> Vec<f64> {
    let mut rng = substream(seed, "dispatch/demand");
    let noise = Normal::new(0.0, 0.05).expect("valid normal");
    let raw: Vec<f64> = (0..horizon)
        .map(|t| {
            let day = t as f64 / SAMPLES_PER_DAY as f64;
            let daily = (2.0 * std::f64::consts::PI * (day - 0.3)).sin();
            let weekly = 0.2 * (2.0 * std::f64::consts::PI * day / 7.0).sin();
            daily + weekly + noise.sample(&mut rng)
        })
        .collect();
    rescale_demand(&raw)
}

/// Affine map of the samples onto `[10, 45]`. A constant series maps to the midpoint.
pub fn rescale_demand(raw: &[f64]) -> Vec<f64> {
    let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return vec![0.5 * (DEMAND_LOW + DEMAND_HIGH); raw.len()];
    }
    raw.iter()
        .map(|v| DEMAND_LOW + (v - lo) / (hi - lo) * (DEMAND_HIGH - DEMAND_LOW))
        .collect()
}

/// Read a `t,demand` CSV and rescale it.
pub fn read_demand_csv(path: &Path) -> Result<Vec<f64>> {
    let io = |e: std::io::Error| OcoError::Io {
        path: path.display().to_string(),
        source: e,
    };
    let file = std::fs::File::open(path).map_err(io)?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(file);
    let parse = |reason: String| OcoError::Parse {
        path: path.display().to_string(),
        reason,
    };
    let headers = reader.headers().map_err(|e| parse(e.to_string()))?.clone();
    let column = headers
        .iter()
        .position(|h| h == "demand")
        .ok_or_else(|| parse("missing `demand` column".into()))?;
    let mut raw = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| parse(e.to_string()))?;
        let field = record.get(column).ok_or_else(|| parse(format!("row {} has no demand", line + 2)))?;
        let v: f64 = field.parse().map_err(|_| parse(format!("row {}: `{field}` is not a number", line + 2)))?;
        if !(v >= 0.0 && v.is_finite()) {
            return Err(parse(format!("row {}: demand must be finite and nonnegative", line + 2)));
        }
        raw.push(v);
    }
    if raw.is_empty() {
        return Err(parse("no demand rows".into()));
    }
    Ok(rescale_demand(&raw))
}

/// `(θ − ε_t)²` with `ε_t` uniform on `{−2σ, 2σ}`. Also returns the `ε_t`.
pub fn gen_adversarial_stream(horizon: usize, sigma: f64, seed: u64) -> Result<(Vec<LossRound>, Vec<f64>)> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(OcoError::invalid("sigma", format!("must be positive, got {sigma}")));
    }
    let mut rng = substream(seed, "adversarial/signs");
    let eps: Vec<f64> = (0..horizon)
        .map(|_| if rng.random::<bool>() { 2.0 * sigma } else { -2.0 * sigma })
        .collect();
    let rounds = eps
        .iter()
        .map(|&e| LossRound::new(Quadratic::scaled(Vector::from_element(1, e), 2.0)))
        .collect();
    Ok((rounds, eps))
}

/// The comparator `z_t = ε_t/2` paired with the adversarial stream.
pub fn adversarial_comparators(eps: &[f64]) -> Vec<Vector> {
    eps.iter().map(|&e| Vector::from_element(1, 0.5 * e)).collect()
}

/// `½‖θ − y_t‖²` with `y_t = c + noise`, projected into the ball of radius `radius`.
/// The centre `c` is drawn once per stream.
pub fn gen_quadratic_stream(horizon: usize, n: usize, radius: f64, noise: f64, seed: u64) -> Vec<(LossRound, Vector)> {
    let mut rng = substream(seed, "quadratic/targets");
    let center = project_ball(&Vector::from_fn(n, |_, _| rng.random_range(-radius..radius)), 0.5 * radius);
    (0..horizon)
        .map(|_| {
            let y = project_ball(&(&center + Vector::from_fn(n, |_, _| rng.random_range(-noise..noise))), radius);
            (LossRound::new(Quadratic::isotropic(y.clone())), y)
        })
        .collect()
}

/// `½‖θ − c_k‖²` where the minimiser `c_k` jumps to a fresh random point of
/// the ball of radius `0.8·radius` at the start of each of `pieces` equal segments.
pub fn gen_jump_stream(horizon: usize, n: usize, radius: f64, pieces: usize, seed: u64) -> Result<Vec<(LossRound, Vector)>> {
    if pieces == 0 || !horizon.is_multiple_of(pieces) {
        return Err(OcoError::invalid("pieces", format!("{pieces} does not divide T = {horizon}")));
    }
    let mut rng = substream(seed, "jump/centers");
    let per = horizon / pieces;
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..pieces {
        let c = project_ball(&Vector::from_fn(n, |_, _| rng.random_range(-radius..radius)), 0.8 * radius);
        for _ in 0..per {
            out.push((LossRound::new(Quadratic::isotropic(c.clone())), c.clone()));
        }
    }
    Ok(out)
}
