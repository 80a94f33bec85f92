//! Best fixed decisions in hindsight.

use std::sync::Arc;

use crate::accounting::RoundTrace;
use crate::error::{OcoError, Result};
use crate::geometry::FeasibleSet;
use crate::linalg::{outer, sym_eigen};
use crate::oracle::{Constraint, LossRound};
use crate::{Matrix, Vector};

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub point: Vector,
    /// Mean loss of `point` over the rounds.
    pub average_loss: f64,
    pub iterations: usize,
    /// False when the iteration cap was hit first.
    pub converged: bool,
}

fn average(losses: &[LossRound], x: &Vector) -> f64 {
    losses.iter().map(|l| l.value(x)).sum::<f64>() / losses.len() as f64
}

fn average_gradient(losses: &[LossRound], x: &Vector) -> Vector {
    let mut g = Vector::zeros(x.len());
    for l in losses {
        g += l.gradient(x);
    }
    g / losses.len() as f64
}

/// Projected gradient descent on `F(x) + penalty(x)` with a step that only
/// ever shrinks (Armijo backtracking carried across iterations).
fn projected_descent(
    start: Vector,
    set: &FeasibleSet,
    tolerance: f64,
    objective: &dyn Fn(&Vector) -> f64,
    gradient: &dyn Fn(&Vector) -> Vector,
) -> (Vector, usize, bool) {
    let mut x = set.project(&start);
    let mut fx = objective(&x);
    let mut step = 1.0;
    for it in 1..=MAX_ITERATIONS {
        let g = gradient(&x);
        let mut accepted = None;
        while step > 1e-20 {
            let cand = set.project(&(&x - &g * step));
            let fc = objective(&cand);
            let moved = &cand - &x;
            // sufficient decrease for the projected step
            if fc <= fx + g.dot(&moved) + moved.norm_squared() / (2.0 * step) + 1e-15 * fx.abs() {
                accepted = Some((cand, fc));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, fc)) = accepted else {
            return (x, it, true);
        };
        let movement = (&cand - &x).norm();
        x = cand;
        fx = fc;
        if movement < tolerance {
            return (x, it, true);
        }
    }
    (x, MAX_ITERATIONS, false)
}

/// Minimise the average loss over `set`.
pub fn offline_oracle(losses: &[LossRound], set: &FeasibleSet, dim: usize, tolerance: f64) -> Result<OracleResult> {
    check_inputs(losses, dim)?;
    let obj = |x: &Vector| average(losses, x);
    let grad = |x: &Vector| average_gradient(losses, x);
    let (point, iterations, converged) = projected_descent(set.center(dim), set, tolerance, &obj, &grad);
    if !converged {
        log::warn!("offline oracle hit the iteration cap");
    }
    Ok(OracleResult {
        average_loss: average(losses, &point),
        point,
        iterations,
        converged,
    })
}

/// Minimise the average loss over `set` subject to `g_i(x) ≤ 0` with an
/// augmented Lagrangian outer loop.
pub fn offline_oracle_constrained(
    losses: &[LossRound],
    set: &FeasibleSet,
    dim: usize,
    constraints: &[Arc<dyn Constraint>],
    tolerance: f64,
) -> Result<OracleResult> {
    check_inputs(losses, dim)?;
    let mut mu = vec![0.0; constraints.len()];
    let mut rho = 10.0;
    let mut x = set.center(dim);
    let mut total_iterations = 0;
    let mut converged = false;
    for _ in 0..60 {
        let mu_now = mu.clone();
        let obj = |z: &Vector| {
            let pen: f64 = constraints
                .iter()
                .zip(&mu_now)
                .map(|(c, m)| {
                    let s = (m + rho * c.value(z)).max(0.0);
                    (s * s - m * m) / (2.0 * rho)
                })
                .sum();
            average(losses, z) + pen
        };
        let grad = |z: &Vector| {
            let mut g = average_gradient(losses, z);
            for (c, m) in constraints.iter().zip(&mu_now) {
                let s = (m + rho * c.value(z)).max(0.0);
                if s > 0.0 {
                    g.axpy(s, &c.subgradient(z), 1.0);
                }
            }
            g
        };
        let (next, iterations, inner_ok) = projected_descent(x.clone(), set, tolerance * 1e-2, &obj, &grad);
        total_iterations += iterations;
        let moved = (&next - &x).norm();
        x = next;
        let worst = constraints.iter().map(|c| c.value(&x)).fold(0.0f64, f64::max);
        for (m, c) in mu.iter_mut().zip(constraints) {
            *m = (*m + rho * c.value(&x)).max(0.0);
        }
        if inner_ok && worst <= 1e-9 && moved < tolerance {
            converged = true;
            break;
        }
        if worst > 1e-9 {
            rho = (rho * 2.0).min(1e8);
        }
    }
    Ok(OracleResult {
        average_loss: average(losses, &x),
        point: x,
        iterations: total_iterations,
        converged,
    })
}

fn check_inputs(losses: &[LossRound], dim: usize) -> Result<()> {
    if losses.is_empty() {
        return Err(OcoError::Empty("losses"));
    }
    if dim == 0 {
        return Err(OcoError::invalid("dim", "must be positive"));
    }
    Ok(())
}

/// Regret of the trace over each inclusive, 1-based interval `[r, s]` against
/// the best fixed decision for that interval.
pub fn interval_regret(
    trace: &[RoundTrace],
    losses: &[LossRound],
    intervals: &[(usize, usize)],
    set: &FeasibleSet,
    tolerance: f64,
) -> Result<Vec<f64>> {
    if trace.len() != losses.len() {
        return Err(OcoError::LengthMismatch {
            what: "trace vs losses",
            left: trace.len(),
            right: losses.len(),
        });
    }
    let dim = trace.first().ok_or(OcoError::Empty("trace"))?.iterate.len();
    intervals
        .iter()
        .map(|&(r, s)| {
            check_interval(r, s, trace.len())?;
            let window = &losses[r - 1..s];
            let best = offline_oracle(window, set, dim, tolerance)?;
            let played: f64 = trace[r - 1..s].iter().map(|t| t.loss).sum();
            Ok(played - best.average_loss * window.len() as f64)
        })
        .collect()
}

fn check_interval(r: usize, s: usize, horizon: usize) -> Result<()> {
    if r == 0 || r > s || s > horizon {
        return Err(OcoError::invalid("interval", format!("[{r}, {s}] is not inside [1, {horizon}]")));
    }
    Ok(())
}

/// Least compression loss `Σ‖x − Px‖²` over rank-`k` projections: the sum of
/// the `n − k` smallest eigenvalues of `Σ x xᵀ`.
pub fn best_compression_loss(xs: &[Vector], k: usize) -> Result<f64> {
    let n = xs.first().ok_or(OcoError::Empty("data"))?.len();
    if k == 0 || k >= n {
        return Err(OcoError::invalid("k", format!("need 1 <= k < n = {n}, got {k}")));
    }
    let mut c = Matrix::zeros(n, n);
    for x in xs {
        c += outer(x);
    }
    let (values, _) = sym_eigen(&c);
    Ok(values.iter().skip(k).map(|v| v.max(0.0)).sum())
}

/// Interval regret for compression losses, against the best rank-`k`
/// projection of each interval.
pub fn pca_interval_regret(
    incurred: &[f64],
    xs: &[Vector],
    k: usize,
    intervals: &[(usize, usize)],
) -> Result<Vec<f64>> {
    if incurred.len() != xs.len() {
        return Err(OcoError::LengthMismatch {
            what: "losses vs data",
            left: incurred.len(),
            right: xs.len(),
        });
    }
    intervals
        .iter()
        .map(|&(r, s)| {
            check_interval(r, s, xs.len())?;
            let played: f64 = incurred[r - 1..s].iter().sum();
            Ok(played - best_compression_loss(&xs[r - 1..s], k)?)
        })
        .collect()
}

/// Follow-the-leader PCA: project onto the top-`k` eigenvectors of the data
/// seen so far (the first `k` axes before any data).
#[derive(Debug, Clone)]
pub struct FollowTheLeaderPca {
    scatter: Matrix,
    k: usize,
}

impl FollowTheLeaderPca {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k >= n {
            return Err(OcoError::invalid("k", format!("need 1 <= k < n = {n}, got {k}")));
        }
        Ok(FollowTheLeaderPca {
            scatter: Matrix::zeros(n, n),
            k,
        })
    }

    pub fn projection(&self) -> Matrix {
        let n = self.scatter.nrows();
        if self.scatter.amax() == 0.0 {
            return Matrix::from_fn(n, n, |i, j| if i == j && i < self.k { 1.0 } else { 0.0 });
        }
        let (_, basis) = sym_eigen(&self.scatter);
        let top = basis.columns(0, self.k);
        top * top.transpose()
    }

    /// Loss `‖x − Px‖²` of the current projection, then absorb `x`.
    pub fn round(&mut self, x: &Vector) -> f64 {
        let p = self.projection();
        let loss = (x - &p * x).norm_squared();
        self.scatter += outer(x);
        loss
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::streams::gen_toy_stream;
    use crate::oracle::{Affine, Quadratic};
    use nalgebra::dvector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn quad_rounds(centers: &[Vector]) -> Vec<LossRound> {
        centers.iter().map(|c| LossRound::new(Quadratic::isotropic(c.clone()))).collect()
    }

    #[test]
    fn interior_and_exterior_minimisers() {
        let set = FeasibleSet::ball(1.0).unwrap();
        let inside = quad_rounds(&[dvector![0.3, 0.1], dvector![0.1, 0.3]]);
        let r = offline_oracle(&inside, &set, 2, DEFAULT_TOLERANCE).unwrap();
        assert!(r.converged);
        assert!((r.point - dvector![0.2, 0.2]).norm() < 1e-6);
        let outside = quad_rounds(&[dvector![3.0, 4.0]]);
        let r = offline_oracle(&outside, &set, 2, DEFAULT_TOLERANCE).unwrap();
        assert!((r.point - dvector![0.6, 0.8]).norm() < 1e-6);
        assert!(offline_oracle(&[], &set, 2, DEFAULT_TOLERANCE).is_err());
    }

    #[test]
    fn toy_average_matches_grid_search() {
        let rounds = gen_toy_stream(300, 11);
        let set = FeasibleSet::L1Ball { radius: 1.0 };
        let r = offline_oracle(&rounds, &set, 2, DEFAULT_TOLERANCE).unwrap();
        let c = rounds.iter().fold(Vector::zeros(2), |acc, l| acc + l.gradient(&Vector::zeros(2))) / 300.0;
        // 10⁶ points of the square [-1,1]², keeping those inside the ℓ₁ ball
        let mut best = f64::INFINITY;
        let steps = 1000;
        for i in 0..=steps {
            for j in 0..=steps {
                let x = dvector![-1.0 + 2.0 * i as f64 / steps as f64, -1.0 + 2.0 * j as f64 / steps as f64];
                if x.lp_norm(1) <= 1.0 + 1e-12 {
                    best = best.min(c.dot(&x));
                }
            }
        }
        assert!((r.average_loss - best).abs() < 1e-3);
        assert!(set.contains(&r.point, 1e-9));
    }

    #[test]
    fn oracle_beats_random_feasible_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let centers: Vec<Vector> = (0..50).map(|_| dvector![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]).collect();
        let rounds = quad_rounds(&centers);
        for set in [
            FeasibleSet::ball(1.0).unwrap(),
            FeasibleSet::boxed(dvector![0.0, -0.5], dvector![1.0, 0.5]).unwrap(),
        ] {
            let r = offline_oracle(&rounds, &set, 2, DEFAULT_TOLERANCE).unwrap();
            assert!(set.contains(&r.point, 1e-9));
            for _ in 0..100 {
                let p = set.random_point(2, &mut rng);
                assert!(r.average_loss <= average(&rounds, &p) + 1e-12);
            }
        }
    }

    #[test]
    fn constrained_oracle_respects_constraints() {
        let rounds = quad_rounds(&[dvector![2.0, 2.0]]);
        let set = FeasibleSet::boxed(dvector![0.0, 0.0], dvector![3.0, 3.0]).unwrap();
        let cs: Vec<Arc<dyn Constraint>> = vec![Arc::new(Affine {
            normal: dvector![1.0, 1.0],
            bound: 2.0,
        })];
        let r = offline_oracle_constrained(&rounds, &set, 2, &cs, DEFAULT_TOLERANCE).unwrap();
        assert!(r.converged);
        assert!((&r.point - dvector![1.0, 1.0]).norm() < 1e-6);
        assert!(cs[0].value(&r.point) <= 1e-9);
    }

    #[test]
    fn interval_regret_reductions() {
        let set = FeasibleSet::ball(1.0).unwrap();
        let centers = vec![dvector![0.5], dvector![-0.5], dvector![0.2]];
        let rounds = quad_rounds(&centers);
        let trace: Vec<RoundTrace> = centers
            .iter()
            .zip(&rounds)
            .enumerate()
            .map(|(i, (c, l))| {
                let x = c * 0.5;
                RoundTrace {
                    round_index: i + 1,
                    loss: l.value(&x),
                    iterate: x,
                    violations: vec![],
                    step_size_used: 0.0,
                }
            })
            .collect();
        let full = interval_regret(&trace, &rounds, &[(1, 3)], &set, DEFAULT_TOLERANCE).unwrap()[0];
        let mean = dvector![0.2 / 3.0];
        let stat = crate::static_regret(&trace, &mean, &rounds).unwrap().regret;
        assert!((full - stat).abs() < 1e-9);

        let exact: Vec<RoundTrace> = trace
            .iter()
            .zip(&centers)
            .map(|(t, c)| RoundTrace {
                iterate: c.clone(),
                loss: 0.0,
                ..t.clone()
            })
            .collect();
        let single = interval_regret(&exact, &rounds, &[(2, 2)], &set, DEFAULT_TOLERANCE).unwrap()[0];
        assert!(single.abs() < 1e-9);
        assert!(interval_regret(&trace, &rounds, &[(0, 2)], &set, DEFAULT_TOLERANCE).is_err());
        assert!(interval_regret(&trace, &rounds, &[(2, 4)], &set, DEFAULT_TOLERANCE).is_err());
    }

    #[test]
    fn compression_oracle() {
        let xs = vec![dvector![1.0, 0.0, 0.0], dvector![0.0, 0.5, 0.0], dvector![0.0, 0.0, 0.1]];
        assert!((best_compression_loss(&xs, 2).unwrap() - 0.01).abs() < 1e-12);
        assert!((best_compression_loss(&xs, 1).unwrap() - 0.26).abs() < 1e-12);
        let losses = vec![0.5, 0.5, 0.5];
        let r = pca_interval_regret(&losses, &xs, 2, &[(1, 3), (1, 1)]).unwrap();
        assert!((r[0] - 1.49).abs() < 1e-12);
        assert!((r[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn follow_the_leader_locks_onto_seen_directions() {
        let mut ftl = FollowTheLeaderPca::new(3, 1).unwrap();
        assert_eq!(ftl.round(&dvector![0.0, 1.0, 0.0]), 1.0);
        assert!(ftl.round(&dvector![0.0, 0.8, 0.0]).abs() < 1e-12);
        assert!((ftl.round(&dvector![0.6, 0.0, 0.0]) - 0.36).abs() < 1e-12);
    }
}
