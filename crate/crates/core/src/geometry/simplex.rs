//! Capped probability simplex: relative-entropy capping, decomposition into
//! corners and corner sampling.

use rand::Rng;

use crate::error::{OcoError, Result};

const SUM_TOL: f64 = 1e-9;

/// A probability vector whose entries are all at most `1/d`.
#[derive(Debug, Clone, PartialEq)]
pub struct CappedSimplexVector {
    weights: Vec<f64>,
    cap_denominator: usize,
}

impl CappedSimplexVector {
    /// Validate `weights` against the capped simplex with denominator `d`.
    pub fn new(weights: Vec<f64>, d: usize) -> Result<Self> {
        let n = weights.len();
        if d == 0 || d > n {
            return Err(OcoError::invalid("d", format!("need 1 <= d <= n = {n}, got {d}")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(OcoError::OutOfDomain(format!("weights sum to {sum}, not 1")));
        }
        let cap = 1.0 / d as f64;
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, &w)| !(w >= -SUM_TOL && w <= cap + SUM_TOL))
        {
            return Err(OcoError::OutOfDomain(format!(
                "weight {w} at {i} outside [0, 1/{d}]"
            )));
        }
        Ok(CappedSimplexVector {
            weights,
            cap_denominator: d,
        })
    }

    /// Uniform weights, which lie in every capped simplex with `d <= n`.
    pub fn uniform(n: usize, d: usize) -> Result<Self> {
        Self::new(vec![1.0 / n as f64; n], d)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn cap_denominator(&self) -> usize {
        self.cap_denominator
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }
}

/// Indices sorted by decreasing value, ties broken by lowest index.
fn descending_order(w: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..w.len()).collect();
    idx.sort_by(|&a, &b| {
        w[b].partial_cmp(&w[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    idx
}

/// Relative-entropy projection of a probability vector onto the capped
/// simplex `{w : Σw = 1, 0 ≤ wᵢ ≤ 1/d}`.
///
/// The `i` largest entries are pinned to `1/d` and the remainder rescaled to
/// mass `(d − i)/d`, increasing `i` until no entry exceeds the cap.
pub fn cap_probability(w: &[f64], d: usize) -> Result<CappedSimplexVector> {
    let n = w.len();
    if d == 0 || d >= n {
        return Err(OcoError::invalid("d", format!("need 1 <= d < n = {n}, got {d}")));
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > SUM_TOL || w.iter().any(|&v| !(v >= 0.0)) {
        return Err(OcoError::OutOfDomain(format!(
            "capping needs a probability vector (sum = {sum})"
        )));
    }
    let cap = 1.0 / d as f64;
    // entries within rounding of the cap count as capped
    let slack = cap * 1e-12;
    let order = descending_order(w);
    if w[order[0]] <= cap + slack {
        return CappedSimplexVector::new(w.iter().map(|v| v.min(cap)).collect(), d);
    }

    for pinned in 1..d {
        let rest: f64 = order[pinned..].iter().map(|&j| w[j]).sum();
        if rest <= 0.0 {
            break;
        }
        let scale = (d - pinned) as f64 / d as f64 / rest;
        // the largest remaining entry decides whether this many pins suffice
        if w[order[pinned]] * scale <= cap + slack {
            let mut out = vec![0.0; n];
            for &j in &order[..pinned] {
                out[j] = cap;
            }
            for &j in &order[pinned..] {
                out[j] = (w[j] * scale).min(cap);
            }
            return CappedSimplexVector::new(out, d);
        }
    }
    Err(OcoError::OutOfDomain(format!(
        "fewer than {d} positive entries; the capped projection does not exist"
    )))
}

/// Extreme point of the capped simplex: `1/d` on `d` indices, zero elsewhere.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Corner {
    support: Vec<usize>,
    dim: usize,
}

impl Corner {
    pub fn new(mut support: Vec<usize>, dim: usize) -> Result<Self> {
        support.sort_unstable();
        support.dedup();
        if support.is_empty() || support.len() > dim || support.iter().any(|&i| i >= dim) {
            return Err(OcoError::invalid("support", format!("{support:?} in dimension {dim}")));
        }
        Ok(Corner { support, dim })
    }

    /// Sorted indices carrying weight `1/d`.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The indices outside the support, in increasing order.
    pub fn complement(&self) -> Vec<usize> {
        (0..self.dim).filter(|i| self.support.binary_search(i).is_err()).collect()
    }

    /// 0/1 indicator of the support.
    pub fn indicator(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        for &i in &self.support {
            v[i] = 1.0;
        }
        v
    }

    pub fn to_weights(&self) -> Vec<f64> {
        let d = self.support.len() as f64;
        self.indicator().into_iter().map(|v| v / d).collect()
    }
}

/// A convex combination `Σ p_j r_j` of corners.
pub type Decomposition = Vec<(f64, Corner)>;

/// Decompose a capped-simplex vector into at most `n` corners.
///
/// Each pass picks `d` non-zero components (those already at `|w|/d` first,
/// then by size, ties by lowest index), subtracts `min(d·s, |w| − d·l)` times
/// the corner, and records that coefficient.
pub fn mixture_decompose(w: &CappedSimplexVector) -> Result<Decomposition> {
    let n = w.len();
    let d = w.cap_denominator();
    let mut rem: Vec<f64> = w.weights().iter().map(|v| v.max(0.0)).collect();
    let mut out = Vec::new();

    for _ in 0..n {
        let mass: f64 = rem.iter().sum();
        if mass <= 1e-12 {
            break;
        }
        let tight = mass / d as f64 - 1e-12;
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| {
            (rem[b] >= tight)
                .cmp(&(rem[a] >= tight))
                .then(rem[b].partial_cmp(&rem[a]).unwrap_or(std::cmp::Ordering::Equal))
                .then(a.cmp(&b))
        });
        let chosen = &idx[..d];
        let smallest = chosen.iter().map(|&i| rem[i]).fold(f64::INFINITY, f64::min);
        if smallest <= 0.0 {
            return Err(OcoError::Numerical(format!(
                "mixture decomposition ran out of non-zero components with mass {mass}"
            )));
        }
        let largest_rest = idx[d..].iter().map(|&i| rem[i]).fold(0.0, f64::max);
        let p = (d as f64 * smallest).min(mass - d as f64 * largest_rest);
        if p <= 0.0 {
            return Err(OcoError::Numerical(format!("non-positive mixture weight {p}")));
        }
        let share = p / d as f64;
        for &i in chosen {
            rem[i] -= share;
            if rem[i] < 1e-15 {
                rem[i] = 0.0;
            }
        }
        out.push((p, Corner::new(chosen.to_vec(), n)?));
    }
    Ok(out)
}

/// Draw corner `j` with probability `p_j` by inverting the cumulative weights.
pub fn sample_corner<R: Rng + ?Sized>(decomposition: &Decomposition, rng: &mut R) -> Result<Corner> {
    if decomposition.is_empty() {
        return Err(OcoError::Empty("decomposition has no corners"));
    }
    let total: f64 = decomposition.iter().map(|(p, _)| p).sum();
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (p, corner) in decomposition {
        acc += p;
        if target < acc {
            return Ok(corner.clone());
        }
    }
    Ok(decomposition[decomposition.len() - 1].1.clone())
}
