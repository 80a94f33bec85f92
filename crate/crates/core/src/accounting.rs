//! Regret and constraint-violation bookkeeping over recorded traces.

use crate::error::{OcoError, Result};
use crate::oracle::LossRound;
use crate::Vector;

/// What happened in one round: the point played, its loss and the signed
/// constraint values at that point.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundTrace {
    pub round_index: usize,
    pub iterate: Vector,
    pub loss: f64,
    pub violations: Vec<f64>,
    pub step_size_used: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretReport {
    pub cumulative_loss: f64,
    pub comparator_loss: f64,
    pub regret: f64,
    pub path_length: Option<f64>,
}

/// Per-constraint long-term violation summaries.
#[derive(Debug, Clone, PartialEq)]
pub struct ViolationMetrics {
    /// Σ_t [g_i]₊
    pub clipped_sum: Vec<f64>,
    /// Σ_t ([g_i]₊)²
    pub clipped_square_sum: Vec<f64>,
    /// Σ_t g_i
    pub signed_sum: Vec<f64>,
    /// max_t [g_i]₊
    pub max_single_step: Vec<f64>,
}

fn same_len(what: &'static str, left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(OcoError::LengthMismatch { what, left, right });
    }
    Ok(())
}

/// Cumulative loss of the trace minus that of a fixed comparator.
pub fn static_regret(
    trace: &[RoundTrace],
    comparator: &Vector,
    losses: &[LossRound],
) -> Result<RegretReport> {
    same_len("trace vs losses", trace.len(), losses.len())?;
    let cumulative_loss: f64 = trace.iter().map(|r| r.loss).sum();
    let comparator_loss: f64 = losses.iter().map(|l| l.value(comparator)).sum();
    Ok(RegretReport {
        cumulative_loss,
        comparator_loss,
        regret: cumulative_loss - comparator_loss,
        path_length: None,
    })
}

/// Cumulative loss of the trace minus that of a moving comparator sequence.
pub fn dynamic_regret(
    trace: &[RoundTrace],
    comparators: &[Vector],
    losses: &[LossRound],
) -> Result<RegretReport> {
    same_len("trace vs losses", trace.len(), losses.len())?;
    same_len("trace vs comparators", trace.len(), comparators.len())?;
    let cumulative_loss: f64 = trace.iter().map(|r| r.loss).sum();
    let comparator_loss: f64 = losses
        .iter()
        .zip(comparators)
        .map(|(l, z)| l.value(z))
        .sum();
    Ok(RegretReport {
        cumulative_loss,
        comparator_loss,
        regret: cumulative_loss - comparator_loss,
        path_length: Some(if comparators.is_empty() {
            0.0
        } else {
            path_length(comparators)?
        }),
    })
}

/// Σ_{t≥2} ‖z_t − z_{t−1}‖.
pub fn path_length(points: &[Vector]) -> Result<f64> {
    if points.is_empty() {
        return Err(OcoError::Empty("path_length needs at least one point"));
    }
    Ok(points.windows(2).map(|w| (&w[1] - &w[0]).norm()).sum())
}

pub fn violation_metrics(trace: &[RoundTrace]) -> Result<ViolationMetrics> {
    let m = trace.first().map_or(0, |r| r.violations.len());
    let mut out = ViolationMetrics {
        clipped_sum: vec![0.0; m],
        clipped_square_sum: vec![0.0; m],
        signed_sum: vec![0.0; m],
        max_single_step: vec![0.0; m],
    };
    for r in trace {
        same_len("ragged violation vectors", r.violations.len(), m)?;
        for (i, &g) in r.violations.iter().enumerate() {
            let clip = g.max(0.0);
            out.clipped_sum[i] += clip;
            out.clipped_square_sum[i] += clip * clip;
            out.signed_sum[i] += g;
            out.max_single_step[i] = out.max_single_step[i].max(clip);
        }
    }
    Ok(out)
}
