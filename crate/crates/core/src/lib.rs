//! Online convex optimization for changing environments.
//!
//! The crate is organised around a handful of learner families that share
//! one loss-oracle contract ([`LossRound`]) and one accounting layer
//! ([`accounting`]):
//!
//! - [`gd`]: projected online gradient descent with forgetting-factor step sizes.
//! - [`ons`]: discounted online Newton step (quasi- and full-Newton).
//! - [`meta`]: exponentially weighted experts over a grid of discount factors.
//! - [`spectral`]: adaptive best subset of experts, adaptive online PCA and
//!   online variance minimisation.
//! - [`constrained`]: clipped long-term-constraint OCO and a primal-dual baseline.
//! - [`geometry`]: projections, capped simplex, mixture decomposition and
//!   capped density matrices.
//! - [`bench`]: stream generators, offline oracles and the experiment harness.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod accounting;
pub mod bench;
pub mod cli;
pub mod constrained;
pub mod error;
pub mod gd;
pub mod geometry;
pub mod linalg;
pub mod meta;
pub mod ons;
pub mod oracle;
pub mod profile;
pub mod spectral;

pub use accounting::{
    dynamic_regret, path_length, static_regret, violation_metrics, RegretReport, RoundTrace,
    ViolationMetrics,
};
pub use error::{OcoError, Result};
pub use geometry::FeasibleSet;
pub use oracle::{Constraint, LossRound, Objective};
pub use profile::CurvatureProfile;

/// Dense decision vector.
pub type Vector = nalgebra::DVector<f64>;
/// Dense real matrix.
pub type Matrix = nalgebra::DMatrix<f64>;

/// A learner that plays an iterate, observes one round and moves on.
pub trait OnlineLearner {
    /// The decision played in the current round.
    fn iterate(&self) -> &Vector;

    /// Consume the round's feedback at the current iterate. Returns the step
    /// size that was used.
    fn observe(&mut self, round: &LossRound) -> Result<f64>;
}

/// Run a learner over a sequence of rounds, recording one trace entry per round.
pub fn run_learner<L: OnlineLearner + ?Sized>(
    learner: &mut L,
    rounds: &[LossRound],
) -> Result<Vec<RoundTrace>> {
    let mut traces = Vec::with_capacity(rounds.len());
    for (idx, round) in rounds.iter().enumerate() {
        let iterate = learner.iterate().clone();
        let loss = round.value(&iterate);
        let violations = round.constraint_values(&iterate);
        let step = learner.observe(round)?;
        traces.push(RoundTrace {
            round_index: idx + 1,
            iterate,
            loss,
            violations,
            step_size_used: step,
        });
    }
    Ok(traces)
}
