//! Clipped long-term constraints against the primal-dual baseline on the
//! L1-constrained toy stream.

use adaptive_oco::bench::streams::gen_toy_stream;
use adaptive_oco::constrained::{Aggregate, ClippedRule, ClippedState, DEFAULT_BETA, DEFAULT_KAPPA};
use adaptive_oco::{run_learner, violation_metrics, CurvatureProfile, FeasibleSet};

fn main() -> adaptive_oco::Result<()> {
    let horizon = 8000;
    let rounds = gen_toy_stream(horizon, 0);
    let profile = CurvatureProfile::new(2f64.sqrt(), 2.0, 1.0)?.with_constraint_count(1)?;
    let rules = [
        ("clipped", ClippedRule::convex_experiment(&profile, horizon, DEFAULT_KAPPA, DEFAULT_BETA)?),
        ("baseline", ClippedRule::mahdavi(&profile, horizon, DEFAULT_KAPPA, DEFAULT_BETA)?),
    ];
    for (name, rule) in rules {
        let mut learner = ClippedState::new(2, rule, FeasibleSet::ball(1.0)?, Aggregate::Max)?;
        let trace = run_learner(&mut learner, &rounds)?;
        let m = violation_metrics(&trace)?;
        let last = trace.last().map(|r| r.iterate.clone()).unwrap_or_default();
        println!(
            "{name:>8}: sum g {:8.3}  sum [g]+ {:8.3}  sum [g]+^2 {:7.4}  max step {:.4}  final point ({:.3}, {:.3})",
            m.signed_sum[0], m.clipped_sum[0], m.clipped_square_sum[0], m.max_single_step[0], last[0], last[1]
        );
    }
    Ok(())
}
