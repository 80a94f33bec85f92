//! Time-varying constraints: a budget that tightens over time, handled by the
//! dynamic clipped learners.

use adaptive_oco::constrained::{queue_carryover, Aggregate, ClippedRule, ClippedState, DynamicComparatorSpec};
use adaptive_oco::oracle::{Affine, Quadratic};
use adaptive_oco::{CurvatureProfile, FeasibleSet, LossRound, Vector};

fn main() -> adaptive_oco::Result<()> {
    let horizon = 4000;
    let profile = CurvatureProfile::new(6.0, 3.0, 3.0)?.with_strong_convexity(1.0)?;
    let spec = DynamicComparatorSpec::new(horizon, 1.0, horizon)?;
    let rules = [
        ("convex", ClippedRule::dynamic_convex(&profile, &spec, None)?),
        ("strongly convex", ClippedRule::dynamic_strongly(&profile, &spec)?),
    ];
    for (name, rule) in rules {
        let mut s = ClippedState::new(2, rule, FeasibleSet::ball(3.0)?, Aggregate::Separate)?;
        let mut g = Vec::with_capacity(horizon);
        for t in 0..horizon {
            let budget = 1.0 + 0.5 / (1.0 + t as f64 / 1000.0);
            let round = LossRound::new(Quadratic::isotropic(Vector::from_vec(vec![2.0, 2.0]))).with_constraint(Affine {
                normal: Vector::from_vec(vec![1.0, 1.0]),
                bound: budget,
            });
            g.push(round.constraint_values(s.iterate())[0]);
            s.clipped_round(&round)?;
        }
        let clipped: f64 = g.iter().map(|v| v.max(0.0)).sum();
        println!(
            "{name:>15}: sum g {:.3}, queue {:.3}, sum [g]+ {clipped:.3}",
            g.iter().sum::<f64>(),
            queue_carryover(&g)
        );
    }
    Ok(())
}
