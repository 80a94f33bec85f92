//! Exponentially weighted experts over a grid of discount factors.

use adaptive_oco::bench::streams::gen_jump_stream;
use adaptive_oco::gd::{GdState, StepRule};
use adaptive_oco::meta::{lambda_for, DiscountGrid, LossFamily, MetaState};
use adaptive_oco::{CurvatureProfile, FeasibleSet, Vector};

fn main() -> adaptive_oco::Result<()> {
    let horizon = 900;
    let profile = CurvatureProfile::new(2.0, 2.0, 1.0)?.with_strong_convexity(1.0)?;
    let set = FeasibleSet::ball(1.0)?;
    let grid = DiscountGrid::build(horizon, profile.diameter, true)?;
    for w in grid.warnings() {
        println!("warning: {w}");
    }
    let lambda = lambda_for(&profile, LossFamily::StronglyConvex)?;
    let mut meta = MetaState::from_grid(&grid, lambda, |g| {
        let rule = if g >= 1.0 { StepRule::Classic } else { StepRule::StronglyConvex { gamma: g } };
        GdState::new(Vector::zeros(2), rule, profile.clone(), set.clone())
    })?;

    let mut worst_margin = f64::INFINITY;
    for (round, _) in gen_jump_stream(horizon, 2, 1.0, 3, 9)? {
        meta.meta_round(&round)?;
        worst_margin = worst_margin.min(meta.tracking_margin());
    }
    let (meta_loss, expert_losses) = meta.cumulative_losses();
    println!("meta loss {meta_loss:.3}; smallest tracking margin {worst_margin:.3e}");
    for ((g, w), l) in grid.gammas().iter().zip(meta.weights()).zip(expert_losses) {
        println!("  gamma {g:.6}  weight {w:.4}  loss {l:.3}");
    }
    Ok(())
}
