//! Forgetting-factor gradient descent against the classic `1/(ℓt)` schedule
//! on a quadratic whose minimiser jumps twice.

use adaptive_oco::bench::streams::gen_jump_stream;
use adaptive_oco::gd::{gamma_for_path, GdState, StepRule};
use adaptive_oco::{dynamic_regret, path_length, run_learner, CurvatureProfile, FeasibleSet, LossRound, Vector};

fn main() -> adaptive_oco::Result<()> {
    let horizon = 600;
    let (rounds, centers): (Vec<LossRound>, Vec<Vector>) = gen_jump_stream(horizon, 2, 1.0, 3, 42)?.into_iter().unzip();
    let profile = CurvatureProfile::new(2.0, 2.0, 1.0)?.with_strong_convexity(1.0)?;
    let set = FeasibleSet::ball(1.0)?;
    let v = path_length(&centers)?;
    let gamma = gamma_for_path(horizon as f64, profile.diameter, v)?;
    println!("path length {v:.3}, tuned discount {gamma:.5}");

    for (name, rule) in [("forgetting", StepRule::StronglyConvex { gamma }), ("classic", StepRule::Classic)] {
        let mut gd = GdState::new(Vector::zeros(2), rule, profile.clone(), set.clone())?;
        let trace = run_learner(&mut gd, &rounds)?;
        let report = dynamic_regret(&trace, &centers, &rounds)?;
        println!("{name:>10}: dynamic regret {:.3}", report.regret);
    }
    Ok(())
}
