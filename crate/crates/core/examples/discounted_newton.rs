//! Discounted online Newton step in quasi and full mode, and its agreement
//! with discounted recursive least squares.

use adaptive_oco::bench::streams::gen_quadratic_stream;
use adaptive_oco::gd::{GdState, StepRule};
use adaptive_oco::ons::{eta_for_case, practical_epsilon, CurvatureCase, NewtonMode, NewtonState};
use adaptive_oco::{run_learner, CurvatureProfile, FeasibleSet, LossRound, OnlineLearner, Vector};

fn main() -> adaptive_oco::Result<()> {
    let gamma = 0.95;
    let (rounds, _): (Vec<LossRound>, Vec<Vector>) = gen_quadratic_stream(400, 4, 1.0, 0.5, 3).into_iter().unzip();
    let profile = CurvatureProfile::new(2.0, 2.0, 1.0)?.with_exp_concavity(0.25)?;
    let set = FeasibleSet::ball(1.0)?;

    let eta = eta_for_case(&profile, CurvatureCase::ExpConcave)?;
    let eps = practical_epsilon(&profile)?;
    let mut quasi = NewtonState::new(Vector::zeros(4), gamma, eta, eps, NewtonMode::Quasi, set.clone())?;
    let trace = run_learner(&mut quasi, &rounds)?;
    let total: f64 = trace.iter().map(|r| r.loss).sum();
    println!("quasi-Newton: eta {eta:.4}, epsilon {eps:.1}, cumulative loss {total:.3}");
    println!("  ‖P·P⁻¹ − I‖∞ after {} rounds: {:.2e}", rounds.len(), quasi.inverse_residual());

    let mut full = NewtonState::new(Vector::zeros(4), gamma, 1.0, 1e-8, NewtonMode::Full, set.clone())?;
    let mut rls = GdState::new(Vector::zeros(4), StepRule::DiscountedRls { gamma }, profile, set)?;
    let mut gap = 0.0f64;
    for r in &rounds {
        full.observe(r)?;
        rls.observe(r)?;
        gap = gap.max((full.iterate() - rls.iterate()).amax());
    }
    println!("full Newton vs discounted least squares: max gap {gap:.2e}");
    Ok(())
}
