use std::fs;

use adaptive_oco::bench::experiments::{run_experiment, ExperimentConfig, ExperimentId};
use adaptive_oco::bench::streams::gen_jump_stream;
use adaptive_oco::gd::{GdState, StepRule};
use adaptive_oco::meta::{lambda_for, DiscountGrid, LossFamily, MetaState};
use adaptive_oco::{run_learner, CurvatureProfile, FeasibleSet, LossRound, OnlineLearner, Vector};

fn small(exp: ExperimentId, out: &std::path::Path) -> ExperimentConfig {
    ExperimentConfig {
        horizon: 150,
        seeds: vec![0, 1],
        out: out.to_path_buf(),
        ..ExperimentConfig::new(exp)
    }
}

#[test]
fn every_experiment_is_deterministic_across_runs_and_thread_counts() {
    for exp in ExperimentId::ALL {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let first = run_experiment(&small(exp, a.path())).unwrap();
        run_experiment(&ExperimentConfig { jobs: 4, ..small(exp, b.path()) }).unwrap();
        for path in first.trace_files.iter().chain([&first.summary_file]) {
            let name = path.file_name().unwrap();
            assert_eq!(
                fs::read(path).unwrap(),
                fs::read(b.path().join(name)).unwrap(),
                "{exp}: {} differs",
                name.to_string_lossy()
            );
        }
    }
}

#[test]
fn summaries_agree_with_traces() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_experiment(&small(ExperimentId::Dsm, dir.path())).unwrap();
    for cell in &out.cells {
        let last = cell.rows.last().unwrap();
        let s = &cell.summary;
        assert_eq!(last.t, s.horizon);
        assert!((last.cum_loss - s.cumulative_loss).abs() <= 1e-9 * s.cumulative_loss.abs().max(1.0));
        assert!((last.regret - s.regret).abs() <= 1e-9 * s.regret.abs().max(1.0));
        let clipped: f64 = cell.rows.iter().map(|r| r.violation_clipped).sum();
        assert!((clipped - s.violation_clipped).abs() <= 1e-9 * clipped.max(1.0));
        assert!(s.violation_clipped >= s.violation_signed);
    }
}

#[test]
fn meta_learner_stays_close_to_its_best_expert() {
    let horizon = 600;
    let profile = CurvatureProfile::new(2.0, 2.0, 1.0).unwrap().with_strong_convexity(1.0).unwrap();
    let set = FeasibleSet::ball(1.0).unwrap();
    let rounds: Vec<LossRound> = gen_jump_stream(horizon, 2, 1.0, 3, 17).unwrap().into_iter().map(|(r, _)| r).collect();
    let grid = DiscountGrid::build(horizon, profile.diameter, true).unwrap();
    let lambda = lambda_for(&profile, LossFamily::StronglyConvex).unwrap();
    let expert = |g: f64| {
        let rule = if g >= 1.0 { StepRule::Classic } else { StepRule::StronglyConvex { gamma: g } };
        GdState::new(Vector::zeros(2), rule, profile.clone(), set.clone())
    };
    let mut meta = MetaState::from_grid(&grid, lambda, expert).unwrap();
    let meta_loss: f64 = run_learner(&mut meta, &rounds).unwrap().iter().map(|r| r.loss).sum();
    let best = grid
        .gammas()
        .iter()
        .map(|&g| {
            let mut e = expert(g).unwrap();
            rounds.iter().map(|r| { let l = r.value(e.iterate()); e.observe(r).unwrap(); l }).sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min);
    let slack = (grid.len() as f64).ln() / lambda;
    assert!(meta_loss <= best + slack + 1e-6, "meta {meta_loss} best {best} slack {slack}");
}
