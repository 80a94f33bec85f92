//! Economic dispatch with an emission cap: run the experiment harness and
//! print the summary rows.

use adaptive_oco::bench::experiments::{run_experiment, ExperimentConfig, ExperimentId};

fn main() -> adaptive_oco::Result<()> {
    let out = std::env::temp_dir().join("adaptive-oco-dispatch-example");
    let config = ExperimentConfig {
        out: out.clone(),
        ..ExperimentConfig::new(ExperimentId::Dispatch)
    };
    let result = run_experiment(&config)?;
    for cell in &result.cells {
        let s = &cell.summary;
        println!(
            "{:>8}: average loss {:.3} (best fixed {:.3}), sum [g]+ {:.3}, max step {:.3}",
            s.algorithm,
            s.cumulative_loss / s.horizon as f64,
            s.comparator_loss / s.horizon as f64,
            s.violation_clipped,
            s.violation_max_step
        );
    }
    println!("traces in {}", out.display());
    Ok(())
}
