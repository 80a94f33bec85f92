//! Adaptive best subset of experts: play `n - k` experts each round while the
//! cheap group shifts halfway through.

use adaptive_oco::bench::streams::substream;
use adaptive_oco::spectral::ExpertSubsetState;
use rand::Rng;

fn main() -> adaptive_oco::Result<()> {
    let (n, k, horizon) = (8, 2, 400);
    let mut state = ExpertSubsetState::new(n, k, 0.5, 1e-3)?;
    let mut rng = substream(5, "example/subset");
    let (mut expected, mut best) = (0.0, 0.0);
    for t in 0..horizon {
        let cheap = if t < horizon / 2 { 0..n - k } else { k..n };
        let loss: Vec<f64> = (0..n)
            .map(|i| if cheap.contains(&i) { 0.1 } else { 0.6 } + 0.1 * rng.random::<f64>())
            .collect();
        let mut sorted = loss.clone();
        sorted.sort_by(f64::total_cmp);
        best += sorted[..n - k].iter().sum::<f64>();
        expected += state.subset_expert_round(&loss, &mut rng)?.expected_loss;
    }
    println!("expected loss {expected:.2}, best subset each round {best:.2}");
    println!("final weights: {:.3?}", state.weights());
    Ok(())
}
