//! Adaptive online PCA against static online PCA and follow-the-leader on a
//! stream whose rank-2 subspace changes twice.

use adaptive_oco::bench::experiments::pca_losses;
use adaptive_oco::bench::offline::{best_compression_loss, pca_interval_regret};
use adaptive_oco::bench::streams::gen_subspace_stream;

fn main() -> adaptive_oco::Result<()> {
    let xs = gen_subspace_stream(600, 20, 2, 3, 0)?;
    println!("best fixed rank-2 subspace loss: {:.2}", best_compression_loss(&xs, 2)?);
    let segments = [(1, 200), (201, 400), (401, 600)];
    for algo in ["adaptive", "static", "ftl"] {
        let losses = pca_losses(algo, &xs, 2, 0)?;
        let total: f64 = losses.iter().sum();
        let per_segment = pca_interval_regret(&losses, &xs, 2, &segments)?;
        println!("{algo:>9}: cumulative loss {total:7.2}, regret per segment {per_segment:.2?}");
    }
    Ok(())
}
