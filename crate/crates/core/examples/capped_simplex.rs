//! Capping a probability vector, decomposing it into corners and sampling one.

use adaptive_oco::bench::streams::substream;
use adaptive_oco::geometry::{cap_probability, mixture_decompose, sample_corner};

fn main() -> adaptive_oco::Result<()> {
    let raw = [0.5, 0.2, 0.15, 0.1, 0.05];
    let d = 3;
    let capped = cap_probability(&raw, d)?;
    println!("capped at 1/{d}: {:?}", capped.weights());

    let parts = mixture_decompose(&capped)?;
    for (p, corner) in &parts {
        println!("  {p:.4} x corner on {:?}", corner.support());
    }
    let mut rng = substream(1, "example/corner");
    let corner = sample_corner(&parts, &mut rng)?;
    println!("sampled corner {:?}, complement {:?}", corner.support(), corner.complement());
    Ok(())
}
