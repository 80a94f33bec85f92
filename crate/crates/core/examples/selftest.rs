//! Run the self-test checks at reduced size and print one line per check.

use adaptive_oco::bench::checks::{run_all, Scale};

fn main() {
    let full = std::env::args().any(|a| a == "--full");
    let checks = run_all(if full { Scale::Full } else { Scale::Reduced });
    for c in &checks {
        println!("{c}");
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} passed, {failed} failed", checks.len() - failed);
}
