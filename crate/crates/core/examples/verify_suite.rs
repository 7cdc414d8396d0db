//! Runs every structural check on a small grid and prints one line per claim.
//!
//! cargo run --release --example verify_suite

use aoi_adversary::verify::{run_suite, VerifyGrid};

fn main() -> aoi_adversary::Result<()> {
    let grid = VerifyGrid {
        horizons: vec![6, 8],
        sweep_max_horizon: 10,
        ..VerifyGrid::default()
    };
    let mut all = true;
    for r in run_suite(&grid)? {
        all &= r.passed;
        println!("{} {} ({} checked) {}", if r.passed { "PASS" } else { "FAIL" }, r.claim, r.checked, r.detail);
    }
    std::process::exit(if all { 0 } else { 1 });
}
