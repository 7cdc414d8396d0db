//! A parameter sweep written as long-form CSV to stdout.
//!
//! cargo run --release --example sweep > sweep.csv

use aoi_adversary::experiment::{sweep, SweepRanges};
use aoi_adversary::rational::frac;
use aoi_adversary::Indexing;

fn main() -> aoi_adversary::Result<()> {
    let ranges = SweepRanges {
        users: vec![2, 4],
        horizons: (100..=500).step_by(100).collect(),
        alphas: vec![frac(1, 5), frac(1, 2)],
        subcarriers: vec![],
    };
    let mut w = csv::Writer::from_writer(std::io::stdout());
    for row in sweep(&ranges, Indexing::Shifted, 1, 0)? {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
