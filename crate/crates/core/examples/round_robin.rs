//! Round-robin against an adversary that jams whoever is being served: the
//! average age grows linearly in the horizon.
//!
//! cargo run --release --example round_robin

use aoi_adversary::bounds::lemma1_lower;
use aoi_adversary::rational::{frac, to_f64};
use aoi_adversary::sim::{round_robin_worst_case, simulate_round_robin, RoundRobinAdversary};
use aoi_adversary::SystemConfig;

fn main() -> aoi_adversary::Result<()> {
    let alpha = frac(1, 2);
    let small = SystemConfig::new(4, 16, alpha.clone())?;
    println!("worst-case jamming pattern for {small}:");
    for line in round_robin_worst_case(&small, None)?.row_strings() {
        println!("  {line}");
    }
    println!("\n{:>6} {:>12} {:>12} {:>8}", "T", "mean age", "T a^2 / 2", "mean/T");
    for t in [200, 500, 1000, 2000, 5000] {
        let c = SystemConfig::new(4, t, alpha.clone())?;
        let r = simulate_round_robin(&c, &RoundRobinAdversary::WorstCase { start: None }, 1, 0)?;
        let lower = to_f64(&lemma1_lower(t, &alpha));
        println!("{t:>6} {:>12.3} {lower:>12.3} {:>8.5}", r.empirical_overall_mean, r.empirical_overall_mean / t as f64);
    }
    Ok(())
}
