//! Exhaustive search for the adversary's best blocking matrices.
//!
//! cargo run --release --example brute_force -- 3 8 2

use aoi_adversary::adversary::{brute_force_optimum, is_single_row_centered_block, BruteForceOptions};
use aoi_adversary::rational::{format, to_f64};
use aoi_adversary::SystemConfig;

fn main() -> aoi_adversary::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (n, t, b) = match args[..] {
        [n, t, b] => (n, t, b),
        _ => (2, 8, 3),
    };
    let config = SystemConfig::with_budget(n, t, b)?;
    let set = brute_force_optimum(&config, &BruteForceOptions::default())?;
    println!("{config}");
    println!("feasible matrices: {}", set.enumerated_count);
    println!("best average age:  {} (~{:.6})", format(&set.best_value), to_f64(&set.best_value));
    for m in &set.maximizers {
        let shape = if is_single_row_centered_block(&config, m) { "centered block" } else { "other" };
        println!("  {}  {shape}", m.row_strings().join(" "));
    }

    // the sub-carrier model: any sub-carrier may be jammed in each slot
    let sub = SystemConfig::with_budget(2, 6, 2)?.with_subcarriers(2)?;
    let set = brute_force_optimum(&sub, &BruteForceOptions::default())?;
    println!("\n{sub}: {} maximizers, best {}", set.maximizers.len(), format(&set.best_value));
    Ok(())
}
