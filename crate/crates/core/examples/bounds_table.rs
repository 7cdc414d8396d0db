//! Closed-form bounds and optimality ratios for a configuration.
//!
//! cargo run --example bounds_table -- 10 999 1/5 4

use aoi_adversary::bounds::{bounds_table, renewal_quantities};
use aoi_adversary::rational::{self, format, frac};
use aoi_adversary::SystemConfig;

fn main() -> aoi_adversary::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n = args.first().and_then(|a| a.parse().ok()).unwrap_or(10);
    let t = args.get(1).and_then(|a| a.parse().ok()).unwrap_or(999);
    let alpha = match args.get(2) {
        Some(a) => rational::parse(a)?,
        None => frac(1, 5),
    };
    let mut c = SystemConfig::new(n, t, alpha)?;
    if let Some(ns) = args.get(3).and_then(|a| a.parse().ok()) {
        c = c.with_subcarriers(ns)?;
    }
    println!("{c}");
    for b in bounds_table(&c)? {
        let name = serde_json::to_value(b.name)?;
        println!("  {:<30} {:>16} {:>12.4}", name.as_str().unwrap_or_default(), format(&b.value.to_rational()?), b.value.approx);
    }
    let q = frac(1, n as i64);
    let r = renewal_quantities(&q)?;
    println!(
        "renewal cycle at q = 1/{n}: E[C] = {}, E[tau] = {}, ratio = {}",
        format(&r.expected_cycle_cost),
        format(&r.expected_cycle_length),
        format(&r.long_run_age)
    );
    Ok(())
}
