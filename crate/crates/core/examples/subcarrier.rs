//! The sub-carrier model: jamming one sub-carrier at a time leaves the
//! average age bounded, approaching N as sub-carriers are added.
//!
//! cargo run --release --example subcarrier

use aoi_adversary::adversary::centered_cbs;
use aoi_adversary::bounds::{lb_modified, thm4_upper};
use aoi_adversary::exact_age::age_by_recursion_subcarrier;
use aoi_adversary::model::cbs_to_matrix;
use aoi_adversary::rational::{format, frac, to_f64};
use aoi_adversary::sim::simulate_randomized_subcarrier;
use aoi_adversary::{Indexing, SystemConfig};

fn main() -> aoi_adversary::Result<()> {
    let n = 4;
    println!("{:>5} {:>10} {:>8} {:>10} {:>10}", "Nsub", "sim mean", "SE", "exact", "upper");
    for ns in [2, 4, 8, 16] {
        let c = SystemConfig::new(n, 2000, frac(1, 5))?.with_subcarriers(ns)?;
        let sigma = cbs_to_matrix(&c, &centered_cbs(&c, 1, c.budget())?)?;
        let r = simulate_randomized_subcarrier(&c, &sigma, 200, 4)?;
        let exact = age_by_recursion_subcarrier(&c, &sigma)?.overall_mean(Indexing::Raw);
        println!(
            "{ns:>5} {:>10.4} {:>8.4} {:>10.4} {:>10}",
            r.empirical_overall_mean,
            r.std_error,
            to_f64(&exact),
            format(&thm4_upper(n, ns)?)
        );
    }
    println!("lower bound with every channel available: {}", format(&lb_modified(n)));
    Ok(())
}
