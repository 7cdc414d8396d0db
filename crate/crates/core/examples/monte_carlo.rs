//! Monte-Carlo simulation of the randomized scheduler, compared slot by slot
//! with the exact expected age.
//!
//! cargo run --release --example monte_carlo

use aoi_adversary::adversary::centered_cbs;
use aoi_adversary::model::cbs_to_matrix;
use aoi_adversary::rational::frac;
use aoi_adversary::sim::{empirical_vs_exact, simulate_randomized};
use aoi_adversary::{BlockingMatrix, SystemConfig};

fn main() -> aoi_adversary::Result<()> {
    for n in [2, 4, 8] {
        let c = SystemConfig::new(n, 5000, frac(0, 1))?;
        let r = simulate_randomized(&c, &BlockingMatrix::unblocked(&c), 200, 1)?;
        println!("N={n}, no jamming: mean age {:.4} (SE {:.4}), long-run value {n}", r.empirical_overall_mean, r.std_error);
    }

    let c = SystemConfig::new(3, 12, frac(1, 3))?;
    let sigma = cbs_to_matrix(&c, &centered_cbs(&c, 2, c.budget())?)?;
    let cmp = empirical_vs_exact(&c, &sigma, 100_000, 7)?;
    println!(
        "\n{c}, user 2 jammed: max |empirical - exact| / SE = {:.3} at (user, slot) {:?}",
        cmp.max_standardized_deviation, cmp.worst_cell
    );
    for cell in cmp.cells.iter().filter(|x| x.user == 2) {
        println!("  slot {:>2}: empirical {:.4}  exact {:.4}", cell.slot, cell.empirical_mean, cell.exact);
    }
    Ok(())
}
