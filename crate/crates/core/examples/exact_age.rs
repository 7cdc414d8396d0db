//! Exact expected-age trajectories for a small blocking matrix, computed by
//! the recursion and by the train decomposition.
//!
//! cargo run --example exact_age

use aoi_adversary::exact_age::{age_by_recursion, age_by_trains, train_value};
use aoi_adversary::rational::{format, frac};
use aoi_adversary::{BlockingMatrix, Indexing, SystemConfig};

fn main() -> aoi_adversary::Result<()> {
    let config = SystemConfig::new(2, 3, frac(0, 1))?;
    let open = BlockingMatrix::unblocked(&config);
    let traj = age_by_recursion(&config, &open)?;
    println!("N=2 T=3, nothing jammed");
    println!("  user 1 raw ages: {:?}", traj.raw_series(1).iter().map(format).collect::<Vec<_>>());
    println!("  overall mean (raw):     {}", format(&traj.overall_mean(Indexing::Raw)));
    println!("  overall mean (shifted): {}", format(&traj.overall_mean(Indexing::Shifted)));

    let config = SystemConfig::new(3, 8, frac(3, 8))?;
    let sigma = BlockingMatrix::from_grid("11000111\n11111111\n11111111\n")?;
    let rec = age_by_recursion(&config, &sigma)?;
    let trains = age_by_trains(&config, &sigma)?;
    assert_eq!(rec, trains);
    println!("\nN=3 T=8, user 1 jammed in slots 3..=5");
    for u in 1..=3 {
        let s: Vec<String> = rec.series(u, Indexing::Shifted).iter().map(format).collect();
        println!("  user {u}: {}", s.join(" "));
    }
    println!("  train value over slots 2..=6: {}", format(&train_value(&config, sigma.row(1), 2, 6)?));
    println!("  per-user means: {:?}", rec.per_user_mean(Indexing::Shifted).iter().map(format).collect::<Vec<_>>());

    rec.write_csv(Indexing::Shifted, std::io::stdout())?;
    Ok(())
}
