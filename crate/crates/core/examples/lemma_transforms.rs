//! The block transformations behind the optimal adversary: reversal,
//! centering shifts and block merging, with the total age after each step.
//!
//! cargo run --example lemma_transforms

use aoi_adversary::adversary::{centered_cbs, lemma6_check, merge_to_centered, reverse_sequence, shift_cbs, Direction};
use aoi_adversary::exact_age::user_total_age;
use aoi_adversary::rational::{format, frac};
use aoi_adversary::{CbsDescriptor, Indexing, SystemConfig};

fn show(row: &[u8]) -> String {
    row.iter().map(|b| if *b == 0 { '0' } else { '1' }).collect()
}

fn main() -> aoi_adversary::Result<()> {
    let n = 3;
    let t = 10;
    let total = |row: &[u8]| format(&user_total_age(n, row, Indexing::Shifted));

    let d = CbsDescriptor::new(1, 2, 3);
    let row = d.to_row(t);
    let rev = reverse_sequence(&row);
    println!("reversal:  {} -> {}   {} = {}", show(&row), show(&rev), total(&row), total(&rev));

    println!("centering shifts:");
    let mut cur = d;
    loop {
        println!("  {}  total {}", show(&cur.to_row(t)), total(&cur.to_row(t)));
        if cur.left_ones() + 1 >= cur.right_ones(t) {
            break;
        }
        cur = shift_cbs(&cur, Direction::Right, t)?;
    }
    let c = SystemConfig::with_budget(n, t, 3)?;
    println!("  centered start: {}", centered_cbs(&c, 1, 3)?.start);

    println!("merging two blocks:");
    let two = [0, 1, 1, 1, 1, 0, 0, 1, 1, 1];
    let path = merge_to_centered(n, &two, Indexing::Shifted)?;
    for (r, v) in path.rows.iter().zip(&path.totals) {
        println!("  {}  total {}", show(r), format(v));
    }
    println!("  monotone: {}", path.is_monotone());

    let half = frac(1, 2);
    println!("power inequality, beta=1/2 a=3 b=2 c=1: {}", lemma6_check(&half, 3, 2, 1)?);
    println!("power inequality, beta=1/2 a=2 b=-1 c=1: {}", lemma6_check(&half, 2, -1, 1)?);
    Ok(())
}
