//! Structural claim suite run by `aoi verify`.
//!
//! Each check enumerates a small grid exhaustively (or samples it with a
//! fixed seed) and compares exact rationals; nothing here has a tolerance.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::{
    self, brute_force_optimum, centered_cbs, is_centered_jamming_run,
    is_single_row_centered_block, merge_to_centered, reverse_sequence, shift_cbs,
    BruteForceOptions, Direction, MaximizerSet,
};
use crate::bounds;
use crate::error::Result;
use crate::exact_age::{self, Indexing};
use crate::model::{cbs_to_matrix, zero_blocks, BlockingMatrix, CbsDescriptor, SystemConfig};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyGrid {
    pub users: Vec<usize>,
    pub horizons: Vec<usize>,
    pub budgets: Vec<usize>,
    pub subcarriers: Vec<usize>,
    /// Exhaustive checks cover every `T <= sweep_max_horizon`, `2 <= N <= sweep_max_users`.
    pub sweep_max_horizon: usize,
    pub sweep_max_users: usize,
    pub merge_max_zeros: usize,
    pub random_matrices: usize,
    pub inequality_samples: usize,
    pub seed: u64,
    pub cap: u128,
}

impl Default for VerifyGrid {
    fn default() -> Self {
        VerifyGrid {
            users: vec![2, 3],
            horizons: vec![6, 8, 10],
            budgets: vec![1, 2, 3],
            subcarriers: vec![2, 3],
            sweep_max_horizon: 12,
            sweep_max_users: 5,
            merge_max_zeros: 4,
            random_matrices: 1000,
            inequality_samples: 10_000,
            seed: 0x5eed,
            cap: adversary::DEFAULT_CAP,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClaimResult {
    pub claim: String,
    pub passed: bool,
    pub checked: u64,
    pub detail: String,
}

impl ClaimResult {
    fn new(claim: &str, failures: &[String], checked: u64) -> Self {
        ClaimResult {
            claim: claim.to_string(),
            passed: failures.is_empty(),
            checked,
            detail: match failures.first() {
                None => String::new(),
                Some(f) => format!("{} failure(s); first: {f}", failures.len()),
            },
        }
    }
}

/// A random feasible single-channel matrix: each slot blocks no row or one row.
pub fn random_feasible(rng: &mut impl Rng, n: usize, t: usize) -> (SystemConfig, BlockingMatrix) {
    let mut m = BlockingMatrix::all_ones(n, t);
    for slot in 1..=t {
        let c = rng.random_range(0..=n);
        if c > 0 {
            m.block(c, slot);
        }
    }
    let config = SystemConfig::with_budget(n, t, m.zero_count()).expect("valid config");
    (config, m)
}

pub fn check_engine_equivalence(grid: &VerifyGrid) -> Result<ClaimResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(grid.seed);
    let mut failures = Vec::new();
    for _ in 0..grid.random_matrices {
        let n = rng.random_range(1..=grid.sweep_max_users);
        let t = rng.random_range(1..=grid.sweep_max_horizon);
        let (c, m) = random_feasible(&mut rng, n, t);
        if exact_age::age_by_recursion(&c, &m)? != exact_age::age_by_trains(&c, &m)? {
            failures.push(format!("{c}: {m:?}"));
        }
    }
    Ok(ClaimResult::new(
        "engine equivalence (recursion == trains)",
        &failures,
        grid.random_matrices as u64,
    ))
}

fn total(n: usize, row: &[u8]) -> Rational {
    exact_age::user_total_age(n, row, Indexing::Shifted)
}

fn all_cbs(t: usize) -> impl Iterator<Item = CbsDescriptor> {
    (1..=t).flat_map(move |len| (1..=t + 1 - len).map(move |s| CbsDescriptor::new(1, s, len)))
}

pub fn check_reversal_ties(grid: &VerifyGrid) -> Result<ClaimResult> {
    let mut failures = Vec::new();
    let mut checked = 0;
    for n in 2..=grid.sweep_max_users {
        for t in 1..=grid.sweep_max_horizon {
            for d in all_cbs(t) {
                let row = d.to_row(t);
                checked += 1;
                if total(n, &row) != total(n, &reverse_sequence(&row)) {
                    failures.push(format!("N={n} T={t} {d:?}"));
                }
            }
        }
    }
    Ok(ClaimResult::new("reversal leaves a block's total age unchanged", &failures, checked))
}

pub fn check_centering_shifts(grid: &VerifyGrid) -> Result<ClaimResult> {
    let mut failures = Vec::new();
    let mut checked = 0;
    for n in 2..=grid.sweep_max_users {
        for t in 1..=grid.sweep_max_horizon {
            for d in all_cbs(t) {
                let before = total(n, &d.to_row(t));
                let min_before = d.left_ones().min(d.right_ones(t));
                for dir in [Direction::Left, Direction::Right] {
                    let Ok(s) = shift_cbs(&d, dir, t) else { continue };
                    if s.left_ones().min(s.right_ones(t)) < min_before {
                        continue;
                    }
                    checked += 1;
                    if total(n, &s.to_row(t)) < before {
                        failures.push(format!("N={n} T={t} {d:?} {dir:?}"));
                    }
                }
            }
        }
    }
    Ok(ClaimResult::new("centering shifts never lower total age", &failures, checked))
}

/// Largest total age over every row of length `t` with exactly `zeros` zeros.
pub fn max_total_with_zeros(n: usize, t: usize, zeros: usize) -> Rational {
    let mut best: Option<Rational> = None;
    for mask in 0u32..(1u32 << t) {
        if mask.count_ones() as usize != zeros {
            continue;
        }
        let row: Vec<u8> = (0..t).map(|i| if mask >> i & 1 == 1 { 0 } else { 1 }).collect();
        let v = total(n, &row);
        if best.as_ref().is_none_or(|b| v > *b) {
            best = Some(v);
        }
    }
    best.expect("at least one row")
}

/// Every row of length `t` with exactly two zero blocks and at most `max_zeros` zeros.
pub fn two_block_rows(t: usize, max_zeros: usize) -> Vec<Vec<u8>> {
    (0u32..(1u32 << t))
        .filter(|m| (m.count_ones() as usize) <= max_zeros)
        .map(|mask| (0..t).map(|i| if mask >> i & 1 == 1 { 0 } else { 1 }).collect::<Vec<u8>>())
        .filter(|row| zero_blocks(row).len() == 2)
        .collect()
}

pub fn check_block_merging(grid: &VerifyGrid) -> Result<ClaimResult> {
    let mut failures = Vec::new();
    let mut checked = 0;
    let mut best: HashMap<(usize, usize, usize), Rational> = HashMap::new();
    for n in 2..=grid.sweep_max_users {
        for t in 3..=grid.sweep_max_horizon {
            for row in two_block_rows(t, grid.merge_max_zeros) {
                checked += 1;
                let zeros = row.iter().filter(|&&v| v == 0).count();
                let path = merge_to_centered(n, &row, Indexing::Shifted)?;
                let end = CbsDescriptor::from_row(1, path.last());
                let centered = end.is_some_and(|d| d.left_ones().abs_diff(d.right_ones(t)) <= 1);
                let top = best
                    .entry((n, t, zeros))
                    .or_insert_with(|| max_total_with_zeros(n, t, zeros));
                let reaches_max = path.totals.last() == Some(top);
                if !(path.is_monotone() && centered && reaches_max) {
                    failures.push(format!(
                        "N={n} row={row:?} monotone={} centered={centered} max={reaches_max}",
                        path.is_monotone()
                    ));
                }
            }
        }
    }
    Ok(ClaimResult::new(
        "merging two blocks then centering is monotone and optimal",
        &failures,
        checked,
    ))
}

/// One `(β, a, b, c)` sample.
pub type InequalitySample = (Rational, i64, i64, i64);

/// Samples `(β, a, b, c)` with `β = k/100`, `c < a`, exponents in
/// `[-range, range]` and `b` in `b_range`, returning `(sample, verdict)` where
/// the verdict is `None` when a power is undefined.
pub fn power_inequality_samples(
    seed: u64,
    samples: usize,
    range: i64,
    b_range: std::ops::RangeInclusive<i64>,
    beta_num: std::ops::RangeInclusive<i64>,
) -> Vec<(InequalitySample, Option<bool>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let beta = rational::frac(rng.random_range(beta_num.clone()), 100);
            let a = rng.random_range(-range + 1..=range);
            let c = rng.random_range(-range..a);
            let b = rng.random_range(b_range.clone());
            let verdict = adversary::lemma6_check(&beta, a, b, c).ok();
            ((beta, a, b, c), verdict)
        })
        .collect()
}

/// Samples the inequality with a non-negative shared exponent `b`, the range
/// in which it is applied to train values.
pub fn check_power_inequality(grid: &VerifyGrid) -> Result<ClaimResult> {
    let samples = power_inequality_samples(grid.seed, grid.inequality_samples, 20, 0..=20, 1..=100);
    let failures: Vec<String> = samples
        .iter()
        .filter(|(_, v)| *v != Some(true))
        .map(|((beta, a, b, c), _)| format!("beta={} a={a} b={b} c={c}", rational::format(beta)))
        .collect();
    Ok(ClaimResult::new(
        "power-difference inequality (b >= 0)",
        &failures,
        samples.len() as u64,
    ))
}

/// Brute-force results for every single-channel instance of the grid.
pub fn single_channel_optima(grid: &VerifyGrid) -> Result<Vec<(SystemConfig, MaximizerSet)>> {
    let opts = BruteForceOptions {
        cap: grid.cap,
        indexing: Indexing::Shifted,
    };
    let mut out = Vec::new();
    for &n in &grid.users {
        for &t in &grid.horizons {
            for &b in &grid.budgets {
                let c = SystemConfig::with_budget(n, t, b)?;
                let set = brute_force_optimum(&c, &opts)?;
                out.push((c, set));
            }
        }
    }
    Ok(out)
}

pub fn check_single_channel_structure(optima: &[(SystemConfig, MaximizerSet)]) -> ClaimResult {
    let mut failures = Vec::new();
    let mut checked = 0;
    for (c, set) in optima {
        for m in &set.maximizers {
            checked += 1;
            if !is_single_row_centered_block(c, m) {
                failures.push(format!("{c}: {m:?}"));
            }
            if !set.contains(&m.time_reversed()) {
                failures.push(format!("{c}: mirror of {m:?} missing"));
            }
        }
        // every row, both mirror placements
        let d = centered_cbs(c, 1, c.budget()).expect("budget within horizon");
        let placements = if d.left_ones() == d.right_ones(c.horizon) { 1 } else { 2 };
        if set.maximizers.len() != c.n_users * placements {
            failures.push(format!("{c}: {} maximizers", set.maximizers.len()));
        }
    }
    ClaimResult::new(
        "optimal adversary jams one user in one centered full-budget block",
        &failures,
        checked,
    )
}

pub fn check_subcarrier_structure(grid: &VerifyGrid) -> Result<ClaimResult> {
    let opts = BruteForceOptions {
        cap: grid.cap,
        indexing: Indexing::Shifted,
    };
    let mut failures = Vec::new();
    let mut checked = 0;
    for &ns in &grid.subcarriers {
        for &t in &grid.horizons {
            for &b in &grid.budgets {
                let c = SystemConfig::with_budget(2, t, b)?.with_subcarriers(ns)?;
                let set = brute_force_optimum(&c, &opts)?;
                checked += set.maximizers.len() as u64;
                if let Some(m) = set.maximizers.iter().find(|m| !is_centered_jamming_run(&c, m)) {
                    failures.push(format!("{c}: {m:?}"));
                }
                let d = centered_cbs(&c, 1, b)?;
                let fixed = cbs_to_matrix(&c, &d)?;
                let v = exact_age::age_by_recursion_subcarrier(&c, &fixed)?
                    .overall_mean(Indexing::Shifted);
                if v != set.best_value {
                    failures.push(format!("{c}: fixed sub-carrier block not optimal"));
                }
                let placements = if d.left_ones() == d.right_ones(t) { 1 } else { 2 };
                let relabelings = (ns as u64).pow(b as u32);
                if set.maximizers.len() as u64 != placements * relabelings {
                    failures.push(format!(
                        "{c}: {} maximizers, expected {}",
                        set.maximizers.len(),
                        placements * relabelings
                    ));
                }
            }
        }
    }
    Ok(ClaimResult::new(
        "sub-carrier optimum is one centered run, any sub-carrier per slot",
        &failures,
        checked,
    ))
}

pub fn check_bound_sandwich(optima: &[(SystemConfig, MaximizerSet)]) -> ClaimResult {
    let mut failures = Vec::new();
    for (c, set) in optima {
        let lo = bounds::lemma2_lower(c.horizon, &c.alpha, c.n_users);
        let hi = bounds::thm2_upper(c.horizon, c.n_users);
        let diag = bounds::thm2_upper_block_aware(c);
        if !(lo <= set.best_value && set.best_value <= hi && set.best_value <= diag) {
            failures.push(format!(
                "{c}: {} not in [{}, min({}, {})]",
                rational::format(&set.best_value),
                rational::format(&lo),
                rational::format(&hi),
                rational::format(&diag)
            ));
        }
    }
    ClaimResult::new("lower bound <= optimum <= upper bounds", &failures, optima.len() as u64)
}

pub fn run_suite(grid: &VerifyGrid) -> Result<Vec<ClaimResult>> {
    let optima = single_channel_optima(grid)?;
    Ok(vec![
        check_engine_equivalence(grid)?,
        check_reversal_ties(grid)?,
        check_centering_shifts(grid)?,
        check_block_merging(grid)?,
        check_power_inequality(grid)?,
        check_single_channel_structure(&optima),
        check_subcarrier_structure(grid)?,
        check_bound_sandwich(&optima),
    ])
}
