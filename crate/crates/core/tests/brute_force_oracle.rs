//! Cross-checks the pruned brute-force search against a naive enumerator
//! that visits every binary matrix and scores it in scaled integers.

use num_bigint::BigInt;
use num_rational::BigRational;

use aoi_adversary::adversary::{brute_force_optimum, candidate_count, BruteForceOptions};
use aoi_adversary::{BlockingMatrix, Error, Indexing, SystemConfig};

/// Sum over users and slots of `Δ(t+1)`, times `K^T` with `K = N` or
/// `N·N_sub`. With `S(t) = Δ(t)·K^(t-1)` the recursion stays integral:
/// `S(t+1) = S(t)·(K − σ) + K^(t)` where `σ` is the number of usable
/// channels pointed at the user.
fn scaled_total(config: &SystemConfig, m: &BlockingMatrix) -> u128 {
    let n = config.n_users as u128;
    let t_max = config.horizon;
    let (k, per_user): (u128, Vec<Vec<u128>>) = match config.n_subcarriers {
        None => (n, m.iter_rows().map(|r| r.iter().map(|&s| s as u128).collect()).collect()),
        Some(ns) => {
            let ns = ns as u128;
            let sigma: Vec<u128> = (1..=t_max).map(|s| ns - m.column_zeros(s) as u128).collect();
            (n * ns, vec![sigma; config.n_users])
        }
    };
    let mut total = 0u128;
    for sig in &per_user {
        let mut s = 1u128;
        let mut kp = 1u128;
        for (i, &x) in sig.iter().enumerate() {
            kp *= k;
            s = s * (k - x) + kp;
            // S(i+2) holds Δ(i+2)·K^(i+1); bring it to K^T
            total += s * k.pow((t_max - 1 - i) as u32);
        }
    }
    total
}

fn feasible(config: &SystemConfig, m: &BlockingMatrix) -> bool {
    m.zero_count() <= config.budget() && (1..=config.horizon).all(|s| m.column_zeros(s) <= 1)
}

struct Naive {
    best: u128,
    maximizers: Vec<BlockingMatrix>,
    count: u64,
}

fn naive(config: &SystemConfig) -> Naive {
    let rows = config.sigma_rows();
    let t = config.horizon;
    let bits = rows * t;
    let mut out = Naive {
        best: 0,
        maximizers: Vec::new(),
        count: 0,
    };
    for mask in 0u64..(1u64 << bits) {
        let grid: Vec<Vec<u8>> = (0..rows)
            .map(|r| (0..t).map(|c| 1 - (mask >> (r * t + c) & 1) as u8).collect())
            .collect();
        let m = BlockingMatrix::from_rows(grid).unwrap();
        if !feasible(config, &m) {
            continue;
        }
        out.count += 1;
        let v = scaled_total(config, &m);
        if v > out.best || out.maximizers.is_empty() {
            out.best = v;
            out.maximizers.clear();
        }
        if v == out.best {
            out.maximizers.push(m);
        }
    }
    out.maximizers.sort();
    out
}

fn check(config: SystemConfig) {
    let set = brute_force_optimum(&config, &BruteForceOptions::default()).unwrap();
    let want = naive(&config);
    assert_eq!(set.enumerated_count, want.count, "{config}");
    assert_eq!(set.maximizers, want.maximizers, "{config}");
    let k = config.n_users * config.n_subcarriers.unwrap_or(1);
    let scale = BigInt::from(k).pow(config.horizon as u32) * BigInt::from(config.n_users * config.horizon);
    assert_eq!(set.best_value, BigRational::new(BigInt::from(want.best), scale), "{config}");
}

#[test]
fn single_channel_matches_naive() {
    for (n, t) in [(1, 6), (2, 4), (2, 6), (2, 8), (3, 5), (3, 6)] {
        for b in 0..=t.min(4) {
            check(SystemConfig::with_budget(n, t, b).unwrap());
        }
    }
}

#[test]
fn subcarrier_matches_naive() {
    for (n, ns, t) in [(1, 2, 6), (2, 2, 7), (3, 2, 5), (2, 3, 5)] {
        for b in 0..=3 {
            check(SystemConfig::with_budget(n, t, b).unwrap().with_subcarriers(ns).unwrap());
        }
    }
}

#[test]
fn raw_indexing_ignores_last_slot() {
    // under raw indexing σ(T) never enters the objective
    let c = SystemConfig::with_budget(2, 5, 1).unwrap();
    let raw = brute_force_optimum(
        &c,
        &BruteForceOptions {
            indexing: Indexing::Raw,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(raw.maximizers.iter().all(|m| m.column_zeros(5) == 0));
}

#[test]
fn cap_is_enforced() {
    let c = SystemConfig::with_budget(3, 14, 3).unwrap();
    assert_eq!(candidate_count(&c), 4u128.pow(14));
    let err = brute_force_optimum(
        &c,
        &BruteForceOptions {
            cap: 1_000_000,
            ..Default::default()
        },
    )
    .unwrap_err();
    assert!(matches!(err, Error::OverCap { .. }));
}
