//! Closed-form bounds, renewal-cycle quantities and optimality ratios.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SystemConfig;
use crate::rational::{self, ExactValue, Rational};

fn r(n: usize) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Deterministic-scheduler lower bound `T α² / 2`.
pub fn lemma1_lower(horizon: usize, alpha: &Rational) -> Rational {
    r(horizon) * alpha * alpha / r(2)
}

/// Randomized-scheduler lower bound `T α² / (2N)`.
pub fn lemma2_lower(horizon: usize, alpha: &Rational, n_users: usize) -> Rational {
    lemma1_lower(horizon, alpha) / r(n_users)
}

/// Upper bound `(T + 1)/(2N) + (N − 1)` for the randomized scheduler.
pub fn thm2_upper(horizon: usize, n_users: usize) -> Rational {
    r(horizon + 1) / r(2 * n_users) + r(n_users - 1)
}

/// Diagnostic, not one of the published bounds: the randomized scheduler's
/// average age when one user's `B = floor(αT)` jammed slots are consecutive,
/// bounded by `N + (B(B+1)/2 + B(N−1)) / (N T)`.
///
/// Each unjammed user's expected age never exceeds `N`. The jammed user's age
/// exceeds `N` by at most `k` after `k` jammed slots and the excess decays by
/// `(N−1)/N` per slot afterwards, contributing at most `B(N−1)` more.
pub fn thm2_upper_block_aware(config: &SystemConfig) -> Rational {
    let n = config.n_users;
    let b = config.budget();
    let excess = r(b * (b + 1)) / r(2) + r(b * (n - 1));
    r(n) + excess / r(n * config.horizon)
}

/// `(E[C(τ)], E[τ], E[C(τ)]/E[τ])` for a renewal cycle with per-slot service
/// probability `q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenewalQuantities {
    pub expected_cycle_cost: Rational,
    pub expected_cycle_length: Rational,
    pub long_run_age: Rational,
}

pub fn renewal_quantities(q: &Rational) -> Result<RenewalQuantities> {
    if *q <= Rational::zero() || *q >= Rational::one() {
        return Err(Error::InvalidArgument(format!(
            "q must lie in (0, 1), got {}",
            rational::format(q)
        )));
    }
    let one = Rational::one();
    let cost = (q * q * (&one - q)).recip();
    let length = (q * (&one - q)).recip();
    let long_run = &cost / &length;
    Ok(RenewalQuantities {
        expected_cycle_cost: cost,
        expected_cycle_length: length,
        long_run_age: long_run,
    })
}

/// Summed age over one cycle: `τ_tr + τ_ntr²/2 + 3 τ_ntr / 2`.
pub fn cycle_cost(tau_tr: u64, tau_ntr: u64) -> Rational {
    let tr = Rational::from_integer(BigInt::from(tau_tr));
    let ntr = Rational::from_integer(BigInt::from(tau_ntr));
    tr + &ntr * &ntr / r(2) + r(3) * ntr / r(2)
}

/// Sub-carrier upper bound `N · N_sub / (N_sub − 1)`.
pub fn thm4_upper(n_users: usize, n_subcarriers: usize) -> Result<Rational> {
    if n_subcarriers < 2 {
        return Err(Error::InvalidArgument(format!(
            "n_subcarriers must be at least 2, got {n_subcarriers}"
        )));
    }
    Ok(r(n_users * n_subcarriers) / r(n_subcarriers - 1))
}

/// Lower bound `N/2 + 1/2` for the sub-carrier model with every channel
/// always available.
pub fn lb_modified(n_users: usize) -> Rational {
    r(n_users + 1) / r(2)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptimalityRatios {
    /// `thm2_upper / lemma2_lower` at the configured horizon.
    pub single_finite: Rational,
    /// `1 / α²`.
    pub single_asymptotic: Rational,
    /// `thm4_upper / lb_modified`, when the configuration has sub-carriers.
    pub subcarrier_finite: Option<Rational>,
    /// `2 N_sub / (N_sub − 1)`.
    pub subcarrier_asymptotic: Option<Rational>,
}

pub fn optimality_ratios(config: &SystemConfig) -> Result<OptimalityRatios> {
    if config.alpha.is_zero() {
        return Err(Error::InvalidArgument(
            "optimality ratio undefined for alpha = 0".into(),
        ));
    }
    let a2 = &config.alpha * &config.alpha;
    let single_finite = thm2_upper(config.horizon, config.n_users)
        / lemma2_lower(config.horizon, &config.alpha, config.n_users);
    let (sub_f, sub_a) = match config.n_subcarriers {
        Some(ns) => (
            Some(thm4_upper(config.n_users, ns)? / lb_modified(config.n_users)),
            Some(r(2 * ns) / r(ns - 1)),
        ),
        None => (None, None),
    };
    Ok(OptimalityRatios {
        single_finite,
        single_asymptotic: a2.recip(),
        subcarrier_finite: sub_f,
        subcarrier_asymptotic: sub_a,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundName {
    Lemma1,
    Lemma2,
    Thm2Upper,
    Thm2UpperBlockAware,
    Thm4Upper,
    LbModified,
    RatioSingle,
    RatioSingleAsymptotic,
    RatioSubcarrier,
    RatioSubcarrierAsymptotic,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: BoundName,
    pub value: ExactValue,
    pub config: SystemConfig,
}

/// Every bound that applies to `config`, in a fixed order.
pub fn bounds_table(config: &SystemConfig) -> Result<Vec<BoundReport>> {
    let mut rows: Vec<(BoundName, Rational)> = vec![
        (BoundName::Lemma1, lemma1_lower(config.horizon, &config.alpha)),
        (
            BoundName::Lemma2,
            lemma2_lower(config.horizon, &config.alpha, config.n_users),
        ),
        (BoundName::Thm2Upper, thm2_upper(config.horizon, config.n_users)),
        (BoundName::Thm2UpperBlockAware, thm2_upper_block_aware(config)),
    ];
    if let Some(ns) = config.n_subcarriers {
        rows.push((BoundName::Thm4Upper, thm4_upper(config.n_users, ns)?));
    }
    rows.push((BoundName::LbModified, lb_modified(config.n_users)));
    if !config.alpha.is_zero() {
        let ratios = optimality_ratios(config)?;
        rows.push((BoundName::RatioSingle, ratios.single_finite));
        rows.push((BoundName::RatioSingleAsymptotic, ratios.single_asymptotic));
        if let (Some(f), Some(a)) = (ratios.subcarrier_finite, ratios.subcarrier_asymptotic) {
            rows.push((BoundName::RatioSubcarrier, f));
            rows.push((BoundName::RatioSubcarrierAsymptotic, a));
        }
    }
    Ok(rows
        .into_iter()
        .map(|(name, v)| BoundReport {
            name,
            value: ExactValue::from(&v),
            config: config.clone(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    #[test]
    fn lemma_bounds() {
        assert_eq!(lemma1_lower(100, &frac(1, 2)), frac(25, 2));
        assert_eq!(lemma1_lower(100, &int(0)), int(0));
        assert_eq!(lemma1_lower(10, &int(1)), int(5));
        assert_eq!(lemma2_lower(100, &frac(1, 2), 5), frac(5, 2));
        assert_eq!(lemma2_lower(37, &frac(1, 3), 1), lemma1_lower(37, &frac(1, 3)));
        assert_eq!(lemma2_lower(37, &int(0), 4), int(0));
    }

    #[test]
    fn upper_bounds() {
        assert_eq!(thm2_upper(999, 10), int(59));
        assert_eq!(thm2_upper(41, 1), int(21));
        assert_eq!(thm2_upper(1, 1), int(1));
        assert_eq!(thm4_upper(4, 2).unwrap(), int(8));
        assert_eq!(thm4_upper(1, 2).unwrap(), int(2));
        assert!(thm4_upper(1, 1).is_err());
        let big = thm4_upper(3, 1_000_000).unwrap();
        assert!(big > int(3) && big - int(3) < frac(1, 100_000));
    }

    #[test]
    fn modified_lower_bound() {
        assert_eq!(lb_modified(9), int(5));
        assert_eq!(lb_modified(1), int(1));
        assert_eq!(lb_modified(2), frac(3, 2));
    }

    #[test]
    fn renewal() {
        let q = renewal_quantities(&frac(1, 2)).unwrap();
        assert_eq!(
            (q.expected_cycle_cost, q.expected_cycle_length, q.long_run_age),
            (int(8), int(4), int(2))
        );
        for n in 2..10 {
            assert_eq!(renewal_quantities(&frac(1, n)).unwrap().long_run_age, int(n));
            for ns in 2..6 {
                let q = frac(1, n) * frac(ns - 1, ns);
                assert_eq!(
                    renewal_quantities(&q).unwrap().long_run_age,
                    thm4_upper(n as usize, ns as usize).unwrap()
                );
            }
        }
        assert!(renewal_quantities(&int(0)).is_err());
        assert!(renewal_quantities(&int(1)).is_err());
    }

    #[test]
    fn cycle_costs() {
        assert_eq!(cycle_cost(3, 0), int(3));
        assert_eq!(cycle_cost(0, 2), int(5));
        assert_eq!(cycle_cost(1, 1), int(3));
        // Σ_{ℓ=1..k} (1 + ℓ)
        for k in 0..20u64 {
            let direct: u64 = (1..=k).map(|l| 1 + l).sum();
            assert_eq!(cycle_cost(0, k), int(direct as i64));
        }
    }

    #[test]
    fn ratios() {
        let c = SystemConfig::new(4, 1000, frac(1, 2)).unwrap().with_subcarriers(2).unwrap();
        let r = optimality_ratios(&c).unwrap();
        assert_eq!(r.single_asymptotic, int(4));
        assert_eq!(r.subcarrier_asymptotic, Some(int(4)));
        assert!(optimality_ratios(&SystemConfig::new(2, 10, int(0)).unwrap()).is_err());
        let wide = SystemConfig::new(4, 1000, frac(1, 2)).unwrap().with_subcarriers(100_000).unwrap();
        let a = optimality_ratios(&wide).unwrap().subcarrier_asymptotic.unwrap();
        assert!(a > int(2) && a - int(2) < frac(1, 10_000));
    }

    #[test]
    fn table_contains_thm2() {
        let c = SystemConfig::new(10, 999, frac(1, 5)).unwrap();
        let t = bounds_table(&c).unwrap();
        let thm2 = t.iter().find(|b| b.name == BoundName::Thm2Upper).unwrap();
        assert_eq!(thm2.value.to_rational().unwrap(), int(59));
    }
}
