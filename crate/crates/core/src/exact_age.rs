//! Exact expected-age trajectories under the uniform randomized scheduler.
//!
//! The one-step recursion starts from `Δ(1) = 1` and, for `t = 1..=T`, sets
//! `Δ(t+1) = Δ(t) · m(t) + 1`, where the multiplier `m(t)` is `1 - σ_i(t)/N`
//! in the single-channel model and `1 - σ̃(t)/(N·N_sub)` in the sub-carrier
//! model. An [`AgeTrajectory`] keeps all `T + 1` raw values so both slot
//! conventions can be read off the same vector:
//!
//! * [`Indexing::Raw`] reports `Δ(1..=T)`. This is what a simulation observes.
//! * [`Indexing::Shifted`] reports `Δ(2..=T+1)` at slots `1..=T`, so the value
//!   at slot `t` is driven by `σ(1..=t)` and every slot of the horizon counts.
//!   The structural checks in [`crate::adversary`] use this convention.

use std::io::Write;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate, BlockingMatrix, Model, SystemConfig};
use crate::rational::{self, ExactValue, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Indexing {
    #[default]
    Raw,
    Shifted,
}

impl std::str::FromStr for Indexing {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Indexing::Raw),
            "shifted" => Ok(Indexing::Shifted),
            _ => Err(Error::Parse(format!("unknown indexing {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainValue {
    pub start: usize,
    pub end: usize,
    pub value: Rational,
}

/// Per-user expected ages, stored raw (`T + 1` values per user).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgeTrajectory {
    horizon: usize,
    raw: Vec<Vec<Rational>>,
}

impl AgeTrajectory {
    fn new(horizon: usize, raw: Vec<Vec<Rational>>) -> Self {
        debug_assert!(raw.iter().all(|r| r.len() == horizon + 1));
        AgeTrajectory { horizon, raw }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn n_users(&self) -> usize {
        self.raw.len()
    }

    /// `Δ_user(1..=T+1)`, user 1-based.
    pub fn raw_series(&self, user: usize) -> &[Rational] {
        &self.raw[user - 1]
    }

    /// `Δ_user(t)` for `t = 1..=T` under the given convention.
    pub fn series(&self, user: usize, indexing: Indexing) -> &[Rational] {
        let r = &self.raw[user - 1];
        match indexing {
            Indexing::Raw => &r[..self.horizon],
            Indexing::Shifted => &r[1..],
        }
    }

    pub fn at(&self, user: usize, slot: usize, indexing: Indexing) -> &Rational {
        &self.series(user, indexing)[slot - 1]
    }

    pub fn user_total(&self, user: usize, indexing: Indexing) -> Rational {
        sum(self.series(user, indexing))
    }

    pub fn per_user_mean(&self, indexing: Indexing) -> Vec<Rational> {
        let t = int_r(self.horizon);
        (1..=self.n_users())
            .map(|u| self.user_total(u, indexing) / &t)
            .collect()
    }

    pub fn overall_mean(&self, indexing: Indexing) -> Rational {
        let n = int_r(self.n_users());
        sum(&self.per_user_mean(indexing)) / n
    }

    pub fn write_csv<W: Write>(&self, indexing: Indexing, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["t", "user", "delta_exact_num", "delta_exact_den", "delta_float"])?;
        for user in 1..=self.n_users() {
            for (i, v) in self.series(user, indexing).iter().enumerate() {
                wtr.write_record([
                    (i + 1).to_string(),
                    user.to_string(),
                    v.numer().to_string(),
                    v.denom().to_string(),
                    rational::to_f64(v).to_string(),
                ])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_export(&self, indexing: Indexing) -> TrajectoryExport {
        TrajectoryExport {
            indexing,
            horizon: self.horizon,
            per_user: (1..=self.n_users())
                .map(|u| self.series(u, indexing).iter().map(ExactValue::from).collect())
                .collect(),
            per_user_mean: self.per_user_mean(indexing).iter().map(ExactValue::from).collect(),
            overall_mean: ExactValue::from(&self.overall_mean(indexing)),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryExport {
    pub indexing: Indexing,
    pub horizon: usize,
    pub per_user: Vec<Vec<ExactValue>>,
    pub per_user_mean: Vec<ExactValue>,
    pub overall_mean: ExactValue,
}

fn int_r(n: usize) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn sum(values: &[Rational]) -> Rational {
    values.iter().fold(Rational::zero(), |acc, v| acc + v)
}

/// One step of the age recursion.
pub fn step(delta: &Rational, multiplier: &Rational) -> Rational {
    delta * multiplier + Rational::one()
}

/// `1 - sigma/N` for a single-channel row entry.
pub fn single_channel_factor(n_users: usize, sigma: u8) -> Rational {
    if sigma == 0 {
        Rational::one()
    } else {
        rational::frac(n_users as i64 - 1, n_users as i64)
    }
}

/// `1 - σ̃/(N·N_sub)` for a slot where `blocked` sub-carriers are jammed.
pub fn subcarrier_factor(n_users: usize, n_sub: usize, blocked: usize) -> Rational {
    let total = (n_users * n_sub) as i64;
    Rational::one() - rational::frac((n_sub - blocked) as i64, total)
}

fn raw_from_factors(factors: &[Rational]) -> Vec<Rational> {
    let mut out = Vec::with_capacity(factors.len() + 1);
    let mut d = Rational::one();
    out.push(d.clone());
    for f in factors {
        d = step(&d, f);
        out.push(d.clone());
    }
    out
}

/// Raw recursion values `Δ(1..=T+1)` for one single-channel row.
pub fn row_raw_ages(n_users: usize, row: &[u8]) -> Vec<Rational> {
    let factors: Vec<Rational> = row.iter().map(|&s| single_channel_factor(n_users, s)).collect();
    raw_from_factors(&factors)
}

/// Total expected age of one user over the horizon, computed from its row alone.
pub fn user_total_age(n_users: usize, row: &[u8], indexing: Indexing) -> Rational {
    let raw = row_raw_ages(n_users, row);
    match indexing {
        Indexing::Raw => sum(&raw[..row.len()]),
        Indexing::Shifted => sum(&raw[1..]),
    }
}

fn require_single(config: &SystemConfig, sigma: &BlockingMatrix) -> Result<()> {
    if config.model() != Model::SingleChannel {
        return Err(Error::ModelMismatch {
            expected: "single-channel",
        });
    }
    validate(config, sigma)
}

fn require_subcarrier(config: &SystemConfig, sigma: &BlockingMatrix) -> Result<usize> {
    let n_sub = config.n_subcarriers.ok_or(Error::ModelMismatch {
        expected: "sub-carrier",
    })?;
    validate(config, sigma)?;
    Ok(n_sub)
}

pub fn age_by_recursion(config: &SystemConfig, sigma: &BlockingMatrix) -> Result<AgeTrajectory> {
    require_single(config, sigma)?;
    let raw = sigma
        .iter_rows()
        .map(|row| row_raw_ages(config.n_users, row))
        .collect();
    Ok(AgeTrajectory::new(config.horizon, raw))
}

/// `Γ(k, ℓ)`: product of `1 - σ(j)/N` over `j = k..=ℓ` (1-based, inclusive).
pub fn train_value(config: &SystemConfig, sigma_row: &[u8], k: usize, l: usize) -> Result<Rational> {
    check_train_bounds(sigma_row.len(), k, l)?;
    let ones = sigma_row[k - 1..l].iter().filter(|&&s| s == 1).count();
    let base = single_channel_factor(config.n_users, 1);
    Ok(num_traits::pow(base, ones))
}

fn check_train_bounds(horizon: usize, k: usize, l: usize) -> Result<()> {
    if k > l {
        return Err(Error::InvalidArgument(format!("train start {k} after end {l}")));
    }
    if k == 0 || l > horizon {
        return Err(Error::OutOfRange(format!(
            "train ({k}, {l}) outside 1..={horizon}"
        )));
    }
    Ok(())
}

/// The trains `r(ℓ, t)` for `ℓ = 1..=t`, whose values sum to the age.
pub fn trains_ending_at(config: &SystemConfig, sigma_row: &[u8], t: usize) -> Result<Vec<TrainValue>> {
    (1..=t)
        .map(|start| {
            Ok(TrainValue {
                start,
                end: t,
                value: train_value(config, sigma_row, start, t)?,
            })
        })
        .collect()
}

/// Same trajectory as [`age_by_recursion`], assembled as `1 + Σ_ℓ Γ(ℓ, t)`.
pub fn age_by_trains(config: &SystemConfig, sigma: &BlockingMatrix) -> Result<AgeTrajectory> {
    require_single(config, sigma)?;
    let mut raw = Vec::with_capacity(sigma.rows());
    for row in sigma.iter_rows() {
        let mut series = Vec::with_capacity(config.horizon + 1);
        series.push(Rational::one());
        for t in 1..=config.horizon {
            let trains = trains_ending_at(config, row, t)?;
            series.push(trains.iter().fold(Rational::one(), |acc, tr| acc + &tr.value));
        }
        raw.push(series);
    }
    Ok(AgeTrajectory::new(config.horizon, raw))
}

fn subcarrier_factors(config: &SystemConfig, n_sub: usize, sigma: &BlockingMatrix) -> Vec<Rational> {
    (1..=config.horizon)
        .map(|slot| subcarrier_factor(config.n_users, n_sub, sigma.column_zeros(slot)))
        .collect()
}

/// Sub-carrier model recursion. The multiplier has no user index, so the
/// single shared trajectory is replicated for every user.
pub fn age_by_recursion_subcarrier(
    config: &SystemConfig,
    sigma: &BlockingMatrix,
) -> Result<AgeTrajectory> {
    let n_sub = require_subcarrier(config, sigma)?;
    let shared = raw_from_factors(&subcarrier_factors(config, n_sub, sigma));
    Ok(AgeTrajectory::new(
        config.horizon,
        vec![shared; config.n_users],
    ))
}

/// Sub-carrier train value: product of the per-slot multipliers over `k..=ℓ`.
pub fn subcarrier_train_value(
    config: &SystemConfig,
    sigma: &BlockingMatrix,
    k: usize,
    l: usize,
) -> Result<Rational> {
    let n_sub = require_subcarrier(config, sigma)?;
    check_train_bounds(config.horizon, k, l)?;
    let jammed = (k..=l).filter(|&s| sigma.column_zeros(s) > 0).count();
    let clear = l + 1 - k - jammed;
    Ok(num_traits::pow(subcarrier_factor(config.n_users, n_sub, 0), clear)
        * num_traits::pow(subcarrier_factor(config.n_users, n_sub, 1), jammed))
}

/// Sub-carrier trajectory assembled from trains; equal to the recursion.
pub fn age_by_trains_subcarrier(
    config: &SystemConfig,
    sigma: &BlockingMatrix,
) -> Result<AgeTrajectory> {
    require_subcarrier(config, sigma)?;
    let mut series = vec![Rational::one()];
    for t in 1..=config.horizon {
        let mut d = Rational::one();
        for start in 1..=t {
            d += subcarrier_train_value(config, sigma, start, t)?;
        }
        series.push(d);
    }
    Ok(AgeTrajectory::new(
        config.horizon,
        vec![series; config.n_users],
    ))
}

/// Finite-horizon objective `(1/T) Σ_t (1/N) Σ_i Δ_i(t)`.
pub fn objective(_config: &SystemConfig, trajectory: &AgeTrajectory, indexing: Indexing) -> Rational {
    trajectory.overall_mean(indexing)
}

/// Evaluates a feasible matrix under whichever model the configuration names.
pub fn evaluate(config: &SystemConfig, sigma: &BlockingMatrix) -> Result<AgeTrajectory> {
    match config.model() {
        Model::SingleChannel => age_by_recursion(config, sigma),
        Model::Subcarrier => age_by_recursion_subcarrier(config, sigma),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::cbs_to_matrix;
    use crate::model::CbsDescriptor;
    use crate::rational::{frac, int};
    use proptest::prelude::*;

    /// Rows beyond those given are unblocked.
    fn single(n: usize, mut rows: Vec<Vec<u8>>) -> (SystemConfig, BlockingMatrix) {
        let h = rows[0].len();
        rows.resize(n, vec![1; h]);
        let m = BlockingMatrix::from_rows(rows).unwrap();
        let c = SystemConfig::with_budget(n, m.horizon(), m.horizon()).unwrap();
        (c, m)
    }

    #[test]
    fn single_user_resets_every_slot() {
        let (c, m) = single(1, vec![vec![1; 6]]);
        let tr = age_by_recursion(&c, &m).unwrap();
        assert!(tr.raw_series(1).iter().all(|v| *v == int(1)));
    }

    #[test]
    fn hand_iterated_recursion() {
        let (c, m) = single(2, vec![vec![1, 1, 1], vec![1, 1, 1]]);
        let tr = age_by_recursion(&c, &m).unwrap();
        assert_eq!(tr.raw_series(1), &[int(1), frac(3, 2), frac(7, 4), frac(15, 8)]);

        let (c, m) = single(2, vec![vec![1, 0, 1], vec![1, 1, 1]]);
        let tr = age_by_recursion(&c, &m).unwrap();
        assert_eq!(tr.raw_series(1), &[int(1), frac(3, 2), frac(5, 2), frac(9, 4)]);
    }

    #[test]
    fn trains_match_hand_expansion() {
        let (c, m) = single(2, vec![vec![1, 1, 1], vec![1, 1, 1]]);
        let tr = age_by_trains(&c, &m).unwrap();
        // Γ(1,3) + Γ(2,3) + Γ(3,3) + 1
        assert_eq!(*tr.at(1, 3, Indexing::Shifted), frac(1, 8) + frac(1, 4) + frac(1, 2) + int(1));
        assert_eq!(*tr.at(1, 3, Indexing::Shifted), frac(15, 8));
    }

    #[test]
    fn first_shifted_slot_is_one_train() {
        for n in 1..5 {
            for first in [0u8, 1] {
                let (c, m) = single(n, vec![vec![first, 1, 1]]);
                let tr = age_by_trains(&c, &m).unwrap();
                let expect = if first == 0 { int(2) } else { int(2) - frac(1, n as i64) };
                assert_eq!(*tr.at(1, 1, Indexing::Shifted), expect);
            }
        }
    }

    #[test]
    fn blocked_prefix_grows_linearly() {
        let (c, m) = single(3, vec![vec![0, 0, 0, 0, 1]]);
        let tr = age_by_trains(&c, &m).unwrap();
        for t in 1..=4 {
            assert_eq!(*tr.at(1, t, Indexing::Shifted), int(t as i64 + 1));
        }
    }

    #[test]
    fn train_values() {
        let c = SystemConfig::with_budget(5, 4, 0).unwrap();
        assert_eq!(train_value(&c, &[1, 1, 1, 1], 1, 4).unwrap(), frac(256, 625));
        assert_eq!(train_value(&c, &[0, 0, 0, 0], 1, 4).unwrap(), int(1));
        assert!(matches!(
            train_value(&c, &[1, 1, 1, 1], 3, 2),
            Err(Error::InvalidArgument(_))
        ));
        assert!(train_value(&c, &[1, 1, 1, 1], 1, 5).is_err());
    }

    #[test]
    fn figure_style_trains() {
        // mixed row 1 1 0 0 1 0 1: r(1,4) has two ones, r(2,7) has three ones
        let c = SystemConfig::with_budget(3, 7, 3).unwrap();
        let row = [1, 1, 0, 0, 1, 0, 1];
        assert_eq!(train_value(&c, &row, 1, 4).unwrap(), frac(4, 9));
        assert_eq!(train_value(&c, &row, 2, 7).unwrap(), frac(8, 27));
    }

    #[test]
    fn objective_examples() {
        let c = SystemConfig::with_budget(2, 3, 0).unwrap();
        let tr = age_by_recursion(&c, &BlockingMatrix::unblocked(&c)).unwrap();
        assert_eq!(objective(&c, &tr, Indexing::Raw), frac(17, 12));
        assert_eq!(tr.per_user_mean(Indexing::Raw), vec![frac(17, 12), frac(17, 12)]);

        let c1 = SystemConfig::with_budget(1, 4, 0).unwrap();
        let tr1 = age_by_recursion(&c1, &BlockingMatrix::unblocked(&c1)).unwrap();
        assert_eq!(objective(&c1, &tr1, Indexing::Raw), int(1));
    }

    #[test]
    fn subcarrier_examples() {
        let c = SystemConfig::with_budget(2, 3, 1)
            .unwrap()
            .with_subcarriers(2)
            .unwrap();
        let tr = age_by_recursion_subcarrier(&c, &BlockingMatrix::unblocked(&c)).unwrap();
        assert_eq!(&tr.raw_series(1)[..3], &[int(1), frac(3, 2), frac(7, 4)]);

        let mut m = BlockingMatrix::unblocked(&c);
        m.block(2, 1);
        let tr = age_by_recursion_subcarrier(&c, &m).unwrap();
        assert_eq!(tr.raw_series(1)[1], frac(7, 4));
        assert_eq!(tr.raw_series(1), tr.raw_series(2));

        let mut swapped = BlockingMatrix::unblocked(&c);
        swapped.block(1, 1);
        assert_eq!(age_by_recursion_subcarrier(&c, &swapped).unwrap(), tr);
        assert_eq!(age_by_trains_subcarrier(&c, &m).unwrap(), tr);
    }

    #[test]
    fn subcarrier_needs_nsub() {
        let c = SystemConfig::with_budget(2, 3, 1).unwrap();
        assert!(matches!(
            age_by_recursion_subcarrier(&c, &BlockingMatrix::unblocked(&c)),
            Err(Error::ModelMismatch { .. })
        ));
        let sub = c.with_subcarriers(2).unwrap();
        assert!(age_by_recursion(&sub, &BlockingMatrix::unblocked(&sub)).is_err());
    }

    #[test]
    fn infeasible_rejected() {
        let c = SystemConfig::with_budget(2, 3, 1).unwrap();
        let m = BlockingMatrix::from_rows(vec![vec![0, 0, 1], vec![1, 1, 1]]).unwrap();
        assert!(matches!(age_by_recursion(&c, &m), Err(Error::Infeasible(_))));
        assert!(matches!(age_by_trains(&c, &m), Err(Error::Infeasible(_))));
    }

    #[test]
    fn csv_export_columns() {
        let c = SystemConfig::with_budget(2, 2, 0).unwrap();
        let tr = age_by_recursion(&c, &BlockingMatrix::unblocked(&c)).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(Indexing::Raw, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,user,delta_exact_num,delta_exact_den,delta_float");
        assert_eq!(lines[2], "2,1,3,2,1.5");
        assert_eq!(lines.len(), 5);
    }

    #[test]
    fn zero_budget_closed_form() {
        for n in 1..=5usize {
            let c = SystemConfig::with_budget(n, 10, 0).unwrap();
            let tr = age_by_recursion(&c, &BlockingMatrix::unblocked(&c)).unwrap();
            let beta = frac(n as i64 - 1, n as i64);
            for t in 1..=10usize {
                let closed = int(n as i64) - int(n as i64 - 1) * num_traits::pow(beta.clone(), t - 1);
                assert_eq!(*tr.at(1, t, Indexing::Raw), closed);
            }
        }
    }

    fn arb_feasible() -> impl Strategy<Value = (SystemConfig, BlockingMatrix)> {
        (1usize..=5, 1usize..=12).prop_flat_map(|(n, t)| {
            proptest::collection::vec(0usize..=n, t).prop_map(move |choice| {
                let mut m = BlockingMatrix::all_ones(n, t);
                for (slot, &c) in choice.iter().enumerate() {
                    if c > 0 {
                        m.block(c, slot + 1);
                    }
                }
                let c = SystemConfig::with_budget(n, t, m.zero_count()).unwrap();
                (c, m)
            })
        })
    }

    proptest! {
        #[test]
        fn recursion_equals_trains((c, m) in arb_feasible()) {
            prop_assert_eq!(age_by_recursion(&c, &m).unwrap(), age_by_trains(&c, &m).unwrap());
        }

        #[test]
        fn trajectory_invariants((c, m) in arb_feasible()) {
            let tr = age_by_recursion(&c, &m).unwrap();
            for u in 1..=c.n_users {
                let raw = tr.raw_series(u);
                prop_assert_eq!(&raw[0], &int(1));
                for w in raw.windows(2) {
                    prop_assert!(w[0] >= int(1));
                    prop_assert!(&w[1] - int(1) <= w[0]);
                }
            }
        }

        #[test]
        fn blocking_one_more_slot_never_lowers_age((c, m) in arb_feasible(), pick in 0usize..64) {
            let free: Vec<usize> = (1..=c.horizon).filter(|&s| m.column_zeros(s) == 0).collect();
            prop_assume!(!free.is_empty());
            let slot = free[pick % free.len()];
            let row = 1 + pick % c.n_users;
            let mut more = m.clone();
            more.block(row, slot);
            let c2 = SystemConfig::with_budget(c.n_users, c.horizon, more.zero_count()).unwrap();
            let before = age_by_recursion(&c2, &m).unwrap();
            let after = age_by_recursion(&c2, &more).unwrap();
            for u in 1..=c.n_users {
                for (a, b) in before.raw_series(u).iter().zip(after.raw_series(u)) {
                    prop_assert!(a <= b);
                }
            }
            for idx in [Indexing::Raw, Indexing::Shifted] {
                prop_assert!(objective(&c2, &before, idx) <= objective(&c2, &after, idx));
            }
        }

        #[test]
        fn subcarrier_row_permutation_is_neutral(t in 1usize..10, nsub in 2usize..5, seed in 0u64..1000) {
            let c = SystemConfig::with_budget(2, t, t).unwrap().with_subcarriers(nsub).unwrap();
            let mut m = BlockingMatrix::unblocked(&c);
            let mut s = seed;
            for slot in 1..=t {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let pick = (s >> 33) as usize % (nsub + 1);
                if pick > 0 { m.block(pick, slot); }
            }
            let base = age_by_recursion_subcarrier(&c, &m).unwrap();
            let perm: Vec<usize> = (1..=nsub).rev().collect();
            prop_assert_eq!(age_by_recursion_subcarrier(&c, &m.permute_rows(&perm)).unwrap(), base);
        }
    }

    #[test]
    fn cbs_helper_matches_engine() {
        let c = SystemConfig::with_budget(3, 8, 3).unwrap();
        let m = cbs_to_matrix(&c, &CbsDescriptor::new(2, 3, 3)).unwrap();
        let tr = age_by_recursion(&c, &m).unwrap();
        for idx in [Indexing::Raw, Indexing::Shifted] {
            assert_eq!(tr.user_total(2, idx), user_total_age(3, m.row(2), idx));
        }
    }
}
