//! Monte Carlo simulation of the slotted schedulers.
//!
//! Each run owns a ChaCha8 stream selected by `(seed, run_index)`, so a run's
//! draws do not depend on how runs are split across workers. Per-run ages are
//! integers and every statistic is accumulated as exact integer
//! `(count, sum, sum of squares)` triples before the final division, which
//! makes reports bit-identical for any worker count.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::adversary::centered_cbs;
use crate::error::{Error, Result};
use crate::exact_age::{self, Indexing};
use crate::model::{validate, BlockingMatrix, Model, SystemConfig};
use crate::rational;

const CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Randomized,
    RoundRobin,
    RandomizedSubcarrier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub scheme: Scheme,
    pub n_users: usize,
    pub horizon: usize,
    pub empirical_overall_mean: f64,
    pub empirical_per_user_mean: Vec<f64>,
    /// Standard error of the overall mean, from the across-run variance of
    /// each run's time-averaged age.
    pub std_error: f64,
    pub per_user_std_error: Vec<f64>,
    pub n_runs: usize,
    pub seed: u64,
}

/// Exact `(count, sum, sum of squares)` accumulator for integer samples.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Moments {
    pub count: u128,
    pub sum: u128,
    pub sum_sq: u128,
}

impl Moments {
    pub fn push(&mut self, x: u64) {
        let x = x as u128;
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(self, o: Moments) -> Moments {
        Moments {
            count: self.count + o.count,
            sum: self.sum + o.sum,
            sum_sq: self.sum_sq + o.sum_sq,
        }
    }

    pub fn mean(&self) -> f64 {
        self.sum as f64 / self.count as f64
    }

    /// Unbiased sample variance; zero with fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        // n Σx² - (Σx)² is exact and non-negative
        let num = self.count * self.sum_sq - self.sum * self.sum;
        num as f64 / (self.count * (self.count - 1)) as f64
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        (self.variance() / self.count as f64).sqrt()
    }
}

/// One realized run. `per_slot_choice[t-1]` is the `(user, sub-carrier)` drawn
/// in slot `t`; `realized_age[i][t-1]` is `a_i(t)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunTrace {
    pub seed: u64,
    pub run_index: u64,
    pub per_slot_choice: Vec<(usize, Option<usize>)>,
    pub realized_age: Vec<Vec<u64>>,
}

impl RunTrace {
    /// Checks the realized-age dynamics against the blocking matrix: ages
    /// start at 1, grow by one per slot, and reset only on a successful
    /// unblocked service.
    pub fn dynamics_hold(&self, config: &SystemConfig, sigma: &BlockingMatrix) -> bool {
        let horizon = config.horizon;
        for (i, ages) in self.realized_age.iter().enumerate() {
            if ages.len() != horizon || ages[0] != 1 {
                return false;
            }
            for t in 1..horizon {
                let (user, sub) = self.per_slot_choice[t - 1];
                let served = user == i + 1 && success(config, sigma, user, sub, t);
                let expect = if served { 1 } else { ages[t - 1] + 1 };
                if ages[t] != expect {
                    return false;
                }
            }
        }
        true
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let n = self.realized_age.len();
        let mut header = vec!["slot".to_string(), "user".into(), "subcarrier".into()];
        header.extend((1..=n).map(|i| format!("age_{i}")));
        wtr.write_record(&header)?;
        for (t, (u, s)) in self.per_slot_choice.iter().enumerate() {
            let mut rec = vec![
                (t + 1).to_string(),
                u.to_string(),
                s.map(|x| x.to_string()).unwrap_or_default(),
            ];
            rec.extend(self.realized_age.iter().map(|a| a[t].to_string()));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn success(config: &SystemConfig, sigma: &BlockingMatrix, user: usize, sub: Option<usize>, slot: usize) -> bool {
    match (config.model(), sub) {
        (Model::Subcarrier, Some(k)) => sigma.get(k, slot) == 1,
        _ => sigma.get(user, slot) == 1,
    }
}

#[derive(Clone, Copy)]
enum Policy {
    Uniform,
    UniformSubcarrier(usize),
    RoundRobin,
}

struct Runner<'a> {
    config: &'a SystemConfig,
    sigma: &'a BlockingMatrix,
    policy: Policy,
    seed: u64,
}

#[derive(Clone, Default)]
struct Acc {
    overall: Moments,
    per_user: Vec<Moments>,
    /// `per_slot[i * T + t]`, only when requested
    per_slot: Vec<Moments>,
}

impl Acc {
    fn new(n: usize, horizon: usize, per_slot: bool) -> Self {
        Acc {
            overall: Moments::default(),
            per_user: vec![Moments::default(); n],
            per_slot: if per_slot {
                vec![Moments::default(); n * horizon]
            } else {
                Vec::new()
            },
        }
    }

    fn merge(mut self, o: Acc) -> Acc {
        self.overall = self.overall.merge(o.overall);
        for (a, b) in self.per_user.iter_mut().zip(o.per_user) {
            *a = a.merge(b);
        }
        for (a, b) in self.per_slot.iter_mut().zip(o.per_slot) {
            *a = a.merge(b);
        }
        self
    }
}

impl Runner<'_> {
    fn rng(&self, run_index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(run_index);
        rng
    }

    /// Simulates one run, calling `observe(slot, ages)` with `a(slot)` for
    /// every slot and `choose(slot, user, sub)` for every draw.
    fn run(
        &self,
        run_index: u64,
        mut observe: impl FnMut(usize, &[u64]),
        mut choose: impl FnMut(usize, Option<usize>),
    ) {
        let n = self.config.n_users;
        let mut rng = self.rng(run_index);
        let mut ages = vec![1u64; n];
        for slot in 1..=self.config.horizon {
            observe(slot, &ages);
            let (user, sub) = match self.policy {
                Policy::Uniform => (rng.random_range(1..=n), None),
                Policy::UniformSubcarrier(ns) => {
                    (rng.random_range(1..=n), Some(rng.random_range(1..=ns)))
                }
                Policy::RoundRobin => ((slot - 1) % n + 1, None),
            };
            choose(user, sub);
            let ok = success(self.config, self.sigma, user, sub, slot);
            for (i, a) in ages.iter_mut().enumerate() {
                *a = if ok && i + 1 == user { 1 } else { *a + 1 };
            }
        }
    }

    fn accumulate(&self, runs: std::ops::Range<u64>, per_slot: bool) -> Acc {
        let n = self.config.n_users;
        let horizon = self.config.horizon;
        let mut acc = Acc::new(n, horizon, per_slot);
        let mut totals = vec![0u64; n];
        for r in runs {
            totals.iter_mut().for_each(|x| *x = 0);
            self.run(
                r,
                |slot, ages| {
                    for (i, &a) in ages.iter().enumerate() {
                        totals[i] += a;
                        if per_slot {
                            acc.per_slot[i * horizon + slot - 1].push(a);
                        }
                    }
                },
                |_, _| {},
            );
            for (m, &t) in acc.per_user.iter_mut().zip(&totals) {
                m.push(t);
            }
            acc.overall.push(totals.iter().sum());
        }
        acc
    }

    fn simulate(&self, n_runs: usize, per_slot: bool) -> Acc {
        let n_runs = n_runs as u64;
        let chunks = n_runs.div_ceil(CHUNK as u64);
        let n = self.config.n_users;
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let lo = c * CHUNK as u64;
                self.accumulate(lo..(lo + CHUNK as u64).min(n_runs), per_slot)
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(Acc::new(n, self.config.horizon, per_slot), Acc::merge)
    }

    fn trace(&self, run_index: u64) -> RunTrace {
        let n = self.config.n_users;
        let mut realized_age = vec![Vec::with_capacity(self.config.horizon); n];
        let mut choices = Vec::with_capacity(self.config.horizon);
        self.run(
            run_index,
            |_, ages| {
                for (i, &a) in ages.iter().enumerate() {
                    realized_age[i].push(a);
                }
            },
            |u, s| choices.push((u, s)),
        );
        RunTrace {
            seed: self.seed,
            run_index,
            per_slot_choice: choices,
            realized_age,
        }
    }
}

fn report(scheme: Scheme, config: &SystemConfig, acc: &Acc, n_runs: usize, seed: u64) -> SimulationReport {
    let t = config.horizon as f64;
    let nt = t * config.n_users as f64;
    SimulationReport {
        scheme,
        n_users: config.n_users,
        horizon: config.horizon,
        empirical_overall_mean: acc.overall.mean() / nt,
        empirical_per_user_mean: acc.per_user.iter().map(|m| m.mean() / t).collect(),
        std_error: acc.overall.std_error() / nt,
        per_user_std_error: acc.per_user.iter().map(|m| m.std_error() / t).collect(),
        n_runs,
        seed,
    }
}

fn check_runs(n_runs: usize) -> Result<()> {
    if n_runs == 0 {
        return Err(Error::InvalidArgument("n_runs must be positive".into()));
    }
    Ok(())
}

fn single_runner<'a>(config: &'a SystemConfig, sigma: &'a BlockingMatrix, seed: u64) -> Result<Runner<'a>> {
    if config.model() != Model::SingleChannel {
        return Err(Error::ModelMismatch {
            expected: "single-channel",
        });
    }
    validate(config, sigma)?;
    Ok(Runner {
        config,
        sigma,
        policy: Policy::Uniform,
        seed,
    })
}

fn subcarrier_runner<'a>(config: &'a SystemConfig, sigma: &'a BlockingMatrix, seed: u64) -> Result<Runner<'a>> {
    let ns = config.n_subcarriers.ok_or(Error::ModelMismatch {
        expected: "sub-carrier",
    })?;
    validate(config, sigma)?;
    Ok(Runner {
        config,
        sigma,
        policy: Policy::UniformSubcarrier(ns),
        seed,
    })
}

fn runner_for_model<'a>(config: &'a SystemConfig, sigma: &'a BlockingMatrix, seed: u64) -> Result<(Runner<'a>, Scheme)> {
    Ok(match config.model() {
        Model::SingleChannel => (single_runner(config, sigma, seed)?, Scheme::Randomized),
        Model::Subcarrier => (
            subcarrier_runner(config, sigma, seed)?,
            Scheme::RandomizedSubcarrier,
        ),
    })
}

/// Uniform random user each slot; a served user's age resets unless jammed.
pub fn simulate_randomized(
    config: &SystemConfig,
    sigma: &BlockingMatrix,
    n_runs: usize,
    seed: u64,
) -> Result<SimulationReport> {
    check_runs(n_runs)?;
    let runner = single_runner(config, sigma, seed)?;
    let acc = runner.simulate(n_runs, false);
    Ok(report(Scheme::Randomized, config, &acc, n_runs, seed))
}

/// Uniform random user and uniform random sub-carrier each slot; the update
/// succeeds iff the drawn sub-carrier is not jammed.
pub fn simulate_randomized_subcarrier(
    config: &SystemConfig,
    sigma: &BlockingMatrix,
    n_runs: usize,
    seed: u64,
) -> Result<SimulationReport> {
    check_runs(n_runs)?;
    let runner = subcarrier_runner(config, sigma, seed)?;
    let acc = runner.simulate(n_runs, false);
    Ok(report(Scheme::RandomizedSubcarrier, config, &acc, n_runs, seed))
}

/// Adversary facing the round-robin scheduler.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RoundRobinAdversary {
    /// Jam whichever user is being served for `budget` consecutive slots
    /// starting at `start` (centered when `None`).
    WorstCase { start: Option<usize> },
    Matrix(BlockingMatrix),
}

/// The matrix realizing [`RoundRobinAdversary::WorstCase`].
pub fn round_robin_worst_case(config: &SystemConfig, start: Option<usize>) -> Result<BlockingMatrix> {
    let budget = config.budget();
    let start = match start {
        Some(s) => s,
        None => centered_cbs(config, 1, budget)?.start,
    };
    if start == 0 || start + budget > config.horizon + 1 {
        return Err(Error::OutOfRange(format!(
            "block of {budget} slots at {start} overruns horizon {}",
            config.horizon
        )));
    }
    let mut m = BlockingMatrix::all_ones(config.n_users, config.horizon);
    for slot in start..start + budget {
        m.block((slot - 1) % config.n_users + 1, slot);
    }
    Ok(m)
}

/// Fixed cyclic service order `1, 2, …, N, 1, …`. The outcome is
/// deterministic, so the report always covers a single run.
pub fn simulate_round_robin(
    config: &SystemConfig,
    adversary: &RoundRobinAdversary,
    _n_runs: usize,
    seed: u64,
) -> Result<SimulationReport> {
    if config.model() != Model::SingleChannel {
        return Err(Error::ModelMismatch {
            expected: "single-channel",
        });
    }
    let sigma = match adversary {
        RoundRobinAdversary::WorstCase { start } => round_robin_worst_case(config, *start)?,
        RoundRobinAdversary::Matrix(m) => m.clone(),
    };
    validate(config, &sigma)?;
    let runner = Runner {
        config,
        sigma: &sigma,
        policy: Policy::RoundRobin,
        seed,
    };
    let acc = runner.accumulate(0..1, false);
    Ok(report(Scheme::RoundRobin, config, &acc, 1, seed))
}

/// One traced run of the randomized scheduler for the configuration's model.
pub fn trace_run(config: &SystemConfig, sigma: &BlockingMatrix, seed: u64, run_index: u64) -> Result<RunTrace> {
    let (runner, _) = runner_for_model(config, sigma, seed)?;
    Ok(runner.trace(run_index))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellDeviation {
    pub user: usize,
    pub slot: usize,
    pub empirical_mean: f64,
    pub exact: f64,
    pub std_error: f64,
    /// `|empirical - exact| / SE`; zero when both sides coincide with zero SE.
    pub standardized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub config: SystemConfig,
    pub n_runs: usize,
    pub seed: u64,
    pub threshold: f64,
    pub max_standardized_deviation: f64,
    pub worst_cell: (usize, usize),
    pub flagged: bool,
    pub cells: Vec<CellDeviation>,
}

pub const DEVIATION_THRESHOLD: f64 = 4.0;

/// Compares the per-slot empirical mean of `a_i(t)` with the exact `Δ_i(t)`
/// (raw indexing) in units of the per-slot standard error.
pub fn empirical_vs_exact(
    config: &SystemConfig,
    sigma: &BlockingMatrix,
    n_runs: usize,
    seed: u64,
) -> Result<ComparisonReport> {
    check_runs(n_runs)?;
    let (runner, _) = runner_for_model(config, sigma, seed)?;
    let exact = exact_age::evaluate(config, sigma)?;
    let acc = runner.simulate(n_runs, true);
    let horizon = config.horizon;
    let mut cells = Vec::with_capacity(config.n_users * horizon);
    for user in 1..=config.n_users {
        for slot in 1..=horizon {
            let m = &acc.per_slot[(user - 1) * horizon + slot - 1];
            let ex = exact.at(user, slot, Indexing::Raw);
            let mean = m.mean();
            let se = m.std_error();
            let ex_f = rational::to_f64(ex);
            let exact_match = m.sum * (ex.denom().clone()) == ex.numer() * num_bigint::BigInt::from(m.count);
            let standardized = if se > 0.0 {
                (mean - ex_f).abs() / se
            } else if exact_match {
                0.0
            } else {
                f64::INFINITY
            };
            cells.push(CellDeviation {
                user,
                slot,
                empirical_mean: mean,
                exact: ex_f,
                std_error: se,
                standardized,
            });
        }
    }
    let (worst_idx, max) = cells
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |(bi, bv), (i, c)| if c.standardized > bv { (i, c.standardized) } else { (bi, bv) });
    Ok(ComparisonReport {
        config: config.clone(),
        n_runs,
        seed,
        threshold: DEVIATION_THRESHOLD,
        max_standardized_deviation: max,
        worst_cell: (cells[worst_idx].user, cells[worst_idx].slot),
        flagged: max > DEVIATION_THRESHOLD,
        cells,
    })
}

/// Gaps between consecutive successful updates of `user`, pooled over runs.
pub fn success_gaps(
    config: &SystemConfig,
    sigma: &BlockingMatrix,
    user: usize,
    n_runs: usize,
    seed: u64,
) -> Result<Vec<u64>> {
    check_runs(n_runs)?;
    let (runner, _) = runner_for_model(config, sigma, seed)?;
    let per_run: Vec<Vec<u64>> = (0..n_runs as u64)
        .into_par_iter()
        .map(|r| {
            let tr = runner.trace(r);
            let ages = &tr.realized_age[user - 1];
            // a(t+1) == 1 marks a success in slot t
            let hits: Vec<usize> = (1..ages.len()).filter(|&t| ages[t] == 1).collect();
            hits.windows(2).map(|w| (w[1] - w[0]) as u64).collect()
        })
        .collect();
    Ok(per_run.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

/// Pearson goodness-of-fit of `samples` against `P(k) = p (1-p)^(k-1)`,
/// `k >= 1`. Bins with expected count below 5 are pooled into the tail.
pub fn geometric_chi_square(samples: &[u64], p: f64) -> Result<ChiSquareResult> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!("p must be in (0,1), got {p}")));
    }
    let n = samples.len() as f64;
    let mut edges = Vec::new();
    let mut k = 1u64;
    loop {
        let expected = n * p * (1.0 - p).powi(k as i32 - 1);
        let tail = n * (1.0 - p).powi(k as i32);
        if expected < 5.0 || tail < 5.0 {
            break;
        }
        edges.push(k);
        k += 1;
    }
    if edges.is_empty() {
        return Err(Error::InvalidArgument("too few samples for a chi-square test".into()));
    }
    let bins = edges.len() + 1;
    let mut observed = vec![0f64; bins];
    for &s in samples {
        let idx = if s == 0 { 0 } else { ((s - 1) as usize).min(bins - 1) };
        observed[idx] += 1.0;
    }
    let mut statistic = 0.0;
    for (i, &obs) in observed.iter().enumerate() {
        let expected = if i + 1 < bins {
            n * p * (1.0 - p).powi(i as i32)
        } else {
            n * (1.0 - p).powi(edges.len() as i32)
        };
        statistic += (obs - expected).powi(2) / expected;
    }
    let dof = bins - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(ChiSquareResult {
        statistic,
        degrees_of_freedom: dof,
        p_value: 1.0 - dist.cdf(statistic),
    })
}
