//! Blocking-sequence transformations and exhaustive adversary search.
//!
//! The transformations (reversal, one-slot shifts of a consecutive block,
//! centering, and the two-block merge step) are the moves used to argue that a
//! single centered block on one row is the most harmful strategy.
//! [`brute_force_optimum`] certifies that structure on small instances by
//! enumerating every feasible matrix with exact arithmetic.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_age::{self, Indexing};
use crate::model::{zero_blocks, BlockingMatrix, CbsDescriptor, Model, SystemConfig};
use crate::rational::{self, ExactValue, Rational};

/// Default limit on `(rows + 1)^T` candidate column assignments.
pub const DEFAULT_CAP: u128 = 100_000_000;

pub fn reverse_sequence(row: &[u8]) -> Vec<u8> {
    row.iter().rev().copied().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Left,
    Right,
}

pub fn shift_cbs(d: &CbsDescriptor, direction: Direction, horizon: usize) -> Result<CbsDescriptor> {
    let start = match direction {
        Direction::Left if d.start > 1 => d.start - 1,
        Direction::Right if d.start + d.length <= horizon => d.start + 1,
        _ => {
            return Err(Error::OutOfRange(format!(
                "cannot shift block at {}..+{} {:?} within horizon {horizon}",
                d.start, d.length, direction
            )))
        }
    };
    Ok(CbsDescriptor { start, ..*d })
}

/// Block of `length` zeros with `|L - R| <= 1`; odd slack puts the extra one on the right.
pub fn centered_cbs(config: &SystemConfig, row: usize, length: usize) -> Result<CbsDescriptor> {
    if length > config.horizon {
        return Err(Error::OutOfRange(format!(
            "block length {length} exceeds horizon {}",
            config.horizon
        )));
    }
    let left = (config.horizon - length) / 2;
    Ok(CbsDescriptor::new(row, left + 1, length))
}

/// Which block moved in a [`merge_step`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MergeCase {
    /// Ones left of the right block (excluding the left block) outnumber the
    /// ones to its right: the right block moves one slot left.
    RightBlockLeft,
    /// Otherwise the left block moves one slot right.
    LeftBlockRight,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeStep {
    pub row: Vec<u8>,
    pub case: MergeCase,
}

pub fn merge_step(row: &[u8]) -> Result<MergeStep> {
    let blocks = zero_blocks(row);
    if blocks.len() != 2 {
        return Err(Error::NotTwoBlock {
            blocks: blocks.len(),
        });
    }
    let horizon = row.len();
    let (ls, le) = blocks[0];
    let (rs, re) = blocks[1];
    let left_len = le - ls + 1;
    // ones before the right block once the left block is discounted
    let left_of_right = rs - 1 - left_len;
    let right_of_right = horizon - re;
    let mut out = row.to_vec();
    let case = if left_of_right > right_of_right {
        out[rs - 2] = 0;
        out[re - 1] = 1;
        MergeCase::RightBlockLeft
    } else {
        out[ls - 1] = 1;
        out[le] = 0;
        MergeCase::LeftBlockRight
    };
    Ok(MergeStep { row: out, case })
}

/// Sequence of rows visited while merging two blocks and then centering the
/// resulting single block, with the user's total age at each row.
#[derive(Debug, Clone)]
pub struct MergePath {
    pub rows: Vec<Vec<u8>>,
    pub totals: Vec<Rational>,
    pub cases: Vec<MergeCase>,
}

impl MergePath {
    pub fn is_monotone(&self) -> bool {
        self.totals.windows(2).all(|w| w[0] <= w[1])
    }

    /// Steps whose total stayed exactly equal.
    pub fn ties(&self) -> usize {
        self.totals.windows(2).filter(|w| w[0] == w[1]).count()
    }

    pub fn last(&self) -> &[u8] {
        self.rows.last().expect("path is never empty")
    }
}

/// Applies [`merge_step`] until one block remains, then shifts that block
/// toward the center until `|L - R| <= 1`.
pub fn merge_to_centered(n_users: usize, row: &[u8], indexing: Indexing) -> Result<MergePath> {
    let blocks = zero_blocks(row).len();
    if blocks == 0 || blocks > 2 {
        return Err(Error::NotTwoBlock { blocks });
    }
    let horizon = row.len();
    let mut path = MergePath {
        rows: vec![row.to_vec()],
        totals: vec![exact_age::user_total_age(n_users, row, indexing)],
        cases: Vec::new(),
    };
    let mut cur = row.to_vec();
    while zero_blocks(&cur).len() == 2 {
        let s = merge_step(&cur)?;
        path.cases.push(s.case);
        cur = s.row;
        path.totals.push(exact_age::user_total_age(n_users, &cur, indexing));
        path.rows.push(cur.clone());
    }
    let mut d = CbsDescriptor::from_row(1, &cur).expect("single block after merging");
    loop {
        let (l, r) = (d.left_ones(), d.right_ones(horizon));
        let dir = if l + 1 < r {
            Direction::Right
        } else if r + 1 < l {
            Direction::Left
        } else {
            break;
        };
        d = shift_cbs(&d, dir, horizon)?;
        cur = d.to_row(horizon);
        path.totals.push(exact_age::user_total_age(n_users, &cur, indexing));
        path.rows.push(cur.clone());
    }
    Ok(path)
}

/// Every feasible matrix attaining the maximal objective.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaximizerSet {
    pub best_value: Rational,
    pub maximizers: Vec<BlockingMatrix>,
    pub enumerated_count: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaximizerSetExport {
    pub config: SystemConfig,
    pub indexing: Indexing,
    pub best_value: ExactValue,
    pub enumerated_count: u64,
    pub maximizers: Vec<String>,
}

impl MaximizerSet {
    pub fn to_export(&self, config: &SystemConfig, indexing: Indexing) -> MaximizerSetExport {
        MaximizerSetExport {
            config: config.clone(),
            indexing,
            best_value: ExactValue::from(&self.best_value),
            enumerated_count: self.enumerated_count,
            maximizers: self.maximizers.iter().map(BlockingMatrix::to_grid).collect(),
        }
    }

    pub fn contains(&self, m: &BlockingMatrix) -> bool {
        self.maximizers.binary_search(m).is_ok()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BruteForceOptions {
    pub cap: u128,
    pub indexing: Indexing,
}

impl Default for BruteForceOptions {
    fn default() -> Self {
        BruteForceOptions {
            cap: DEFAULT_CAP,
            indexing: Indexing::Shifted,
        }
    }
}

/// `(rows + 1)^T`, saturating.
pub fn candidate_count(config: &SystemConfig) -> u128 {
    let base = (config.sigma_rows() + 1) as u128;
    let mut acc: u128 = 1;
    for _ in 0..config.horizon {
        acc = acc.saturating_mul(base);
    }
    acc
}

struct Search<'a> {
    config: &'a SystemConfig,
    indexing: Indexing,
    rows: usize,
    /// multiplier for an unjammed row / slot
    clear: Rational,
    /// multiplier for a jammed row (single channel) or slot (sub-carrier)
    jammed: Rational,
}

#[derive(Default)]
struct Partial {
    best: Option<Rational>,
    argmax: Vec<Vec<u8>>,
    count: u64,
}

impl Partial {
    fn offer(&mut self, value: Rational, choice: &[u8]) {
        self.count += 1;
        match &self.best {
            Some(b) if value < *b => {}
            Some(b) if value == *b => self.argmax.push(choice.to_vec()),
            _ => {
                self.best = Some(value);
                self.argmax.clear();
                self.argmax.push(choice.to_vec());
            }
        }
    }

    fn merge(mut self, other: Partial) -> Partial {
        self.count += other.count;
        match (&self.best, &other.best) {
            (_, None) => {}
            (None, Some(_)) => {
                self.best = other.best;
                self.argmax = other.argmax;
            }
            (Some(a), Some(b)) => {
                if b > a {
                    self.best = other.best;
                    self.argmax = other.argmax;
                } else if b == a {
                    self.argmax.extend(other.argmax);
                }
            }
        }
        self
    }
}

impl Search<'_> {
    fn state_len(&self) -> usize {
        match self.config.model() {
            Model::SingleChannel => self.rows,
            Model::Subcarrier => 1,
        }
    }

    /// Advances every tracked age by one slot where `choice` (0 = none) is jammed.
    fn advance(&self, deltas: &[Rational], choice: u8) -> Vec<Rational> {
        match self.config.model() {
            Model::SingleChannel => deltas
                .iter()
                .enumerate()
                .map(|(i, d)| {
                    let f = if choice as usize == i + 1 { &self.jammed } else { &self.clear };
                    exact_age::step(d, f)
                })
                .collect(),
            Model::Subcarrier => {
                let f = if choice == 0 { &self.clear } else { &self.jammed };
                vec![exact_age::step(&deltas[0], f)]
            }
        }
    }

    fn dfs(
        &self,
        col: usize,
        zeros_left: usize,
        deltas: Vec<Rational>,
        acc: Rational,
        choice: &mut Vec<u8>,
        out: &mut Partial,
    ) {
        if col == self.config.horizon {
            out.offer(acc, choice);
            return;
        }
        let max_choice = if zeros_left == 0 { 0 } else { self.rows as u8 };
        for c in 0..=max_choice {
            self.visit(col, zeros_left, &deltas, &acc, c, choice, out);
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn visit(
        &self,
        col: usize,
        zeros_left: usize,
        deltas: &[Rational],
        acc: &Rational,
        c: u8,
        choice: &mut Vec<u8>,
        out: &mut Partial,
    ) {
        let next = self.advance(deltas, c);
        let counted = match self.indexing {
            Indexing::Raw => deltas,
            Indexing::Shifted => &next[..],
        };
        let acc = counted.iter().fold(acc.clone(), |a, d| a + d);
        choice.push(c);
        let left = if c == 0 { zeros_left } else { zeros_left - 1 };
        self.dfs(col + 1, left, next, acc, choice, out);
        choice.pop();
    }
}

fn choices_to_matrix(rows: usize, horizon: usize, choice: &[u8]) -> BlockingMatrix {
    let mut m = BlockingMatrix::all_ones(rows, horizon);
    for (slot, &c) in choice.iter().enumerate() {
        if c > 0 {
            m.block(c as usize, slot + 1);
        }
    }
    m
}

/// Enumerates every feasible matrix (at most one jammed row per slot, at most
/// `budget` jammed entries) and returns the full argmax set.
///
/// Work is split on the first column's choice; the result does not depend on
/// the number of rayon workers.
pub fn brute_force_optimum(config: &SystemConfig, opts: &BruteForceOptions) -> Result<MaximizerSet> {
    config.check()?;
    let size = candidate_count(config);
    if size > opts.cap {
        return Err(Error::OverCap { size, cap: opts.cap });
    }
    let n = config.n_users;
    let (clear, jammed) = match config.model() {
        Model::SingleChannel => (
            exact_age::single_channel_factor(n, 1),
            exact_age::single_channel_factor(n, 0),
        ),
        Model::Subcarrier => {
            let ns = config.n_subcarriers.expect("sub-carrier model");
            (
                exact_age::subcarrier_factor(n, ns, 0),
                exact_age::subcarrier_factor(n, ns, 1),
            )
        }
    };
    let search = Search {
        config,
        indexing: opts.indexing,
        rows: config.sigma_rows(),
        clear,
        jammed,
    };
    let budget = config.budget();
    let first_choices: Vec<u8> = if budget == 0 {
        vec![0]
    } else {
        (0..=search.rows as u8).collect()
    };
    let init = vec![Rational::one(); search.state_len()];
    let merged = first_choices
        .into_par_iter()
        .map(|c| {
            let mut out = Partial::default();
            let mut choice = Vec::with_capacity(config.horizon);
            search.visit(0, budget, &init, &Rational::zero(), c, &mut choice, &mut out);
            out
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Partial::default(), Partial::merge);

    let acc = merged.best.expect("at least the all-ones matrix is feasible");
    let users_counted = match config.model() {
        Model::SingleChannel => n,
        Model::Subcarrier => 1,
    };
    let scale = Rational::from_integer(BigInt::from(users_counted * config.horizon));
    let mut maximizers: Vec<BlockingMatrix> = merged
        .argmax
        .iter()
        .map(|c| choices_to_matrix(search.rows, config.horizon, c))
        .collect();
    maximizers.sort();
    Ok(MaximizerSet {
        best_value: acc / scale,
        maximizers,
        enumerated_count: merged.count,
    })
}

/// Single-channel optimum shape: all zeros on one row, one contiguous block,
/// the whole budget spent, and `|L - R| <= 1`.
pub fn is_single_row_centered_block(config: &SystemConfig, m: &BlockingMatrix) -> bool {
    let rows = m.blocked_rows();
    if config.budget() == 0 {
        return rows.is_empty();
    }
    let [r] = rows[..] else { return false };
    match CbsDescriptor::from_row(r, m.row(r)) {
        Some(d) => {
            d.length == config.budget()
                && d.left_ones().abs_diff(d.right_ones(config.horizon)) <= 1
        }
        None => false,
    }
}

/// Sub-carrier optimum shape: the jammed slots form one contiguous centered run
/// of full-budget length; which sub-carrier is jammed in each slot is free.
pub fn is_centered_jamming_run(config: &SystemConfig, m: &BlockingMatrix) -> bool {
    let column: Vec<u8> = (1..=m.horizon())
        .map(|s| if m.column_zeros(s) > 0 { 0 } else { 1 })
        .collect();
    if config.budget() == 0 {
        return column.iter().all(|&v| v == 1);
    }
    match CbsDescriptor::from_row(1, &column) {
        Some(d) => {
            d.length == config.budget()
                && d.left_ones().abs_diff(d.right_ones(config.horizon)) <= 1
                && (1..=m.horizon()).all(|s| m.column_zeros(s) <= 1)
        }
        None => false,
    }
}

/// Exact evaluation of `β^(a-b) - β^a <= β^(c-b) - β^c` for `c < a`, with
/// `0^0 = 1`.
///
/// Errors when `c >= a` or when some power of a zero base has a negative
/// exponent.
pub fn lemma6_check(beta: &Rational, a: i64, b: i64, c: i64) -> Result<bool> {
    if c >= a {
        return Err(Error::InvalidArgument(format!("requires c < a, got c={c}, a={a}")));
    }
    let p = |e: i64| {
        rational::pow(beta, e).ok_or_else(|| {
            Error::InvalidArgument(format!("0 raised to negative exponent {e}"))
        })
    };
    let lhs = p(a - b)? - p(a)?;
    let rhs = p(c - b)? - p(c)?;
    Ok(lhs <= rhs)
}
