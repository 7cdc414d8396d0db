//! System configuration, blocking matrices and feasibility checking.
//!
//! Slots and rows are 1-based throughout the public API. An entry of a
//! blocking matrix is `0` when the adversary jams that row in that slot and
//! `1` otherwise.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};
use crate::rational::{self, Rational};

/// Which system the rows of a blocking matrix refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// One channel; the adversary jams users.
    SingleChannel,
    /// `n_subcarriers` channels; the adversary jams sub-carriers.
    Subcarrier,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub n_users: usize,
    pub horizon: usize,
    #[serde(with = "rational::as_string")]
    pub alpha: Rational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_subcarriers: Option<usize>,
}

impl SystemConfig {
    pub fn new(n_users: usize, horizon: usize, alpha: Rational) -> Result<Self> {
        let c = SystemConfig {
            n_users,
            horizon,
            alpha,
            n_subcarriers: None,
        };
        c.check()?;
        Ok(c)
    }

    pub fn with_subcarriers(mut self, n_subcarriers: usize) -> Result<Self> {
        self.n_subcarriers = Some(n_subcarriers);
        self.check()?;
        Ok(self)
    }

    /// Configuration whose budget is exactly `budget` slots (`alpha = budget / horizon`).
    pub fn with_budget(n_users: usize, horizon: usize, budget: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidConfig("horizon must be positive".into()));
        }
        Self::new(
            n_users,
            horizon,
            rational::frac(budget as i64, horizon as i64),
        )
    }

    pub fn check(&self) -> Result<()> {
        if self.n_users == 0 {
            return Err(Error::InvalidConfig("n_users must be at least 1".into()));
        }
        if self.horizon == 0 {
            return Err(Error::InvalidConfig("horizon must be positive".into()));
        }
        if self.alpha.is_negative() || self.alpha > Rational::one() {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in [0, 1], got {}",
                rational::format(&self.alpha)
            )));
        }
        if let Some(ns) = self.n_subcarriers {
            if ns < 2 {
                return Err(Error::InvalidConfig(
                    "n_subcarriers must be at least 2".into(),
                ));
            }
        }
        Ok(())
    }

    /// `floor(alpha * horizon)`.
    pub fn budget(&self) -> usize {
        let scaled = &self.alpha * Rational::from_integer(BigInt::from(self.horizon));
        scaled
            .numer()
            .div_floor(scaled.denom())
            .to_usize()
            .unwrap_or(0)
    }

    pub fn model(&self) -> Model {
        if self.n_subcarriers.is_some() {
            Model::Subcarrier
        } else {
            Model::SingleChannel
        }
    }

    /// Row count of a blocking matrix for this configuration.
    pub fn sigma_rows(&self) -> usize {
        self.n_subcarriers.unwrap_or(self.n_users)
    }
}

/// Binary `rows x horizon` matrix of adversary actions.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockingMatrix {
    rows: usize,
    horizon: usize,
    entries: Vec<u8>,
}

impl fmt::Debug for BlockingMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BlockingMatrix[")?;
        for r in 1..=self.rows {
            if r > 1 {
                write!(f, " ")?;
            }
            for &v in self.row(r) {
                write!(f, "{v}")?;
            }
        }
        write!(f, "]")
    }
}

impl BlockingMatrix {
    pub fn all_ones(rows: usize, horizon: usize) -> Self {
        BlockingMatrix {
            rows,
            horizon,
            entries: vec![1; rows * horizon],
        }
    }

    pub fn unblocked(config: &SystemConfig) -> Self {
        Self::all_ones(config.sigma_rows(), config.horizon)
    }

    pub fn from_rows(rows: Vec<Vec<u8>>) -> Result<Self> {
        let horizon = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || horizon == 0 {
            return Err(Error::Parse("blocking matrix must be non-empty".into()));
        }
        let mut entries = Vec::with_capacity(rows.len() * horizon);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != horizon {
                return Err(Error::Parse(format!(
                    "row {} has length {}, expected {horizon}",
                    i + 1,
                    r.len()
                )));
            }
            if let Some(&v) = r.iter().find(|&&v| v > 1) {
                return Err(Error::Parse(format!("entry {v} is not binary")));
            }
            entries.extend_from_slice(r);
        }
        Ok(BlockingMatrix {
            rows: rows.len(),
            horizon,
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Row `r` (1-based) as a slice indexed by `slot - 1`.
    pub fn row(&self, r: usize) -> &[u8] {
        assert!(r >= 1 && r <= self.rows, "row {r} out of range");
        &self.entries[(r - 1) * self.horizon..r * self.horizon]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[u8]> {
        self.entries.chunks(self.horizon)
    }

    /// `sigma_r(slot)`, both 1-based.
    pub fn get(&self, r: usize, slot: usize) -> u8 {
        self.row(r)[slot - 1]
    }

    pub fn set(&mut self, r: usize, slot: usize, value: u8) {
        assert!(value <= 1);
        assert!(slot >= 1 && slot <= self.horizon, "slot {slot} out of range");
        let idx = (r - 1) * self.horizon + slot - 1;
        self.entries[idx] = value;
    }

    pub fn block(&mut self, r: usize, slot: usize) {
        self.set(r, slot, 0);
    }

    pub fn zero_count(&self) -> usize {
        self.entries.iter().filter(|&&v| v == 0).count()
    }

    pub fn column_zeros(&self, slot: usize) -> usize {
        (1..=self.rows).filter(|&r| self.get(r, slot) == 0).count()
    }

    /// Row (1-based) blocked in `slot`, if exactly one is.
    pub fn blocked_row_at(&self, slot: usize) -> Option<usize> {
        let mut found = None;
        for r in 1..=self.rows {
            if self.get(r, slot) == 0 {
                if found.is_some() {
                    return None;
                }
                found = Some(r);
            }
        }
        found
    }

    /// Rows (1-based) that contain at least one zero.
    pub fn blocked_rows(&self) -> Vec<usize> {
        (1..=self.rows)
            .filter(|&r| self.row(r).contains(&0))
            .collect()
    }

    /// Every row reversed in time.
    pub fn time_reversed(&self) -> Self {
        let mut out = self.clone();
        for chunk in out.entries.chunks_mut(self.horizon) {
            chunk.reverse();
        }
        out
    }

    /// Same matrix with rows permuted: row `r` of the result is row `perm[r-1]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.rows);
        let rows = perm.iter().map(|&p| self.row(p).to_vec()).collect();
        Self::from_rows(rows).expect("permutation of a valid matrix")
    }

    /// Plain-text grid: one line per row, `'0'`/`'1'` characters, each line
    /// terminated by `'\n'`.
    pub fn to_grid(&self) -> String {
        let mut s = String::with_capacity(self.rows * (self.horizon + 1));
        for row in self.iter_rows() {
            s.extend(row.iter().map(|&v| if v == 0 { '0' } else { '1' }));
            s.push('\n');
        }
        s
    }

    pub fn from_grid(text: &str) -> Result<Self> {
        let body = text.strip_suffix('\n').unwrap_or(text);
        let mut rows = Vec::new();
        for (i, line) in body.split('\n').enumerate() {
            let line = line.strip_suffix('\r').unwrap_or(line);
            let row = line
                .chars()
                .map(|c| match c {
                    '0' => Ok(0u8),
                    '1' => Ok(1u8),
                    other => Err(Error::Parse(format!(
                        "line {}: unexpected character {other:?}",
                        i + 1
                    ))),
                })
                .collect::<Result<Vec<u8>>>()?;
            rows.push(row);
        }
        Self::from_rows(rows)
    }

    pub fn row_strings(&self) -> Vec<String> {
        self.iter_rows()
            .map(|r| r.iter().map(|&v| if v == 0 { '0' } else { '1' }).collect())
            .collect()
    }
}

/// JSON wrapper: the configuration plus the grid rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub config: SystemConfig,
    pub rows: Vec<String>,
}

impl MatrixFile {
    pub fn new(config: &SystemConfig, sigma: &BlockingMatrix) -> Self {
        MatrixFile {
            config: config.clone(),
            rows: sigma.row_strings(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<(SystemConfig, BlockingMatrix)> {
        let file: MatrixFile = serde_json::from_str(text)?;
        file.config.check()?;
        let mut grid = file.rows.join("\n");
        grid.push('\n');
        let sigma = BlockingMatrix::from_grid(&grid)?;
        Ok((file.config, sigma))
    }
}

/// A row whose zeros form one contiguous block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CbsDescriptor {
    pub row: usize,
    pub start: usize,
    pub length: usize,
}

impl CbsDescriptor {
    pub fn new(row: usize, start: usize, length: usize) -> Self {
        CbsDescriptor { row, start, length }
    }

    /// Last blocked slot (inclusive). Meaningless for `length == 0`.
    pub fn end(&self) -> usize {
        self.start + self.length - 1
    }

    /// Ones to the left of the zero block.
    pub fn left_ones(&self) -> usize {
        self.start - 1
    }

    /// Ones to the right of the zero block.
    pub fn right_ones(&self, horizon: usize) -> usize {
        horizon + 1 - self.start - self.length
    }

    pub fn fits(&self, horizon: usize) -> bool {
        self.start >= 1 && self.start + self.length <= horizon + 1
    }

    /// Recognizes a single-block row. Rows without zeros yield `None`.
    pub fn from_row(row_index: usize, row: &[u8]) -> Option<Self> {
        let first = row.iter().position(|&v| v == 0)?;
        let last = row.iter().rposition(|&v| v == 0)?;
        if row[first..=last].iter().all(|&v| v == 0) {
            Some(CbsDescriptor::new(row_index, first + 1, last - first + 1))
        } else {
            None
        }
    }

    /// The row as a 0/1 vector of the given horizon.
    pub fn to_row(&self, horizon: usize) -> Vec<u8> {
        let mut r = vec![1u8; horizon];
        for v in r.iter_mut().skip(self.start - 1).take(self.length) {
            *v = 0;
        }
        r
    }
}

/// Maximal runs of zeros in a row as `(start, end)` 1-based inclusive pairs.
pub fn zero_blocks(row: &[u8]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < row.len() {
        if row[i] == 0 {
            let s = i;
            while i < row.len() && row[i] == 0 {
                i += 1;
            }
            out.push((s + 1, i));
        } else {
            i += 1;
        }
    }
    out
}

/// Lists every violated constraint. Shape mismatches are reported as an error
/// rather than as a violation.
pub fn violations(config: &SystemConfig, sigma: &BlockingMatrix) -> Result<Vec<Violation>> {
    let expected_rows = config.sigma_rows();
    if sigma.rows() != expected_rows || sigma.horizon() != config.horizon {
        return Err(Error::Shape {
            expected_rows,
            expected_cols: config.horizon,
            rows: sigma.rows(),
            cols: sigma.horizon(),
        });
    }
    let mut out = Vec::new();
    let zeros = sigma.zero_count();
    let budget = config.budget();
    if zeros > budget {
        out.push(Violation::BudgetExceeded { zeros, budget });
    }
    for slot in 1..=sigma.horizon() {
        let z = sigma.column_zeros(slot);
        if z > 1 {
            out.push(Violation::ColumnOverload { slot, zeros: z });
        }
    }
    Ok(out)
}

pub fn validate(config: &SystemConfig, sigma: &BlockingMatrix) -> Result<()> {
    let v = violations(config, sigma)?;
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::Infeasible(v))
    }
}

pub fn cbs_to_matrix(config: &SystemConfig, d: &CbsDescriptor) -> Result<BlockingMatrix> {
    let rows = config.sigma_rows();
    if d.row == 0 || d.row > rows {
        return Err(Error::OutOfRange(format!("row {} not in 1..={rows}", d.row)));
    }
    if !d.fits(config.horizon) {
        return Err(Error::OutOfRange(format!(
            "block start {} length {} overruns horizon {}",
            d.start, d.length, config.horizon
        )));
    }
    let budget = config.budget();
    if d.length > budget {
        return Err(Error::OverBudget {
            length: d.length,
            budget,
        });
    }
    let mut m = BlockingMatrix::unblocked(config);
    for slot in d.start..d.start + d.length {
        m.block(d.row, slot);
    }
    debug_assert!(validate(config, &m).is_ok());
    Ok(m)
}

impl fmt::Display for SystemConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "N={} T={} alpha={} budget={}",
            self.n_users,
            self.horizon,
            rational::format(&self.alpha),
            self.budget()
        )?;
        if let Some(ns) = self.n_subcarriers {
            write!(f, " N_sub={ns}")?;
        }
        Ok(())
    }
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            n_users: 1,
            horizon: 1,
            alpha: Rational::zero(),
            n_subcarriers: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;
    use proptest::prelude::*;

    fn cfg(n: usize, t: usize, a: Rational) -> SystemConfig {
        SystemConfig::new(n, t, a).unwrap()
    }

    #[test]
    fn budget_floors() {
        assert_eq!(cfg(2, 4, frac(1, 4)).budget(), 1);
        assert_eq!(cfg(2, 10, frac(1, 3)).budget(), 3);
        assert_eq!(cfg(2, 10, frac(1, 1)).budget(), 10);
        assert_eq!(cfg(2, 10, frac(0, 1)).budget(), 0);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(SystemConfig::new(0, 4, frac(1, 4)).is_err());
        assert!(SystemConfig::new(1, 0, frac(1, 4)).is_err());
        assert!(SystemConfig::new(1, 4, frac(5, 4)).is_err());
        assert!(SystemConfig::new(1, 4, frac(-1, 4)).is_err());
        assert!(cfg(1, 4, frac(1, 4)).with_subcarriers(1).is_err());
    }

    #[test]
    fn all_ones_is_feasible() {
        let c = cfg(3, 7, frac(0, 1));
        validate(&c, &BlockingMatrix::unblocked(&c)).unwrap();
    }

    #[test]
    fn budget_violation_reported() {
        let c = cfg(2, 4, frac(1, 4));
        let mut m = BlockingMatrix::unblocked(&c);
        m.block(1, 2);
        m.block(2, 3);
        let v = violations(&c, &m).unwrap();
        assert_eq!(v, vec![Violation::BudgetExceeded { zeros: 2, budget: 1 }]);
        assert!(matches!(validate(&c, &m), Err(Error::Infeasible(_))));
    }

    #[test]
    fn column_violation_reported() {
        let c = cfg(2, 4, frac(1, 2));
        let mut m = BlockingMatrix::unblocked(&c);
        m.block(1, 2);
        m.block(2, 2);
        let v = violations(&c, &m).unwrap();
        assert_eq!(v, vec![Violation::ColumnOverload { slot: 2, zeros: 2 }]);
    }

    #[test]
    fn both_constraints_reported_together() {
        let c = cfg(2, 4, frac(1, 4));
        let mut m = BlockingMatrix::unblocked(&c);
        m.block(1, 2);
        m.block(2, 2);
        let v = violations(&c, &m).unwrap();
        assert_eq!(v.len(), 2);
    }

    #[test]
    fn shape_mismatch_is_distinct() {
        let c = cfg(2, 4, frac(1, 4));
        let m = BlockingMatrix::all_ones(3, 4);
        assert!(matches!(validate(&c, &m), Err(Error::Shape { .. })));
        let sub = c.clone().with_subcarriers(3).unwrap();
        validate(&sub, &m).unwrap();
    }

    #[test]
    fn cbs_construction() {
        let c = cfg(2, 10, frac(1, 2));
        let m = cbs_to_matrix(&c, &CbsDescriptor::new(1, 4, 3)).unwrap();
        assert_eq!(m.row(1), &[1, 1, 1, 0, 0, 0, 1, 1, 1, 1]);
        assert_eq!(m.row(2), &[1; 10]);

        let empty = cbs_to_matrix(&c, &CbsDescriptor::new(1, 4, 0)).unwrap();
        assert_eq!(empty, BlockingMatrix::unblocked(&c));

        assert!(matches!(
            cbs_to_matrix(&c, &CbsDescriptor::new(1, 9, 3)),
            Err(Error::OutOfRange(_))
        ));
        assert!(matches!(
            cbs_to_matrix(&c, &CbsDescriptor::new(1, 1, 6)),
            Err(Error::OverBudget { .. })
        ));
        assert!(cbs_to_matrix(&c, &CbsDescriptor::new(3, 1, 1)).is_err());
    }

    #[test]
    fn cbs_left_right() {
        let d = CbsDescriptor::new(1, 4, 3);
        assert_eq!(d.left_ones(), 3);
        assert_eq!(d.right_ones(10), 4);
        assert_eq!(CbsDescriptor::from_row(1, &d.to_row(10)), Some(d));
        assert_eq!(CbsDescriptor::from_row(1, &[1, 0, 1, 0]), None);
        assert_eq!(CbsDescriptor::from_row(1, &[1, 1]), None);
    }

    #[test]
    fn zero_block_scan() {
        assert_eq!(zero_blocks(&[0, 0, 1, 1, 0, 1]), vec![(1, 2), (5, 5)]);
        assert!(zero_blocks(&[1, 1]).is_empty());
    }

    #[test]
    fn grid_rejects_garbage() {
        assert!(BlockingMatrix::from_grid("012\n").is_err());
        assert!(BlockingMatrix::from_grid("01\n0\n").is_err());
        assert!(BlockingMatrix::from_grid("").is_err());
    }

    #[test]
    fn json_wrapper_round_trip() {
        let c = cfg(2, 5, frac(2, 5));
        let m = cbs_to_matrix(&c, &CbsDescriptor::new(2, 2, 2)).unwrap();
        let text = MatrixFile::new(&c, &m).to_json().unwrap();
        let (c2, m2) = MatrixFile::from_json(&text).unwrap();
        assert_eq!(c, c2);
        assert_eq!(m, m2);
    }

    fn arb_matrix() -> impl Strategy<Value = BlockingMatrix> {
        (1usize..5, 1usize..16).prop_flat_map(|(r, t)| {
            proptest::collection::vec(proptest::collection::vec(0u8..2, t), r)
                .prop_map(|rows| BlockingMatrix::from_rows(rows).unwrap())
        })
    }

    proptest! {
        #[test]
        fn grid_round_trip_is_bit_exact(m in arb_matrix()) {
            let g = m.to_grid();
            let back = BlockingMatrix::from_grid(&g).unwrap();
            prop_assert_eq!(&back, &m);
            prop_assert_eq!(back.to_grid(), g);
        }

        #[test]
        fn in_budget_cbs_always_validates(t in 1usize..20, start in 1usize..20, len in 0usize..20, row in 1usize..4) {
            let c = SystemConfig::with_budget(3, t, len.min(t)).unwrap();
            let d = CbsDescriptor::new(row, start, len);
            if d.fits(t) && len <= c.budget() {
                let m = cbs_to_matrix(&c, &d).unwrap();
                prop_assert!(validate(&c, &m).is_ok());
                prop_assert_eq!(m.zero_count(), len);
            }
        }
    }
}
