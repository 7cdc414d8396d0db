//! Experiment specifications and artifact writers behind the `aoi` binary.
//!
//! Every artifact embeds the spec that produced it together with a SHA-256
//! of the spec and the resolved blocking matrix, so any row can be
//! regenerated. Files are written to a temporary sibling and renamed into
//! place.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adversary::{self, brute_force_optimum, centered_cbs, BruteForceOptions};
use crate::bounds;
use crate::error::{Error, Result};
use crate::exact_age::{self, Indexing};
use crate::model::{cbs_to_matrix, validate, BlockingMatrix, CbsDescriptor, MatrixFile, SystemConfig};
use crate::rational::{self, Rational};
use crate::sim::{self, RoundRobinAdversary};
use crate::verify::{self, VerifyGrid};

/// Largest number of parameter points a sweep may expand to.
pub const MAX_SWEEP_POINTS: usize = 10_000;

/// Environment variable read by the binary for the worker count.
pub const WORKERS_ENV: &str = "AOI_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Exact,
    Brute,
    Simulate,
    Bounds,
    Sweep,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Parse(format!("unknown format {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    Cbs { row: usize, start: usize, length: usize },
    Centered { row: usize, length: usize },
    TwoBlock { row: usize, first: (usize, usize), second: (usize, usize) },
}

impl std::str::FromStr for Generator {
    type Err = Error;

    /// `cbs:<row>:<start>:<len>`, `centered:<row>:<len>` or
    /// `twoblock:<row>:<start1>:<len1>:<start2>:<len2>`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let kind = parts.next().unwrap_or_default();
        let nums = parts
            .map(|p| p.parse::<usize>().map_err(|_| Error::Parse(format!("bad generator field {p:?} in {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        match (kind, nums.as_slice()) {
            ("cbs", &[row, start, length]) => Ok(Generator::Cbs { row, start, length }),
            ("centered", &[row, length]) => Ok(Generator::Centered { row, length }),
            ("twoblock", &[row, s1, l1, s2, l2]) => Ok(Generator::TwoBlock {
                row,
                first: (s1, l1),
                second: (s2, l2),
            }),
            _ => Err(Error::Parse(format!("unrecognized generator {s:?}"))),
        }
    }
}

impl Generator {
    pub fn build(&self, config: &SystemConfig) -> Result<BlockingMatrix> {
        match *self {
            Generator::Cbs { row, start, length } => {
                cbs_to_matrix(config, &CbsDescriptor::new(row, start, length))
            }
            Generator::Centered { row, length } => {
                cbs_to_matrix(config, &centered_cbs(config, row, length)?)
            }
            Generator::TwoBlock { row, first, second } => {
                let mut m = BlockingMatrix::unblocked(config);
                if row == 0 || row > m.rows() {
                    return Err(Error::OutOfRange(format!("row {row} out of range")));
                }
                for (start, len) in [first, second] {
                    if start == 0 || start + len > config.horizon + 1 {
                        return Err(Error::OutOfRange(format!(
                            "block {start}+{len} overruns horizon {}",
                            config.horizon
                        )));
                    }
                    for slot in start..start + len {
                        m.block(row, slot);
                    }
                }
                validate(config, &m)?;
                Ok(m)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SigmaSource {
    /// No jamming.
    #[default]
    Unblocked,
    /// Grid text, one row per line.
    Inline(String),
    /// Grid file, or a JSON matrix file when the name ends in `.json`.
    File(PathBuf),
    Generator(Generator),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SimScheme {
    /// Randomized scheduler for the configuration's model.
    #[default]
    Randomized,
    /// Round-robin; uses the worst-case adversary unless a matrix is given.
    RoundRobin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SweepRanges {
    pub users: Vec<usize>,
    pub horizons: Vec<usize>,
    #[serde(with = "rational_vec")]
    pub alphas: Vec<Rational>,
    /// Empty for the single-channel model.
    pub subcarriers: Vec<usize>,
}

mod rational_vec {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        let strings: Vec<String> = v.iter().map(rational::format).collect();
        strings.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
        let strings = Vec::<String>::deserialize(d)?;
        strings
            .iter()
            .map(|s| rational::parse(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Parses `"5"`, `"2,4,8"`, `"2..16"` or `"100..1000:100"` (inclusive).
pub fn parse_usize_range(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Parse(format!("bad range {s:?}"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((lo, rest)) = part.split_once("..") {
            let (hi, step) = match rest.split_once(':') {
                Some((h, st)) => (h, st.parse::<usize>().map_err(|_| bad())?),
                None => (rest, 1),
            };
            let lo: usize = lo.parse().map_err(|_| bad())?;
            let hi: usize = hi.parse().map_err(|_| bad())?;
            if step == 0 || lo > hi {
                return Err(bad());
            }
            out.extend((lo..=hi).step_by(step));
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    Ok(out)
}

pub fn parse_rational_list(s: &str) -> Result<Vec<Rational>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(rational::parse)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub command: Command,
    pub config: SystemConfig,
    #[serde(default)]
    pub sigma: SigmaSource,
    pub n_runs: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    pub cap: u128,
    /// Defaults to raw for `exact` and shifted elsewhere.
    pub indexing: Option<Indexing>,
    #[serde(default)]
    pub scheme: SimScheme,
    pub rr_start: Option<usize>,
    pub sweep: Option<SweepRanges>,
    /// Dump run 0 of a simulation as a per-slot CSV next to the artifact.
    #[serde(default)]
    pub trace: bool,
}

impl ExperimentSpec {
    pub fn new(command: Command, config: SystemConfig) -> Self {
        ExperimentSpec {
            command,
            config,
            sigma: SigmaSource::Unblocked,
            n_runs: 1000,
            seed: 0,
            output: None,
            format: Format::Csv,
            cap: adversary::DEFAULT_CAP,
            indexing: None,
            scheme: SimScheme::Randomized,
            rr_start: None,
            sweep: None,
            trace: false,
        }
    }

    fn indexing(&self) -> Indexing {
        self.indexing.unwrap_or(match self.command {
            Command::Exact => Indexing::Raw,
            _ => Indexing::Shifted,
        })
    }
}

pub fn resolve_sigma(config: &SystemConfig, source: &SigmaSource) -> Result<BlockingMatrix> {
    let m = match source {
        SigmaSource::Unblocked => BlockingMatrix::unblocked(config),
        SigmaSource::Inline(text) => BlockingMatrix::from_grid(text)?,
        SigmaSource::File(path) => {
            let text = std::fs::read_to_string(path)?;
            if path.extension().is_some_and(|e| e == "json") {
                MatrixFile::from_json(&text)?.1
            } else {
                BlockingMatrix::from_grid(&text)?
            }
        }
        SigmaSource::Generator(g) => g.build(config)?,
    };
    validate(config, &m)?;
    Ok(m)
}

/// Process exit status for the binary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    VerificationFailed = 1,
    Usage = 2,
    Infeasible = 3,
    OverCap = 4,
}

impl Exit {
    pub fn for_error(err: &Error) -> Exit {
        match err {
            Error::Infeasible(_) | Error::Shape { .. } | Error::OverBudget { .. } => Exit::Infeasible,
            Error::OverCap { .. } => Exit::OverCap,
            _ => Exit::Usage,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit: Exit,
    /// Human-readable report for stdout.
    pub summary: String,
    pub artifacts: Vec<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub spec: ExperimentSpec,
    pub sigma_grid: Option<String>,
    pub input_hash: String,
}

impl Provenance {
    pub fn new(spec: &ExperimentSpec, sigma: Option<&BlockingMatrix>) -> Result<Self> {
        let sigma_grid = sigma.map(BlockingMatrix::to_grid);
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(spec)?);
        if let Some(g) = &sigma_grid {
            h.update(g.as_bytes());
        }
        Ok(Provenance {
            spec: spec.clone(),
            sigma_grid,
            input_hash: hex::encode(h.finalize()),
        })
    }

    fn csv_header(&self) -> Result<String> {
        let mut s = String::new();
        writeln!(s, "# spec: {}", serde_json::to_string(&self.spec)?).expect("string write");
        writeln!(s, "# input_sha256: {}", self.input_hash).expect("string write");
        Ok(s)
    }
}

#[derive(Serialize)]
struct JsonArtifact<'a, T: Serialize> {
    provenance: &'a Provenance,
    result: T,
}

/// Writes `bytes` to `path` via a temporary sibling and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("artifact");
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn emit<T: Serialize>(
    spec: &ExperimentSpec,
    prov: &Provenance,
    json: T,
    csv_body: impl FnOnce() -> Result<Vec<u8>>,
) -> Result<Vec<PathBuf>> {
    let Some(path) = &spec.output else { return Ok(Vec::new()) };
    let bytes = match spec.format {
        Format::Json => {
            let mut v = serde_json::to_vec_pretty(&JsonArtifact {
                provenance: prov,
                result: json,
            })?;
            v.push(b'\n');
            v
        }
        Format::Csv => {
            let mut v = prov.csv_header()?.into_bytes();
            v.extend(csv_body()?);
            v
        }
    };
    write_atomic(path, &bytes)?;
    Ok(vec![path.clone()])
}

fn csv_rows<I, R>(header: &[&str], rows: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(header)?;
    for r in rows {
        wtr.write_record(r)?;
    }
    wtr.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn exact_str(r: &Rational) -> String {
    format!("{} (~{:.6})", rational::format(r), rational::to_f64(r))
}

/// Dispatches a spec. Verification failures are reported through
/// [`Outcome::exit`]; everything else that goes wrong is an `Err`.
pub fn run(spec: &ExperimentSpec) -> Result<Outcome> {
    spec.config.check()?;
    match spec.command {
        Command::Exact => run_exact(spec),
        Command::Brute => run_brute(spec),
        Command::Simulate => run_simulate(spec),
        Command::Bounds => run_bounds(spec),
        Command::Sweep => run_sweep(spec),
        Command::Verify => run_verify(spec),
    }
}

fn ok(summary: String, artifacts: Vec<PathBuf>) -> Outcome {
    Outcome {
        exit: Exit::Ok,
        summary,
        artifacts,
    }
}

fn run_exact(spec: &ExperimentSpec) -> Result<Outcome> {
    let sigma = resolve_sigma(&spec.config, &spec.sigma)?;
    let traj = exact_age::evaluate(&spec.config, &sigma)?;
    let idx = spec.indexing();
    let mut s = String::new();
    writeln!(s, "config: {}", spec.config).unwrap();
    writeln!(s, "overall mean (raw):     {}", exact_str(&traj.overall_mean(Indexing::Raw))).unwrap();
    writeln!(s, "overall mean (shifted): {}", exact_str(&traj.overall_mean(Indexing::Shifted))).unwrap();
    for (u, m) in traj.per_user_mean(idx).iter().enumerate() {
        writeln!(s, "user {} mean ({idx:?}): {}", u + 1, exact_str(m)).unwrap();
    }
    let prov = Provenance::new(spec, Some(&sigma))?;
    let artifacts = emit(spec, &prov, traj.to_export(idx), || {
        let mut buf = Vec::new();
        traj.write_csv(idx, &mut buf)?;
        Ok(buf)
    })?;
    Ok(ok(s, artifacts))
}

fn run_brute(spec: &ExperimentSpec) -> Result<Outcome> {
    let idx = spec.indexing();
    let set = brute_force_optimum(
        &spec.config,
        &BruteForceOptions {
            cap: spec.cap,
            indexing: idx,
        },
    )?;
    let mut s = String::new();
    writeln!(s, "config: {}", spec.config).unwrap();
    writeln!(s, "feasible matrices enumerated: {}", set.enumerated_count).unwrap();
    writeln!(s, "best value ({idx:?}): {}", exact_str(&set.best_value)).unwrap();
    writeln!(s, "maximizers: {}", set.maximizers.len()).unwrap();
    for m in &set.maximizers {
        writeln!(s, "  {}", m.row_strings().join(" ")).unwrap();
    }
    let prov = Provenance::new(spec, None)?;
    let export = set.to_export(&spec.config, idx);
    let artifacts = emit(spec, &prov, &export, || {
        csv_rows(
            &["maximizer", "row", "sigma"],
            set.maximizers.iter().enumerate().flat_map(|(k, m)| {
                m.row_strings()
                    .into_iter()
                    .enumerate()
                    .map(move |(r, line)| vec![(k + 1).to_string(), (r + 1).to_string(), line])
            }),
        )
    })?;
    Ok(ok(s, artifacts))
}

fn run_simulate(spec: &ExperimentSpec) -> Result<Outcome> {
    let report = match spec.scheme {
        SimScheme::RoundRobin => {
            let adv = match &spec.sigma {
                SigmaSource::Unblocked => RoundRobinAdversary::WorstCase {
                    start: spec.rr_start,
                },
                other => RoundRobinAdversary::Matrix(resolve_sigma(&spec.config, other)?),
            };
            sim::simulate_round_robin(&spec.config, &adv, spec.n_runs, spec.seed)?
        }
        SimScheme::Randomized => {
            let sigma = resolve_sigma(&spec.config, &spec.sigma)?;
            match spec.config.n_subcarriers {
                Some(_) => sim::simulate_randomized_subcarrier(&spec.config, &sigma, spec.n_runs, spec.seed)?,
                None => sim::simulate_randomized(&spec.config, &sigma, spec.n_runs, spec.seed)?,
            }
        }
    };
    let mut s = String::new();
    writeln!(s, "config: {}", spec.config).unwrap();
    writeln!(s, "scheme: {:?}, runs: {}, seed: {}", report.scheme, report.n_runs, report.seed).unwrap();
    writeln!(
        s,
        "overall mean age: {:.6} (SE {:.6})",
        report.empirical_overall_mean, report.std_error
    )
    .unwrap();
    for (u, (m, se)) in report
        .empirical_per_user_mean
        .iter()
        .zip(&report.per_user_std_error)
        .enumerate()
    {
        writeln!(s, "user {}: {m:.6} (SE {se:.6})", u + 1).unwrap();
    }
    let sigma = match (&spec.scheme, &spec.sigma) {
        (SimScheme::RoundRobin, SigmaSource::Unblocked) => {
            sim::round_robin_worst_case(&spec.config, spec.rr_start)?
        }
        _ => resolve_sigma(&spec.config, &spec.sigma)?,
    };
    let prov = Provenance::new(spec, Some(&sigma))?;
    let mut artifacts = emit(spec, &prov, &report, || {
        let mut rows = vec![
            vec!["overall".to_string(), "mean".into(), report.empirical_overall_mean.to_string()],
            vec!["overall".to_string(), "std_error".into(), report.std_error.to_string()],
        ];
        for (u, (m, se)) in report
            .empirical_per_user_mean
            .iter()
            .zip(&report.per_user_std_error)
            .enumerate()
        {
            rows.push(vec![format!("user{}", u + 1), "mean".into(), m.to_string()]);
            rows.push(vec![format!("user{}", u + 1), "std_error".into(), se.to_string()]);
        }
        csv_rows(&["scope", "metric", "value"], rows)
    })?;
    if spec.trace && spec.scheme == SimScheme::Randomized {
        if let Some(out) = &spec.output {
            let tr = sim::trace_run(&spec.config, &sigma, spec.seed, 0)?;
            let mut buf = Vec::new();
            tr.write_csv(&mut buf)?;
            let path = out.with_extension("trace.csv");
            write_atomic(&path, &buf)?;
            artifacts.push(path);
        }
    }
    Ok(ok(s, artifacts))
}

fn run_bounds(spec: &ExperimentSpec) -> Result<Outcome> {
    let table = bounds::bounds_table(&spec.config)?;
    let mut s = String::new();
    writeln!(s, "config: {}", spec.config).unwrap();
    writeln!(s, "{:<30} {:>20} {:>14}", "bound", "exact", "value").unwrap();
    for b in &table {
        let name = serde_json::to_value(b.name)?;
        let exact = b.value.to_rational()?;
        writeln!(
            s,
            "{:<30} {:>20} {:>14.6}",
            name.as_str().unwrap_or_default(),
            rational::format(&exact),
            b.value.approx
        )
        .unwrap();
    }
    let prov = Provenance::new(spec, None)?;
    let artifacts = emit(spec, &prov, &table, || {
        csv_rows(
            &["bound", "num", "den", "value"],
            table.iter().map(|b| {
                vec![
                    serde_json::to_value(b.name)
                        .ok()
                        .and_then(|v| v.as_str().map(str::to_string))
                        .unwrap_or_default(),
                    b.value.num.clone(),
                    b.value.den.clone(),
                    b.value.approx.to_string(),
                ]
            }),
        )
    })?;
    Ok(ok(s, artifacts))
}

/// One metric at one parameter point, long form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n_users: usize,
    pub horizon: usize,
    pub alpha: String,
    pub n_subcarriers: Option<usize>,
    pub metric: String,
    pub value: f64,
    /// Exact value as `n/d`, when the metric is exact.
    pub exact: Option<String>,
}

/// Evaluates the optimal adversary over the Cartesian product of `ranges`.
///
/// Without sub-carriers each point uses the exact engine with one centered
/// full-budget block on user 1. With sub-carriers each point simulates the
/// randomized scheduler with sub-carrier 1 jammed over a centered
/// full-budget run.
pub fn sweep(
    ranges: &SweepRanges,
    indexing: Indexing,
    n_runs: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    if ranges.users.is_empty() || ranges.horizons.is_empty() || ranges.alphas.is_empty() {
        return Err(Error::InvalidArgument("sweep ranges must be non-empty".into()));
    }
    let subs: Vec<Option<usize>> = if ranges.subcarriers.is_empty() {
        vec![None]
    } else {
        ranges.subcarriers.iter().copied().map(Some).collect()
    };
    let total = ranges.users.len() * ranges.horizons.len() * ranges.alphas.len() * subs.len();
    if total > MAX_SWEEP_POINTS {
        return Err(Error::InvalidArgument(format!(
            "sweep of {total} points exceeds the limit of {MAX_SWEEP_POINTS}"
        )));
    }
    let mut points = Vec::with_capacity(total);
    for &n in &ranges.users {
        for &t in &ranges.horizons {
            for a in &ranges.alphas {
                for &ns in &subs {
                    let mut c = SystemConfig::new(n, t, a.clone())?;
                    if let Some(ns) = ns {
                        c = c.with_subcarriers(ns)?;
                    }
                    points.push(c);
                }
            }
        }
    }
    let per_point: Vec<Vec<SweepRow>> = points
        .par_iter()
        .map(|c| sweep_point(c, indexing, n_runs, seed))
        .collect::<Result<_>>()?;
    Ok(per_point.into_iter().flatten().collect())
}

fn sweep_point(c: &SystemConfig, indexing: Indexing, n_runs: usize, seed: u64) -> Result<Vec<SweepRow>> {
    let row = |metric: &str, value: f64, exact: Option<&Rational>| SweepRow {
        n_users: c.n_users,
        horizon: c.horizon,
        alpha: rational::format(&c.alpha),
        n_subcarriers: c.n_subcarriers,
        metric: metric.to_string(),
        value,
        exact: exact.map(rational::format),
    };
    let exact_row = |metric: &str, v: &Rational| row(metric, rational::to_f64(v), Some(v));
    let sigma = cbs_to_matrix(c, &centered_cbs(c, 1, c.budget())?)?;
    let mut out = Vec::new();
    match c.n_subcarriers {
        None => {
            let traj = exact_age::age_by_recursion(c, &sigma)?;
            out.push(exact_row("overall_mean", &traj.overall_mean(indexing)));
            out.push(exact_row("blocked_user_mean", &traj.per_user_mean(indexing)[0]));
            out.push(exact_row("lemma2_lower", &bounds::lemma2_lower(c.horizon, &c.alpha, c.n_users)));
            out.push(exact_row("thm2_upper", &bounds::thm2_upper(c.horizon, c.n_users)));
        }
        Some(ns) => {
            let rep = sim::simulate_randomized_subcarrier(c, &sigma, n_runs, seed)?;
            out.push(row("sim_mean", rep.empirical_overall_mean, None));
            out.push(row("sim_std_error", rep.std_error, None));
            out.push(exact_row("thm4_upper", &bounds::thm4_upper(c.n_users, ns)?));
            out.push(exact_row("lb_modified", &bounds::lb_modified(c.n_users)));
        }
    }
    Ok(out)
}

fn run_sweep(spec: &ExperimentSpec) -> Result<Outcome> {
    let ranges = spec
        .sweep
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("sweep requires parameter ranges".into()))?;
    let rows = sweep(ranges, spec.indexing(), spec.n_runs, spec.seed)?;
    let mut s = String::new();
    writeln!(s, "{} rows", rows.len()).unwrap();
    for r in rows.iter().take(40) {
        writeln!(
            s,
            "N={} T={} alpha={} nsub={} {} = {:.6}",
            r.n_users,
            r.horizon,
            r.alpha,
            r.n_subcarriers.map_or("-".to_string(), |x| x.to_string()),
            r.metric,
            r.value
        )
        .unwrap();
    }
    if rows.len() > 40 {
        writeln!(s, "... ({} more)", rows.len() - 40).unwrap();
    }
    let prov = Provenance::new(spec, None)?;
    let artifacts = emit(spec, &prov, &rows, || {
        csv_rows(
            &["n_users", "horizon", "alpha", "n_subcarriers", "metric", "value", "exact"],
            rows.iter().map(|r| {
                vec![
                    r.n_users.to_string(),
                    r.horizon.to_string(),
                    r.alpha.clone(),
                    r.n_subcarriers.map(|x| x.to_string()).unwrap_or_default(),
                    r.metric.clone(),
                    r.value.to_string(),
                    r.exact.clone().unwrap_or_default(),
                ]
            }),
        )
    })?;
    Ok(ok(s, artifacts))
}

fn run_verify(spec: &ExperimentSpec) -> Result<Outcome> {
    let grid = VerifyGrid {
        seed: spec.seed,
        cap: spec.cap,
        ..VerifyGrid::default()
    };
    let results = verify::run_suite(&grid)?;
    let mut s = String::new();
    for r in &results {
        writeln!(
            s,
            "{} {} ({} checked){}",
            if r.passed { "PASS" } else { "FAIL" },
            r.claim,
            r.checked,
            if r.detail.is_empty() { String::new() } else { format!(": {}", r.detail) }
        )
        .unwrap();
    }
    let prov = Provenance::new(spec, None)?;
    let artifacts = emit(spec, &prov, &results, || {
        csv_rows(
            &["claim", "passed", "checked", "detail"],
            results.iter().map(|r| {
                vec![r.claim.clone(), r.passed.to_string(), r.checked.to_string(), r.detail.clone()]
            }),
        )
    })?;
    let exit = if results.iter().all(|r| r.passed) {
        Exit::Ok
    } else {
        Exit::VerificationFailed
    };
    Ok(Outcome {
        exit,
        summary: s,
        artifacts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    #[test]
    fn ranges() {
        assert_eq!(parse_usize_range("5").unwrap(), vec![5]);
        assert_eq!(parse_usize_range("2,4,8").unwrap(), vec![2, 4, 8]);
        assert_eq!(parse_usize_range("2..5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_usize_range("100..300:100").unwrap(), vec![100, 200, 300]);
        assert!(parse_usize_range("5..2").is_err());
        assert!(parse_usize_range("1..4:0").is_err());
        assert!(parse_usize_range("x").is_err());
        assert!(parse_usize_range("").unwrap().is_empty());
    }

    #[test]
    fn generators() {
        let c = SystemConfig::new(2, 10, frac(1, 2)).unwrap();
        let g: Generator = "cbs:1:4:3".parse().unwrap();
        assert_eq!(g.build(&c).unwrap().row(1), &[1, 1, 1, 0, 0, 0, 1, 1, 1, 1]);
        let g: Generator = "centered:2:3".parse().unwrap();
        assert_eq!(g.build(&c).unwrap().row(2), &[1, 1, 1, 0, 0, 0, 1, 1, 1, 1]);
        let g: Generator = "twoblock:1:1:2:6:1".parse().unwrap();
        assert_eq!(g.build(&c).unwrap().row(1), &[0, 0, 1, 1, 1, 0, 1, 1, 1, 1]);
        assert!("cbs:1:2".parse::<Generator>().is_err());
        assert!("twoblock:1:9:3:1:1".parse::<Generator>().unwrap().build(&c).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Exit::for_error(&Error::Infeasible(vec![])), Exit::Infeasible);
        assert_eq!(Exit::for_error(&Error::OverCap { size: 2, cap: 1 }), Exit::OverCap);
        assert_eq!(Exit::for_error(&Error::Parse("x".into())), Exit::Usage);
    }

    #[test]
    fn empty_sweep_refused() {
        let r = SweepRanges {
            users: vec![],
            horizons: vec![10],
            alphas: vec![frac(1, 2)],
            subcarriers: vec![],
        };
        assert!(sweep(&r, Indexing::Shifted, 10, 0).is_err());
        let huge = SweepRanges {
            users: (1..=100).collect(),
            horizons: (1..=200).collect(),
            alphas: vec![frac(1, 2)],
            subcarriers: vec![],
        };
        assert!(sweep(&huge, Indexing::Shifted, 10, 0).is_err());
    }

    #[test]
    fn provenance_hash_depends_on_inputs() {
        let c = SystemConfig::new(2, 3, frac(0, 1)).unwrap();
        let spec = ExperimentSpec::new(Command::Exact, c.clone());
        let a = Provenance::new(&spec, Some(&BlockingMatrix::unblocked(&c))).unwrap();
        let b = Provenance::new(&spec, Some(&BlockingMatrix::unblocked(&c))).unwrap();
        assert_eq!(a.input_hash, b.input_hash);
        let mut other = spec.clone();
        other.seed = 9;
        let d = Provenance::new(&other, Some(&BlockingMatrix::unblocked(&c))).unwrap();
        assert_ne!(a.input_hash, d.input_hash);
    }
}
