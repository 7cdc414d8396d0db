//! Command-line front end. All logic lives in `aoi_adversary::experiment`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use aoi_adversary::adversary::DEFAULT_CAP;
use aoi_adversary::experiment::{
    self, parse_rational_list, parse_usize_range, Command, Exit, ExperimentSpec, Format, Generator,
    SigmaSource, SimScheme, SweepRanges, WORKERS_ENV,
};
use aoi_adversary::{rational, Indexing, Result, SystemConfig};

#[derive(Parser)]
#[command(name = "aoi", version, about = "Age of information under adversarial jamming")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact age trajectory for one blocking matrix.
    Exact(Common),
    /// Exhaustive search for the worst-case blocking matrices.
    Brute(Common),
    /// Monte-Carlo simulation of a scheduler.
    Simulate(Common),
    /// Closed-form bounds and optimality ratios.
    Bounds(Common),
    /// Parameter sweep of the optimal adversary.
    Sweep(SweepArgs),
    /// Check every structural claim on a grid of small instances.
    Verify(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Idx {
    Raw,
    Shifted,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fmt {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Randomized,
    RoundRobin,
}

#[derive(Args, Clone)]
struct Common {
    /// Number of users.
    #[arg(long = "n", default_value_t = 2)]
    n: usize,
    /// Horizon in slots.
    #[arg(long = "t", default_value_t = 10)]
    t: usize,
    /// Jamming fraction, as a decimal or `p/q`.
    #[arg(long, default_value = "0")]
    alpha: String,
    /// Number of sub-carriers; omit for the single-channel model.
    #[arg(long)]
    nsub: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Blocking matrix: a grid file, a `.json` matrix file, or inline rows
    /// separated by `/` (e.g. `1101/1111`).
    #[arg(long, conflicts_with = "gen")]
    sigma: Option<String>,
    /// Generated matrix: `cbs:R:S:L`, `centered:R:L` or `twoblock:R:S1:L1:S2:L2`.
    #[arg(long)]
    gen: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Fmt::Csv)]
    format: Fmt,
    /// Brute-force search-space cap.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: u128,
    #[arg(long, value_enum)]
    indexing: Option<Idx>,
    #[arg(long, value_enum, default_value_t = SchemeArg::Randomized)]
    scheme: SchemeArg,
    /// First worst-case slot for the round-robin adversary.
    #[arg(long)]
    rr_start: Option<usize>,
    /// Also write a per-slot trace of run 0.
    #[arg(long)]
    trace: bool,
}

#[derive(Args, Clone)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Users: `4`, `2,4,8` or `2..8:2`.
    #[arg(long, default_value = "2")]
    users: String,
    #[arg(long, default_value = "100..1000:100")]
    horizons: String,
    /// Comma-separated jamming fractions.
    #[arg(long, default_value = "1/2")]
    alphas: String,
    #[arg(long, default_value = "")]
    subcarriers: String,
}

fn spec_from(command: Command, a: &Common) -> Result<ExperimentSpec> {
    let mut config = SystemConfig::new(a.n, a.t, rational::parse(&a.alpha)?)?;
    if let Some(ns) = a.nsub {
        config = config.with_subcarriers(ns)?;
    }
    let mut spec = ExperimentSpec::new(command, config);
    spec.sigma = match (&a.sigma, &a.gen) {
        (Some(s), _) if s.chars().all(|c| matches!(c, '0' | '1' | '/')) => {
            SigmaSource::Inline(s.replace('/', "\n") + "\n")
        }
        (Some(s), _) => SigmaSource::File(s.into()),
        (None, Some(g)) => SigmaSource::Generator(g.parse::<Generator>()?),
        (None, None) => SigmaSource::Unblocked,
    };
    spec.n_runs = a.runs;
    spec.seed = a.seed;
    spec.output = a.out.clone();
    spec.format = match a.format {
        Fmt::Csv => Format::Csv,
        Fmt::Json => Format::Json,
    };
    spec.cap = a.cap;
    spec.indexing = a.indexing.map(|i| match i {
        Idx::Raw => Indexing::Raw,
        Idx::Shifted => Indexing::Shifted,
    });
    spec.scheme = match a.scheme {
        SchemeArg::Randomized => SimScheme::Randomized,
        SchemeArg::RoundRobin => SimScheme::RoundRobin,
    };
    spec.rr_start = a.rr_start;
    spec.trace = a.trace;
    Ok(spec)
}

fn build(cmd: &Cmd) -> Result<ExperimentSpec> {
    match cmd {
        Cmd::Exact(a) => spec_from(Command::Exact, a),
        Cmd::Brute(a) => spec_from(Command::Brute, a),
        Cmd::Simulate(a) => spec_from(Command::Simulate, a),
        Cmd::Bounds(a) => spec_from(Command::Bounds, a),
        Cmd::Verify(a) => spec_from(Command::Verify, a),
        Cmd::Sweep(s) => {
            let mut spec = spec_from(Command::Sweep, &s.common)?;
            spec.sweep = Some(SweepRanges {
                users: parse_usize_range(&s.users)?,
                horizons: parse_usize_range(&s.horizons)?,
                alphas: parse_rational_list(&s.alphas)?,
                subcarriers: parse_usize_range(&s.subcarriers)?,
            });
            Ok(spec)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var(WORKERS_ENV).ok().and_then(|v| v.parse().ok()) {
        // Results do not depend on the worker count, only wall time does.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let outcome = build(&cli.cmd).and_then(|spec| experiment::run(&spec));
    match outcome {
        Ok(o) => {
            print!("{}", o.summary);
            for p in &o.artifacts {
                eprintln!("wrote {}", p.display());
            }
            ExitCode::from(o.exit as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(Exit::for_error(&e) as u8)
        }
    }
}
