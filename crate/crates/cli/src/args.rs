use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Leader selection and follower association for UE-centric distributed
/// learning.
#[derive(Debug, Parser)]
#[command(name = "leadsel", version)]
pub struct Cli {
    /// Print diagnostics on stderr as JSON objects.
    #[arg(long, global = true)]
    pub json_errors: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random instance.
    Gen(GenArgs),
    /// Solve an instance exactly by exhaustive search.
    Solve(SolveArgs),
    /// Run one episode of the distributed two-phase algorithm.
    Simulate(SimulateArgs),
    /// Run the benchmark grid and write the report files.
    Bench(BenchArgs),
    /// Print configuration counts.
    Count(CountArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Number of regular UEs.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub n: u32,
    /// RNG seed [env: LEADSEL_SEED when the flag is absent; default 0].
    #[arg(long, env = "LEADSEL_SEED", hide_env = true, default_value_t = 0)]
    pub seed: u64,
    /// Attach an edge server as node 0.
    #[arg(long)]
    pub edge_server: bool,
    /// LII of the edge server.
    #[arg(long, default_value_t = 10.0, requires = "edge_server")]
    pub edge_lii: f64,
    /// LXI of every UE toward the edge server.
    #[arg(long, default_value_t = 1.0, requires = "edge_server")]
    pub edge_lxi: f64,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Strict,
    Relaxed,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Leader threshold: only UEs with LII > rho may lead.
    #[arg(long, default_value_t = 0.0)]
    pub rho: f64,
    /// Strict forbids isolated UEs; relaxed allows them.
    #[arg(long, value_enum, default_value_t = ModeArg::Relaxed)]
    pub mode: ModeArg,
    /// JSON file with follower limits: an integer for every node, or an
    /// object mapping UE id to limit.
    #[arg(long)]
    pub caps: Option<PathBuf>,
    /// Largest accepted instance size.
    #[arg(long, default_value_t = leadsel_core::optimal::DEFAULT_MAX_N)]
    pub max_n: usize,
    /// Skip leader sets whose utility bound cannot beat the incumbent.
    #[arg(long)]
    pub prune: bool,
    /// Instance JSON file.
    pub instance: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RhoRuleArg {
    Mean,
    #[value(name = "half_n")]
    HalfN,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TransportArg {
    Broadcast,
    P2p,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DeliveryArg {
    Random,
    Ascending,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Leader threshold.
    #[arg(
        long,
        conflicts_with = "rho_rule",
        required_unless_present = "rho_rule"
    )]
    pub rho: Option<f64>,
    /// Derive the threshold from the instance.
    #[arg(long, value_enum)]
    pub rho_rule: Option<RhoRuleArg>,
    #[arg(long, value_enum, default_value_t = TransportArg::Broadcast)]
    pub transport: TransportArg,
    /// JSON file with follower limits (see `solve --caps`).
    #[arg(long)]
    pub caps: Option<PathBuf>,
    /// Offer the edge server to UEs left without a leader.
    #[arg(long)]
    pub edge_server: bool,
    /// LII boost offered when no UE is above the threshold.
    #[arg(long, requires = "incentive_prob")]
    pub incentive_delta: Option<f64>,
    /// Probability that a UE accepts the boost.
    #[arg(long, requires = "incentive_delta")]
    pub incentive_prob: Option<f64>,
    /// Arrival order of follow requests within a round.
    #[arg(long, value_enum, default_value_t = DeliveryArg::Random)]
    pub delivery: DeliveryArg,
    /// RNG seed [env: LEADSEL_SEED when the flag is absent; default 0].
    #[arg(long, env = "LEADSEL_SEED", hide_env = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the message log as JSON lines.
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Exit with code 4 when every UE ends isolated.
    #[arg(long)]
    pub strict_outcome: bool,
    /// Instance JSON file.
    pub instance: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Instance sizes: a range `7..12` (inclusive), a list `7,9` or a value.
    #[arg(long, default_value = "7..12")]
    pub n: String,
    /// Instances per size.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub instances: u64,
    /// Per-size instance counts overriding --instances, as `N=COUNT`.
    #[arg(long, value_name = "N=COUNT", default_value = "12=30")]
    pub instances_at: Vec<String>,
    /// Thresholds for the distributed algorithm: a range, a list or a value.
    #[arg(long, default_value = "0..9")]
    pub rho: String,
    /// Threshold for the exact solver.
    #[arg(long, default_value_t = 0.0)]
    pub optimal_rho: f64,
    /// Master seed [env: LEADSEL_SEED when the flag is absent; default 0].
    #[arg(long, env = "LEADSEL_SEED", hide_env = true, default_value_t = 0)]
    pub seed: u64,
    /// Transports to simulate.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "broadcast")]
    pub transport: Vec<TransportArg>,
    /// Uniform follower limit for every leader.
    #[arg(long)]
    pub caps: Option<usize>,
    /// Worker threads.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub jobs: u64,
    /// Leave the timing columns empty.
    #[arg(long)]
    pub no_timing: bool,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    /// Number of UEs.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    /// Number of candidate leaders, for the distributed bound.
    #[arg(long)]
    pub l: Option<u64>,
}

/// Parses `a..b` (inclusive), `a,b,c` or a single value.
pub fn parse_list<T>(text: &str) -> Result<Vec<T>, String>
where
    T: std::str::FromStr + Copy + PartialOrd + std::ops::Add<Output = T> + From<u8>,
{
    let one = |s: &str| {
        s.trim()
            .parse::<T>()
            .map_err(|_| format!("cannot parse `{}` in `{text}`", s.trim()))
    };
    if let Some((a, b)) = text.split_once("..") {
        let (lo, hi) = (one(a)?, one(b)?);
        if lo > hi {
            return Err(format!("empty range `{text}`"));
        }
        let mut out = Vec::new();
        let mut v = lo;
        while v <= hi {
            out.push(v);
            v = v + T::from(1);
        }
        return Ok(out);
    }
    let out: Vec<T> = text.split(',').map(one).collect::<Result<_, _>>()?;
    if out.is_empty() {
        return Err(format!("empty list `{text}`"));
    }
    Ok(out)
}
