use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::json;

use super::{message_bound, rho_rule, LeaderSizeStats, RhoRule};
use crate::error::HarnessError;
use crate::model::{generate_instance, Capacities, Instance, Mode};
use crate::optimal::{solve_exhaustive, SolverOptions};
use crate::protocol::{run_episode, ProtocolConfig, Transport};
use crate::rng::{derive_seed, STREAM_VERSION};
use crate::score::{Score, Threshold};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n_values: Vec<usize>,
    pub instances_per_n: usize,
    /// Per-N instance counts that replace `instances_per_n`.
    pub instances_override: BTreeMap<usize, usize>,
    pub rho_values: Vec<Threshold>,
    pub master_seed: u64,
    pub modes: Vec<Transport>,
    /// Uniform follower limit for every leader.
    pub caps: Option<usize>,
    /// Threshold given to the exact solver.
    pub optimal_rho: Threshold,
    /// Worker threads; 1 runs sequentially.
    pub jobs: usize,
    /// Measure runtimes (median of 3 repetitions per solver run).
    pub timing: bool,
}

impl Default for ExperimentConfig {
    /// N = 7..=12, 100 instances (30 at N = 12), ρ = 0..=9, broadcast.
    fn default() -> Self {
        ExperimentConfig {
            n_values: (7..=12).collect(),
            instances_per_n: 100,
            instances_override: BTreeMap::from([(12, 30)]),
            rho_values: (0..=9)
                .map(|r| Threshold::from_int(r).expect("in range"))
                .collect(),
            master_seed: 0,
            modes: vec![Transport::Broadcast],
            caps: None,
            optimal_rho: Threshold::ZERO,
            jobs: 1,
            timing: true,
        }
    }
}

impl ExperimentConfig {
    pub fn instances_for(&self, n: usize) -> usize {
        self.instances_override
            .get(&n)
            .copied()
            .unwrap_or(self.instances_per_n)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Config(m.to_string()));
        if self.n_values.is_empty() {
            return bad("n_values is empty");
        }
        if self.n_values.contains(&0) {
            return bad("n must be at least 1");
        }
        if self.rho_values.is_empty() {
            return bad("rho_values is empty");
        }
        if self.modes.is_empty() {
            return bad("modes is empty");
        }
        if self.jobs == 0 {
            return bad("jobs must be at least 1");
        }
        if self.n_values.iter().any(|&n| self.instances_for(n) == 0) {
            return bad("instance count must be at least 1");
        }
        Ok(())
    }

    /// Seed of instance `idx` at size `n`.
    pub fn instance_seed(&self, n: usize, idx: usize) -> u64 {
        derive_seed(self.master_seed, &[n as u64, idx as u64])
    }
}

/// Aggregates for one (transport, N, ρ) cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub transport: Transport,
    pub n: usize,
    pub rho: Threshold,
    pub mean_util_dist: f64,
    pub mean_util_opt: f64,
    pub gap_pct: f64,
    pub mean_l_dist: f64,
    pub mean_l_opt: f64,
    pub msgs_min: usize,
    pub msgs_mean: f64,
    pub msgs_max: usize,
    /// Mean of the per-episode bound at the episode's |𝓛|.
    pub msgs_bound: f64,
    pub t_dist_us: Option<f64>,
    pub t_opt_us: Option<f64>,
    pub speedup: Option<f64>,
}

/// Leader-set size distribution of one method at one N.
#[derive(Clone, Debug, PartialEq)]
pub struct HistogramRecord {
    pub method: &'static str,
    pub n: usize,
    pub stats: LeaderSizeStats,
}

impl Serialize for HistogramRecord {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let bins: BTreeMap<String, u64> = self
            .stats
            .bins
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect();
        json!({
            "method": self.method,
            "n": self.n,
            "bins": bins,
            "fit": { "mean": self.stats.mean(), "var": self.stats.variance() },
        })
        .serialize(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchmarkReport {
    pub config: ExperimentConfig,
    pub rows: Vec<ReportRow>,
    pub histograms: Vec<HistogramRecord>,
    /// Mean of the mean-LII ρ rule per N.
    pub rho_mean_rule: BTreeMap<usize, f64>,
    pub notes: Vec<String>,
}

const CSV_HEADER: [&str; 12] = [
    "n",
    "rho",
    "mean_util_dist",
    "mean_util_opt",
    "gap_pct",
    "mean_L_dist",
    "mean_L_opt",
    "msgs_mean",
    "msgs_bound",
    "t_dist_us",
    "t_opt_us",
    "speedup",
];

/// CSV columns holding wall-clock measurements.
pub const TIMING_COLUMNS: [&str; 3] = ["t_dist_us", "t_opt_us", "speedup"];

fn fmt(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.4}")
    } else {
        String::new()
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

impl BenchmarkReport {
    pub fn rows_for(&self, transport: Transport) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(move |r| r.transport == transport)
    }

    pub fn row(&self, transport: Transport, n: usize, rho: Threshold) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.transport == transport && r.n == n && r.rho == rho)
    }

    pub fn histogram(&self, method: &str, n: usize) -> Option<&HistogramRecord> {
        self.histograms
            .iter()
            .find(|h| h.method == method && h.n == n)
    }

    pub fn write_csv<W: std::io::Write>(
        &self,
        transport: Transport,
        out: W,
    ) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in self.rows_for(transport) {
            w.write_record([
                r.n.to_string(),
                r.rho.to_string(),
                fmt(r.mean_util_dist),
                fmt(r.mean_util_opt),
                fmt(r.gap_pct),
                fmt(r.mean_l_dist),
                fmt(r.mean_l_opt),
                fmt(r.msgs_mean),
                fmt(r.msgs_bound),
                fmt_opt(r.t_dist_us),
                fmt_opt(r.t_opt_us),
                fmt_opt(r.speedup),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// gnuplot data: ρ, distributed and optimal utility, distributed and
    /// optimal leader-set size.
    pub fn write_sweep_dat<W: std::io::Write>(&self, n: usize, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# n = {n}")?;
        writeln!(
            out,
            "# rho mean_util_dist mean_util_opt mean_L_dist mean_L_opt"
        )?;
        let first = self.config.modes[0];
        for r in self.rows_for(first).filter(|r| r.n == n) {
            writeln!(
                out,
                "{} {} {} {} {}",
                r.rho,
                fmt(r.mean_util_dist),
                fmt(r.mean_util_opt),
                fmt(r.mean_l_dist),
                fmt(r.mean_l_opt)
            )?;
        }
        Ok(())
    }

    /// Writes every report file into `dir` and returns their paths.
    pub fn write_to_dir(&self, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for &t in &self.config.modes {
            let path = dir.join(format!("report-{t}.csv"));
            self.write_csv(t, fs::File::create(&path)?)?;
            written.push(path);
        }
        for h in &self.histograms {
            let path = dir.join(format!("hist_{}_n{}.json", h.method, h.n));
            fs::write(&path, serde_json::to_string_pretty(h)? + "\n")?;
            written.push(path);
        }
        for &n in &self.config.n_values {
            let path = dir.join(format!("sweep_n{n}.dat"));
            self.write_sweep_dat(n, fs::File::create(&path)?)?;
            written.push(path);
        }
        let meta = json!({
            "config": self.config,
            "rng_stream_version": STREAM_VERSION,
            "rho_mean_rule": self.rho_mean_rule,
            "notes": self.notes,
            "timing_columns": TIMING_COLUMNS,
        });
        let path = dir.join("report-meta.json");
        fs::write(&path, serde_json::to_string_pretty(&meta)? + "\n")?;
        written.push(path);
        Ok(written)
    }
}

struct EpisodeStat {
    utility: i64,
    leaders: usize,
    msgs: usize,
    bound: usize,
    t_us: Option<f64>,
}

struct InstanceRun {
    n: usize,
    opt_utility: i64,
    opt_leaders: usize,
    t_opt_us: Option<f64>,
    rho_mean: Score,
    /// Indexed `[mode][rho]`.
    episodes: Vec<Vec<EpisodeStat>>,
}

fn median3_us<T>(mut f: impl FnMut() -> T) -> (T, f64) {
    let mut times = [0.0; 3];
    let mut last = None;
    for t in &mut times {
        let start = Instant::now();
        last = Some(f());
        *t = start.elapsed().as_secs_f64() * 1e6;
    }
    times.sort_by(f64::total_cmp);
    (last.expect("ran"), times[1])
}

fn run_instance(cfg: &ExperimentConfig, n: usize, idx: usize) -> Result<InstanceRun, HarnessError> {
    let seed = cfg.instance_seed(n, idx);
    let inst: Instance = generate_instance(n, seed, None).map_err(crate::SolveError::from)?;
    let caps = cfg.caps.map(|c| Capacities::uniform(&inst, c));
    let opts = SolverOptions {
        mode: Mode::Relaxed,
        caps: caps.clone(),
        ..SolverOptions::default()
    };
    let (opt, t_opt_us) = if cfg.timing {
        let (sol, t) = median3_us(|| solve_exhaustive(&inst, cfg.optimal_rho, &opts));
        (sol?, Some(t))
    } else {
        (solve_exhaustive(&inst, cfg.optimal_rho, &opts)?, None)
    };

    let mut episodes = Vec::with_capacity(cfg.modes.len());
    for &transport in &cfg.modes {
        let mut per_rho = Vec::with_capacity(cfg.rho_values.len());
        for &rho in &cfg.rho_values {
            let pc = ProtocolConfig {
                rho,
                transport,
                caps: caps.clone(),
                ..ProtocolConfig::default()
            };
            let eseed = derive_seed(seed, &[rho.score().raw() as u64]);
            let (out, t_us) = if cfg.timing {
                let (o, t) = median3_us(|| run_episode(&inst, &pc, eseed));
                (o?, Some(t))
            } else {
                (run_episode(&inst, &pc, eseed)?, None)
            };
            per_rho.push(EpisodeStat {
                utility: out.utility.raw(),
                leaders: out.assignment.leader_count(),
                msgs: out.counts.total,
                bound: message_bound(n, out.candidate_leaders, transport),
                t_us,
            });
        }
        episodes.push(per_rho);
    }
    Ok(InstanceRun {
        n,
        opt_utility: opt.utility.raw(),
        opt_leaders: opt.assignment.leader_count(),
        t_opt_us,
        rho_mean: rho_rule(&inst, RhoRule::Mean).score(),
        episodes,
    })
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    sum / count as f64
}

/// Generates the instances, solves each one exactly once, runs an episode
/// per (transport, ρ) and aggregates. Results do not depend on `jobs`.
pub fn run_benchmark(cfg: &ExperimentConfig) -> Result<BenchmarkReport, HarnessError> {
    cfg.validate()?;
    let tasks: Vec<(usize, usize)> = cfg
        .n_values
        .iter()
        .flat_map(|&n| (0..cfg.instances_for(n)).map(move |i| (n, i)))
        .collect();
    let runs: Vec<InstanceRun> = if cfg.jobs == 1 {
        tasks
            .iter()
            .map(|&(n, i)| run_instance(cfg, n, i))
            .collect::<Result<_, _>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        pool.install(|| {
            tasks
                .par_iter()
                .map(|&(n, i)| run_instance(cfg, n, i))
                .collect::<Result<_, _>>()
        })?
    };

    let mut rows = Vec::new();
    let mut histograms = Vec::new();
    let mut rho_mean_rule = BTreeMap::new();
    for &n in &cfg.n_values {
        let group: Vec<&InstanceRun> = runs.iter().filter(|r| r.n == n).collect();
        let opt_util = mean(
            group
                .iter()
                .map(|r| Score::from_raw(r.opt_utility).as_f64()),
        );
        let opt_l = mean(group.iter().map(|r| r.opt_leaders as f64));
        let t_opt = cfg
            .timing
            .then(|| mean(group.iter().map(|r| r.t_opt_us.unwrap_or(f64::NAN))));
        rho_mean_rule.insert(n, mean(group.iter().map(|r| r.rho_mean.as_f64())));

        for (mi, &transport) in cfg.modes.iter().enumerate() {
            for (ri, &rho) in cfg.rho_values.iter().enumerate() {
                let eps: Vec<&EpisodeStat> = group.iter().map(|r| &r.episodes[mi][ri]).collect();
                let dist_util = mean(eps.iter().map(|e| Score::from_raw(e.utility).as_f64()));
                let t_dist = cfg
                    .timing
                    .then(|| mean(eps.iter().map(|e| e.t_us.unwrap_or(f64::NAN))));
                rows.push(ReportRow {
                    transport,
                    n,
                    rho,
                    mean_util_dist: dist_util,
                    mean_util_opt: opt_util,
                    gap_pct: (dist_util - opt_util) / opt_util * 100.0,
                    mean_l_dist: mean(eps.iter().map(|e| e.leaders as f64)),
                    mean_l_opt: opt_l,
                    msgs_min: eps.iter().map(|e| e.msgs).min().unwrap_or(0),
                    msgs_mean: mean(eps.iter().map(|e| e.msgs as f64)),
                    msgs_max: eps.iter().map(|e| e.msgs).max().unwrap_or(0),
                    msgs_bound: mean(eps.iter().map(|e| e.bound as f64)),
                    t_dist_us: t_dist,
                    t_opt_us: t_opt,
                    speedup: t_opt.zip(t_dist).map(|(o, d)| o / d),
                });
            }
        }

        histograms.push(HistogramRecord {
            method: "optimal",
            n,
            stats: LeaderSizeStats::from_sizes(group.iter().map(|r| r.opt_leaders)),
        });
        // Leader sets do not depend on the transport, so the first mode
        // stands for all of them; every ρ gets equal weight.
        histograms.push(HistogramRecord {
            method: "distributed",
            n,
            stats: LeaderSizeStats::from_sizes(
                group
                    .iter()
                    .flat_map(|r| r.episodes[0].iter().map(|e| e.leaders)),
            ),
        });
    }

    let mut notes = vec![
        format!(
            "optimal solver runs in relaxed mode at rho = {}",
            cfg.optimal_rho
        ),
        "follow edges require LXI > 0 in both solvers".to_string(),
        "distributed histogram pools every rho with equal weight".to_string(),
        "fit is mean and population variance of the histogram".to_string(),
        "timing columns are medians of 3 runs and are excluded from reproducibility checks"
            .to_string(),
    ];
    if cfg.caps.is_some() {
        notes.push(
            "capacitated run: msgs_bound is the uncapacitated bound, for reference only".into(),
        );
    }
    if cfg.jobs > 1 && cfg.timing {
        notes.push(format!(
            "timings taken with {} concurrent workers",
            cfg.jobs
        ));
    }
    Ok(BenchmarkReport {
        config: cfg.clone(),
        rows,
        histograms,
        rho_mean_rule,
        notes,
    })
}
