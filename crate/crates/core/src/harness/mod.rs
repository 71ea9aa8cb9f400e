//! Seeded episodes, message accounting, leader-set statistics and the
//! benchmark pipeline.

mod benchmark;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use crate::protocol::run_episode;
pub use benchmark::{
    run_benchmark, BenchmarkReport, ExperimentConfig, HistogramRecord, ReportRow, TIMING_COLUMNS,
};

use crate::error::HarnessError;
use crate::model::Instance;
use crate::optimal::{solve_exhaustive, SolverOptions};
use crate::protocol::{EpisodeOutcome, ProtocolConfig, Transport};
use crate::rng::derive_seed;
use crate::score::{Score, Threshold};

/// Worst-case message count of an uncapacitated episode with `l` candidate
/// leaders among `n` UEs: `3n + l − 2` with broadcast, `n(n+1) + l(l−1) − 2`
/// point-to-point. Saturates at zero for `n = 0`.
pub fn message_bound(n: usize, l: usize, transport: Transport) -> usize {
    let raw = match transport {
        Transport::Broadcast => 3 * n + l,
        Transport::P2p => n * (n + 1) + l * l.saturating_sub(1),
    };
    raw.saturating_sub(2)
}

pub fn check_message_bounds(
    outcome: &EpisodeOutcome,
    n: usize,
    l: usize,
    transport: Transport,
) -> bool {
    outcome.counts.total <= message_bound(n, l, transport)
}

/// Empirical leader-set size distribution with a moment fit.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LeaderSizeStats {
    pub bins: BTreeMap<usize, u64>,
}

impl LeaderSizeStats {
    pub fn from_sizes(sizes: impl IntoIterator<Item = usize>) -> Self {
        let mut s = LeaderSizeStats::default();
        for k in sizes {
            s.add(k);
        }
        s
    }

    pub fn add(&mut self, size: usize) {
        *self.bins.entry(size).or_default() += 1;
    }

    pub fn merge(&mut self, other: &LeaderSizeStats) {
        for (&k, &c) in &other.bins {
            *self.bins.entry(k).or_default() += c;
        }
    }

    pub fn count(&self) -> u64 {
        self.bins.values().sum()
    }

    pub fn mean(&self) -> f64 {
        let n = self.count();
        if n == 0 {
            return f64::NAN;
        }
        self.bins
            .iter()
            .map(|(&k, &c)| k as f64 * c as f64)
            .sum::<f64>()
            / n as f64
    }

    /// Population variance (second central moment).
    pub fn variance(&self) -> f64 {
        let n = self.count();
        if n == 0 {
            return f64::NAN;
        }
        let mu = self.mean();
        self.bins
            .iter()
            .map(|(&k, &c)| c as f64 * (k as f64 - mu).powi(2))
            .sum::<f64>()
            / n as f64
    }

    /// Probability of each size.
    pub fn pdf(&self) -> BTreeMap<usize, f64> {
        let n = self.count() as f64;
        self.bins.iter().map(|(&k, &c)| (k, c as f64 / n)).collect()
    }
}

pub fn leader_size_stats<'a>(
    outcomes: impl IntoIterator<Item = &'a EpisodeOutcome>,
) -> LeaderSizeStats {
    LeaderSizeStats::from_sizes(outcomes.into_iter().map(|o| o.assignment.leader_count()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoRule {
    /// Arithmetic mean of the LII values.
    Mean,
    /// Smallest integer ρ in 0..=10 leaving at most ⌊N/2⌋ candidates.
    HalfN,
}

pub fn rho_rule(inst: &Instance, rule: RhoRule) -> Threshold {
    let liis = inst.ue_liis();
    match rule {
        RhoRule::Mean => {
            let total: i64 = liis.iter().map(|s| s.raw()).sum();
            Threshold::clamped(Score::from_raw(total / liis.len() as i64))
        }
        RhoRule::HalfN => {
            let half = liis.len() / 2;
            (0..=10)
                .map(|r| Threshold::from_int(r).expect("in range"))
                .find(|rho| liis.iter().filter(|&&v| rho.admits(v)).count() <= half)
                .expect("ρ = 10 admits nobody")
        }
    }
}

/// One point of a ρ sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub rho: Threshold,
    pub mean_utility: f64,
    pub mean_leaders: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepCurve {
    pub points: Vec<SweepPoint>,
    /// Mean optimal utility at ρ = 0, the flat reference line.
    pub optimal_utility: f64,
    pub optimal_leaders: f64,
}

/// Mean distributed utility and leader-set size for every ρ, plus the
/// optimal reference. Episode seeds derive from `seed`, the instance index
/// and ρ.
pub fn sweep_rho(
    instances: &[Instance],
    rhos: &[Threshold],
    base: &ProtocolConfig,
    seed: u64,
) -> Result<SweepCurve, HarnessError> {
    let count = instances.len() as f64;
    let mut points = Vec::with_capacity(rhos.len());
    for &rho in rhos {
        let cfg = ProtocolConfig {
            rho,
            ..base.clone()
        };
        let (mut util, mut leaders) = (0i64, 0usize);
        for (i, inst) in instances.iter().enumerate() {
            let s = derive_seed(seed, &[i as u64, rho.score().raw() as u64]);
            let out = run_episode(inst, &cfg, s)?;
            util += out.utility.raw();
            leaders += out.assignment.leader_count();
        }
        points.push(SweepPoint {
            rho,
            mean_utility: Score::from_raw(util).as_f64() / count,
            mean_leaders: leaders as f64 / count,
        });
    }
    let opts = SolverOptions {
        caps: base.caps.clone(),
        ..SolverOptions::default()
    };
    let (mut util, mut leaders) = (0i64, 0usize);
    for inst in instances {
        let sol = solve_exhaustive(inst, Threshold::ZERO, &opts)?;
        util += sol.utility.raw();
        leaders += sol.assignment.leader_count();
    }
    Ok(SweepCurve {
        points,
        optimal_utility: Score::from_raw(util).as_f64() / count,
        optimal_leaders: leaders as f64 / count,
    })
}
