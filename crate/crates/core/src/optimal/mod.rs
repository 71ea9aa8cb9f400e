//! Exact solution of the joint leader selection and follower association
//! problem, an independent brute-force oracle, and configuration counts.

mod counting;
mod exhaustive;
mod oracle;
mod residual;

use std::collections::BTreeMap;
use std::time::Duration;

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::SolveError;
use crate::model::{Assignment, Capacities, Instance, Mode, UeId};
use crate::score::{Score, Threshold};

pub use counting::{
    count_configs_distributed_bound, count_configs_exhaustive, stirling2, stirling2_table,
    ConfigCount,
};
pub use oracle::{brute_force_oracle, ORACLE_MAX_N};

/// Default hard limit on instance size for the exhaustive search.
pub const DEFAULT_MAX_N: usize = 14;

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub mode: Mode,
    pub caps: Option<Capacities>,
    pub max_n: usize,
    /// Skip leader sets whose optimistic bound cannot beat the incumbent.
    /// Skipped configurations are still counted as covered.
    pub prune: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            mode: Mode::Relaxed,
            caps: None,
            max_n: DEFAULT_MAX_N,
            prune: false,
        }
    }
}

impl SolverOptions {
    pub fn with_mode(mode: Mode) -> Self {
        SolverOptions {
            mode,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimalSolution {
    pub assignment: Assignment,
    pub utility: Score,
    /// Leader-first-follower configurations covered by the search.
    pub configs_visited: BigUint,
    pub elapsed: Duration,
}

impl OptimalSolution {
    pub fn to_record(&self) -> SolutionRecord {
        SolutionRecord {
            utility: self.utility,
            leaders: self.assignment.leaders.iter().copied().collect(),
            follows: self.assignment.follows.clone(),
            isolated: self.assignment.isolated.iter().copied().collect(),
            configs_visited: self.configs_visited.to_string(),
            elapsed_us: self.elapsed.as_micros() as u64,
        }
    }
}

/// JSON shape of a solver result.
#[derive(Clone, Debug, Serialize)]
pub struct SolutionRecord {
    pub utility: Score,
    pub leaders: Vec<UeId>,
    pub follows: BTreeMap<UeId, UeId>,
    pub isolated: Vec<UeId>,
    pub configs_visited: String,
    pub elapsed_us: u64,
}

/// Optimal assignment by exhaustive search over leader sets of UEs with
/// `LII > ρ` and their first-follower designations.
///
/// Follow edges require positive LXI in both modes. Ties go to the
/// lexicographically smallest leader set, then the smallest follower map
/// (see [`Assignment::tie_key`]).
pub fn solve_exhaustive(
    inst: &Instance,
    rho: Threshold,
    opts: &SolverOptions,
) -> Result<OptimalSolution, SolveError> {
    exhaustive::solve(inst, rho, opts)
}
