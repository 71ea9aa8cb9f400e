//! Brute-force reference solver for small instances.
//!
//! Every regular UE independently takes one of: leader, isolated (relaxed
//! mode only), or follower of some other node. The edge server leads iff
//! someone follows it. Each combination is scored directly and the winner
//! is confirmed with [`check_constraints`]. Shares nothing with the
//! exhaustive search beyond the model types.

use std::time::Instant;

use num_bigint::BigUint;

use super::{OptimalSolution, SolverOptions};
use crate::error::SolveError;
use crate::model::{check_constraints, utility, Assignment, Instance, Mode, UeId};
use crate::score::Threshold;

/// Largest instance the oracle accepts.
pub const ORACLE_MAX_N: usize = 7;

const LEADER: usize = 0;
const ISOLATED: usize = 1;

/// Utility, tie key and assignment of the incumbent.
type Best = (i64, (Vec<u32>, Vec<u32>), Assignment);

pub fn brute_force_oracle(
    inst: &Instance,
    rho: Threshold,
    opts: &SolverOptions,
) -> Result<OptimalSolution, SolveError> {
    let start = Instant::now();
    let n = inst.n();
    if n > ORACLE_MAX_N {
        return Err(SolveError::LimitExceeded {
            n,
            limit: ORACLE_MAX_N,
        });
    }
    let nodes: Vec<UeId> = inst.nodes().collect();
    let ues: Vec<UeId> = inst.ues().collect();
    // Choice c >= 2 means "follow nodes[c - 2]".
    let radix = 2 + nodes.len();
    let mut choice = vec![0usize; n];
    let mut best: Option<Best> = None;
    let mut visited: u64 = 0;

    loop {
        visited += 1;
        if let Some(a) = decode(&choice, &ues, &nodes, opts.mode) {
            let value = utility(inst, &a)?.raw();
            let improves = match &best {
                None => true,
                Some((b, key, _)) => value > *b || (value == *b && a.tie_key(inst) < *key),
            };
            if improves {
                let report = check_constraints(inst, &a, rho, opts.caps.as_ref(), opts.mode)?;
                if report.all_ok() && report.eligibility_ok {
                    best = Some((value, a.tie_key(inst), a));
                }
            }
        }
        // Odometer increment.
        let mut i = 0;
        loop {
            if i == n {
                let (_, _, assignment) = best.ok_or(SolveError::Infeasible)?;
                let util = utility(inst, &assignment)?;
                return Ok(OptimalSolution {
                    assignment,
                    utility: util,
                    configs_visited: BigUint::from(visited),
                    elapsed: start.elapsed(),
                });
            }
            choice[i] += 1;
            if choice[i] < radix {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

fn decode(choice: &[usize], ues: &[UeId], nodes: &[UeId], mode: Mode) -> Option<Assignment> {
    let mut a = Assignment::default();
    for (&c, &m) in choice.iter().zip(ues) {
        match c {
            LEADER => {
                a.leaders.insert(m);
            }
            ISOLATED => {
                if mode == Mode::Strict {
                    return None;
                }
                a.isolated.insert(m);
            }
            _ => {
                let target = nodes[c - 2];
                if target == m {
                    return None;
                }
                a.follows.insert(m, target);
            }
        }
    }
    if a.follows.values().any(|t| t.is_edge()) {
        a.leaders.insert(UeId::EDGE);
    }
    Some(a)
}
