//! Exhaustive search over leader-first-follower configurations.
//!
//! A configuration is a leader set together with one designated follower
//! per leader (an injective map into the non-leaders). Designating a first
//! follower guarantees that every leader keeps at least one follower; every
//! other UE then goes to its best eligible leader, or, with capacities, the
//! remainder is solved exactly as a capacitated assignment. Every feasible
//! assignment extends at least one configuration, so the maximum over all
//! configurations is the optimum.

use std::time::Instant;

use num_bigint::BigUint;

use super::residual::{Item, ResidualProblem};
use super::{OptimalSolution, SolverOptions};
use crate::error::SolveError;
use crate::model::{utility, Assignment, Instance, Mode, UeId};
use crate::score::{Score, Threshold};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Fixed {
    Free,
    To(usize),
    Isolated,
}

/// Dense view of the instance used by the search.
struct Search<'a> {
    inst: &'a Instance,
    n: usize,
    mode: Mode,
    lii: Vec<i64>,
    lxi: Vec<i64>,
    caps: Option<Vec<Option<usize>>>,
}

impl<'a> Search<'a> {
    fn new(inst: &'a Instance, opts: &SolverOptions) -> Self {
        let n = inst.n();
        let lii = (0..=n).map(|i| inst.lii(UeId(i as u32)).raw()).collect();
        let mut lxi = vec![0; (n + 1) * (n + 1)];
        for m in 0..=n {
            for k in 0..=n {
                lxi[m * (n + 1) + k] = inst.lxi(UeId(m as u32), UeId(k as u32)).raw();
            }
        }
        let caps = opts
            .caps
            .as_ref()
            .map(|c| (0..=n).map(|i| c.limit(UeId(i as u32))).collect());
        Search {
            inst,
            n,
            mode: opts.mode,
            lii,
            lxi,
            caps,
        }
    }

    fn w(&self, m: usize, k: usize) -> i64 {
        self.lxi[m * (self.n + 1) + k]
    }

    /// Candidate leader sets in lexicographic order of their sorted ids.
    fn leader_sets(&self, rho: Threshold) -> Vec<Vec<usize>> {
        let candidates: Vec<usize> = self
            .inst
            .nodes()
            .filter(|&id| id.is_edge() || rho.admits(self.inst.lii(id)))
            .map(UeId::index)
            .collect();
        let mut out = Vec::new();
        let mut current = Vec::new();
        self.extend_sets(&candidates, 0, &mut current, &mut out);
        out
    }

    fn extend_sets(
        &self,
        candidates: &[usize],
        from: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        for i in from..candidates.len() {
            current.push(candidates[i]);
            // Each leader needs a distinct follower among the regular
            // non-leaders.
            let regular = current.iter().filter(|&&l| l != 0).count();
            if current.len() + regular <= self.n {
                out.push(current.clone());
                self.extend_sets(candidates, i + 1, current, out);
            }
            current.pop();
        }
    }

    fn non_leaders(&self, leaders: &[usize]) -> Vec<usize> {
        (1..=self.n).filter(|m| !leaders.contains(m)).collect()
    }

    /// Best eligible leader weight for `m` under `fixed`: `Ok(Some(w))`
    /// when it follows, `Ok(None)` when isolated, `Err` if not admissible.
    fn completion(&self, m: usize, leaders: &[usize], fixed: Fixed) -> Result<Option<i64>, ()> {
        match fixed {
            Fixed::To(l) => {
                let w = self.w(m, l);
                if w > 0 {
                    Ok(Some(w))
                } else {
                    Err(())
                }
            }
            Fixed::Isolated => {
                if self.mode == Mode::Strict {
                    Err(())
                } else {
                    Ok(None)
                }
            }
            Fixed::Free => {
                let best = leaders
                    .iter()
                    .map(|&l| self.w(m, l))
                    .filter(|&w| w > 0)
                    .max();
                match (best, self.mode) {
                    (None, Mode::Strict) => Err(()),
                    (b, _) => Ok(b),
                }
            }
        }
    }

    /// Optimal utility for a fixed leader set, or `None` if no valid
    /// configuration extends it. Counts designations into `visited`.
    fn evaluate(
        &self,
        leaders: &[usize],
        fixed: &[Fixed],
        visited: Option<&mut u128>,
    ) -> Option<i64> {
        let rest = self.non_leaders(leaders);
        let base: i64 = leaders.iter().map(|&l| self.lii[l]).sum();
        let mut state = Designation {
            used: vec![false; self.n + 1],
            chosen: Vec::with_capacity(leaders.len()),
            best: None,
            visited: 0,
        };
        self.designate(leaders, &rest, fixed, base, &mut state);
        if let Some(v) = visited {
            *v += state.visited;
        }
        state.best
    }

    fn designate(
        &self,
        leaders: &[usize],
        rest: &[usize],
        fixed: &[Fixed],
        acc: i64,
        st: &mut Designation,
    ) {
        let depth = st.chosen.len();
        if depth == leaders.len() {
            st.visited += 1;
            if let Some(v) = self.complete(leaders, rest, fixed, &st.used) {
                let total = acc + v;
                if st.best.map_or(true, |b| total > b) {
                    st.best = Some(total);
                }
            }
            return;
        }
        let l = leaders[depth];
        for &m in rest {
            if st.used[m] || self.w(m, l) <= 0 {
                continue;
            }
            if !matches!(fixed[m], Fixed::Free) && fixed[m] != Fixed::To(l) {
                continue;
            }
            st.used[m] = true;
            st.chosen.push(m);
            self.designate(leaders, rest, fixed, acc + self.w(m, l), st);
            st.chosen.pop();
            st.used[m] = false;
        }
    }

    /// Value of the non-designated UEs, or `None` if they cannot be placed.
    fn complete(
        &self,
        leaders: &[usize],
        rest: &[usize],
        fixed: &[Fixed],
        used: &[bool],
    ) -> Option<i64> {
        match &self.caps {
            None => {
                let mut total = 0;
                for &m in rest.iter().filter(|&&m| !used[m]) {
                    total += self.completion(m, leaders, fixed[m]).ok()?.unwrap_or(0);
                }
                Some(total)
            }
            Some(caps) => {
                let mut capacity: Vec<Option<usize>> = Vec::with_capacity(leaders.len());
                for &l in leaders {
                    match caps[l] {
                        Some(0) => return None,
                        Some(c) => capacity.push(Some(c - 1)),
                        None => capacity.push(None),
                    }
                }
                let mut forced = 0;
                let mut items = Vec::new();
                for &m in rest.iter().filter(|&&m| !used[m]) {
                    match fixed[m] {
                        Fixed::To(l) => {
                            let w = self.w(m, l);
                            let slot = leaders.iter().position(|&x| x == l)?;
                            if w <= 0 {
                                return None;
                            }
                            match &mut capacity[slot] {
                                Some(0) => return None,
                                Some(c) => *c -= 1,
                                None => {}
                            }
                            forced += w;
                        }
                        Fixed::Isolated if self.mode == Mode::Strict => return None,
                        Fixed::Isolated => {}
                        Fixed::Free => {
                            let options: Vec<(usize, i64)> = leaders
                                .iter()
                                .enumerate()
                                .map(|(s, &l)| (s, self.w(m, l)))
                                .filter(|&(_, w)| w > 0)
                                .collect();
                            if options.is_empty() && self.mode == Mode::Strict {
                                return None;
                            }
                            items.push(Item { options });
                        }
                    }
                }
                let problem = ResidualProblem {
                    items,
                    capacity,
                    mode: self.mode,
                };
                Some(forced + problem.solve()?)
            }
        }
    }

    /// Upper bound for a leader set: every UE gets its best eligible leader
    /// and capacities are ignored.
    fn bound(&self, leaders: &[usize]) -> i64 {
        let base: i64 = leaders.iter().map(|&l| self.lii[l]).sum();
        base + self
            .non_leaders(leaders)
            .into_iter()
            .map(|m| {
                leaders
                    .iter()
                    .map(|&l| self.w(m, l))
                    .max()
                    .unwrap_or(0)
                    .max(0)
            })
            .sum::<i64>()
    }

    /// Number of injective first-follower designations for `leaders`,
    /// counted over subsets of leaders already served.
    fn count_designations(&self, leaders: &[usize]) -> u128 {
        let k = leaders.len();
        let mut ways = vec![0u128; 1 << k];
        ways[0] = 1;
        for m in self.non_leaders(leaders) {
            let mut next = ways.clone();
            for mask in 0..(1usize << k) {
                if ways[mask] == 0 {
                    continue;
                }
                for (j, &l) in leaders.iter().enumerate() {
                    if mask & (1 << j) == 0 && self.w(m, l) > 0 {
                        next[mask | (1 << j)] += ways[mask];
                    }
                }
            }
            ways = next;
        }
        ways[(1 << k) - 1]
    }

    /// Lexicographically smallest follower targets among the optimal
    /// assignments of `leaders`.
    fn canonical(&self, leaders: &[usize], value: i64) -> Assignment {
        let mut fixed = vec![Fixed::Free; self.n + 1];
        for m in self.non_leaders(leaders) {
            let mut options: Vec<Fixed> = leaders.iter().map(|&l| Fixed::To(l)).collect();
            if self.mode == Mode::Relaxed {
                options.push(Fixed::Isolated);
            }
            let pick = options
                .into_iter()
                .find(|&opt| {
                    fixed[m] = opt;
                    self.evaluate(leaders, &fixed, None) == Some(value)
                })
                .expect("optimal value is attainable");
            fixed[m] = pick;
        }
        let leader_ids = leaders.iter().map(|&l| l as u32);
        let follows = (1..=self.n).filter_map(|m| match fixed[m] {
            Fixed::To(l) => Some((m as u32, l as u32)),
            _ => None,
        });
        Assignment::from_parts(self.inst, leader_ids, follows)
    }
}

struct Designation {
    used: Vec<bool>,
    chosen: Vec<usize>,
    best: Option<i64>,
    visited: u128,
}

pub(super) fn solve(
    inst: &Instance,
    rho: Threshold,
    opts: &SolverOptions,
) -> Result<OptimalSolution, SolveError> {
    let start = Instant::now();
    if inst.n() > opts.max_n {
        return Err(SolveError::LimitExceeded {
            n: inst.n(),
            limit: opts.max_n,
        });
    }
    let search = Search::new(inst, opts);
    let free = vec![Fixed::Free; inst.n() + 1];
    let mut visited: u128 = 0;
    // Relaxed mode always admits the empty leader set.
    let mut best: Option<(i64, Vec<usize>)> = match opts.mode {
        Mode::Relaxed => Some((0, Vec::new())),
        Mode::Strict => None,
    };
    for leaders in search.leader_sets(rho) {
        if opts.prune {
            if let Some((b, _)) = &best {
                if search.bound(&leaders) <= *b {
                    visited += search.count_designations(&leaders);
                    continue;
                }
            }
        }
        if let Some(v) = search.evaluate(&leaders, &free, Some(&mut visited)) {
            if best.as_ref().map_or(true, |(b, _)| v > *b) {
                best = Some((v, leaders));
            }
        }
    }
    let (value, leaders) = best.ok_or(SolveError::Infeasible)?;
    let assignment = if leaders.is_empty() {
        Assignment::all_isolated(inst)
    } else {
        search.canonical(&leaders, value)
    };
    let util = utility(inst, &assignment)?;
    debug_assert_eq!(util, Score::from_raw(value));
    Ok(OptimalSolution {
        assignment,
        utility: util,
        configs_visited: BigUint::from(visited),
        elapsed: start.elapsed(),
    })
}
