//! Exact capacitated completion: once each leader has its designated first
//! follower, the remaining UEs are assigned to maximize total LXI subject to
//! the leaders' remaining capacity.
//!
//! Small residuals are solved by per-follower branch and bound; larger ones
//! by min-cost flow. Both return the optimal value only.

use crate::model::Mode;

/// A remaining UE and its admissible leaders as `(leader slot, weight)`.
#[derive(Clone, Debug)]
pub(crate) struct Item {
    pub options: Vec<(usize, i64)>,
}

#[derive(Clone, Debug)]
pub(crate) struct ResidualProblem {
    pub items: Vec<Item>,
    /// Remaining capacity per leader slot; `None` is unlimited.
    pub capacity: Vec<Option<usize>>,
    pub mode: Mode,
}

/// Residual size up to which branch and bound is used.
pub(crate) const ENUMERATION_LIMIT: usize = 8;

impl ResidualProblem {
    pub fn solve(&self) -> Option<i64> {
        if self.items.len() <= ENUMERATION_LIMIT {
            self.solve_enumeration()
        } else {
            self.solve_flow()
        }
    }

    pub fn solve_enumeration(&self) -> Option<i64> {
        // Optimistic remaining value for pruning.
        let mut suffix = vec![0i64; self.items.len() + 1];
        for (i, item) in self.items.iter().enumerate().rev() {
            let best = item.options.iter().map(|&(_, w)| w).max().unwrap_or(0);
            suffix[i] = suffix[i + 1] + best;
        }
        let mut left: Vec<usize> = self
            .capacity
            .iter()
            .map(|c| c.unwrap_or(usize::MAX))
            .collect();
        let mut best = None;
        self.branch(0, 0, &mut left, &suffix, &mut best);
        best
    }

    fn branch(
        &self,
        i: usize,
        acc: i64,
        left: &mut [usize],
        suffix: &[i64],
        best: &mut Option<i64>,
    ) {
        if let Some(b) = *best {
            if acc + suffix[i] <= b {
                return;
            }
        }
        if i == self.items.len() {
            *best = Some(acc);
            return;
        }
        for &(slot, w) in &self.items[i].options {
            if left[slot] > 0 {
                left[slot] -= 1;
                self.branch(i + 1, acc + w, left, suffix, best);
                left[slot] += 1;
            }
        }
        if self.mode == Mode::Relaxed {
            self.branch(i + 1, acc, left, suffix, best);
        }
    }

    /// Successive shortest paths with Bellman-Ford on the residual graph.
    pub fn solve_flow(&self) -> Option<i64> {
        let n_items = self.items.len();
        let n_slots = self.capacity.len();
        let source = 0;
        let sink = 1 + n_items + n_slots;
        let mut g = FlowGraph::new(sink + 1);
        // In strict mode every unit of flow earns a bonus large enough that
        // maximizing flow always dominates maximizing weight.
        let bonus = match self.mode {
            Mode::Strict => {
                1 + self
                    .items
                    .iter()
                    .flat_map(|it| it.options.iter().map(|&(_, w)| w))
                    .sum::<i64>()
            }
            Mode::Relaxed => 0,
        };
        for (i, item) in self.items.iter().enumerate() {
            g.add_edge(source, 1 + i, 1, 0);
            for &(slot, w) in &item.options {
                g.add_edge(1 + i, 1 + n_items + slot, 1, -(w + bonus));
            }
        }
        for (s, cap) in self.capacity.iter().enumerate() {
            let cap = cap.unwrap_or(n_items).min(n_items) as i64;
            g.add_edge(1 + n_items + s, sink, cap, 0);
        }
        let (flow, cost) = g.min_cost_flow(source, sink, self.mode == Mode::Relaxed);
        if self.mode == Mode::Strict && flow as usize != n_items {
            return None;
        }
        Some(-cost - bonus * flow)
    }
}

struct Edge {
    to: usize,
    cap: i64,
    cost: i64,
}

struct FlowGraph {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl FlowGraph {
    fn new(nodes: usize) -> Self {
        FlowGraph {
            edges: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: i64, cost: i64) {
        self.adj[from].push(self.edges.len());
        self.edges.push(Edge { to, cap, cost });
        self.adj[to].push(self.edges.len());
        self.edges.push(Edge {
            to: from,
            cap: 0,
            cost: -cost,
        });
    }

    /// Returns `(flow, cost)`. With `stop_when_nonnegative`, augmentation
    /// stops once the cheapest path no longer lowers the cost.
    fn min_cost_flow(&mut self, s: usize, t: usize, stop_when_nonnegative: bool) -> (i64, i64) {
        let n = self.adj.len();
        let (mut flow, mut cost) = (0i64, 0i64);
        loop {
            let mut dist = vec![i64::MAX; n];
            let mut via = vec![usize::MAX; n];
            dist[s] = 0;
            let mut changed = true;
            while changed {
                changed = false;
                for u in 0..n {
                    if dist[u] == i64::MAX {
                        continue;
                    }
                    for &e in &self.adj[u] {
                        let edge = &self.edges[e];
                        if edge.cap > 0 && dist[u] + edge.cost < dist[edge.to] {
                            dist[edge.to] = dist[u] + edge.cost;
                            via[edge.to] = e;
                            changed = true;
                        }
                    }
                }
            }
            if dist[t] == i64::MAX || (stop_when_nonnegative && dist[t] >= 0) {
                return (flow, cost);
            }
            let mut push = i64::MAX;
            let mut v = t;
            while v != s {
                let e = via[v];
                push = push.min(self.edges[e].cap);
                v = self.edges[e ^ 1].to;
            }
            let mut v = t;
            while v != s {
                let e = via[v];
                self.edges[e].cap -= push;
                self.edges[e ^ 1].cap += push;
                v = self.edges[e ^ 1].to;
            }
            flow += push;
            cost += push * dist[t];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    fn random_problem(rng: &mut SeededRng, mode: Mode) -> ResidualProblem {
        let items = 1 + rng.below(7) as usize;
        let slots = 1 + rng.below(4) as usize;
        let items = (0..items)
            .map(|_| Item {
                options: (0..slots)
                    .filter_map(|s| {
                        let w = rng.int_inclusive(0, 10);
                        (w > 0).then_some((s, w))
                    })
                    .collect(),
            })
            .collect();
        let capacity = (0..slots)
            .map(|_| match rng.below(4) {
                0 => None,
                k => Some(k as usize - 1),
            })
            .collect();
        ResidualProblem {
            items,
            capacity,
            mode,
        }
    }

    #[test]
    fn enumeration_and_flow_agree() {
        let mut rng = SeededRng::new(2024);
        for mode in [Mode::Relaxed, Mode::Strict] {
            for _ in 0..2000 {
                let p = random_problem(&mut rng, mode);
                assert_eq!(p.solve_enumeration(), p.solve_flow(), "{p:?}");
            }
        }
    }

    #[test]
    fn strict_infeasible_when_capacity_short() {
        let p = ResidualProblem {
            items: vec![
                Item {
                    options: vec![(0, 5)],
                },
                Item {
                    options: vec![(0, 3)],
                },
            ],
            capacity: vec![Some(1)],
            mode: Mode::Strict,
        };
        assert_eq!(p.solve_enumeration(), None);
        assert_eq!(p.solve_flow(), None);
        let relaxed = ResidualProblem {
            mode: Mode::Relaxed,
            ..p
        };
        assert_eq!(relaxed.solve_enumeration(), Some(5));
        assert_eq!(relaxed.solve_flow(), Some(5));
    }

    #[test]
    fn empty_residual_is_zero() {
        let p = ResidualProblem {
            items: vec![],
            capacity: vec![Some(0)],
            mode: Mode::Strict,
        };
        assert_eq!(p.solve(), Some(0));
    }
}
