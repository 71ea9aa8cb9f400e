//! Episode runner: owns every node, delivers messages in barrier-separated
//! rounds and applies the edge-server and incentive fallbacks.

use std::collections::BTreeSet;

use serde::{Serialize, Serializer};

use super::node::{rank_candidates, Event, LocalView, NodeRole, NodeState};
use super::{
    DeliveryOrder, EdgeServerPolicy, IncentivePolicy, Message, MessageCounts, Payload, Phase,
    ProtocolConfig,
};
use crate::error::ProtocolError;
use crate::model::{
    feasibility_scan, utility, Assignment, EdgeServerSpec, FeasibilityReport, Instance, UeId,
};
use crate::rng::{derive_seed, SeededRng};
use crate::score::{Score, Threshold};

/// Marginal regime detected after phase 1.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub enum Scenario {
    #[default]
    None,
    /// Every UE is a candidate leader, so nobody follows.
    Scenario1,
    /// Every follower refuses every candidate leader.
    Scenario2,
    /// No UE is above the threshold.
    Scenario3,
}

#[derive(Clone, Debug, Serialize)]
pub struct EpisodeOutcome {
    pub assignment: Assignment,
    pub utility: Score,
    #[serde(skip)]
    pub messages: Vec<Message>,
    pub counts: MessageCounts,
    pub scenario: Scenario,
    pub edge_server_used: bool,
    pub rounds: u32,
    /// Candidate leaders |𝓛| of the run that produced the assignment.
    pub candidate_leaders: usize,
    /// Messages a centralized controller would need (N + 1).
    pub centralized_messages: usize,
    pub feasibility: FeasibilityReport,
    #[serde(serialize_with = "display_opt")]
    pub fallback_error: Option<ProtocolError>,
    pub incentive_accepted: BTreeSet<UeId>,
    /// Instance the utility was computed on when it differs from the input
    /// (edge server attached or LII boosted).
    #[serde(skip)]
    pub effective_instance: Option<Instance>,
    pub capacitated: bool,
}

impl EpisodeOutcome {
    /// Instance the assignment refers to.
    pub fn instance<'a>(&'a self, input: &'a Instance) -> &'a Instance {
        self.effective_instance.as_ref().unwrap_or(input)
    }

    /// Every regular UE ended isolated.
    pub fn all_isolated(&self) -> bool {
        self.assignment.leaders.is_empty()
    }
}

fn display_opt<S: Serializer>(e: &Option<ProtocolError>, s: S) -> Result<S::Ok, S::Error> {
    match e {
        Some(e) => s.serialize_some(&e.to_string()),
        None => s.serialize_none(),
    }
}

/// Splits the regular UEs into candidate leaders (`LII > ρ`) and followers.
pub fn partition(inst: &Instance, rho: Threshold) -> (Vec<UeId>, Vec<UeId>) {
    inst.ues().partition(|&n| rho.admits(inst.lii(n)))
}

/// Best leader for `m` among `candidates` by LI score; `None` when `m`
/// refuses all of them.
pub fn choose_leader(m: UeId, candidates: &[UeId], inst: &Instance) -> Option<UeId> {
    let row = lxi_row(inst, m);
    let announced = candidates
        .iter()
        .filter(|&&n| n != m)
        .map(|&n| (n, inst.lii(n)));
    rank_candidates(&row, announced).first().map(|&(n, _)| n)
}

fn lxi_row(inst: &Instance, m: UeId) -> Vec<Score> {
    let mut row = vec![Score::from_int(0); inst.n() + 1];
    for n in inst.nodes() {
        if n != m {
            row[n.index()] = inst.lxi(m, n);
        }
    }
    row
}

struct Run {
    nodes: Vec<NodeState>,
    candidates: usize,
    followers: usize,
}

struct Sim<'a> {
    inst: &'a Instance,
    cfg: &'a ProtocolConfig,
    /// Dense LXI matrix, one row of `n + 1` entries per node id.
    lxi: Vec<Score>,
    nodes: Vec<NodeState>,
    log: Vec<Message>,
    round: u32,
    pending: Vec<Message>,
    out: Vec<Message>,
    order_seed: Option<u64>,
}

/// Permutes the follow requests of a batch among their own slots. Only their
/// relative order affects capacity decisions, so other traffic keeps its
/// place and does not consume draws.
fn shuffle_requests(batch: &mut [Message], seed: u64) {
    let slots: Vec<usize> = batch
        .iter()
        .enumerate()
        .filter(|(_, m)| matches!(m.payload, Payload::FollowRequest { .. }))
        .map(|(i, _)| i)
        .collect();
    if slots.len() < 2 {
        return;
    }
    let mut order = slots.clone();
    SeededRng::new(seed).shuffle(&mut order);
    let picked: Vec<Message> = order.iter().map(|&i| batch[i].clone()).collect();
    for (slot, msg) in slots.into_iter().zip(picked) {
        batch[slot] = msg;
    }
}

impl<'a> Sim<'a> {
    fn new(inst: &'a Instance, cfg: &'a ProtocolConfig, seed: u64, round: u32) -> Self {
        let w = inst.n() + 1;
        let mut lxi = vec![Score::from_int(0); w * w];
        for m in inst.ues() {
            for n in inst.nodes() {
                if n != m {
                    lxi[m.index() * w + n.index()] = inst.lxi(m, n);
                }
            }
        }
        let nodes = inst
            .ues()
            .map(|id| NodeState::new(id, inst.n(), cfg.caps.as_ref().and_then(|c| c.limit(id))))
            .collect();
        let order_seed =
            (cfg.caps.is_some() && cfg.delivery == DeliveryOrder::Random).then_some(seed);
        Sim {
            inst,
            cfg,
            lxi,
            nodes,
            log: Vec::with_capacity(4 * w),
            round,
            pending: Vec::with_capacity(w),
            out: Vec::with_capacity(w),
            order_seed,
        }
    }

    fn step(&mut self, i: usize, event: &Event) -> Result<(), ProtocolError> {
        let w = self.inst.n() + 1;
        let id = self.nodes[i].id;
        let view = LocalView {
            id,
            lii: self.inst.lii(id),
            lxi_row: &self.lxi[id.index() * w..(id.index() + 1) * w],
            n: self.inst.n(),
        };
        self.nodes[i].on_event(event, self.cfg, &view, &mut self.out)?;
        for mut m in self.out.drain(..) {
            m.round = self.round;
            self.log.push(m.clone());
            self.pending.push(m);
        }
        Ok(())
    }

    /// Applies `event` to every node in id order.
    fn all(&mut self, event: &Event) -> Result<(), ProtocolError> {
        for i in 0..self.nodes.len() {
            self.step(i, event)?;
        }
        Ok(())
    }

    /// Delivers rounds until nothing is in flight.
    fn drain(&mut self) -> Result<(), ProtocolError> {
        let mut batch = Vec::with_capacity(self.pending.capacity());
        while !self.pending.is_empty() {
            self.round += 1;
            std::mem::swap(&mut batch, &mut self.pending);
            if let Some(seed) = self.order_seed {
                shuffle_requests(&mut batch, derive_seed(seed, &[1, u64::from(self.round)]));
            }
            for msg in batch.drain(..) {
                let sender = msg.payload.sender();
                let to = msg.to;
                let event = Event::Deliver(msg);
                match to {
                    Some(to) => self.step(to.index() - 1, &event)?,
                    None => {
                        for i in 0..self.nodes.len() {
                            if self.nodes[i].id != sender {
                                self.step(i, &event)?;
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn run(mut self) -> Result<(Run, Vec<Message>, u32), ProtocolError> {
        let (l, f) = partition(self.inst, self.cfg.rho);
        self.all(&Event::Start)?;
        self.drain()?;
        self.all(&Event::PhaseStart(Phase::One))?;
        self.drain()?;
        self.round += 1;
        self.all(&Event::TimerExpired)?;
        self.drain()?;
        self.all(&Event::PhaseStart(Phase::Two))?;
        self.drain()?;
        let run = Run {
            nodes: self.nodes,
            candidates: l.len(),
            followers: f.len(),
        };
        Ok((run, self.log, self.round))
    }
}

fn classify(inst: &Instance, rho: Threshold, run: &Run) -> Scenario {
    if run.candidates == 0 {
        return Scenario::Scenario3;
    }
    if run.followers == 0 {
        return Scenario::Scenario1;
    }
    let (l, f) = partition(inst, rho);
    if f.iter()
        .all(|&m| l.iter().all(|&n| inst.lxi(m, n).is_zero()))
    {
        return Scenario::Scenario2;
    }
    Scenario::None
}

/// Raises the LII of accepting UEs by `delta`. Returns the boosted
/// instance and the accepting UEs, or `None` when nobody accepted.
pub fn apply_incentive(
    inst: &Instance,
    policy: &IncentivePolicy,
    rng: &mut SeededRng,
) -> Option<(Instance, BTreeSet<UeId>)> {
    let IncentivePolicy::Boost { delta, accept_prob } = *policy else {
        return None;
    };
    let mut accepted = BTreeSet::new();
    let mut lii = inst.ue_liis().to_vec();
    for m in inst.ues() {
        if rng.bernoulli(accept_prob) {
            accepted.insert(m);
            let v = &mut lii[m.index() - 1];
            *v = (*v + delta).clamp_to_range();
        }
    }
    if accepted.is_empty() {
        return None;
    }
    let boosted = inst.with_lii(&lii).expect("boosted scores stay in range");
    Some((boosted, accepted))
}

/// Result of offering the edge server to unresolved UEs.
#[derive(Clone, Debug, PartialEq)]
pub struct FallbackResult {
    /// Instance with node 0, when one had to be attached.
    pub attached: Option<Instance>,
    pub edge_server_used: bool,
    pub error: Option<ProtocolError>,
}

/// Offers node 0 to each unresolved UE in id order. A UE accepts iff its
/// LXI toward node 0 is positive and node 0 still has capacity; everyone
/// else ends isolated.
pub fn run_fallback_process(
    inst: &Instance,
    cfg: &ProtocolConfig,
    unresolved: &BTreeSet<UeId>,
    assignment: &mut Assignment,
) -> FallbackResult {
    let mut result = FallbackResult {
        attached: None,
        edge_server_used: false,
        error: None,
    };
    if unresolved.is_empty() {
        return result;
    }
    let EdgeServerPolicy::Enabled { lii0, default_lxi } = cfg.edge_server else {
        assignment.isolated.extend(unresolved.iter().copied());
        result.error = Some(ProtocolError::EdgeServerUnavailable(unresolved.len()));
        return result;
    };
    let target = if inst.has_edge_server() {
        inst
    } else {
        let spec = EdgeServerSpec {
            lii0,
            lxi_to_edge: vec![default_lxi; inst.n()],
        };
        result.attached = Some(inst.attach_edge_server(&spec).expect("validated policy"));
        result.attached.as_ref().unwrap()
    };
    let mut room = cfg.caps.as_ref().and_then(|c| c.limit(UeId::EDGE));
    for &m in unresolved {
        let fits = room.map_or(true, |r| r > 0);
        if fits && target.lxi(m, UeId::EDGE).is_positive() {
            assignment.follows.insert(m, UeId::EDGE);
            if let Some(r) = room.as_mut() {
                *r -= 1;
            }
            result.edge_server_used = true;
        } else {
            assignment.isolated.insert(m);
        }
    }
    if result.edge_server_used {
        assignment.leaders.insert(UeId::EDGE);
    } else {
        result.attached = None;
    }
    result
}

/// Runs one episode of the two-phase algorithm followed by the fallback
/// process. Deterministic in `(inst, cfg, seed)`.
pub fn run_episode(
    inst: &Instance,
    cfg: &ProtocolConfig,
    seed: u64,
) -> Result<EpisodeOutcome, ProtocolError> {
    cfg.validate()?;
    let feasibility = feasibility_scan(inst, cfg.rho);

    let (mut run, mut messages, mut rounds) = Sim::new(inst, cfg, seed, 0).run()?;
    let scenario = classify(inst, cfg.rho, &run);

    let mut boosted: Option<Instance> = None;
    let mut incentive_accepted = BTreeSet::new();
    if scenario == Scenario::Scenario3 {
        let mut rng = SeededRng::new(derive_seed(seed, &[2]));
        if let Some((b, accepted)) = apply_incentive(inst, &cfg.incentive, &mut rng) {
            incentive_accepted = accepted;
            if b.ue_liis().iter().any(|&v| cfg.rho.admits(v)) {
                let (r, log, end) = Sim::new(&b, cfg, seed, rounds + 1).run()?;
                run = r;
                messages.extend(log);
                rounds = end;
            }
            boosted = Some(b);
        }
    }
    let working = boosted.as_ref().unwrap_or(inst);

    let mut assignment = Assignment::default();
    let mut unresolved = BTreeSet::new();
    for node in &mut run.nodes {
        match node.role {
            NodeRole::LeaderWithFollowers => {
                assignment.leaders.insert(node.id);
            }
            NodeRole::AssignedFollower => {
                assignment
                    .follows
                    .insert(node.id, node.leader.expect("assigned"));
            }
            _ => {
                unresolved.insert(node.id);
            }
        }
    }
    let fallback = run_fallback_process(working, cfg, &unresolved, &mut assignment);
    for node in &mut run.nodes {
        if unresolved.contains(&node.id) {
            match assignment.follows.get(&node.id) {
                Some(&edge) => node.finalize(NodeRole::AssignedFollower, Some(edge)),
                None => node.finalize(NodeRole::Isolated, None),
            }
        }
    }

    let effective = fallback.attached.or(boosted);
    let eval = effective.as_ref().unwrap_or(inst);
    let utility = utility(eval, &assignment)?;
    Ok(EpisodeOutcome {
        assignment,
        utility,
        counts: MessageCounts::from_log(&messages),
        messages,
        scenario,
        edge_server_used: fallback.edge_server_used,
        rounds,
        candidate_leaders: run.candidates,
        centralized_messages: inst.n() + 1,
        feasibility,
        fallback_error: fallback.error,
        incentive_accepted,
        effective_instance: effective,
        capacitated: cfg.caps.is_some(),
    })
}
