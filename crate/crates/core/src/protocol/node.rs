//! Per-UE state machine.
//!
//! A node only sees its own LII, its own row of LXI values and whatever
//! announcements reach it. Role changes:
//!
//! ```text
//! CandidateLeader -> LeaderWithFollowers | IsolatedLeader   (timer)
//! IsolatedLeader  -> AssignedFollower | Isolated            (phase 2 / fallback)
//! Follower        -> AssignedFollower | Isolated            (ack / fallback)
//! ```

use std::fmt;

use serde::Serialize;

use super::{Message, Payload, Phase, ProtocolConfig, Transport};
use crate::error::ProtocolError;
use crate::model::UeId;
use crate::score::Score;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum NodeRole {
    CandidateLeader,
    Follower,
    LeaderWithFollowers,
    IsolatedLeader,
    AssignedFollower,
    Isolated,
}

impl NodeRole {
    pub fn name(self) -> &'static str {
        match self {
            NodeRole::CandidateLeader => "CandidateLeader",
            NodeRole::Follower => "Follower",
            NodeRole::LeaderWithFollowers => "LeaderWithFollowers",
            NodeRole::IsolatedLeader => "IsolatedLeader",
            NodeRole::AssignedFollower => "AssignedFollower",
            NodeRole::Isolated => "Isolated",
        }
    }

    /// Whether `self -> next` is an allowed transition.
    pub fn can_become(self, next: NodeRole) -> bool {
        use NodeRole::*;
        matches!(
            (self, next),
            (CandidateLeader, LeaderWithFollowers)
                | (CandidateLeader, IsolatedLeader)
                | (IsolatedLeader, AssignedFollower)
                | (IsolatedLeader, Isolated)
                | (Follower, AssignedFollower)
                | (Follower, Isolated)
        )
    }
}

impl fmt::Display for NodeRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What a node knows about itself.
#[derive(Clone, Copy, Debug)]
pub struct LocalView<'a> {
    pub id: UeId,
    pub lii: Score,
    /// LXI from this node toward every node id (slot 0 is the edge server).
    pub lxi_row: &'a [Score],
    /// Number of regular UEs; peers are `1..=n` minus `id`.
    pub n: usize,
}

impl LocalView<'_> {
    pub fn peers(&self) -> impl Iterator<Item = UeId> + '_ {
        (1..=self.n as u32).map(UeId).filter(move |&p| p != self.id)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Event {
    /// Initialization: announce LII when above the threshold.
    Start,
    /// Steps 1-1 to 1-3 in phase 1, step 2-2 in phase 2.
    PhaseStart(Phase),
    /// End of the phase-1 window; leaders with followers re-announce.
    TimerExpired,
    Deliver(Message),
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Start => f.write_str("Start"),
            Event::PhaseStart(p) => write!(f, "PhaseStart({})", u8::from(*p)),
            Event::TimerExpired => f.write_str("TimerExpired"),
            Event::Deliver(m) => write!(f, "{} from UE {}", m.payload.name(), m.payload.sender()),
        }
    }
}

/// Orders candidate leaders by LI score, highest first, ties to the lowest
/// id. Candidates with zero LXI are refused and dropped.
pub fn rank_candidates(
    lxi_row: &[Score],
    announced: impl IntoIterator<Item = (UeId, Score)>,
) -> Vec<(UeId, Score)> {
    let mut ranked: Vec<(UeId, Score)> = announced
        .into_iter()
        .filter(|&(n, _)| lxi_row[n.index()].is_positive())
        .map(|(n, lii)| (n, lii + lxi_row[n.index()]))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked
}

#[derive(Clone, Debug, Serialize)]
pub struct NodeState {
    pub id: UeId,
    pub role: NodeRole,
    /// Phase-1 announcements received, in arrival order (this node first
    /// if it announced).
    pub known_liis: Vec<(UeId, Score)>,
    /// Phase-2 re-announcements received.
    pub phase2_liis: Vec<(UeId, Score)>,
    /// Candidates not yet tried, best first.
    pub leader_candidates: Vec<(UeId, Score)>,
    /// Accepted followers in acceptance order.
    pub followers: Vec<UeId>,
    pub capacity_remaining: Option<usize>,
    /// Outstanding follow request.
    pub pending: Option<UeId>,
    pub leader: Option<UeId>,
    /// Every leader this node was refused by, in order.
    pub nacked_by: Vec<UeId>,
}

impl NodeState {
    /// Fresh node in a network of `n` UEs.
    pub fn new(id: UeId, n: usize, capacity: Option<usize>) -> Self {
        NodeState {
            id,
            role: NodeRole::Follower,
            known_liis: Vec::with_capacity(n),
            phase2_liis: Vec::new(),
            leader_candidates: Vec::new(),
            followers: Vec::new(),
            capacity_remaining: capacity,
            pending: None,
            leader: None,
            nacked_by: Vec::new(),
        }
    }

    /// Still looking for a leader with nobody left to ask.
    pub fn is_unresolved(&self) -> bool {
        matches!(self.role, NodeRole::Follower | NodeRole::IsolatedLeader)
            && self.pending.is_none()
            && self.leader_candidates.is_empty()
    }

    fn set_role(&mut self, next: NodeRole) {
        debug_assert!(self.role.can_become(next), "{} -> {}", self.role, next);
        self.role = next;
    }

    pub(crate) fn finalize(&mut self, next: NodeRole, leader: Option<UeId>) {
        self.set_role(next);
        self.leader = leader;
    }

    fn violation(&self, event: &Event) -> ProtocolError {
        ProtocolError::ProtocolViolation {
            node: self.id,
            role: self.role.name(),
            event: event.to_string(),
        }
    }

    /// Advances the state machine by one event, appending the messages it
    /// emits to `out` (round numbers are stamped by the simulator).
    pub fn on_event(
        &mut self,
        event: &Event,
        cfg: &ProtocolConfig,
        view: &LocalView,
        out: &mut Vec<Message>,
    ) -> Result<(), ProtocolError> {
        match event {
            Event::Start => {
                if cfg.rho.admits(view.lii) {
                    self.role = NodeRole::CandidateLeader;
                    self.known_liis.push((self.id, view.lii));
                    let payload = Payload::AnnounceLii {
                        sender: self.id,
                        lii: view.lii,
                    };
                    fan_out(cfg.transport, Phase::One, payload, view.peers(), out);
                }
                Ok(())
            }

            Event::PhaseStart(Phase::One) => match self.role {
                NodeRole::Follower => {
                    self.leader_candidates =
                        rank_candidates(view.lxi_row, self.known_liis.iter().copied());
                    self.request_next(Phase::One, out);
                    Ok(())
                }
                NodeRole::CandidateLeader => Ok(()),
                _ => Err(self.violation(event)),
            },

            Event::TimerExpired => match self.role {
                NodeRole::CandidateLeader if !self.followers.is_empty() => {
                    self.set_role(NodeRole::LeaderWithFollowers);
                    let payload = Payload::Phase2Announce {
                        sender: self.id,
                        lii: view.lii,
                    };
                    // Point-to-point re-announcements go to the other
                    // phase-1 candidates only.
                    let id = self.id;
                    let others = self.known_liis.iter().map(|&(k, _)| k).filter(|&k| k != id);
                    fan_out(cfg.transport, Phase::Two, payload, others, out);
                    Ok(())
                }
                NodeRole::CandidateLeader => {
                    self.set_role(NodeRole::IsolatedLeader);
                    Ok(())
                }
                _ => Ok(()),
            },

            Event::PhaseStart(Phase::Two) => {
                if self.role == NodeRole::IsolatedLeader {
                    self.leader_candidates =
                        rank_candidates(view.lxi_row, self.phase2_liis.iter().copied());
                    self.request_next(Phase::Two, out);
                }
                Ok(())
            }

            Event::Deliver(msg) => self.on_message(event, msg, out),
        }
    }

    fn on_message(
        &mut self,
        event: &Event,
        msg: &Message,
        out: &mut Vec<Message>,
    ) -> Result<(), ProtocolError> {
        if let Some(to) = msg.to {
            if to != self.id {
                return Err(self.violation(event));
            }
        }
        match msg.payload {
            Payload::AnnounceLii { sender, lii } => match self.role {
                NodeRole::Follower | NodeRole::CandidateLeader if msg.phase == Phase::One => {
                    self.known_liis.push((sender, lii));
                    Ok(())
                }
                _ => Err(self.violation(event)),
            },

            Payload::Phase2Announce { sender, lii } => {
                if self.role == NodeRole::IsolatedLeader {
                    self.phase2_liis.push((sender, lii));
                }
                // Everyone else hears broadcasts and ignores them.
                Ok(())
            }

            Payload::FollowRequest { follower, leader } => {
                let accepting = matches!(
                    (self.role, msg.phase),
                    (NodeRole::CandidateLeader, Phase::One)
                        | (NodeRole::LeaderWithFollowers, Phase::Two)
                );
                if leader != self.id || !accepting {
                    return Err(self.violation(event));
                }
                let reply = if self.capacity_remaining == Some(0) {
                    Payload::Nack { leader, follower }
                } else {
                    self.followers.push(follower);
                    if let Some(c) = self.capacity_remaining.as_mut() {
                        *c -= 1;
                    }
                    Payload::Ack { leader, follower }
                };
                out.push(Message::unicast(msg.phase, follower, reply));
                Ok(())
            }

            Payload::Ack { leader, follower } => {
                if follower != self.id || self.pending != Some(leader) {
                    return Err(self.violation(event));
                }
                self.pending = None;
                self.leader_candidates.clear();
                self.finalize(NodeRole::AssignedFollower, Some(leader));
                Ok(())
            }

            Payload::Nack { leader, follower } => {
                if follower != self.id || self.pending != Some(leader) {
                    return Err(self.violation(event));
                }
                self.pending = None;
                self.nacked_by.push(leader);
                self.request_next(msg.phase, out);
                Ok(())
            }
        }
    }

    /// Sends a request to the best untried candidate, if any.
    fn request_next(&mut self, phase: Phase, out: &mut Vec<Message>) {
        if self.leader_candidates.is_empty() {
            return;
        }
        let (leader, _) = self.leader_candidates.remove(0);
        self.pending = Some(leader);
        out.push(Message::unicast(
            phase,
            leader,
            Payload::FollowRequest {
                follower: self.id,
                leader,
            },
        ));
    }
}

fn fan_out(
    transport: Transport,
    phase: Phase,
    payload: Payload,
    recipients: impl Iterator<Item = UeId>,
    out: &mut Vec<Message>,
) {
    match transport {
        Transport::Broadcast => out.push(Message::broadcast(phase, payload)),
        Transport::P2p => {
            out.extend(recipients.map(|to| Message::unicast(phase, to, payload.clone())))
        }
    }
}
