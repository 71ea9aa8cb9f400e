//! The two-phase distributed algorithm.
//!
//! Phase 1: UEs above the threshold announce their LII; the others request
//! their best candidate by LI score and are acknowledged (or refused when a
//! leader is full). Phase 2: leaders that gained followers re-announce and
//! candidates left without followers join one of them. UEs that end up with
//! no leader are offered the edge server.

mod config;
mod message;
mod node;
mod simulator;

pub use config::{DeliveryOrder, EdgeServerPolicy, IncentivePolicy, ProtocolConfig, Timer};
pub use message::{write_jsonl, Message, MessageCounts, Payload, Phase, Transport};
pub use node::{rank_candidates, Event, LocalView, NodeRole, NodeState};
pub use simulator::{
    apply_incentive, choose_leader, partition, run_episode, run_fallback_process, EpisodeOutcome,
    FallbackResult, Scenario,
};
