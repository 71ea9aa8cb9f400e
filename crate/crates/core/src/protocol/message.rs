use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::UeId;
use crate::score::Score;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Phase {
    One,
    Two,
}

impl From<Phase> for u8 {
    fn from(p: Phase) -> u8 {
        match p {
            Phase::One => 1,
            Phase::Two => 2,
        }
    }
}

impl TryFrom<u8> for Phase {
    type Error = String;
    fn try_from(v: u8) -> Result<Self, String> {
        match v {
            1 => Ok(Phase::One),
            2 => Ok(Phase::Two),
            other => Err(format!("no phase {other}")),
        }
    }
}

#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Transport {
    /// One transmission reaches every UE.
    #[default]
    Broadcast,
    /// Every transmission has exactly one recipient.
    P2p,
}

impl fmt::Display for Transport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Transport::Broadcast => "broadcast",
            Transport::P2p => "p2p",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Payload {
    AnnounceLii { sender: UeId, lii: Score },
    FollowRequest { follower: UeId, leader: UeId },
    Ack { leader: UeId, follower: UeId },
    Nack { leader: UeId, follower: UeId },
    Phase2Announce { sender: UeId, lii: Score },
}

impl Payload {
    pub fn sender(&self) -> UeId {
        match *self {
            Payload::AnnounceLii { sender, .. } | Payload::Phase2Announce { sender, .. } => sender,
            Payload::FollowRequest { follower, .. } => follower,
            Payload::Ack { leader, .. } | Payload::Nack { leader, .. } => leader,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Payload::AnnounceLii { .. } => "AnnounceLii",
            Payload::FollowRequest { .. } => "FollowRequest",
            Payload::Ack { .. } => "Ack",
            Payload::Nack { .. } => "Nack",
            Payload::Phase2Announce { .. } => "Phase2Announce",
        }
    }
}

/// One transmission. A broadcast has `to == None`; a point-to-point
/// transmission names its recipient.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Message {
    pub round: u32,
    pub phase: Phase,
    pub transport: Transport,
    pub to: Option<UeId>,
    #[serde(flatten)]
    pub payload: Payload,
}

impl Message {
    pub(crate) fn unicast(phase: Phase, to: UeId, payload: Payload) -> Self {
        Message {
            round: 0,
            phase,
            transport: Transport::P2p,
            to: Some(to),
            payload,
        }
    }

    pub(crate) fn broadcast(phase: Phase, payload: Payload) -> Self {
        Message {
            round: 0,
            phase,
            transport: Transport::Broadcast,
            to: None,
            payload,
        }
    }
}

/// Transmission counts by phase and by transport.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageCounts {
    pub phase1: usize,
    pub phase2: usize,
    pub broadcast: usize,
    pub p2p: usize,
    pub total: usize,
}

impl MessageCounts {
    pub fn from_log(log: &[Message]) -> Self {
        let mut c = MessageCounts::default();
        for m in log {
            match m.phase {
                Phase::One => c.phase1 += 1,
                Phase::Two => c.phase2 += 1,
            }
            match m.transport {
                Transport::Broadcast => c.broadcast += 1,
                Transport::P2p => c.p2p += 1,
            }
            c.total += 1;
        }
        c
    }
}

/// Writes one JSON object per line.
pub fn write_jsonl<W: std::io::Write>(log: &[Message], mut out: W) -> std::io::Result<()> {
    for m in log {
        serde_json::to_writer(&mut out, m)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
