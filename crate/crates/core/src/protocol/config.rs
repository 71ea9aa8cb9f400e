use serde::{Deserialize, Serialize};

use super::Transport;
use crate::error::ModelError;
use crate::model::{Capacities, EdgeServerSpec};
use crate::score::{Score, Threshold};

/// How the phase-1 timer is modeled. Only a synchronous barrier is
/// supported: every request and response of a phase is delivered before
/// the timer fires.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Timer {
    #[default]
    Barrier,
}

/// Arrival order of follow requests within a round. Leaders serve first
/// come first served, so this matters only under capacity limits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeliveryOrder {
    /// Seeded random permutation.
    #[default]
    Random,
    Ascending,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "policy")]
pub enum EdgeServerPolicy {
    #[default]
    Disabled,
    /// Offer node 0 to unresolved UEs. Instances without a node 0 get one
    /// with these parameters.
    Enabled { lii0: Score, default_lxi: Score },
}

impl EdgeServerPolicy {
    pub fn enabled_default() -> Self {
        EdgeServerPolicy::Enabled {
            lii0: EdgeServerSpec::DEFAULT_LII,
            default_lxi: EdgeServerSpec::DEFAULT_LXI,
        }
    }

    pub fn is_enabled(&self) -> bool {
        matches!(self, EdgeServerPolicy::Enabled { .. })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "policy")]
pub enum IncentivePolicy {
    #[default]
    None,
    /// Each UE independently accepts with `accept_prob`; accepting UEs have
    /// their LII raised by `delta`, clipped to 10.
    Boost { delta: Score, accept_prob: f64 },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub rho: Threshold,
    pub timer: Timer,
    pub transport: Transport,
    pub caps: Option<Capacities>,
    pub edge_server: EdgeServerPolicy,
    pub incentive: IncentivePolicy,
    pub delivery: DeliveryOrder,
}

impl ProtocolConfig {
    pub fn new(rho: Threshold) -> Self {
        ProtocolConfig {
            rho,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if let IncentivePolicy::Boost { delta, accept_prob } = self.incentive {
            if !delta.in_unit_range() {
                return Err(ModelError::invalid(
                    "incentive.delta",
                    "must lie in [0, 10]",
                ));
            }
            if !(0.0..=1.0).contains(&accept_prob) {
                return Err(ModelError::invalid(
                    "incentive.accept_prob",
                    "must lie in [0, 1]",
                ));
            }
        }
        if let EdgeServerPolicy::Enabled { lii0, default_lxi } = self.edge_server {
            if !lii0.is_positive() || !lii0.in_unit_range() {
                return Err(ModelError::invalid(
                    "edge_server.lii0",
                    "must lie in (0, 10]",
                ));
            }
            if !default_lxi.in_unit_range() {
                return Err(ModelError::invalid(
                    "edge_server.default_lxi",
                    "must lie in [0, 10]",
                ));
            }
        }
        Ok(())
    }
}
