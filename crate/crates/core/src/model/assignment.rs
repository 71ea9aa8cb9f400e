use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Instance, UeId};
use crate::error::ModelError;
use crate::score::Score;

/// Roles of every UE: leaders (`y_n = 1`), followers (`x_{m,n} = 1` iff
/// `follows[m] == n`) and isolated UEs with no role.
///
/// `leaders`, the keys of `follows` and `isolated` partition the regular
/// UEs. The edge server, when used, appears only in `leaders` and as a
/// follow target; an unused edge server appears nowhere.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    pub leaders: BTreeSet<UeId>,
    pub follows: BTreeMap<UeId, UeId>,
    pub isolated: BTreeSet<UeId>,
}

impl Assignment {
    /// Everyone isolated.
    pub fn all_isolated(inst: &Instance) -> Self {
        Assignment {
            isolated: inst.ues().collect(),
            ..Default::default()
        }
    }

    /// Builds an assignment from leaders and follow edges; every other
    /// regular UE is isolated.
    pub fn from_parts(
        inst: &Instance,
        leaders: impl IntoIterator<Item = u32>,
        follows: impl IntoIterator<Item = (u32, u32)>,
    ) -> Self {
        let leaders: BTreeSet<UeId> = leaders.into_iter().map(UeId).collect();
        let follows: BTreeMap<UeId, UeId> = follows
            .into_iter()
            .map(|(m, n)| (UeId(m), UeId(n)))
            .collect();
        let isolated = inst
            .ues()
            .filter(|id| !leaders.contains(id) && !follows.contains_key(id))
            .collect();
        Assignment {
            leaders,
            follows,
            isolated,
        }
    }

    pub fn role_of(&self, id: UeId) -> Option<Role> {
        if self.leaders.contains(&id) {
            Some(Role::Leader)
        } else if let Some(&n) = self.follows.get(&id) {
            Some(Role::Follower(n))
        } else if self.isolated.contains(&id) {
            Some(Role::Isolated)
        } else {
            None
        }
    }

    /// Followers grouped by leader.
    pub fn clusters(&self) -> BTreeMap<UeId, Vec<UeId>> {
        let mut out: BTreeMap<UeId, Vec<UeId>> =
            self.leaders.iter().map(|&l| (l, Vec::new())).collect();
        for (&m, &n) in &self.follows {
            out.entry(n).or_default().push(m);
        }
        out
    }

    pub fn leader_count(&self) -> usize {
        self.leaders.len()
    }

    /// Checks ids and the partition invariants.
    pub fn validate(&self, inst: &Instance) -> Result<(), ModelError> {
        let check = |id: UeId| {
            if inst.contains(id) {
                Ok(())
            } else {
                Err(ModelError::UnknownUe(id))
            }
        };
        for &id in self.leaders.iter().chain(&self.isolated) {
            check(id)?;
        }
        for (&m, &n) in &self.follows {
            check(m)?;
            check(n)?;
            if m == n {
                return Err(ModelError::InvalidAssignment(format!(
                    "UE {m} follows itself"
                )));
            }
            if m.is_edge() {
                return Err(ModelError::InvalidAssignment(
                    "the edge server cannot follow".into(),
                ));
            }
            if self.leaders.contains(&m) {
                return Err(ModelError::InvalidAssignment(format!(
                    "UE {m} is both leader and follower"
                )));
            }
        }
        if self.isolated.contains(&UeId::EDGE) {
            return Err(ModelError::InvalidAssignment(
                "the edge server cannot be isolated".into(),
            ));
        }
        for id in inst.ues() {
            let roles = usize::from(self.leaders.contains(&id))
                + usize::from(self.follows.contains_key(&id))
                + usize::from(self.isolated.contains(&id));
            if roles != 1 {
                return Err(ModelError::InvalidAssignment(format!(
                    "UE {id} has {roles} roles"
                )));
            }
        }
        Ok(())
    }

    /// Deterministic tie-break key: sorted leader ids, then for each regular
    /// UE in id order the id of its leader (`u32::MAX` for leaders and
    /// isolated UEs). Smaller wins.
    pub fn tie_key(&self, inst: &Instance) -> (Vec<u32>, Vec<u32>) {
        let leaders = self.leaders.iter().map(|id| id.0).collect();
        let targets = inst
            .ues()
            .map(|m| self.follows.get(&m).map_or(u32::MAX, |n| n.0))
            .collect();
        (leaders, targets)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Leader,
    Follower(UeId),
    Isolated,
}

/// Objective value: LII of every leader plus LXI of every follow edge.
pub fn utility(inst: &Instance, a: &Assignment) -> Result<Score, ModelError> {
    for &id in &a.leaders {
        if !inst.contains(id) {
            return Err(ModelError::UnknownUe(id));
        }
    }
    for (&m, &n) in &a.follows {
        if !inst.contains(m) {
            return Err(ModelError::UnknownUe(m));
        }
        if !inst.contains(n) {
            return Err(ModelError::UnknownUe(n));
        }
    }
    for &id in &a.isolated {
        if !inst.contains(id) {
            return Err(ModelError::UnknownUe(id));
        }
    }
    let leaders: Score = a.leaders.iter().map(|&n| inst.lii(n)).sum();
    let edges: Score = a.follows.iter().map(|(&m, &n)| inst.lxi(m, n)).sum();
    Ok(leaders + edges)
}
