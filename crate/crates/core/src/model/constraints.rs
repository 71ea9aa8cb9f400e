use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Assignment, Instance, UeId};
use crate::error::ModelError;
use crate::score::{Score, Threshold};

/// Whether isolated UEs are admissible.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Every UE must lead or follow.
    Strict,
    /// Isolated UEs are allowed and contribute nothing.
    #[default]
    Relaxed,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Strict => "strict",
            Mode::Relaxed => "relaxed",
        })
    }
}

/// Per-UE follower limits `N_n^Lim`. UEs without an entry are unlimited.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Capacities(BTreeMap<UeId, usize>);

impl Capacities {
    pub fn new(limits: BTreeMap<UeId, usize>) -> Self {
        Capacities(limits)
    }

    /// Same limit for every node of `inst`, the edge server included.
    pub fn uniform(inst: &Instance, limit: usize) -> Self {
        Capacities(inst.nodes().map(|id| (id, limit)).collect())
    }

    pub fn limit(&self, id: UeId) -> Option<usize> {
        self.0.get(&id).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (UeId, usize)> + '_ {
        self.0.iter().map(|(&k, &v)| (k, v))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ConstraintId {
    /// Exactly one role per UE.
    C1,
    /// Leaders have at least one follower; non-leaders have none.
    C2,
    /// Leaders have LII above the threshold.
    C3,
    /// Follower count within `N_n^Lim`.
    Capacity,
    /// Follow edges need positive LXI.
    Eligibility,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub c1_ok: bool,
    pub c2_ok: bool,
    pub c3_ok: bool,
    pub capacity_ok: bool,
    pub eligibility_ok: bool,
    pub violators: Vec<(ConstraintId, UeId)>,
    /// Isolated UEs. In relaxed mode these are not C1 violations.
    pub isolated: Vec<UeId>,
}

impl ConstraintReport {
    /// C1, C2, C3 and the capacity limit all hold.
    pub fn all_ok(&self) -> bool {
        self.c1_ok && self.c2_ok && self.c3_ok && self.capacity_ok
    }
}

/// Evaluates C1-C3, the capacity limit and the positive-LXI rule.
///
/// The edge server is exempt from C3: it is a network-provided fallback and
/// the threshold is agreed among UEs only.
pub fn check_constraints(
    inst: &Instance,
    a: &Assignment,
    rho: Threshold,
    caps: Option<&Capacities>,
    mode: Mode,
) -> Result<ConstraintReport, ModelError> {
    a.validate(inst)?;
    let mut violators = Vec::new();

    if mode == Mode::Strict {
        violators.extend(a.isolated.iter().map(|&id| (ConstraintId::C1, id)));
    }

    let mut counts: BTreeMap<UeId, usize> = BTreeMap::new();
    for (&m, &n) in &a.follows {
        *counts.entry(n).or_default() += 1;
        if !inst.lxi(m, n).is_positive() {
            violators.push((ConstraintId::Eligibility, m));
        }
    }
    for &l in &a.leaders {
        if counts.get(&l).copied().unwrap_or(0) == 0 {
            violators.push((ConstraintId::C2, l));
        }
        if !l.is_edge() && !rho.admits(inst.lii(l)) {
            violators.push((ConstraintId::C3, l));
        }
    }
    for (&n, &count) in &counts {
        if !a.leaders.contains(&n) {
            violators.push((ConstraintId::C2, n));
        } else if let Some(limit) = caps.and_then(|c| c.limit(n)) {
            if count > limit {
                violators.push((ConstraintId::Capacity, n));
            }
        }
    }
    violators.sort();

    let ok = |id: ConstraintId| !violators.iter().any(|&(c, _)| c == id);
    Ok(ConstraintReport {
        c1_ok: ok(ConstraintId::C1),
        c2_ok: ok(ConstraintId::C2),
        c3_ok: ok(ConstraintId::C3),
        capacity_ok: ok(ConstraintId::Capacity),
        eligibility_ok: ok(ConstraintId::Eligibility),
        isolated: a.isolated.iter().copied().collect(),
        violators,
    })
}

/// Ranking score a follower `m` gives candidate leader `n`:
/// `LII_n + LXI_{m,n}`.
pub fn li_score(inst: &Instance, m: UeId, n: UeId) -> Result<Score, ModelError> {
    if m == n {
        return Err(ModelError::SelfPair(m));
    }
    for id in [m, n] {
        if !inst.contains(id) {
            return Err(ModelError::UnknownUe(id));
        }
    }
    Ok(inst.lii(n) + inst.lxi(m, n))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// No UE has a positive LII.
    pub case1: bool,
    /// UEs that can neither lead nor find a leader.
    pub case2_isolated: BTreeSet<UeId>,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        !self.case1 && self.case2_isolated.is_empty()
    }
}

/// Scans the regular UEs for the two infeasibility cases.
///
/// UE `m` is isolated when `LII_m <= ρ` and `Σ_{n≠m} LXI_{m,n}·LII_n = 0`.
/// The edge server is not considered; it is the remedy, not part of the
/// diagnosis.
pub fn feasibility_scan(inst: &Instance, rho: Threshold) -> FeasibilityReport {
    let case1 = inst.ue_liis().iter().all(|v| v.is_zero());
    let case2_isolated = inst
        .ues()
        .filter(|&m| {
            !rho.admits(inst.lii(m))
                && inst
                    .ues()
                    .filter(|&n| n != m)
                    .all(|n| inst.lxi(m, n).is_zero() || inst.lii(n).is_zero())
        })
        .collect();
    FeasibilityReport {
        case1,
        case2_isolated,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::generate_instance;
    use proptest::prelude::*;

    fn instance_a() -> Instance {
        Instance::from_ints(&[7, 2, 5], &[[0, 3, 8], [6, 0, 2], [4, 9, 0]]).unwrap()
    }

    fn rho(v: i64) -> Threshold {
        Threshold::from_int(v).unwrap()
    }

    #[test]
    fn instance_a_single_cluster_is_valid() {
        let inst = instance_a();
        let a = Assignment::from_parts(&inst, [1], [(2, 1), (3, 1)]);
        let r = check_constraints(&inst, &a, rho(4), None, Mode::Strict).unwrap();
        assert!(r.c1_ok && r.c2_ok && r.c3_ok && r.capacity_ok && r.eligibility_ok);
        assert!(r.violators.is_empty());
    }

    #[test]
    fn leader_without_follower_violates_c2() {
        let inst = instance_a();
        let a = Assignment::from_parts(&inst, [1, 3], [(2, 1)]);
        let r = check_constraints(&inst, &a, rho(4), None, Mode::Relaxed).unwrap();
        assert!(!r.c2_ok);
        assert_eq!(r.violators, vec![(ConstraintId::C2, UeId(3))]);
    }

    #[test]
    fn low_lii_leader_violates_c3() {
        let inst = instance_a();
        let a = Assignment::from_parts(&inst, [2], [(1, 2), (3, 2)]);
        let r = check_constraints(&inst, &a, rho(4), None, Mode::Relaxed).unwrap();
        assert!(!r.c3_ok);
        assert_eq!(r.violators, vec![(ConstraintId::C3, UeId(2))]);
    }

    #[test]
    fn isolation_is_c1_only_in_strict_mode() {
        let inst = instance_a();
        let a = Assignment::from_parts(&inst, [1], [(2, 1)]);
        let strict = check_constraints(&inst, &a, rho(0), None, Mode::Strict).unwrap();
        assert!(!strict.c1_ok);
        let relaxed = check_constraints(&inst, &a, rho(0), None, Mode::Relaxed).unwrap();
        assert!(relaxed.c1_ok);
        assert_eq!(relaxed.isolated, vec![UeId(3)]);
    }

    #[test]
    fn capacity_and_eligibility_are_reported() {
        let inst = Instance::from_ints(&[7, 2, 5], &[[0, 3, 8], [6, 0, 2], [0, 9, 0]]).unwrap();
        let a = Assignment::from_parts(&inst, [1], [(2, 1), (3, 1)]);
        let caps = Capacities::uniform(&inst, 1);
        let r = check_constraints(&inst, &a, rho(0), Some(&caps), Mode::Strict).unwrap();
        assert!(!r.capacity_ok);
        assert!(!r.eligibility_ok);
        assert!(r.c1_ok && r.c2_ok && r.c3_ok);
    }

    #[test]
    fn li_scores() {
        let inst = instance_a();
        assert_eq!(
            li_score(&inst, UeId(2), UeId(1)).unwrap(),
            Score::from_int(13)
        );
        assert_eq!(
            li_score(&inst, UeId(2), UeId(3)).unwrap(),
            Score::from_int(7)
        );
        assert_eq!(
            li_score(&inst, UeId(2), UeId(2)),
            Err(ModelError::SelfPair(UeId(2)))
        );
        let z = Instance::from_ints(&[3, 0], &[[0, 0], [1, 0]]).unwrap();
        assert_eq!(li_score(&z, UeId(1), UeId(2)).unwrap(), Score::ZERO);
    }

    #[test]
    fn feasibility_cases() {
        let zero = Instance::from_ints(&[0, 0, 0], &[[0, 1, 1], [1, 0, 1], [1, 1, 0]]).unwrap();
        let r = feasibility_scan(&zero, rho(0));
        assert!(r.case1);
        assert_eq!(r.case2_isolated.len(), 3);

        let r = feasibility_scan(&instance_a(), rho(4));
        assert!(!r.case1);
        assert!(r.case2_isolated.is_empty());

        let two = Instance::from_ints(&[0, 9], &[[0, 0], [5, 0]]).unwrap();
        let r = feasibility_scan(&two, rho(0));
        assert!(!r.case1);
        assert_eq!(r.case2_isolated, BTreeSet::from([UeId(1)]));
    }

    proptest! {
        #[test]
        fn li_score_differences_are_exact(seed in 0u64..10_000) {
            let inst = generate_instance(5, seed, None).unwrap();
            let m = UeId(1);
            for a in 2..=5u32 {
                for b in 2..=5u32 {
                    let (a, b) = (UeId(a), UeId(b));
                    let lhs = li_score(&inst, m, a).unwrap() - li_score(&inst, m, b).unwrap();
                    let rhs = (inst.lii(a) - inst.lii(b)) + (inst.lxi(m, a) - inst.lxi(m, b));
                    prop_assert_eq!(lhs, rhs);
                }
            }
        }

        #[test]
        fn case1_isolates_everyone(seed in 0u64..1000, r in 0i64..=10) {
            let inst = generate_instance(6, seed, None).unwrap();
            let zeroed = inst.with_lii(&[Score::ZERO; 6]).unwrap();
            let rep = feasibility_scan(&zeroed, rho(r));
            prop_assert!(rep.case1);
            prop_assert_eq!(rep.case2_isolated.len(), 6);
        }
    }
}
