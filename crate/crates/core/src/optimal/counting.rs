//! Exact cluster-configuration counts.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

/// Arbitrary-precision configuration count.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConfigCount(pub BigUint);

impl ConfigCount {
    pub fn value(&self) -> &BigUint {
        &self.0
    }
}

impl fmt::Display for ConfigCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u64> for ConfigCount {
    fn from(v: u64) -> Self {
        ConfigCount(BigUint::from(v))
    }
}

/// Serialized as a decimal string.
impl Serialize for ConfigCount {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

/// Rows `0..=n` of the Stirling triangle of the second kind, built with
/// `S(n+1, k) = k·S(n, k) + S(n, k-1)`.
pub fn stirling2_table(n: usize) -> Vec<Vec<BigUint>> {
    let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(n + 1);
    rows.push(vec![BigUint::one()]);
    for i in 1..=n {
        let prev = &rows[i - 1];
        let row: Vec<BigUint> = (0..=i)
            .map(|k| {
                let keep = if k < prev.len() {
                    &prev[k] * BigUint::from(k)
                } else {
                    BigUint::zero()
                };
                let new_block = if k >= 1 {
                    prev[k - 1].clone()
                } else {
                    BigUint::zero()
                };
                keep + new_block
            })
            .collect();
        rows.push(row);
    }
    rows
}

/// Stirling number of the second kind: partitions of `n` labeled items
/// into `k` non-empty blocks.
pub fn stirling2(n: usize, k: usize) -> ConfigCount {
    if k > n {
        return ConfigCount::default();
    }
    ConfigCount(stirling2_table(n)[n][k].clone())
}

fn factorial(k: usize) -> BigUint {
    (1..=k).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    // Each prefix product is itself a binomial, so the division is exact.
    (0..k).fold(BigUint::one(), |acc, i| {
        acc * BigUint::from(n - i) / BigUint::from(i + 1)
    })
}

/// Configurations visited by exhaustive search over `n` UEs:
/// `Σ_{k=1}^{⌊n/2⌋} k!·C(n,k)·S(n−k,k)`.
pub fn count_configs_exhaustive(n: usize) -> ConfigCount {
    let table = stirling2_table(n);
    let total = (1..=n / 2)
        .map(|k| factorial(k) * binomial(n, k) * &table[n - k][k])
        .fold(BigUint::zero(), |a, b| a + b);
    ConfigCount(total)
}

/// Upper bound on the configurations reachable by the distributed
/// algorithm with `l` candidate leaders among `n` UEs:
/// `Σ_{k=1}^{min(l,⌊n/2⌋)} k!·C(l,k)·S(n−l,k)·k^(l−k)`.
pub fn count_configs_distributed_bound(n: usize, l: usize) -> ConfigCount {
    assert!(l <= n, "candidate leaders ({l}) exceed UEs ({n})");
    let table = stirling2_table(n - l);
    let total = (1..=l.min(n / 2))
        .map(|k| {
            let s = table[n - l].get(k).cloned().unwrap_or_default();
            factorial(k) * binomial(l, k) * s * BigUint::from(k).pow((l - k) as u32)
        })
        .fold(BigUint::zero(), |a, b| a + b);
    ConfigCount(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Counts set partitions of `n` labeled items into exactly `k` blocks
    /// by enumerating restricted growth strings.
    fn partitions_by_enumeration(n: usize, k: usize) -> u64 {
        fn go(i: usize, n: usize, used: usize, k: usize) -> u64 {
            if i == n {
                return u64::from(used == k);
            }
            let mut c = 0;
            for b in 0..=used {
                if b < k {
                    c += go(i + 1, n, used.max(b + 1), k);
                }
            }
            c
        }
        if n == 0 {
            return u64::from(k == 0);
        }
        go(0, n, 0, k)
    }

    #[test]
    fn small_values() {
        assert_eq!(stirling2(4, 2), ConfigCount::from(7));
        assert_eq!(stirling2(0, 0), ConfigCount::from(1));
        assert_eq!(stirling2(5, 0), ConfigCount::from(0));
        assert_eq!(stirling2(3, 5), ConfigCount::from(0));
        for n in 1..20 {
            assert_eq!(stirling2(n, 1), ConfigCount::from(1));
        }
    }

    #[test]
    fn matches_partition_enumeration_up_to_8() {
        for n in 0..=8 {
            for k in 0..=n {
                assert_eq!(
                    stirling2(n, k),
                    ConfigCount::from(partitions_by_enumeration(n, k)),
                    "S({n},{k})"
                );
            }
        }
    }

    #[test]
    fn table_satisfies_recurrence() {
        let t = stirling2_table(30);
        for n in 0..30 {
            for k in 1..=n + 1 {
                let lhs = &t[n + 1][k];
                let prev_k = t[n].get(k).cloned().unwrap_or_default();
                let rhs = BigUint::from(k) * prev_k + &t[n][k - 1];
                assert_eq!(lhs, &rhs, "S({},{k})", n + 1);
            }
        }
    }

    #[test]
    fn exhaustive_counts() {
        assert_eq!(count_configs_exhaustive(2), ConfigCount::from(2));
        assert_eq!(count_configs_exhaustive(4), ConfigCount::from(16));
        assert_eq!(count_configs_exhaustive(1), ConfigCount::from(0));
        // Independent sum with S(12-k, k) taken from enumeration-checked
        // small values is impractical at n = 12, so spot-check magnitude.
        let c12 = count_configs_exhaustive(12);
        assert!(
            c12.0 > BigUint::from(10_000_000u64) && c12.0 < BigUint::from(100_000_000u64),
            "{c12}"
        );
    }

    #[test]
    fn distributed_bound_edge_cases() {
        for n in 1..15 {
            assert_eq!(count_configs_distributed_bound(n, n), ConfigCount::from(0));
            assert_eq!(count_configs_distributed_bound(n, 0), ConfigCount::from(0));
        }
        for n in 2..15 {
            assert_eq!(count_configs_distributed_bound(n, 1), ConfigCount::from(1));
        }
        assert!(count_configs_distributed_bound(10, 3) < count_configs_exhaustive(10));
    }

    #[test]
    fn big_counts_exceed_u64() {
        let c = count_configs_exhaustive(40);
        assert!(c.0 > BigUint::from(u64::MAX));
        assert_eq!(
            serde_json::to_string(&ConfigCount::from(16)).unwrap(),
            "\"16\""
        );
    }
}
