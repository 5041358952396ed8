//! Priority permutations and the footrule misalignment layer.
//!
//! A priority order assigns each task an execution rank; the misalignment
//! between two orders is the per-task absolute rank difference together with
//! its sum (Spearman's footrule). Every mechanism in this crate consumes the
//! scalar totals produced here, either directly (scalar mode) or derived from
//! permutations (permutation mode).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// True iff `positions` is a permutation of `1..=K` for `K = positions.len()`.
pub fn is_permutation(positions: &[u32]) -> bool {
    let k = positions.len();
    if k == 0 {
        return false;
    }
    let mut seen = vec![false; k];
    for &p in positions {
        if p == 0 || p as usize > k || seen[p as usize - 1] {
            return false;
        }
        seen[p as usize - 1] = true;
    }
    true
}

/// A full priority assignment: `positions[k]` is the (1-based) execution rank
/// of task `k+1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct PriorityOrder {
    positions: Vec<u32>,
}

impl PriorityOrder {
    pub fn new(positions: Vec<u32>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::EmptyOrder);
        }
        if !is_permutation(&positions) {
            let len = positions.len();
            return Err(Error::InvalidPermutation { positions, len });
        }
        Ok(PriorityOrder { positions })
    }

    /// The order `[1, 2, ..., k]`.
    pub fn identity(k: usize) -> Self {
        PriorityOrder { positions: (1..=k as u32).collect() }
    }

    /// The order `[k, k-1, ..., 1]`, which attains the footrule upper bound
    /// against the identity.
    pub fn reversal(k: usize) -> Self {
        PriorityOrder { positions: (1..=k as u32).rev().collect() }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[u32] {
        &self.positions
    }
}

impl TryFrom<Vec<u32>> for PriorityOrder {
    type Error = Error;
    fn try_from(v: Vec<u32>) -> Result<Self> {
        PriorityOrder::new(v)
    }
}

impl From<PriorityOrder> for Vec<u32> {
    fn from(p: PriorityOrder) -> Vec<u32> {
        p.positions
    }
}

/// Per-task and aggregate scalar misalignment between two priority orders.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile")]
pub struct MisalignmentProfile {
    pub per_task: Vec<u32>,
    pub total: u64,
}

#[derive(Deserialize)]
struct RawProfile {
    per_task: Vec<u32>,
    total: u64,
}

impl TryFrom<RawProfile> for MisalignmentProfile {
    type Error = Error;
    fn try_from(raw: RawProfile) -> Result<Self> {
        let sum: u64 = raw.per_task.iter().map(|&d| d as u64).sum();
        if sum != raw.total {
            return Err(Error::InvalidScenario(format!(
                "misalignment total {} does not match per-task sum {}",
                raw.total, sum
            )));
        }
        Ok(MisalignmentProfile { per_task: raw.per_task, total: raw.total })
    }
}

impl MisalignmentProfile {
    pub fn from_per_task(per_task: Vec<u32>) -> Self {
        let total = per_task.iter().map(|&d| d as u64).sum();
        MisalignmentProfile { per_task, total }
    }
}

/// Footrule misalignment between two priority orders of equal length:
/// `per_task[k] = |a[k] - b[k]|`.
pub fn footrule(a: &PriorityOrder, b: &PriorityOrder) -> Result<MisalignmentProfile> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { left: a.len(), right: b.len() });
    }
    let per_task = a
        .positions()
        .iter()
        .zip(b.positions())
        .map(|(&x, &y)| x.abs_diff(y))
        .collect();
    Ok(MisalignmentProfile::from_per_task(per_task))
}

/// Largest footrule total attainable between two orders of `k` tasks.
pub fn footrule_upper_bound(k: usize) -> u64 {
    (k as u64 * k as u64) / 2
}

/// All priority orders of `k` tasks in lexicographic order. Intended for
/// exhaustive desk-scale checks; the count grows as `k!`.
pub fn all_priority_orders(k: usize) -> Vec<PriorityOrder> {
    fn extend(prefix: &mut Vec<u32>, used: &mut Vec<bool>, k: usize, out: &mut Vec<PriorityOrder>) {
        if prefix.len() == k {
            out.push(PriorityOrder { positions: prefix.clone() });
            return;
        }
        for r in 1..=k as u32 {
            if !used[r as usize - 1] {
                used[r as usize - 1] = true;
                prefix.push(r);
                extend(prefix, used, k, out);
                prefix.pop();
                used[r as usize - 1] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::new(), &mut vec![false; k], k, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn permutation_predicate() {
        assert!(is_permutation(&[1, 2, 3, 4]));
        assert!(is_permutation(&[2, 1, 4, 3]));
        assert!(!is_permutation(&[1, 1, 3, 4]));
        assert!(!is_permutation(&[0, 1, 2]));
        assert!(!is_permutation(&[2, 3, 4]));
        assert!(!is_permutation(&[]));
    }

    #[test]
    fn footrule_example_vectors() {
        let x = PriorityOrder::new(vec![1, 2, 3, 4]).unwrap();
        let y = PriorityOrder::new(vec![2, 1, 4, 3]).unwrap();
        let z = PriorityOrder::new(vec![1, 2, 4, 3]).unwrap();

        let theta = footrule(&x, &y).unwrap();
        assert_eq!(theta.per_task, vec![1, 1, 1, 1]);
        assert_eq!(theta.total, 4);

        let gamma = footrule(&x, &z).unwrap();
        assert_eq!(gamma.per_task, vec![0, 0, 1, 1]);
        assert_eq!(gamma.total, 2);

        let zero = footrule(&y, &y).unwrap();
        assert_eq!(zero.per_task, vec![0, 0, 0, 0]);
        assert_eq!(zero.total, 0);
    }

    #[test]
    fn footrule_rejects_dimension_mismatch() {
        let a = PriorityOrder::new(vec![1, 2, 3]).unwrap();
        let b = PriorityOrder::new(vec![2, 1, 4, 3]).unwrap();
        assert!(matches!(
            footrule(&a, &b),
            Err(Error::DimensionMismatch { left: 3, right: 4 })
        ));
    }

    #[test]
    fn invalid_permutation_rejected_at_construction() {
        assert!(matches!(
            PriorityOrder::new(vec![1, 1, 3, 4]),
            Err(Error::InvalidPermutation { .. })
        ));
        assert!(matches!(PriorityOrder::new(vec![]), Err(Error::EmptyOrder)));
    }

    #[test]
    fn exhaustive_metric_properties_small_k() {
        // Symmetry, evenness, bound, and the triangle inequality over all
        // permutation pairs (triples for the triangle) at K <= 4; K = 5 runs
        // in the acceptance suite.
        for k in 1..=4 {
            let all = all_priority_orders(k);
            let bound = footrule_upper_bound(k);
            for a in &all {
                for b in &all {
                    let ab = footrule(a, b).unwrap();
                    let ba = footrule(b, a).unwrap();
                    assert_eq!(ab, ba);
                    assert_eq!(ab.total % 2, 0);
                    assert!(ab.total <= bound);
                    assert!(ab.per_task.iter().all(|&d| d as usize <= k - 1));
                }
            }
            let rev = footrule(&PriorityOrder::identity(k), &PriorityOrder::reversal(k)).unwrap();
            assert_eq!(rev.total, bound);
            for a in &all {
                for b in &all {
                    let ab = footrule(a, b).unwrap().total;
                    for c in &all {
                        let ac = footrule(a, c).unwrap().total;
                        let bc = footrule(b, c).unwrap().total;
                        assert!(ac <= ab + bc);
                    }
                }
            }
        }
    }

    #[test]
    fn serde_shapes() {
        let p = PriorityOrder::new(vec![2, 1, 4, 3]).unwrap();
        assert_eq!(serde_json::to_string(&p).unwrap(), "[2,1,4,3]");
        let bad: std::result::Result<PriorityOrder, _> = serde_json::from_str("[1,1,3,4]");
        assert!(bad.is_err());

        let m = MisalignmentProfile::from_per_task(vec![0, 0, 1, 1]);
        assert_eq!(
            serde_json::to_string(&m).unwrap(),
            "{\"per_task\":[0,0,1,1],\"total\":2}"
        );
        let bad: std::result::Result<MisalignmentProfile, _> =
            serde_json::from_str("{\"per_task\":[1,1],\"total\":3}");
        assert!(bad.is_err());
    }

    fn arb_perm(max_k: usize) -> impl Strategy<Value = PriorityOrder> {
        (1..=max_k).prop_flat_map(|k| {
            Just(k).prop_perturb(move |k, mut rng| {
                let mut v: Vec<u32> = (1..=k as u32).collect();
                for i in (1..v.len()).rev() {
                    let j = (rng.next_u64() % (i as u64 + 1)) as usize;
                    v.swap(i, j);
                }
                PriorityOrder::new(v).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn parity_holds_for_larger_k(k in 5usize..=9) {
            let mut rng_state = (k as u64).wrapping_mul(0x9e3779b97f4a7c15);
            let mut next = move || {
                rng_state ^= rng_state << 13;
                rng_state ^= rng_state >> 7;
                rng_state ^= rng_state << 17;
                rng_state
            };
            let mut shuffled = |k: usize| {
                let mut v: Vec<u32> = (1..=k as u32).collect();
                for i in (1..v.len()).rev() {
                    let j = (next() % (i as u64 + 1)) as usize;
                    v.swap(i, j);
                }
                PriorityOrder::new(v).unwrap()
            };
            let a = shuffled(k);
            let b = shuffled(k);
            let d = footrule(&a, &b).unwrap();
            prop_assert_eq!(d.total % 2, 0);
            prop_assert!(d.total <= footrule_upper_bound(k));
        }

        #[test]
        fn symmetry_random(pair in (arb_perm(8), arb_perm(8))) {
            let (a, b) = pair;
            if a.len() == b.len() {
                prop_assert_eq!(footrule(&a, &b).unwrap(), footrule(&b, &a).unwrap());
            }
        }
    }
}
