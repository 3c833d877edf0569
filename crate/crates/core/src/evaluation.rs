// SPDX-License-Identifier: MIT OR Apache-2.0

//! Pair-counting agreement between two partitions of the same observations.

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::hash::Hash;

struct Contingency {
    n: u64,
    /// Σ_ij C(n_ij, 2)
    joint: u64,
    /// Σ_i C(a_i, 2)
    rows: u64,
    /// Σ_j C(b_j, 2)
    cols: u64,
}

#[inline]
fn pairs(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

fn contingency<L: Hash + Eq>(u: &[L], v: &[L]) -> Result<Contingency> {
    if u.len() != v.len() {
        return Err(Error::invalid(format!(
            "membership vectors differ in length: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    if u.len() < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 observations to compare partitions; got {}",
            u.len()
        )));
    }
    let mut joint: HashMap<(&L, &L), u64> = HashMap::new();
    let mut rows: HashMap<&L, u64> = HashMap::new();
    let mut cols: HashMap<&L, u64> = HashMap::new();
    for (a, b) in u.iter().zip(v) {
        *joint.entry((a, b)).or_default() += 1;
        *rows.entry(a).or_default() += 1;
        *cols.entry(b).or_default() += 1;
    }
    Ok(Contingency {
        n: u.len() as u64,
        joint: joint.values().map(|&c| pairs(c)).sum(),
        rows: rows.values().map(|&c| pairs(c)).sum(),
        cols: cols.values().map(|&c| pairs(c)).sum(),
    })
}

/// Fraction of observation pairs on which `u` and `v` agree (co-clustered in
/// both, or separated in both).
pub fn rand_index<L: Hash + Eq>(u: &[L], v: &[L]) -> Result<f64> {
    let c = contingency(u, v)?;
    let total = pairs(c.n);
    // agreements = total - rows - cols + 2·joint, rearranged to stay unsigned
    let agree = total + 2 * c.joint - c.rows - c.cols;
    Ok(agree as f64 / total as f64)
}

/// Adjusted Rand index under the hypergeometric baseline.
///
/// When the expected and maximum index coincide (both partitions trivial in
/// the same way) the result is 1 for identical partitions and 0 otherwise.
pub fn adjusted_rand_index<L: Hash + Eq>(u: &[L], v: &[L]) -> Result<f64> {
    let c = contingency(u, v)?;
    let total = pairs(c.n) as f64;
    let expected = c.rows as f64 * c.cols as f64 / total;
    let max = 0.5 * (c.rows + c.cols) as f64;
    if max == expected {
        let identical = c.joint == c.rows && c.joint == c.cols;
        return Ok(if identical { 1.0 } else { 0.0 });
    }
    Ok((c.joint as f64 - expected) / (max - expected))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segmentation::Segmentation;
    use proptest::prelude::*;

    fn brute_rand(u: &[u32], v: &[u32]) -> f64 {
        let n = u.len();
        let mut agree = 0usize;
        for i in 0..n {
            for j in (i + 1)..n {
                if (u[i] == u[j]) == (v[i] == v[j]) {
                    agree += 1;
                }
            }
        }
        agree as f64 / (n * (n - 1) / 2) as f64
    }

    #[test]
    fn hand_cases() {
        let u = [1, 1, 2, 2];
        let v = [1, 2, 1, 2];
        assert_eq!(rand_index(&u, &u).unwrap(), 1.0);
        assert!((rand_index(&u, &v).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(rand_index(&[0, 0, 0, 0], &[1, 2, 3, 4]).unwrap(), 0.0);

        assert_eq!(adjusted_rand_index(&u, &u).unwrap(), 1.0);
        // joint 0, expected 2·2/6, max 2
        assert!((adjusted_rand_index(&u, &v).unwrap() + 0.5).abs() < 1e-15);
        assert_eq!(adjusted_rand_index(&[7, 7, 7], &[1, 1, 1]).unwrap(), 1.0);
        assert_eq!(adjusted_rand_index(&[1, 2, 3], &[4, 5, 6]).unwrap(), 1.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(rand_index(&[1, 2], &[1]).is_err());
        assert!(adjusted_rand_index(&[1], &[1]).is_err());
    }

    #[test]
    fn segmentation_membership_labels_segments() {
        let truth = Segmentation::new(vec![1, 3, 5]).unwrap().membership();
        let est = Segmentation::new(vec![1, 4, 5]).unwrap().membership();
        assert_eq!(truth, vec![0, 0, 1, 1]);
        // agreeing pairs: (0,1), (0,3), (1,3)
        assert_eq!(rand_index(&truth, &est).unwrap(), 0.5);
    }

    proptest! {
        #[test]
        fn rand_matches_pair_enumeration(
            (u, v) in (2usize..120).prop_flat_map(|n| (
                prop::collection::vec(0u32..6, n),
                prop::collection::vec(0u32..6, n),
            ))
        ) {
            prop_assert_eq!(rand_index(&u, &v).unwrap(), brute_rand(&u, &v));
            prop_assert_eq!(rand_index(&v, &u).unwrap(), rand_index(&u, &v).unwrap());
            prop_assert_eq!(adjusted_rand_index(&v, &u).unwrap(), adjusted_rand_index(&u, &v).unwrap());
            let relabeled: Vec<u32> = v.iter().map(|l| 100 - 3 * l).collect();
            prop_assert_eq!(rand_index(&u, &relabeled).unwrap(), rand_index(&u, &v).unwrap());
            prop_assert_eq!(adjusted_rand_index(&u, &relabeled).unwrap(), adjusted_rand_index(&u, &v).unwrap());
        }
    }
}
