// SPDX-License-Identifier: MIT OR Apache-2.0

//! Hierarchical agglomerative estimation.
//!
//! Starting from a user-supplied contiguous segmentation, adjacent segments are
//! merged greedily so as to maximize the goodness-of-fit statistic, the sum of
//! scaled V-form divergences between neighbouring segments. Neighbours are
//! taken circularly: the last segment is also adjacent to the first.
//!
//! Divergences involving a freshly merged segment come from [`merge_update`],
//! so every step after the initial O(T²) pass costs O(N) for `N` segments.

use crate::energy::{
    Alpha, AlphaDistanceMatrix, DistanceView, TimeSeries, e_hat_v, merge_update, q_hat, within_v,
};
use crate::error::{Error, Result};
use crate::segmentation::Segmentation;

/// Contiguous initial assignment of observations to segments.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialMembership {
    /// 0-based start of every initial segment, in time order.
    starts: Vec<usize>,
    len: usize,
}

impl InitialMembership {
    /// From a per-observation label vector. Labels may be arbitrary but each
    /// must occupy a single contiguous run.
    pub fn from_labels(labels: &[i64]) -> Result<Self> {
        let mut starts = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for (i, &label) in labels.iter().enumerate() {
            if i == 0 || labels[i - 1] != label {
                if !seen.insert(label) {
                    return Err(Error::NonContiguousMembership {
                        label,
                        position: i + 1,
                    });
                }
                starts.push(i);
            }
        }
        Self::from_starts(starts, labels.len())
    }

    /// Equal blocks of `width` observations; the final block takes the rest.
    pub fn equal_width(len: usize, width: usize) -> Result<Self> {
        if width == 0 {
            return Err(Error::invalid("segment width must be >= 1"));
        }
        Self::from_starts((0..len).step_by(width).collect(), len)
    }

    fn from_starts(starts: Vec<usize>, len: usize) -> Result<Self> {
        if starts.len() < 2 {
            return Err(Error::invalid(format!(
                "initial membership needs at least 2 segments; got {}",
                starts.len()
            )));
        }
        Ok(Self { starts, len })
    }

    pub fn segment_count(&self) -> usize {
        self.starts.len()
    }

    pub fn series_len(&self) -> usize {
        self.len
    }

    pub fn segmentation(&self) -> Segmentation {
        let mut b: Vec<usize> = self.starts.iter().map(|s| s + 1).collect();
        b.push(self.len + 1);
        Segmentation::new(b).expect("starts are strictly increasing")
    }
}

#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
#[derive(Clone, Debug, PartialEq, Default)]
pub enum Penalty {
    #[default]
    None,
    /// `-k` for `k` change points.
    NegCount,
    /// Mean gap between consecutive sorted change points; zero when there are
    /// fewer than two change points.
    MeanGap,
    /// Explicit value per recorded step, starting with the initial
    /// segmentation.
    Table(Vec<f64>),
}

impl Penalty {
    pub fn evaluate(&self, step: usize, change_points: &[usize]) -> f64 {
        match self {
            Penalty::None => 0.0,
            Penalty::NegCount => -(change_points.len() as f64),
            Penalty::MeanGap => {
                if change_points.len() < 2 {
                    return 0.0;
                }
                let mut cps = change_points.to_vec();
                cps.sort_unstable();
                let total: usize = cps.windows(2).map(|w| w[1] - w[0]).sum();
                total as f64 / (cps.len() - 1) as f64
            }
            Penalty::Table(values) => values[step],
        }
    }
}

/// Adds `penalty(τ⃗)` to every raw fit value.
pub fn apply_penalty(
    fit_raw: &[f64],
    change_points_per_step: &[Vec<usize>],
    penalty: &Penalty,
) -> Result<Vec<f64>> {
    if fit_raw.len() != change_points_per_step.len() {
        return Err(Error::invalid(format!(
            "{} fit values but {} change point sets",
            fit_raw.len(),
            change_points_per_step.len()
        )));
    }
    if let Penalty::Table(values) = penalty
        && values.len() != fit_raw.len()
    {
        return Err(Error::invalid(format!(
            "penalty table has {} entries; expected one per step ({})",
            values.len(),
            fit_raw.len()
        )));
    }
    Ok(fit_raw
        .iter()
        .zip(change_points_per_step)
        .enumerate()
        .map(|(step, (f, cps))| f + penalty.evaluate(step, cps))
        .collect())
}

#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Clone, Debug, PartialEq)]
pub struct AggloResult {
    /// Segmentation attaining the largest penalized fit.
    pub opt: Segmentation,
    /// Penalized goodness-of-fit, initially and after each merge.
    pub fit: Vec<f64>,
    /// Unpenalized goodness-of-fit at the same steps.
    pub fit_raw: Vec<f64>,
    /// Active 1-based segment starts at each step.
    pub progression: Vec<Vec<usize>>,
    /// Merge history. Negative entries name initial segments (1-based),
    /// positive entries the step that produced a merged segment.
    pub merged: Vec<[i64; 2]>,
}

/// Goodness-of-fit of a segmentation: Σ 𝒬̂_V(C_i, C_{i+1}) with `C_{n+1} = C_1`.
pub fn gof<V: DistanceView, S: AsRef<[usize]>>(segments: &[S], d: &V) -> Result<f64> {
    let n = segments.len();
    if n < 2 {
        return Err(Error::invalid(format!(
            "goodness-of-fit needs at least 2 segments; got {n}"
        )));
    }
    let mut total = 0.0;
    for i in 0..n {
        let a = segments[i].as_ref();
        let b = segments[(i + 1) % n].as_ref();
        total += q_hat(e_hat_v(d, a, b)?, a.len(), b.len());
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug)]
struct Cluster {
    /// Row/column of the divergence table holding this cluster.
    slot: usize,
    /// 0-based first observation.
    start: usize,
    size: usize,
    /// Merge-history label.
    label: i64,
}

/// Scaled V-form divergences between every pair of initial segments, from
/// block sums of the distance matrix.
fn initial_divergences<V: DistanceView>(d: &V, starts: &[usize], len: usize) -> Vec<Vec<f64>> {
    let n = starts.len();
    let mut owner = vec![0usize; len];
    for (s, w) in starts.iter().enumerate() {
        let end = starts.get(s + 1).copied().unwrap_or(len);
        owner[*w..end].fill(s);
    }
    let sizes: Vec<usize> = (0..n)
        .map(|s| starts.get(s + 1).copied().unwrap_or(len) - starts[s])
        .collect();

    // Block sums over unordered pairs i < j.
    let mut sums = vec![vec![0.0; n]; n];
    for i in 0..len {
        let oi = owner[i];
        for j in (i + 1)..len {
            sums[oi][owner[j]] += d.get(i, j);
        }
    }

    let mut q = vec![vec![0.0; n]; n];
    for a in 0..n {
        let within_a = within_v(sums[a][a], sizes[a]);
        for b in (a + 1)..n {
            let within_b = within_v(sums[b][b], sizes[b]);
            let between = 2.0 * sums[a][b] / (sizes[a] * sizes[b]) as f64;
            let v = q_hat(between - within_a - within_b, sizes[a], sizes[b]);
            q[a][b] = v;
            q[b][a] = v;
        }
    }
    q
}

/// Runs all `N - 2` greedy merges. `observe` sees the active clusters and the
/// divergence table after every merge.
fn merge_all<V, F>(
    d: &V,
    member: &InitialMembership,
    mut observe: F,
) -> (Vec<f64>, Vec<Vec<usize>>, Vec<[i64; 2]>)
where
    V: DistanceView,
    F: FnMut(&[Cluster], &[Vec<f64>]),
{
    let len = d.len();
    let n0 = member.segment_count();
    let mut q = initial_divergences(d, &member.starts, len);
    let mut clusters: Vec<Cluster> = member
        .starts
        .iter()
        .enumerate()
        .map(|(s, &start)| Cluster {
            slot: s,
            start,
            size: member.starts.get(s + 1).copied().unwrap_or(len) - start,
            label: -(s as i64 + 1),
        })
        .collect();

    let circular_gof = |clusters: &[Cluster], q: &[Vec<f64>]| -> f64 {
        let n = clusters.len();
        (0..n)
            .map(|i| q[clusters[i].slot][clusters[(i + 1) % n].slot])
            .sum()
    };

    let starts_of =
        |clusters: &[Cluster]| -> Vec<usize> { clusters.iter().map(|c| c.start + 1).collect() };

    let mut current = circular_gof(&clusters, &q);
    let mut fit_raw = vec![current];
    let mut progression = vec![starts_of(&clusters)];
    let mut merged = Vec::with_capacity(n0.saturating_sub(2));

    // Divergence between the union of clusters a, b and cluster c.
    let merged_q = |q: &[Vec<f64>], a: &Cluster, b: &Cluster, c: &Cluster| {
        merge_update(
            q[a.slot][c.slot],
            q[b.slot][c.slot],
            q[a.slot][b.slot],
            a.size,
            b.size,
            c.size,
        )
    };

    for step in 1..=n0.saturating_sub(2) {
        let n = clusters.len();
        let mut best: Option<(usize, f64)> = None;
        for i in 0..(n - 1) {
            let (a, b) = (&clusters[i], &clusters[i + 1]);
            let prev = &clusters[(i + n - 1) % n];
            let next = &clusters[(i + 2) % n];
            let candidate =
                current - q[prev.slot][a.slot] - q[a.slot][b.slot] - q[b.slot][next.slot]
                    + merged_q(&q, a, b, prev)
                    + merged_q(&q, a, b, next);
            if best.is_none_or(|(_, g)| candidate > g) {
                best = Some((i, candidate));
            }
        }
        let (i, _) = best.expect("at least three clusters remain");
        let (a, b) = (clusters[i], clusters[i + 1]);

        for c in clusters
            .iter()
            .filter(|c| c.slot != a.slot && c.slot != b.slot)
        {
            let v = merged_q(&q, &a, &b, c);
            q[a.slot][c.slot] = v;
            q[c.slot][a.slot] = v;
        }
        merged.push([a.label, b.label]);
        clusters[i] = Cluster {
            slot: a.slot,
            start: a.start,
            size: a.size + b.size,
            label: step as i64,
        };
        clusters.remove(i + 1);

        // Recomputed rather than carried forward from the candidate so that
        // rounding does not accumulate over many steps.
        current = circular_gof(&clusters, &q);
        fit_raw.push(current);
        progression.push(starts_of(&clusters));
        observe(&clusters, &q);
    }

    (fit_raw, progression, merged)
}

/// E-Agglo on a precomputed distance matrix.
pub fn e_agglo_with_matrix<V: DistanceView>(
    d: &V,
    member: &InitialMembership,
    penalty: &Penalty,
) -> Result<AggloResult> {
    let len = d.len();
    if member.series_len() != len {
        return Err(Error::invalid(format!(
            "membership covers {} observations; series has {len}",
            member.series_len()
        )));
    }
    let n0 = member.segment_count();
    if let Penalty::Table(values) = penalty
        && values.len() != n0 - 1
    {
        return Err(Error::invalid(format!(
            "penalty table has {} entries; expected {} (one per step)",
            values.len(),
            n0 - 1
        )));
    }

    let (fit_raw, progression, merged) = merge_all(d, member, |_, _| {});

    let cps: Vec<Vec<usize>> = progression.iter().map(|row| row[1..].to_vec()).collect();
    let fit = apply_penalty(&fit_raw, &cps, penalty)?;
    let best_step = fit
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > fit[best] { i } else { best });
    let mut opt = progression[best_step].clone();
    opt.push(len + 1);

    Ok(AggloResult {
        opt: Segmentation::new(opt)?,
        fit,
        fit_raw,
        progression,
        merged,
    })
}

/// E-Agglo: greedy merging of `member`'s segments, returning the
/// segmentation with the largest penalized goodness-of-fit.
pub fn e_agglo(
    x: &TimeSeries,
    member: &InitialMembership,
    alpha: Alpha,
    penalty: &Penalty,
) -> Result<AggloResult> {
    let d = AlphaDistanceMatrix::new(x, alpha);
    e_agglo_with_matrix(&d, member, penalty)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix_1d(values: &[f64]) -> AlphaDistanceMatrix {
        AlphaDistanceMatrix::new(&TimeSeries::from_column(values).unwrap(), Alpha::ONE)
    }

    #[test]
    fn gof_examples() {
        let d = matrix_1d(&[0.0, 1.0, 3.0]);
        assert!((gof(&[vec![0], vec![1], vec![2]], &d).unwrap() - 6.0).abs() < 1e-12);
        let d2 = matrix_1d(&[0.0, 1.0]);
        // the single pair is counted twice
        assert_eq!(gof(&[vec![0], vec![1]], &d2).unwrap(), 2.0);
        let flat = matrix_1d(&[2.0; 6]);
        assert_eq!(
            gof(&[vec![0, 1], vec![2, 3], vec![4, 5]], &flat).unwrap(),
            0.0
        );
        assert!(gof(&[vec![0, 1]], &d).is_err());
    }

    #[test]
    fn membership_validation() {
        assert!(InitialMembership::from_labels(&[1, 1, 2, 2, 3]).is_ok());
        assert_eq!(
            InitialMembership::from_labels(&[1, 1, 2, 1]),
            Err(Error::NonContiguousMembership {
                label: 1,
                position: 4
            })
        );
        assert!(InitialMembership::from_labels(&[4, 4, 4]).is_err());
        let m = InitialMembership::equal_width(25, 10).unwrap();
        assert_eq!(m.segmentation().boundaries(), &[1, 11, 21, 26]);
    }

    #[test]
    fn penalty_examples() {
        let fit = [10.0, 12.0];
        let cps = vec![vec![101, 201], vec![101]];
        assert_eq!(
            apply_penalty(&fit, &cps, &Penalty::None).unwrap(),
            fit.to_vec()
        );
        assert_eq!(
            apply_penalty(&fit, &cps, &Penalty::NegCount).unwrap(),
            vec![8.0, 11.0]
        );
        assert_eq!(Penalty::MeanGap.evaluate(0, &[301, 101, 201]), 100.0);
        assert_eq!(Penalty::MeanGap.evaluate(0, &[5]), 0.0);
        assert!(apply_penalty(&fit, &cps, &Penalty::Table(vec![1.0])).is_err());
        assert_eq!(
            apply_penalty(&fit, &cps, &Penalty::Table(vec![1.0, -1.0])).unwrap(),
            vec![11.0, 11.0]
        );
    }

    #[test]
    fn two_initial_segments_cannot_merge() {
        let x = TimeSeries::from_column(&[0.0, 0.1, 5.0, 5.1]).unwrap();
        let m = InitialMembership::from_labels(&[1, 1, 2, 2]).unwrap();
        let res = e_agglo(&x, &m, Alpha::ONE, &Penalty::None).unwrap();
        assert_eq!(res.opt.boundaries(), &[1, 3, 5]);
        assert_eq!(res.fit.len(), 1);
        assert!(res.merged.is_empty());
    }

    #[test]
    fn merge_history_and_progression() {
        let values: Vec<f64> = (0..40)
            .map(|i| {
                if i < 20 {
                    (i % 4) as f64
                } else {
                    10.0 + (i % 3) as f64
                }
            })
            .collect();
        let x = TimeSeries::from_column(&values).unwrap();
        let m = InitialMembership::equal_width(40, 5).unwrap();
        let res = e_agglo(&x, &m, Alpha::ONE, &Penalty::None).unwrap();
        assert_eq!(res.progression[0], vec![1, 6, 11, 16, 21, 26, 31, 36]);
        assert_eq!(res.merged.len(), 6);
        assert_eq!(res.fit.len(), 7);
        assert_eq!(res.progression.last().unwrap().len(), 2);
        for (step, row) in res.merged.iter().enumerate() {
            for &e in row {
                assert!(e != 0 && e >= -8 && e <= step as i64);
            }
        }
        assert!(
            res.opt
                .change_points()
                .iter()
                .all(|cp| res.progression[0].contains(cp))
        );
        assert!(res.opt.change_points().contains(&21));
    }

    #[test]
    fn incremental_fit_matches_from_scratch() {
        let values: Vec<f64> = (0..48)
            .map(|i| ((i * 37) % 11) as f64 + if (16..32).contains(&i) { 4.0 } else { 0.0 })
            .collect();
        let x = TimeSeries::from_column(&values).unwrap();
        let d = AlphaDistanceMatrix::new(&x, Alpha::ONE);
        let m = InitialMembership::equal_width(48, 4).unwrap();
        let res = e_agglo_with_matrix(&d, &m, &Penalty::None).unwrap();
        for (row, &fit) in res.progression.iter().zip(&res.fit_raw) {
            let mut b = row.clone();
            b.push(49);
            let sets: Vec<Vec<usize>> = Segmentation::new(b)
                .unwrap()
                .segments()
                .map(|r| r.collect())
                .collect();
            let direct = gof(&sets, &d).unwrap();
            assert!((direct - fit).abs() <= 1e-9 * direct.abs().max(1.0));
        }
    }
    #[test]
    fn stored_divergences_match_direct_after_every_merge() {
        let values: Vec<f64> = (0..36)
            .map(|i| ((i * 53) % 17) as f64 * 0.3 + if i >= 18 { 2.5 } else { 0.0 })
            .collect();
        let x = TimeSeries::from_column(&values).unwrap();
        let d = AlphaDistanceMatrix::new(&x, Alpha::new(1.5).unwrap());
        let m = InitialMembership::from_labels(&[
            1, 1, 1, 2, 2, 3, 3, 3, 3, 4, 4, 5, 5, 5, 6, 6, 6, 6, 7, 7, 8, 8, 8, 9, 9, 9, 10, 10,
            10, 10, 11, 11, 12, 12, 12, 12,
        ])
        .unwrap();
        let mut checked = 0;
        merge_all(&d, &m, |clusters, q| {
            for a in clusters {
                for b in clusters.iter().filter(|b| b.slot != a.slot) {
                    let sa: Vec<usize> = (a.start..a.start + a.size).collect();
                    let sb: Vec<usize> = (b.start..b.start + b.size).collect();
                    let direct = q_hat(e_hat_v(&d, &sa, &sb).unwrap(), sa.len(), sb.len());
                    assert!((q[a.slot][b.slot] - direct).abs() <= 1e-9 * direct.abs().max(1.0));
                    checked += 1;
                }
            }
        });
        assert!(checked > 0);
    }
}
