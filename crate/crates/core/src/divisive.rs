// SPDX-License-Identifier: MIT OR Apache-2.0

//! Hierarchical divisive estimation.
//!
//! Each iteration locates the single most likely change point across all
//! current segments ([`best_split`]), then decides whether to keep it with a
//! within-segment permutation test ([`permutation_test`]).

use crate::energy::{Alpha, AlphaDistanceMatrix, DistanceView, PermutedView, TimeSeries, q_hat};
use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::segmentation::Segmentation;
use rand::seq::SliceRandom;
use rayon::prelude::*;

/// Replicates evaluated between two checks of the futility rule. Fixed so
/// that results do not depend on the worker count.
const PERMUTATION_CHUNK: usize = 8;

#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Clone, Debug, PartialEq)]
pub struct DivisiveConfig {
    pub sig_lvl: f64,
    /// Maximum number of permutations per test.
    pub permutations: usize,
    pub min_size: usize,
    pub alpha: Alpha,
    /// Fixed number of change points; disables significance testing.
    pub k: Option<usize>,
    pub seed: u64,
    /// Accepted for interface parity; only the futility rule is active.
    pub eps: f64,
    /// Accepted for interface parity; only the futility rule is active.
    pub half: usize,
}

impl Default for DivisiveConfig {
    fn default() -> Self {
        Self {
            sig_lvl: 0.05,
            permutations: 199,
            min_size: 30,
            alpha: Alpha::ONE,
            k: None,
            seed: 0,
            eps: 1e-3,
            half: 1000,
        }
    }
}

impl DivisiveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sig_lvl > 0.0 && self.sig_lvl < 1.0) {
            return Err(Error::invalid(format!(
                "sig_lvl must lie in (0, 1); got {}",
                self.sig_lvl
            )));
        }
        if self.permutations == 0 {
            return Err(Error::invalid("permutations must be >= 1; got 0"));
        }
        if self.min_size < 2 {
            return Err(Error::invalid(format!(
                "min_size must be >= 2; got {}",
                self.min_size
            )));
        }
        Ok(())
    }

    /// Largest over-count that can still end in a significant p-value.
    fn futility_threshold(&self) -> usize {
        let bound = self.sig_lvl * (self.permutations + 1) as f64;
        // Guard against 0.05 * 200 landing a hair above an integer.
        (bound - 1e-9).ceil() as usize
    }
}

/// The best `(segment, τ, κ)` triple found by [`best_split`]. `tau` and
/// `kappa` are 1-based: the left block is `[ℓ, τ)` and the right `[τ, κ)`.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitCandidate {
    pub segment_index: usize,
    pub tau: usize,
    pub kappa: usize,
    pub statistic: f64,
}

#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Clone, Debug, PartialEq)]
pub struct DivisiveResult {
    pub estimates: Segmentation,
    /// Number of segments.
    pub k_hat: usize,
    /// `1`, `T + 1`, then accepted change points in discovery order.
    pub order_found: Vec<usize>,
    /// One per permutation test, the last belonging to `considered_last`
    /// when the search stopped on an insignificant candidate.
    pub p_values: Vec<f64>,
    pub permutations: Vec<usize>,
    pub considered_last: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PermutationOutcome {
    pub p_value: f64,
    pub permutations_run: usize,
}

#[inline]
fn pair_count(n: usize) -> f64 {
    (n * (n - 1)) as f64 / 2.0
}

#[inline]
fn split_statistic(between: f64, within_left: f64, within_right: f64, n1: usize, n2: usize) -> f64 {
    let e = 2.0 * between / (n1 * n2) as f64
        - within_left / pair_count(n1).max(1.0)
        - within_right / pair_count(n2).max(1.0);
    q_hat(e, n1, n2)
}

/// Best split inside the 0-based half-open block `[start, end)`.
///
/// The between-block and right-block sums for every κ are kept in arrays and
/// shifted in O(1) per κ as τ advances, so one segment of length `n` costs
/// O(n²) in total.
fn best_in_segment<V: DistanceView>(
    d: &V,
    start: usize,
    end: usize,
    min_size: usize,
) -> Option<(usize, usize, f64)> {
    let n = end - start;
    if n < 2 * min_size {
        return None;
    }
    let first_tau = start + min_size;
    let last_tau = end - min_size;

    // Indexed by κ - start; only entries κ >= τ + min_size are meaningful.
    let mut between = vec![0.0; n + 1];
    let mut within_right = vec![0.0; n + 1];

    let mut within_left = 0.0;
    for i in start..first_tau {
        for j in (i + 1)..first_tau {
            within_left += d.get(i, j);
        }
    }

    // Initial τ: grow κ one observation at a time.
    {
        let tau = first_tau;
        let mut b = 0.0;
        let mut w = 0.0;
        for k in tau..end {
            // Observation k joins the right block, giving the sums for κ = k + 1.
            for i in start..tau {
                b += d.get(i, k);
            }
            for j in tau..k {
                w += d.get(j, k);
            }
            between[k + 1 - start] = b;
            within_right[k + 1 - start] = w;
        }
    }

    let mut best: Option<(usize, usize, f64)> = None;
    let mut consider = |tau: usize, kappa: usize, stat: f64| match best {
        Some((_, _, s)) if stat <= s => {}
        _ => best = Some((tau, kappa, stat)),
    };

    let mut tau = first_tau;
    loop {
        let n1 = tau - start;
        for kappa in (tau + min_size)..=end {
            let slot = kappa - start;
            let stat = split_statistic(
                between[slot],
                within_left,
                within_right[slot],
                n1,
                kappa - tau,
            );
            consider(tau, kappa, stat);
        }
        if tau == last_tau {
            break;
        }
        // Observation `tau` moves from the right block to the left block.
        let p = tau;
        let mut to_left = 0.0;
        for i in start..p {
            to_left += d.get(i, p);
        }
        within_left += to_left;
        let mut row = 0.0;
        for kappa in (p + 1)..=end {
            // row = Σ_{p < j < κ} D[p][j]
            let slot = kappa - start;
            between[slot] += row - to_left;
            within_right[slot] -= row;
            if kappa < end {
                row += d.get(p, kappa);
            }
        }
        tau += 1;
    }
    best
}

/// Locates the `(segment, τ, κ)` maximizing the scaled U-form divergence
/// between `[ℓ, τ)` and `[τ, κ)` over every segment of `seg`.
///
/// Returns `None` once no segment is long enough to hold two blocks of
/// `min_size`. Ties go to the lexicographically smallest
/// `(segment_index, τ, κ)`.
pub fn best_split<V: DistanceView>(
    d: &V,
    seg: &Segmentation,
    min_size: usize,
) -> Option<SplitCandidate> {
    debug_assert_eq!(seg.series_len(), d.len());
    let min_size = min_size.max(1);
    let mut best: Option<SplitCandidate> = None;
    for (segment_index, range) in seg.segments().enumerate() {
        if let Some((tau, kappa, statistic)) = best_in_segment(d, range.start, range.end, min_size)
            && best.is_none_or(|b| statistic > b.statistic)
        {
            best = Some(SplitCandidate {
                segment_index,
                tau: tau + 1,
                kappa: kappa + 1,
                statistic,
            });
        }
    }
    best
}

/// Permutation test for a candidate returned by [`best_split`] on the same
/// `(d, seg)`.
///
/// Replicate `r` shuffles observations within each segment using
/// `stream.substream(r)`, so the outcome does not depend on how replicates are
/// scheduled across threads. The loop stops early once the over-count
/// exceeds `⌈sig_lvl·(R+1)⌉`, at which point the p-value can no longer reach
/// `sig_lvl`.
pub fn permutation_test<V: DistanceView>(
    d: &V,
    seg: &Segmentation,
    observed: &SplitCandidate,
    cfg: &DivisiveConfig,
    stream: &RandomStream,
) -> PermutationOutcome {
    let threshold = cfg.futility_threshold();
    let mut over = 1usize;
    let mut run = 0usize;
    while run < cfg.permutations {
        let chunk_end = (run + PERMUTATION_CHUNK).min(cfg.permutations);
        let exceeded: Vec<bool> = (run..chunk_end)
            .into_par_iter()
            .map(|r| {
                let perm = segment_permutation(seg, &stream.substream(r as u64));
                let view = PermutedView::new(d, &perm);
                best_split(&view, seg, cfg.min_size)
                    .is_some_and(|c| c.statistic >= observed.statistic)
            })
            .collect();
        for hit in exceeded {
            run += 1;
            if hit {
                over += 1;
            }
            if over > threshold {
                return PermutationOutcome {
                    p_value: over as f64 / (run + 1) as f64,
                    permutations_run: run,
                };
            }
        }
    }
    PermutationOutcome {
        p_value: over as f64 / (run + 1) as f64,
        permutations_run: run,
    }
}

/// Uniformly random permutation of `0..T` that keeps every observation inside
/// its segment.
pub fn segment_permutation(seg: &Segmentation, stream: &RandomStream) -> Vec<usize> {
    let mut rng = stream.rng();
    let mut perm: Vec<usize> = (0..seg.series_len()).collect();
    for range in seg.segments() {
        perm[range].shuffle(&mut rng);
    }
    perm
}

/// E-Divisive on a precomputed distance matrix.
pub fn e_divisive_with_matrix(
    d: &AlphaDistanceMatrix,
    cfg: &DivisiveConfig,
) -> Result<DivisiveResult> {
    cfg.validate()?;
    let len = d.len();
    let mut seg = Segmentation::trivial(len);
    let mut order_found = vec![1, len + 1];
    let mut p_values = Vec::new();
    let mut permutations = Vec::new();
    let mut considered_last = None;
    let root = RandomStream::new(cfg.seed);

    let mut test_index = 0u64;
    loop {
        if cfg.k.is_some_and(|k| order_found.len() - 2 >= k) {
            break;
        }
        let Some(candidate) = best_split(d, &seg, cfg.min_size) else {
            break;
        };
        if cfg.k.is_none() {
            let outcome = permutation_test(d, &seg, &candidate, cfg, &root.substream(test_index));
            test_index += 1;
            p_values.push(outcome.p_value);
            permutations.push(outcome.permutations_run);
            if outcome.p_value > cfg.sig_lvl {
                considered_last = Some(candidate.tau);
                break;
            }
        }
        seg.insert(candidate.tau);
        order_found.push(candidate.tau);
    }

    Ok(DivisiveResult {
        k_hat: seg.segment_count(),
        estimates: seg,
        order_found,
        p_values,
        permutations,
        considered_last,
    })
}

/// E-Divisive: repeated single change point location with significance
/// testing, stopping at the first insignificant candidate.
pub fn e_divisive(x: &TimeSeries, cfg: &DivisiveConfig) -> Result<DivisiveResult> {
    cfg.validate()?;
    let d = AlphaDistanceMatrix::new(x, cfg.alpha);
    e_divisive_with_matrix(&d, cfg)
}
