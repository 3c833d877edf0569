// SPDX-License-Identifier: MIT OR Apache-2.0

//! Pairwise α-distances and the sample energy divergence.
//!
//! Two normalizations of the within-sample term are provided:
//!
//! * [`e_hat_u`] averages the `C(n, 2)` distinct pairs (U-statistic). This is
//!   what the divisive estimator maximizes.
//! * [`e_hat_v`] averages all `n²` ordered pairs including the zero diagonal
//!   (V-statistic). Under this form the merge identity in [`merge_update`] is
//!   exact, so the agglomerative estimator uses it.

use crate::error::{Error, Result};

/// A `T x d` matrix of time-ordered observations, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    data: Vec<f64>,
    len: usize,
    dim: usize,
}

impl TimeSeries {
    pub fn from_flat(data: Vec<f64>, len: usize, dim: usize) -> Result<Self> {
        if len == 0 || dim == 0 {
            return Err(Error::invalid(format!(
                "time series must have at least one row and one column; got {len}x{dim}"
            )));
        }
        if data.len() != len * dim {
            return Err(Error::invalid(format!(
                "expected {} values for a {len}x{dim} series; got {}",
                len * dim,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / dim + 1,
                column: pos % dim + 1,
                value: data[pos],
            });
        }
        Ok(Self { data, len, dim })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::invalid(format!(
                    "row {} has {} values; expected {dim}",
                    i + 1,
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::from_flat(data, rows.len(), dim)
    }

    /// A univariate series.
    pub fn from_column(values: &[f64]) -> Result<Self> {
        Self::from_flat(values.to_vec(), values.len(), 1)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    /// Column `j` as an owned vector.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }
}

/// Distance exponent, restricted to `(0, 2]`.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "f64", into = "f64"))]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Alpha(f64);

impl Alpha {
    pub const ONE: Alpha = Alpha(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 && value <= 2.0 {
            Ok(Self(value))
        } else {
            Err(Error::invalid(format!(
                "alpha must lie in (0, 2]; got {value}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    fn apply_to_squared(self, sq: f64) -> f64 {
        if self.0 == 2.0 {
            sq
        } else if self.0 == 1.0 {
            sq.sqrt()
        } else {
            sq.sqrt().powf(self.0)
        }
    }
}

impl Default for Alpha {
    fn default() -> Self {
        Self::ONE
    }
}

impl TryFrom<f64> for Alpha {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<Alpha> for f64 {
    fn from(a: Alpha) -> f64 {
        a.0
    }
}

/// Read access to a symmetric matrix of pairwise α-distances.
///
/// Implemented by the materialized [`AlphaDistanceMatrix`] and by
/// [`PermutedView`], which relabels rows and columns without copying.
pub trait DistanceView: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get(&self, i: usize, j: usize) -> f64;
}

/// Symmetric `T x T` matrix of `|Z_i - Z_j|^α`, zero on the diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaDistanceMatrix {
    entries: Vec<f64>,
    len: usize,
    alpha: Alpha,
}

impl AlphaDistanceMatrix {
    pub fn new(x: &TimeSeries, alpha: Alpha) -> Self {
        let len = x.len();
        let mut entries = vec![0.0; len * len];
        for i in 0..len {
            let zi = x.row(i);
            for j in (i + 1)..len {
                let sq: f64 = zi
                    .iter()
                    .zip(x.row(j))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                let v = alpha.apply_to_squared(sq);
                entries[i * len + j] = v;
                entries[j * len + i] = v;
            }
        }
        Self {
            entries,
            len,
            alpha,
        }
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.len..(i + 1) * self.len]
    }
}

impl DistanceView for AlphaDistanceMatrix {
    #[inline]
    fn len(&self) -> usize {
        self.len
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.len + j]
    }
}

/// `D'[i][j] = D[perm[i]][perm[j]]`.
#[derive(Clone, Copy, Debug)]
pub struct PermutedView<'a, V: DistanceView> {
    base: &'a V,
    perm: &'a [usize],
}

impl<'a, V: DistanceView> PermutedView<'a, V> {
    pub fn new(base: &'a V, perm: &'a [usize]) -> Self {
        assert_eq!(base.len(), perm.len(), "permutation length mismatch");
        Self { base, perm }
    }
}

impl<V: DistanceView> DistanceView for PermutedView<'_, V> {
    #[inline]
    fn len(&self) -> usize {
        self.perm.len()
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.base.get(self.perm[i], self.perm[j])
    }
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    #[inline]
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn validate_sets<V: DistanceView>(d: &V, a: &[usize], b: &[usize]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("divergence needs two non-empty index sets"));
    }
    let mut seen = vec![0u8; d.len()];
    for (tag, set) in [(1u8, a), (2u8, b)] {
        for &i in set {
            if i >= d.len() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    len: d.len(),
                });
            }
            if seen[i] != 0 {
                return Err(if seen[i] == tag {
                    Error::invalid(format!("index {i} repeated within one set"))
                } else {
                    Error::OverlappingSets(i)
                });
            }
            seen[i] = tag;
        }
    }
    Ok(())
}

fn between_sum<V: DistanceView>(d: &V, a: &[usize], b: &[usize]) -> f64 {
    let mut acc = CompensatedSum::default();
    for &i in a {
        for &j in b {
            acc.add(d.get(i, j));
        }
    }
    acc.value()
}

/// Sum over unordered distinct pairs of `s`.
fn pair_sum<V: DistanceView>(d: &V, s: &[usize]) -> f64 {
    let mut acc = CompensatedSum::default();
    for (k, &i) in s.iter().enumerate() {
        for &j in &s[k + 1..] {
            acc.add(d.get(i, j));
        }
    }
    acc.value()
}

#[inline]
pub(crate) fn within_u(pair_sum: f64, n: usize) -> f64 {
    if n < 2 {
        0.0
    } else {
        pair_sum * 2.0 / (n as f64 * (n - 1) as f64)
    }
}

#[inline]
pub(crate) fn within_v(pair_sum: f64, n: usize) -> f64 {
    2.0 * pair_sum / (n as f64 * n as f64)
}

/// Sample energy divergence with U-statistic within-terms.
///
/// The within-term of a singleton set is taken to be zero.
pub fn e_hat_u<V: DistanceView>(d: &V, a: &[usize], b: &[usize]) -> Result<f64> {
    validate_sets(d, a, b)?;
    let (n, m) = (a.len(), b.len());
    let between = 2.0 * between_sum(d, a, b) / (n as f64 * m as f64);
    Ok(between - within_u(pair_sum(d, a), n) - within_u(pair_sum(d, b), m))
}

/// Sample energy divergence with V-statistic (diagonal-inclusive) within-terms.
pub fn e_hat_v<V: DistanceView>(d: &V, a: &[usize], b: &[usize]) -> Result<f64> {
    validate_sets(d, a, b)?;
    let (n, m) = (a.len(), b.len());
    let between = 2.0 * between_sum(d, a, b) / (n as f64 * m as f64);
    Ok(between - within_v(pair_sum(d, a), n) - within_v(pair_sum(d, b), m))
}

/// Scaled divergence `nm / (n + m) * e`.
#[inline]
pub fn q_hat(e: f64, n: usize, m: usize) -> f64 {
    debug_assert!(n >= 1 && m >= 1);
    let (n, m) = (n as f64, m as f64);
    n * m / (n + m) * e
}

/// Scaled V-form divergence between `C1 ∪ C2` and `C3` from the three pairwise
/// scaled divergences and the segment sizes.
#[inline]
pub fn merge_update(q13: f64, q23: f64, q12: f64, m1: usize, m2: usize, m3: usize) -> f64 {
    let (m1, m2, m3) = (m1 as f64, m2 as f64, m3 as f64);
    ((m1 + m3) * q13 + (m2 + m3) * q23 - m3 * q12) / (m1 + m2 + m3)
}
