// SPDX-License-Identifier: MIT OR Apache-2.0

use crate::error::{Error, Result};
use std::ops::Range;

/// Ordered 1-based segment starts, always opening with `1` and closing with
/// `T + 1`. Segment `i` covers observations `[boundaries[i], boundaries[i+1])`.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "Vec<usize>", into = "Vec<usize>"))]
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Segmentation {
    boundaries: Vec<usize>,
}

impl Segmentation {
    pub fn new(boundaries: Vec<usize>) -> Result<Self> {
        if boundaries.len() < 2 {
            return Err(Error::invalid(format!(
                "segmentation needs at least two boundaries; got {}",
                boundaries.len()
            )));
        }
        if boundaries[0] != 1 {
            return Err(Error::invalid(format!(
                "segmentation must start at 1; got {}",
                boundaries[0]
            )));
        }
        if let Some(w) = boundaries.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!(
                "segmentation boundaries must be strictly increasing; got {} then {}",
                w[0], w[1]
            )));
        }
        Ok(Self { boundaries })
    }

    /// Builds a segmentation of `len` observations from its interior change
    /// points (1-based, any order).
    pub fn from_change_points(len: usize, change_points: &[usize]) -> Result<Self> {
        let mut boundaries = Vec::with_capacity(change_points.len() + 2);
        boundaries.push(1);
        let mut cps = change_points.to_vec();
        cps.sort_unstable();
        boundaries.extend(cps);
        boundaries.push(len + 1);
        Self::new(boundaries)
    }

    /// The single-segment segmentation `{1, len + 1}`.
    pub fn trivial(len: usize) -> Self {
        Self {
            boundaries: vec![1, len + 1],
        }
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    /// Number of observations covered.
    pub fn series_len(&self) -> usize {
        self.boundaries[self.boundaries.len() - 1] - 1
    }

    pub fn segment_count(&self) -> usize {
        self.boundaries.len() - 1
    }

    /// Interior boundaries, i.e. the estimated change points.
    pub fn change_points(&self) -> &[usize] {
        &self.boundaries[1..self.boundaries.len() - 1]
    }

    /// 0-based half-open row ranges of every segment.
    pub fn segments(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        self.boundaries.windows(2).map(|w| (w[0] - 1)..(w[1] - 1))
    }

    pub fn segment(&self, index: usize) -> Range<usize> {
        (self.boundaries[index] - 1)..(self.boundaries[index + 1] - 1)
    }

    /// Inserts a new 1-based boundary. Returns false if it already exists or
    /// falls outside the interior.
    pub fn insert(&mut self, boundary: usize) -> bool {
        if boundary <= 1 || boundary > self.series_len() {
            return false;
        }
        match self.boundaries.binary_search(&boundary) {
            Ok(_) => false,
            Err(pos) => {
                self.boundaries.insert(pos, boundary);
                true
            }
        }
    }

    /// Membership vector: label `i` for every observation of segment `i`.
    pub fn membership(&self) -> Vec<usize> {
        let mut labels = Vec::with_capacity(self.series_len());
        for (i, range) in self.segments().enumerate() {
            labels.extend(std::iter::repeat_n(i, range.len()));
        }
        labels
    }
}

impl TryFrom<Vec<usize>> for Segmentation {
    type Error = Error;

    fn try_from(boundaries: Vec<usize>) -> Result<Self> {
        Self::new(boundaries)
    }
}

impl From<Segmentation> for Vec<usize> {
    fn from(seg: Segmentation) -> Self {
        seg.boundaries
    }
}
