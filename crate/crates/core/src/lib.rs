// SPDX-License-Identifier: MIT OR Apache-2.0

//! Nonparametric multiple change point analysis built on energy statistics.
//!
//! Two estimators share one distance matrix type:
//!
//! * [`e_divisive`] bisects the series hierarchically and keeps a split only
//!   while a permutation test rejects homogeneity.
//! * [`e_agglo`] greedily merges adjacent segments of an initial partition and
//!   returns the partition with the largest (optionally penalized)
//!   goodness-of-fit.
//!
//! ```
//! use energy_cp::{DivisiveConfig, TimeSeries, e_divisive};
//!
//! let values: Vec<f64> = (0..120).map(|i| if i < 60 { (i % 7) as f64 * 0.1 } else { 5.0 + (i % 5) as f64 * 0.1 }).collect();
//! let x = TimeSeries::from_column(&values).unwrap();
//! let cfg = DivisiveConfig { min_size: 20, permutations: 99, ..Default::default() };
//! let fit = e_divisive(&x, &cfg).unwrap();
//! assert_eq!(fit.estimates.boundaries(), &[1, 61, 121]);
//! ```

#![forbid(unsafe_code)]

pub mod agglomerative;
pub mod divisive;
pub mod energy;
mod error;
pub mod evaluation;
pub mod rng;
pub mod segmentation;
pub mod simgen;

pub use agglomerative::{AggloResult, InitialMembership, Penalty, e_agglo, e_agglo_with_matrix};
pub use divisive::{DivisiveConfig, DivisiveResult, e_divisive, e_divisive_with_matrix};
pub use energy::{Alpha, AlphaDistanceMatrix, DistanceView, TimeSeries};
pub use error::{Error, Result};
pub use evaluation::{adjusted_rand_index, rand_index};
pub use rng::RandomStream;
pub use segmentation::Segmentation;
