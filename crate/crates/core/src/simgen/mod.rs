// SPDX-License-Identifier: MIT OR Apache-2.0

//! Seeded generators for the simulation scenarios.
//!
//! Every scenario is a sequence of independent blocks, except the
//! spatio-temporal point process which is generated interval by interval.
//! Block `b` (or interval `b`) draws from `stream.substream(b)`, so blocks never
//! share random numbers.

mod config;
mod study;

pub use config::{parse_scenario, scenario_to_config};
pub use study::{
    Method, StudyCell, StudyConfig, StudyParam, StudyRow, cell_scenario, report_csv, run_study,
    study_cells,
};

use crate::energy::TimeSeries;
use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::segmentation::Segmentation;
use nalgebra::DMatrix;
use rand::Rng;
use rand::distr::weighted::WeightedIndex;
use rand_distr::{ChiSquared, Distribution, Poisson, StandardNormal};

#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Clone, Debug, PartialEq)]
pub enum Scenario {
    /// `N(0,1), N(μ,1), N(0,1)` in three equal blocks.
    MeanChange { len: usize, mu: f64 },
    /// `N(0,1), N(0,σ²), N(0,1)`.
    VarianceChange { len: usize, sigma2: f64 },
    /// `N(0,1), t_ν, N(0,1)`.
    TailChange { len: usize, nu: f64 },
    /// `N_d(0,I), N_d(μ·1,I), N_d(0,I)`.
    MvMean { len: usize, dim: usize, mu: f64 },
    /// `N_d(0,I), N_d(0,Σ_ρ), N_d(0,I)` with unit diagonal and off-diagonal ρ.
    MvCorrelation { len: usize, dim: usize, rho: f64 },
    /// Same family as [`Scenario::MvCorrelation`]; defaults to the trivariate
    /// 750-observation covariance example.
    MvCovariance { len: usize, dim: usize, rho: f64 },
    /// `N_d(0,I), t_ν(0,I), N_d(0,I)`.
    MvTail { len: usize, dim: usize, nu: f64 },
    /// Four blocks of 100: `N(0,1), N(0,3²), N(2,1), N(2,4²)` (standard
    /// deviations 1, 3, 1, 4).
    UnivariateExample,
    /// Spatio-temporal Poisson process over `[0, 7]` with arrival rate `rate`
    /// and a three-component Gaussian mixture whose weights change at times
    /// 1, 3 and 4.5.
    Stpp { rate: f64 },
}

impl Scenario {
    pub fn covariance_example() -> Self {
        Scenario::MvCovariance {
            len: 750,
            dim: 3,
            rho: 0.9,
        }
    }

    pub fn tail_example() -> Self {
        Scenario::MvTail {
            len: 750,
            dim: 2,
            nu: 2.0,
        }
    }

    pub fn stpp_example() -> Self {
        Scenario::Stpp { rate: 1500.0 }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Scenario::MeanChange { .. } => "mean_change",
            Scenario::VarianceChange { .. } => "variance_change",
            Scenario::TailChange { .. } => "tail_change",
            Scenario::MvMean { .. } => "mv_mean",
            Scenario::MvCorrelation { .. } => "mv_correlation",
            Scenario::MvCovariance { .. } => "mv_covariance",
            Scenario::MvTail { .. } => "mv_tail",
            Scenario::UnivariateExample => "univariate_example",
            Scenario::Stpp { .. } => "stpp",
        }
    }

    /// Block layout of every block-structured scenario; `None` for `Stpp`.
    pub fn blocks(&self) -> Result<Option<Vec<Block>>> {
        let standard = |dim: usize| {
            if dim == 1 {
                BlockDist::Normal { mean: 0.0, sd: 1.0 }
            } else {
                BlockDist::MvNormal {
                    mean: vec![0.0; dim],
                    cov: identity(dim),
                }
            }
        };
        let middle = match *self {
            Scenario::MeanChange { len, mu } => (len, 1, BlockDist::Normal { mean: mu, sd: 1.0 }),
            Scenario::VarianceChange { len, sigma2 } => {
                if sigma2.is_nan() || sigma2 <= 0.0 {
                    return Err(Error::invalid(format!("sigma2 must be > 0; got {sigma2}")));
                }
                (
                    len,
                    1,
                    BlockDist::Normal {
                        mean: 0.0,
                        sd: sigma2.sqrt(),
                    },
                )
            }
            Scenario::TailChange { len, nu } => (len, 1, BlockDist::StudentT { nu }),
            Scenario::MvMean { len, dim, mu } => (
                len,
                dim,
                BlockDist::MvNormal {
                    mean: vec![mu; dim],
                    cov: identity(dim),
                },
            ),
            Scenario::MvCorrelation { len, dim, rho }
            | Scenario::MvCovariance { len, dim, rho } => (
                len,
                dim,
                BlockDist::MvNormal {
                    mean: vec![0.0; dim],
                    cov: equicorrelation(dim, rho),
                },
            ),
            Scenario::MvTail { len, dim, nu } => (
                len,
                dim,
                BlockDist::MvT {
                    nu,
                    scale: identity(dim),
                },
            ),
            Scenario::UnivariateExample => {
                let normal = |mean, sd| Block {
                    len: 100,
                    dist: BlockDist::Normal { mean, sd },
                };
                return Ok(Some(vec![
                    normal(0.0, 1.0),
                    normal(0.0, 3.0),
                    normal(2.0, 1.0),
                    normal(2.0, 4.0),
                ]));
            }
            Scenario::Stpp { .. } => return Ok(None),
        };
        let (len, dim, dist) = middle;
        if dim == 0 {
            return Err(Error::invalid("dimension must be >= 1"));
        }
        if len < 3 {
            return Err(Error::invalid(format!(
                "three blocks need at least 3 observations; got {len}"
            )));
        }
        let third = len / 3;
        Ok(Some(vec![
            Block {
                len: third,
                dist: standard(dim),
            },
            Block { len: third, dist },
            Block {
                len: len - 2 * third,
                dist: standard(dim),
            },
        ]))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub len: usize,
    pub dist: BlockDist,
}

/// Distribution of the rows inside one block. Matrices are row-major `d x d`.
#[derive(Clone, Debug, PartialEq)]
pub enum BlockDist {
    Normal {
        mean: f64,
        sd: f64,
    },
    StudentT {
        nu: f64,
    },
    MvNormal {
        mean: Vec<f64>,
        cov: Vec<f64>,
    },
    /// Multivariate t with location 0, scale matrix `scale` and `nu` degrees
    /// of freedom.
    MvT {
        nu: f64,
        scale: Vec<f64>,
    },
}

impl BlockDist {
    pub fn dim(&self) -> usize {
        match self {
            BlockDist::Normal { .. } | BlockDist::StudentT { .. } => 1,
            BlockDist::MvNormal { mean, .. } => mean.len(),
            BlockDist::MvT { scale, .. } => (scale.len() as f64).sqrt() as usize,
        }
    }
}

fn identity(dim: usize) -> Vec<f64> {
    let mut m = vec![0.0; dim * dim];
    for i in 0..dim {
        m[i * dim + i] = 1.0;
    }
    m
}

fn equicorrelation(dim: usize, rho: f64) -> Vec<f64> {
    let mut m = vec![rho; dim * dim];
    for i in 0..dim {
        m[i * dim + i] = 1.0;
    }
    m
}

/// Multivariate normal sampler `mean + L z` with `Σ = L Lᵀ`.
#[derive(Clone, Debug)]
pub struct MvNormal {
    mean: Vec<f64>,
    factor: DMatrix<f64>,
}

impl MvNormal {
    pub fn new(mean: Vec<f64>, cov: &[f64]) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 || cov.len() != dim * dim {
            return Err(Error::invalid(format!(
                "covariance must be {dim}x{dim}; got {} entries",
                cov.len()
            )));
        }
        let sigma = DMatrix::from_row_slice(dim, dim, cov);
        for i in 0..dim {
            for j in 0..i {
                if (sigma[(i, j)] - sigma[(j, i)]).abs() > 1e-12 {
                    return Err(Error::NotPositiveDefinite(format!(
                        "entry ({i}, {j}) breaks symmetry"
                    )));
                }
            }
        }
        let chol = sigma
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite("Cholesky factorization failed".into()))?;
        Ok(Self {
            mean,
            factor: chol.l(),
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let dim = self.dim();
        let z: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        for (i, (slot, mean)) in out.iter_mut().zip(&self.mean).enumerate() {
            let mut v = *mean;
            for (j, zj) in z.iter().enumerate().take(i + 1) {
                v += self.factor[(i, j)] * zj;
            }
            *slot = v;
        }
    }
}

fn chi_squared(nu: f64) -> Result<ChiSquared<f64>> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::invalid(format!(
            "degrees of freedom must be > 0; got {nu}"
        )));
    }
    ChiSquared::new(nu).map_err(|e| Error::invalid(e.to_string()))
}

enum Sampler {
    Normal {
        mean: f64,
        sd: f64,
    },
    StudentT {
        chi: ChiSquared<f64>,
        nu: f64,
    },
    MvNormal(MvNormal),
    MvT {
        chi: ChiSquared<f64>,
        nu: f64,
        base: MvNormal,
    },
}

impl Sampler {
    fn new(dist: &BlockDist) -> Result<Self> {
        Ok(match dist {
            BlockDist::Normal { mean, sd } => {
                if sd.is_nan() || *sd <= 0.0 || !mean.is_finite() {
                    return Err(Error::invalid(format!(
                        "invalid normal block N({mean}, sd={sd})"
                    )));
                }
                Sampler::Normal {
                    mean: *mean,
                    sd: *sd,
                }
            }
            BlockDist::StudentT { nu } => Sampler::StudentT {
                chi: chi_squared(*nu)?,
                nu: *nu,
            },
            BlockDist::MvNormal { mean, cov } => {
                Sampler::MvNormal(MvNormal::new(mean.clone(), cov)?)
            }
            BlockDist::MvT { nu, scale } => {
                let dim = dist.dim();
                Sampler::MvT {
                    chi: chi_squared(*nu)?,
                    nu: *nu,
                    base: MvNormal::new(vec![0.0; dim], scale)?,
                }
            }
        })
    }

    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self {
            Sampler::Normal { mean, sd } => {
                let z: f64 = rng.sample(StandardNormal);
                out[0] = mean + sd * z;
            }
            Sampler::StudentT { chi, nu } => {
                let z: f64 = rng.sample(StandardNormal);
                out[0] = z / (chi.sample(rng) / nu).sqrt();
            }
            Sampler::MvNormal(mvn) => mvn.sample_into(rng, out),
            Sampler::MvT { chi, nu, base } => {
                base.sample_into(rng, out);
                let w = (chi.sample(rng) / nu).sqrt();
                out.iter_mut().for_each(|v| *v /= w);
            }
        }
    }
}

/// A generated data set with its true segmentation.
#[derive(Clone, Debug, PartialEq)]
pub struct Simulated {
    pub series: TimeSeries,
    pub truth: Segmentation,
    /// Arrival times, for the point-process scenario only.
    pub times: Option<Vec<f64>>,
}

/// Draws a realization of `scenario` from `stream`.
pub fn generate(scenario: &Scenario, stream: &RandomStream) -> Result<Simulated> {
    match scenario {
        Scenario::Stpp { rate } => generate_stpp(*rate, stream),
        _ => {
            let blocks = scenario.blocks()?.expect("block scenario");
            generate_blocks(&blocks, stream)
        }
    }
}

pub fn generate_blocks(blocks: &[Block], stream: &RandomStream) -> Result<Simulated> {
    let dim = blocks.first().map_or(0, |b| b.dist.dim());
    if blocks.iter().any(|b| b.dist.dim() != dim || b.len == 0) {
        return Err(Error::invalid(
            "blocks must be non-empty and share one dimension",
        ));
    }
    let total: usize = blocks.iter().map(|b| b.len).sum();
    let mut data = vec![0.0; total * dim];
    let mut boundaries = vec![1];
    let mut offset = 0;
    for (b, block) in blocks.iter().enumerate() {
        let sampler = Sampler::new(&block.dist)?;
        let mut rng = stream.substream(b as u64).rng();
        for row in data[offset * dim..(offset + block.len) * dim].chunks_exact_mut(dim) {
            sampler.sample_into(&mut rng, row);
        }
        offset += block.len;
        boundaries.push(offset + 1);
    }
    Ok(Simulated {
        series: TimeSeries::from_flat(data, total, dim)?,
        truth: Segmentation::new(boundaries)?,
        times: None,
    })
}

/// Mixture components and per-interval weights of the point-process example.
pub(crate) mod stpp_model {
    pub const BREAKS: [f64; 5] = [0.0, 1.0, 3.0, 4.5, 7.0];
    pub const MEANS: [[f64; 2]; 3] = [[-7.0, -7.0], [0.0, 0.0], [5.5, 0.0]];
    pub const COVS: [[f64; 4]; 3] = [
        [25.0, 0.0, 0.0, 25.0],
        [9.0, 0.0, 0.0, 1.0],
        [9.0, 0.9, 0.9, 9.0],
    ];
    pub const WEIGHTS: [[f64; 3]; 4] = [
        [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        [0.2, 0.5, 0.3],
        [0.35, 0.3, 0.35],
        [0.2, 0.3, 0.5],
    ];
}

fn generate_stpp(rate: f64, stream: &RandomStream) -> Result<Simulated> {
    use stpp_model::*;
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::invalid(format!(
            "arrival rate must be > 0; got {rate}"
        )));
    }
    let components = MEANS
        .iter()
        .zip(&COVS)
        .map(|(m, c)| MvNormal::new(m.to_vec(), c))
        .collect::<Result<Vec<_>>>()?;

    let mut data = Vec::new();
    let mut times = Vec::new();
    let mut boundaries = vec![1];
    for (i, weights) in WEIGHTS.iter().enumerate() {
        let (t0, t1) = (BREAKS[i], BREAKS[i + 1]);
        let mut rng = stream.substream(i as u64).rng();
        let poisson = Poisson::new(rate * (t1 - t0)).map_err(|e| Error::invalid(e.to_string()))?;
        let count = poisson.sample(&mut rng) as usize;
        let pick = WeightedIndex::new(weights).map_err(|e| Error::invalid(e.to_string()))?;
        let mut points: Vec<(f64, [f64; 2])> = (0..count)
            .map(|_| {
                let mut s = [0.0; 2];
                components[pick.sample(&mut rng)].sample_into(&mut rng, &mut s);
                (rng.random_range(t0..t1), s)
            })
            .collect();
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (t, s) in points {
            times.push(t);
            data.extend_from_slice(&s);
        }
        if times.len() + 1 > *boundaries.last().unwrap() {
            boundaries.push(times.len() + 1);
        }
    }
    let len = times.len();
    if len == 0 {
        return Err(Error::invalid("point process produced no observations"));
    }
    Ok(Simulated {
        series: TimeSeries::from_flat(data, len, 2)?,
        truth: Segmentation::new(boundaries)?,
        times: Some(times),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_output() {
        let sc = Scenario::MvCorrelation {
            len: 90,
            dim: 2,
            rho: 0.7,
        };
        let a = generate(&sc, &RandomStream::new(5)).unwrap();
        let b = generate(&sc, &RandomStream::new(5)).unwrap();
        assert_eq!(a, b);
        let c = generate(&sc, &RandomStream::new(6)).unwrap();
        assert_ne!(a.series, c.series);
    }

    #[test]
    fn three_block_truth() {
        let sim = generate(
            &Scenario::MeanChange { len: 300, mu: 0.0 },
            &RandomStream::new(1),
        )
        .unwrap();
        assert_eq!(sim.truth.boundaries(), &[1, 101, 201, 301]);
        assert_eq!(sim.series.len(), 300);
        let sim = generate(
            &Scenario::VarianceChange {
                len: 100,
                sigma2: 5.0,
            },
            &RandomStream::new(1),
        )
        .unwrap();
        assert_eq!(sim.truth.boundaries(), &[1, 34, 67, 101]);
    }

    #[test]
    fn blocks_draw_from_separate_substreams() {
        // Changing the second block's parameters leaves the first and third untouched.
        let s = RandomStream::new(11);
        let a = generate(&Scenario::MeanChange { len: 30, mu: 0.0 }, &s).unwrap();
        let b = generate(&Scenario::MeanChange { len: 30, mu: 3.0 }, &s).unwrap();
        for i in (0..10).chain(20..30) {
            assert_eq!(a.series.row(i), b.series.row(i));
        }
        for i in 10..20 {
            assert!((b.series.row(i)[0] - a.series.row(i)[0] - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_pd_covariance() {
        assert!(matches!(
            MvNormal::new(vec![0.0, 0.0], &[1.0, 2.0, 2.0, 1.0]),
            Err(Error::NotPositiveDefinite(_))
        ));
        assert!(
            generate(
                &Scenario::MvCorrelation {
                    len: 30,
                    dim: 3,
                    rho: -0.9
                },
                &RandomStream::new(0)
            )
            .is_err()
        );
    }

    #[test]
    fn mvn_moments() {
        let mvn = MvNormal::new(vec![0.0, 0.0], &equicorrelation(2, 0.9)).unwrap();
        let mut rng = RandomStream::new(42).rng();
        let n = 10_000;
        let mut draws = vec![[0.0; 2]; n];
        for d in draws.iter_mut() {
            mvn.sample_into(&mut rng, d);
        }
        let mean: Vec<f64> = (0..2)
            .map(|k| draws.iter().map(|d| d[k]).sum::<f64>() / n as f64)
            .collect();
        for m in &mean {
            assert!(m.abs() < 0.02, "mean {m}");
        }
        let target = [[1.0, 0.9], [0.9, 1.0]];
        for a in 0..2 {
            for b in 0..2 {
                let c = draws
                    .iter()
                    .map(|d| (d[a] - mean[a]) * (d[b] - mean[b]))
                    .sum::<f64>()
                    / (n - 1) as f64;
                assert!((c - target[a][b]).abs() < 0.03, "cov[{a}][{b}] = {c}");
            }
        }
    }

    #[test]
    fn stpp_counts_and_truth() {
        for seed in [1, 2, 3] {
            let sim = generate(&Scenario::stpp_example(), &RandomStream::new(seed)).unwrap();
            let t = sim.series.len() as f64;
            assert!((t - 10_500.0).abs() <= 3.0 * 10_500f64.sqrt(), "count {t}");
            let times = sim.times.as_ref().unwrap();
            assert!(times.windows(2).all(|w| w[0] <= w[1]));
            let b = sim.truth.boundaries();
            assert_eq!(b.len(), 5);
            for (k, &cut) in [1.0, 3.0, 4.5].iter().enumerate() {
                let row = b[k + 1] - 1;
                assert!(times[row - 1] < cut && times[row] >= cut);
            }
        }
    }

    #[test]
    fn univariate_example_layout() {
        let sim = generate(&Scenario::UnivariateExample, &RandomStream::new(250)).unwrap();
        assert_eq!(sim.truth.boundaries(), &[1, 101, 201, 301, 401]);
    }
}
