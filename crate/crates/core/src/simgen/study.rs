// SPDX-License-Identifier: MIT OR Apache-2.0

//! Monte Carlo performance study: generate, estimate, score against truth.

use super::{Scenario, generate};
use crate::agglomerative::{InitialMembership, Penalty, e_agglo};
use crate::divisive::{DivisiveConfig, e_divisive};
use crate::error::{Error, Result};
use crate::evaluation::rand_index;
use crate::rng::RandomStream;
use rayon::prelude::*;
use std::fmt::{self, Write};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StudyParam {
    Mu(f64),
    Sigma2(f64),
    Nu(f64),
    Rho(f64),
}

impl fmt::Display for StudyParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StudyParam::Mu(v) => write!(f, "mu={v}"),
            StudyParam::Sigma2(v) => write!(f, "sigma2={v}"),
            StudyParam::Nu(v) => write!(f, "nu={v}"),
            StudyParam::Rho(v) => write!(f, "rho={v}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StudyCell {
    pub len: usize,
    pub param: StudyParam,
}

impl StudyCell {
    /// Parses `T=300,mu=2`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut len = None;
        let mut param = None;
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("cell entry `{part}` is not `key=value`")))?;
            let num: f64 = v.trim().parse().map_err(|_| {
                Error::invalid(format!("cell entry `{part}`: `{v}` is not a number"))
            })?;
            let p = match k.trim() {
                "T" => {
                    if num < 3.0 || num.fract() != 0.0 {
                        return Err(Error::invalid(format!(
                            "cell T must be an integer >= 3; got {v}"
                        )));
                    }
                    len = Some(num as usize);
                    continue;
                }
                "mu" => StudyParam::Mu(num),
                "sigma2" => StudyParam::Sigma2(num),
                "nu" => StudyParam::Nu(num),
                "rho" => StudyParam::Rho(num),
                other => return Err(Error::invalid(format!("unknown cell key `{other}`"))),
            };
            if param.replace(p).is_some() {
                return Err(Error::invalid(format!(
                    "cell `{text}` sets more than one parameter"
                )));
            }
        }
        match (len, param) {
            (Some(len), Some(param)) => Ok(Self { len, param }),
            _ => Err(Error::invalid(format!(
                "cell `{text}` needs both T and a parameter"
            ))),
        }
    }
}

/// Every `(T, parameter)` cell of one of the three study tables.
pub fn study_cells(table: u8) -> Result<Vec<StudyCell>> {
    let grid = |lens: &[usize], params: &[StudyParam]| {
        lens.iter()
            .flat_map(|&len| params.iter().map(move |&param| StudyCell { len, param }))
            .collect::<Vec<_>>()
    };
    use StudyParam::*;
    match table {
        1 => Ok(grid(
            &[150, 300, 600],
            &[
                Mu(1.0),
                Mu(2.0),
                Mu(4.0),
                Sigma2(2.0),
                Sigma2(5.0),
                Sigma2(10.0),
            ],
        )),
        2 => Ok(grid(&[150, 300, 600], &[Nu(16.0), Nu(8.0), Nu(2.0)])),
        3 => Ok(grid(
            &[300, 600, 900],
            &[Mu(1.0), Mu(2.0), Mu(3.0), Rho(0.5), Rho(0.7), Rho(0.9)],
        )),
        _ => Err(Error::invalid(format!(
            "study table must be 1, 2 or 3; got {table}"
        ))),
    }
}

/// Maps a study cell to its generating scenario.
pub fn cell_scenario(table: u8, cell: &StudyCell) -> Result<Scenario> {
    use StudyParam::*;
    let len = cell.len;
    Ok(match (table, cell.param) {
        (1, Mu(mu)) => Scenario::MeanChange { len, mu },
        (1, Sigma2(sigma2)) => Scenario::VarianceChange { len, sigma2 },
        (2, Nu(nu)) => Scenario::TailChange { len, nu },
        (3, Mu(mu)) => Scenario::MvMean { len, dim: 2, mu },
        (3, Rho(rho)) => Scenario::MvCorrelation { len, dim: 2, rho },
        (t, p) => return Err(Error::invalid(format!("table {t} has no `{p}` cells"))),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Divisive,
    Agglo,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyConfig {
    pub table: u8,
    pub cells: Vec<StudyCell>,
    pub replicates: usize,
    pub method: Method,
    /// Used when `method` is `Divisive`. Its `seed` is replaced per replicate.
    pub divisive: DivisiveConfig,
    /// Initial segment width for `Agglo`.
    pub agglo_width: usize,
    pub agglo_penalty: Penalty,
}

impl StudyConfig {
    pub fn new(table: u8, cells: Vec<StudyCell>, replicates: usize) -> Self {
        Self {
            table,
            cells,
            replicates,
            method: Method::Divisive,
            divisive: DivisiveConfig::default(),
            agglo_width: 10,
            agglo_penalty: Penalty::None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyRow {
    pub table: u8,
    pub len: usize,
    pub param: String,
    pub mean_rand: f64,
    /// Standard error of `mean_rand`.
    pub se: f64,
    pub replicates: usize,
}

fn replicate_rand(cfg: &StudyConfig, scenario: &Scenario, stream: &RandomStream) -> Result<f64> {
    let sim = generate(scenario, &stream.substream(0))?;
    let estimate = match cfg.method {
        Method::Divisive => {
            let dcfg = DivisiveConfig {
                seed: stream.substream(1).seed(),
                ..cfg.divisive.clone()
            };
            e_divisive(&sim.series, &dcfg)?.estimates
        }
        Method::Agglo => {
            let member = InitialMembership::equal_width(sim.series.len(), cfg.agglo_width)?;
            e_agglo(&sim.series, &member, cfg.divisive.alpha, &cfg.agglo_penalty)?.opt
        }
    };
    rand_index(&sim.truth.membership(), &estimate.membership())
}

/// Runs every configured cell. Cell `c`, replicate `r` uses
/// `stream.substream(c).substream(r)`, so rows are reproducible one by one.
pub fn run_study(cfg: &StudyConfig, stream: &RandomStream) -> Result<Vec<StudyRow>> {
    if cfg.replicates < 2 {
        return Err(Error::invalid(format!(
            "replicates must be >= 2; got {}",
            cfg.replicates
        )));
    }
    cfg.cells
        .iter()
        .enumerate()
        .map(|(c, cell)| {
            let scenario = cell_scenario(cfg.table, cell)?;
            let cell_stream = stream.substream(c as u64);
            let scores = (0..cfg.replicates)
                .into_par_iter()
                .map(|r| replicate_rand(cfg, &scenario, &cell_stream.substream(r as u64)))
                .collect::<Result<Vec<f64>>>()?;
            let n = scores.len() as f64;
            let mean = scores.iter().sum::<f64>() / n;
            let var = scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
            Ok(StudyRow {
                table: cfg.table,
                len: cell.len,
                param: cell.param.to_string(),
                mean_rand: mean,
                se: (var / n).sqrt(),
                replicates: cfg.replicates,
            })
        })
        .collect()
}

/// CSV with header `table,T,param,mean_rand,se,replicates`.
pub fn report_csv(rows: &[StudyRow]) -> String {
    let mut out = String::from("table,T,param,mean_rand,se,replicates\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{:.6},{:.6e},{}",
            r.table, r.len, r.param, r.mean_rand, r.se, r.replicates
        );
    }
    out
}
