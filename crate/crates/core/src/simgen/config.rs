// SPDX-License-Identifier: MIT OR Apache-2.0

//! Plain-text scenario definitions: one `key = value` pair per line, `#`
//! starts a comment.
//!
//! ```text
//! kind = mv_correlation
//! T = 600
//! d = 2
//! rho = 0.7
//! ```

use super::Scenario;
use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::fmt::Write;

struct Fields<'a> {
    map: BTreeMap<&'a str, &'a str>,
}

impl<'a> Fields<'a> {
    fn parse(text: &'a str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("line {}: expected `key = value`", n + 1)))?;
            let key = key.trim();
            if map.insert(key, value.trim()).is_some() {
                return Err(Error::invalid(format!(
                    "line {}: duplicate key `{key}`",
                    n + 1
                )));
            }
        }
        Ok(Self { map })
    }

    fn take(&mut self, key: &str) -> Option<&'a str> {
        self.map.remove(key)
    }

    fn number<T: std::str::FromStr>(&mut self, key: &str, default: Option<T>) -> Result<T> {
        match self.take(key) {
            Some(v) => v
                .parse()
                .map_err(|_| Error::invalid(format!("`{key}`: cannot parse `{v}`"))),
            None => default.ok_or_else(|| Error::invalid(format!("missing required key `{key}`"))),
        }
    }

    fn finish(self) -> Result<()> {
        match self.map.keys().next() {
            Some(k) => Err(Error::invalid(format!("unknown key `{k}`"))),
            None => Ok(()),
        }
    }
}

/// Parses a scenario definition. `T` and the distribution parameter are
/// required for the three-block kinds; `d` defaults to 2 (3 for
/// `mv_covariance`).
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut f = Fields::parse(text)?;
    let kind = f
        .take("kind")
        .ok_or_else(|| Error::invalid("missing required key `kind`"))?;
    let scenario = match kind {
        "mean_change" => Scenario::MeanChange {
            len: f.number("T", None)?,
            mu: f.number("mu", None)?,
        },
        "variance_change" => Scenario::VarianceChange {
            len: f.number("T", None)?,
            sigma2: f.number("sigma2", None)?,
        },
        "tail_change" => Scenario::TailChange {
            len: f.number("T", None)?,
            nu: f.number("nu", None)?,
        },
        "mv_mean" => Scenario::MvMean {
            len: f.number("T", None)?,
            dim: f.number("d", Some(2))?,
            mu: f.number("mu", None)?,
        },
        "mv_correlation" => Scenario::MvCorrelation {
            len: f.number("T", None)?,
            dim: f.number("d", Some(2))?,
            rho: f.number("rho", None)?,
        },
        "mv_covariance" => Scenario::MvCovariance {
            len: f.number("T", Some(750))?,
            dim: f.number("d", Some(3))?,
            rho: f.number("rho", Some(0.9))?,
        },
        "mv_tail" => Scenario::MvTail {
            len: f.number("T", Some(750))?,
            dim: f.number("d", Some(2))?,
            nu: f.number("nu", Some(2.0))?,
        },
        "univariate_example" => Scenario::UnivariateExample,
        "stpp" => Scenario::Stpp {
            rate: f.number("lambda", Some(1500.0))?,
        },
        other => return Err(Error::invalid(format!("unknown scenario kind `{other}`"))),
    };
    f.finish()?;
    // Surface parameter errors at parse time rather than at generation.
    scenario.blocks()?;
    Ok(scenario)
}

/// Inverse of [`parse_scenario`].
pub fn scenario_to_config(scenario: &Scenario) -> String {
    let mut out = format!("kind = {}\n", scenario.kind());
    let mut put = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    match scenario {
        Scenario::MeanChange { len, mu } => {
            put("T", len.to_string());
            put("mu", mu.to_string());
        }
        Scenario::VarianceChange { len, sigma2 } => {
            put("T", len.to_string());
            put("sigma2", sigma2.to_string());
        }
        Scenario::TailChange { len, nu } => {
            put("T", len.to_string());
            put("nu", nu.to_string());
        }
        Scenario::MvMean { len, dim, mu } => {
            put("T", len.to_string());
            put("d", dim.to_string());
            put("mu", mu.to_string());
        }
        Scenario::MvCorrelation { len, dim, rho } | Scenario::MvCovariance { len, dim, rho } => {
            put("T", len.to_string());
            put("d", dim.to_string());
            put("rho", rho.to_string());
        }
        Scenario::MvTail { len, dim, nu } => {
            put("T", len.to_string());
            put("d", dim.to_string());
            put("nu", nu.to_string());
        }
        Scenario::UnivariateExample => {}
        Scenario::Stpp { rate } => put("lambda", rate.to_string()),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_with_comments_and_defaults() {
        let sc = parse_scenario("# table 3\nkind = mv_correlation\nT = 600\nrho = 0.7 # strong\n")
            .unwrap();
        assert_eq!(
            sc,
            Scenario::MvCorrelation {
                len: 600,
                dim: 2,
                rho: 0.7
            }
        );
        assert_eq!(
            parse_scenario("kind = mv_covariance").unwrap(),
            Scenario::covariance_example()
        );
        assert_eq!(
            parse_scenario("kind=stpp").unwrap(),
            Scenario::stpp_example()
        );
    }

    #[test]
    fn rejects_bad_definitions() {
        assert!(parse_scenario("T = 3").is_err());
        assert!(parse_scenario("kind = mean_change\nT = 300").is_err());
        assert!(parse_scenario("kind = mean_change\nT = 300\nmu = 1\nsigma = 2").is_err());
        assert!(parse_scenario("kind = mean_change\nT = x\nmu = 1").is_err());
        assert!(parse_scenario("kind = variance_change\nT = 30\nsigma2 = -1").is_err());
        assert!(parse_scenario("kind = warp").is_err());
        assert!(parse_scenario("kind = mean_change\nkind = tail_change").is_err());
    }

    fn arb_scenario() -> impl Strategy<Value = Scenario> {
        let len = 3usize..2000;
        let v = -10.0f64..10.0;
        prop_oneof![
            (len.clone(), v.clone()).prop_map(|(len, mu)| Scenario::MeanChange { len, mu }),
            (len.clone(), 0.01f64..50.0)
                .prop_map(|(len, sigma2)| Scenario::VarianceChange { len, sigma2 }),
            (len.clone(), 1usize..5, v).prop_map(|(len, dim, mu)| Scenario::MvMean {
                len,
                dim,
                mu
            }),
            (len, 1usize..5, 0.0f64..0.95).prop_map(|(len, dim, rho)| Scenario::MvCorrelation {
                len,
                dim,
                rho
            }),
            (1.0f64..5000.0).prop_map(|rate| Scenario::Stpp { rate }),
            Just(Scenario::UnivariateExample),
        ]
    }

    proptest! {
        #[test]
        fn config_round_trips(sc in arb_scenario()) {
            prop_assert_eq!(parse_scenario(&scenario_to_config(&sc)).unwrap(), sc);
        }
    }
}
