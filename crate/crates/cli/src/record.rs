// SPDX-License-Identifier: MIT OR Apache-2.0

//! Structured run output.

use energy_cp::{AggloResult, Alpha, DivisiveConfig, DivisiveResult, Penalty};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub sha256: String,
    pub rows: usize,
    pub columns: usize,
}

impl InputDigest {
    pub fn new(bytes: &[u8], rows: usize, columns: usize) -> Self {
        Self {
            sha256: hex::encode(Sha256::digest(bytes)),
            rows,
            columns,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggloSettings {
    pub alpha: Alpha,
    /// `width:N` or `file:<sha256>`.
    pub member: String,
    pub initial_segments: usize,
    pub penalty: Penalty,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandComparison {
    pub observations: usize,
    pub rand_index: f64,
    pub adjusted_rand_index: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Run {
    Divisive {
        input: InputDigest,
        config: DivisiveConfig,
        result: DivisiveResult,
    },
    Agglo {
        input: InputDigest,
        config: AggloSettings,
        result: AggloResult,
    },
    RandIndex {
        u: InputDigest,
        v: InputDigest,
        result: RandComparison,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub version: String,
    /// Only present when timing was requested, so that default output is
    /// reproducible byte for byte.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
    pub run: Run,
}

impl RunRecord {
    pub fn new(run: Run) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_owned(),
            elapsed_ms: None,
            run,
        }
    }

    pub fn to_toml(&self) -> Result<String, toml::ser::Error> {
        toml::to_string(self)
    }

    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }
}
