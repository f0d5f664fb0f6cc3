//! TOML configuration.
//!
//! ```toml
//! [polynomials]
//! 4 = "0x19"
//!
//! [optimizer]
//! l_d = 2
//! l_r = 2
//! seed = 0
//! runs = 100
//! algorithm = "fast"
//! strategy = "differential_first"
//! recurrence_only = false
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use cfft_core::cse::{Algorithm, CseConfig, Strategy};
use cfft_core::FieldSpec;
use serde::Deserialize;

use crate::error::{CliError, Result};
use crate::formats::read_text;

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub polynomials: BTreeMap<String, String>,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    pub l_d: Option<usize>,
    pub l_r: Option<usize>,
    pub seed: Option<u64>,
    pub runs: Option<usize>,
    pub algorithm: Option<String>,
    pub strategy: Option<String>,
    pub recurrence_only: Option<bool>,
}

pub fn parse_algorithm(s: &str) -> Result<Algorithm> {
    match s {
        "classic" => Ok(Algorithm::Classic),
        "fast" => Ok(Algorithm::Fast),
        _ => Err(CliError::BadInput(format!("unknown algorithm `{s}` (classic|fast)"))),
    }
}

pub fn parse_strategy(s: &str) -> Result<Strategy> {
    match s.replace('-', "_").as_str() {
        "differential_first" => Ok(Strategy::DifferentialFirst),
        "greedy" => Ok(Strategy::Greedy),
        _ => Err(CliError::BadInput(format!("unknown strategy `{s}` (differential_first|greedy)"))),
    }
}

fn parse_hex(s: &str) -> Option<u32> {
    let s = s.trim();
    let digits = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).unwrap_or(s);
    u32::from_str_radix(digits, 16).ok()
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| CliError::BadInput(format!("config: {e}")))?;
        for (m, poly) in &cfg.polynomials {
            if m.parse::<u32>().is_err() || parse_hex(poly).is_none() {
                return Err(CliError::BadInput(format!("config: bad polynomial entry {m} = {poly:?}")));
            }
        }
        Ok(cfg)
    }

    /// The field of degree `m`, using the configured polynomial if any.
    pub fn field(&self, m: u32) -> Result<FieldSpec> {
        let poly = self
            .polynomials
            .iter()
            .find(|(k, _)| k.parse::<u32>().ok() == Some(m))
            .and_then(|(_, v)| parse_hex(v));
        Ok(match poly {
            Some(p) => FieldSpec::with_poly(m, p)?,
            None => FieldSpec::new(m)?,
        })
    }

    /// Optimizer settings from the file on top of the defaults for a
    /// matrix with `n_rows` rows.
    pub fn cse(&self, n_rows: usize) -> Result<CseConfig> {
        let o = &self.optimizer;
        let mut c = CseConfig::for_rows(n_rows);
        if let Some(v) = o.l_d {
            c.l_d = v;
        }
        if let Some(v) = o.l_r {
            c.l_r = v;
        }
        if let Some(v) = o.seed {
            c.seed = v;
        }
        if let Some(a) = &o.algorithm {
            c.algorithm = parse_algorithm(a)?;
        }
        if let Some(s) = &o.strategy {
            c.strategy = parse_strategy(s)?;
        }
        if let Some(v) = o.recurrence_only {
            c.recurrence_only = v;
        }
        Ok(c)
    }
}
