//! Sweep configuration, read from a flat TOML file.
//!
//! ```toml
//! S_values = [10, 100]
//! pairs = [[4, 2], [6, 5]]        # explicit (s, l) cells
//! l_over_s = ["1/2", "0.8"]       # and/or ratios, realised with s = s_denominator
//! s_denominator = 240
//! policies = ["two-phase", "always-s", "ratio:2/1"]
//! adversary = "adaptive"          # adaptive | example1..example4 | random
//! best_response = true
//! seed = 7
//! trials = 100                    # games per cell for the random adversary
//! output = "sweep.csv"            # omit to print to stdout
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::adversary::Adversary;
use crate::algorithms::Policy;
use crate::error::{Error, Result};
use crate::model::Params;
use crate::ratio::Ratio;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(rename = "S_values")]
    s_values: Vec<u64>,
    #[serde(default)]
    pairs: Vec<[u64; 2]>,
    #[serde(default)]
    l_over_s: Vec<String>,
    #[serde(default = "default_denominator")]
    s_denominator: u64,
    #[serde(default = "default_policies")]
    policies: Vec<String>,
    #[serde(default = "default_adversary")]
    adversary: String,
    #[serde(default)]
    best_response: bool,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_trials")]
    trials: u64,
    output: Option<PathBuf>,
}

fn default_denominator() -> u64 {
    240
}

fn default_policies() -> Vec<String> {
    vec!["two-phase".into()]
}

fn default_adversary() -> String {
    "adaptive".into()
}

fn default_trials() -> u64 {
    1000
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdversaryMode {
    Fixed(Adversary),
    /// `trials` seeded random streams per cell; the worst game is reported.
    Random,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepConfig {
    pub params: Vec<Params>,
    /// `(s, l)` cells, deduplicated and sorted.
    pub cells: Vec<(u64, u64)>,
    pub policies: Vec<Policy>,
    pub adversary: AdversaryMode,
    pub seed: u64,
    pub trials: u64,
    pub output: Option<PathBuf>,
}

impl SweepConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let params = raw
            .s_values
            .iter()
            .map(|&s| Params::new(s))
            .collect::<Result<Vec<_>>>()?;
        if params.is_empty() {
            return Err(Error::Config("S_values must not be empty".into()));
        }

        let mut cells: Vec<(u64, u64)> = raw.pairs.iter().map(|[s, l]| (*s, *l)).collect();
        for x in &raw.l_over_s {
            let x = parse_ratio(x)?;
            cells.push(cell_for(x, raw.s_denominator)?);
        }
        cells.sort_unstable();
        cells.dedup();
        if cells.is_empty() {
            return Err(Error::Config("the (s, l) grid is empty".into()));
        }

        let policies = raw
            .policies
            .iter()
            .map(|id| id.parse())
            .collect::<Result<Vec<Policy>>>()?;
        if policies.is_empty() {
            return Err(Error::Config("policies must not be empty".into()));
        }

        let adversary = if raw.adversary == "random" {
            AdversaryMode::Random
        } else {
            AdversaryMode::Fixed(Adversary::parse(&raw.adversary, raw.best_response)?)
        };

        Ok(SweepConfig {
            params,
            cells,
            policies,
            adversary,
            seed: raw.seed,
            trials: raw.trials,
            output: raw.output,
        })
    }
}

/// Parses `"p/q"`, an integer, or a plain decimal such as `"0.25"`.
pub fn parse_ratio(text: &str) -> Result<Ratio> {
    let bad = || Error::Config(format!("cannot read `{text}` as a ratio"));
    let text = text.trim();
    if let Some((int, frac)) = text.split_once('.') {
        if frac.is_empty() || frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let scale = 10i128.pow(frac.len() as u32);
        let int: i128 = if int.is_empty() {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        let frac: i128 = frac.parse().map_err(|_| bad())?;
        return Ok(Ratio::new(int * scale + frac, scale));
    }
    let r: Ratio = text.parse().map_err(|_| bad())?;
    if r < Ratio::from_integer(0) {
        return Err(bad());
    }
    Ok(r)
}

/// The integral cell `(s, l)` with `s = denominator` and `l / s = x`.
pub fn cell_for(x: Ratio, denominator: u64) -> Result<(u64, u64)> {
    let l = x * Ratio::from_integer(denominator as i128);
    if !l.is_integer() || l < Ratio::from_integer(0) {
        return Err(Error::Config(format!(
            "l/s = {x} is not realisable with s = {denominator}"
        )));
    }
    Ok((denominator, l.to_integer() as u64))
}
