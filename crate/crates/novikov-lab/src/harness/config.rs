//! Plain-text `key = value` experiment configuration.
//!
//! Recognized keys: `s`, `p`, `r`, `n_list`, `T0`, `cfl`, `L`, `N_policy`,
//! `out_dir`. Anything else is an error. `n_list` accepts a comma list
//! (`4,5,6`) or an inclusive range (`4..8`); `p` and `r` accept `inf`.
//! `N_policy` is the exponent offset of the per-index grid size
//! `N(n) = 2^(n + N_policy)`.

use std::f64::consts::PI;
use std::path::PathBuf;

use thiserror::Error;

use crate::field::LpExponent;
use crate::paley::BesovIndex;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Malformed { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: bad value for `{key}`: {reason}")]
    BadValue {
        line: usize,
        key: String,
        reason: String,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Orchestration parameters for one experiment run.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub idx: BesovIndex,
    pub n_list: Vec<u32>,
    pub t0: f64,
    pub cfl: f64,
    pub length: f64,
    /// `N(n) = 2^(n + n_policy)`.
    pub n_policy: u32,
    pub out_dir: PathBuf,
}

/// Snapshots per run, spread uniformly over `[0, T0]` endpoints included.
pub const SAMPLE_COUNT: usize = 16;

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            idx: BesovIndex::new(2.0, LpExponent::TWO, LpExponent::TWO),
            n_list: vec![4, 5, 6, 7, 8],
            t0: 0.25,
            cfl: 0.5,
            length: 256.0 * PI,
            n_policy: 11,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    /// Grid size for cell `n` under the policy.
    pub fn grid_points(&self, n: u32) -> usize {
        1usize << (n + self.n_policy)
    }

    /// Sample times for the evolutions.
    pub fn sample_times(&self) -> Vec<f64> {
        (0..SAMPLE_COUNT)
            .map(|i| self.t0 * i as f64 / (SAMPLE_COUNT - 1) as f64)
            .collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_list.is_empty() {
            return Err(ConfigError::Invalid("n_list must not be empty".into()));
        }
        for &n in &self.n_list {
            if n < 3 {
                return Err(ConfigError::Invalid(format!(
                    "n_list entries must be >= 3, got {n}"
                )));
            }
            if n + self.n_policy > 26 {
                return Err(ConfigError::Invalid(format!(
                    "n = {n} with N_policy = {} needs 2^{} grid points",
                    self.n_policy,
                    n + self.n_policy
                )));
            }
        }
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(ConfigError::Invalid(format!("T0 must be positive, got {}", self.t0)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(ConfigError::Invalid(format!(
                "cfl must lie in (0, 1], got {}",
                self.cfl
            )));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(ConfigError::Invalid(format!(
                "L must be positive, got {}",
                self.length
            )));
        }
        Ok(())
    }
}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    let v = match value {
        "inf" | "infinity" => f64::INFINITY,
        other => other.parse::<f64>().map_err(|e| ConfigError::BadValue {
            line,
            key: key.to_string(),
            reason: e.to_string(),
        })?,
    };
    Ok(v)
}

fn parse_exponent(line: usize, key: &str, value: &str) -> Result<LpExponent, ConfigError> {
    LpExponent::new(parse_f64(line, key, value)?).map_err(|e| ConfigError::BadValue {
        line,
        key: key.to_string(),
        reason: e.to_string(),
    })
}

fn parse_n_list(line: usize, value: &str) -> Result<Vec<u32>, ConfigError> {
    let bad = |reason: &str| ConfigError::BadValue {
        line,
        key: "n_list".into(),
        reason: reason.to_string(),
    };
    if let Some((a, b)) = value.split_once("..") {
        let lo: u32 = a.trim().parse().map_err(|_| bad("range start"))?;
        let hi: u32 = b.trim().parse().map_err(|_| bad("range end"))?;
        if hi < lo {
            return Err(bad("empty range"));
        }
        return Ok((lo..=hi).collect());
    }
    value
        .split(',')
        .map(|tok| tok.trim().parse::<u32>().map_err(|_| bad(tok)))
        .collect()
}

/// Parses the `key = value` format. Blank lines and `#` comments are
/// skipped; unknown and duplicate keys are rejected.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::default();
    let mut seen: Vec<String> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed.split_once('=').ok_or(ConfigError::Malformed {
            line,
            text: trimmed.to_string(),
        })?;
        let key = key.trim();
        let value = value.trim();
        if seen.iter().any(|k| k == key) {
            return Err(ConfigError::DuplicateKey {
                line,
                key: key.to_string(),
            });
        }
        seen.push(key.to_string());
        match key {
            "s" => cfg.idx.s = parse_f64(line, key, value)?,
            "p" => cfg.idx.p = parse_exponent(line, key, value)?,
            "r" => cfg.idx.r = parse_exponent(line, key, value)?,
            "n_list" => cfg.n_list = parse_n_list(line, value)?,
            "T0" => cfg.t0 = parse_f64(line, key, value)?,
            "cfl" => cfg.cfl = parse_f64(line, key, value)?,
            "L" => cfg.length = parse_f64(line, key, value)?,
            "N_policy" => {
                cfg.n_policy = value.parse().map_err(|_| ConfigError::BadValue {
                    line,
                    key: key.to_string(),
                    reason: "expected a small nonnegative integer".into(),
                })?
            }
            "out_dir" => cfg.out_dir = PathBuf::from(value),
            other => {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: other.to_string(),
                })
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}
