//! Flat `key = value` experiment configs.
//!
//! ```text
//! # randomized response at e^eps = 9
//! p = 0.1
//! eps = ln(9)
//! n = 2000
//! seed = 7
//! ```
//!
//! Values are numbers, `ln(x)`, or comma lists of either. `out` takes a
//! path. Unknown keys and repeated keys are errors.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{config_err, Result};

pub const KEYS: &[&str] = &[
    "p", "eps", "delta", "n", "k", "m", "trials", "seed", "d", "alpha", "beta", "gamma", "xi", "out",
];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, Vec<String>>,
}

fn parse_number(key: &str, token: &str) -> Result<f64> {
    let bad = || config_err(format!("{key}: cannot read {token:?} as a number"));
    let v = match token.strip_prefix("ln(").and_then(|t| t.strip_suffix(')')) {
        Some(inner) => {
            let x: f64 = inner.trim().parse().map_err(|_| bad())?;
            if !(x > 0.0) {
                return Err(config_err(format!("{key}: ln of non-positive {x}")));
            }
            x.ln()
        }
        None => token.parse().map_err(|_| bad())?,
    };
    if v.is_nan() {
        return Err(bad());
    }
    Ok(v)
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("line {}: expected `key = value`", no + 1)))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(config_err(format!("line {}: unknown key {key:?}", no + 1)));
            }
            let tokens: Vec<String> = value.split(',').map(|t| t.trim().to_string()).collect();
            if tokens.iter().any(String::is_empty) {
                return Err(config_err(format!("line {}: empty value for {key}", no + 1)));
            }
            if key == "out" {
                if tokens.len() != 1 {
                    return Err(config_err("out takes a single path"));
                }
            } else if key == "seed" {
                parse_seed(&tokens)?;
            } else {
                for t in &tokens {
                    parse_number(key, t)?;
                }
            }
            if values.insert(key.to_string(), tokens).is_some() {
                return Err(config_err(format!("line {}: {key} set twice", no + 1)));
            }
        }
        Ok(Self { values })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    /// Overrides a numeric key, as the CLI flags do.
    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.values.insert(key.to_string(), vec![value.to_string()]);
    }

    pub fn seed(&self) -> Result<u64> {
        parse_seed(self.values.get("seed").ok_or_else(|| config_err("seed is required"))?)
    }

    pub fn out(&self) -> Option<&str> {
        self.values.get("out").map(|v| v[0].as_str())
    }

    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.values
            .get(key)
            .map(|v| v.iter().map(|t| parse_number(key, t)).collect())
            .transpose()
    }

    pub fn list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        Ok(self.list(key)?.unwrap_or_else(|| default.to_vec()))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.list(key)? {
            None => Ok(default),
            Some(v) if v.len() == 1 => Ok(v[0]),
            Some(_) => Err(config_err(format!("{key} takes a single value"))),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        let v = self.f64_or(key, default as f64)?;
        as_count(key, v)
    }

    pub fn usize_list_or(&self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        match self.list(key)? {
            None => Ok(default.to_vec()),
            Some(v) => v.into_iter().map(|x| as_count(key, x)).collect(),
        }
    }
}

fn as_count(key: &str, v: f64) -> Result<usize> {
    if v < 0.0 || v.fract() != 0.0 || v > 1e15 {
        return Err(config_err(format!("{key} must be a non-negative integer, got {v}")));
    }
    Ok(v as usize)
}

fn parse_seed(tokens: &[String]) -> Result<u64> {
    match tokens {
        [t] => t
            .parse()
            .map_err(|_| config_err(format!("seed must be an unsigned integer, got {t:?}"))),
        _ => Err(config_err("seed takes a single value")),
    }
}
