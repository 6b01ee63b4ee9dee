//! Campaign configuration files and value parsers shared by the flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::noise::{DpVariant, NoiseModel};

/// A p grid as written on the command line: `start:stop:step` (inclusive)
/// or a comma-separated list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PGrid {
    Spec(String),
    Values(Vec<f64>),
}

impl PGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            PGrid::Spec(s) => parse_p_grid(s),
            PGrid::Values(v) => {
                if v.is_empty() {
                    return invalid("p grid is empty");
                }
                Ok(v.clone())
            }
        }
    }
}

/// Everything a campaign needs; every field may come from a file, and flags
/// override whatever the file sets.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub model: Option<String>,
    pub schedule: Option<String>,
    pub distances: Option<Vec<usize>>,
    pub p_grid: Option<PGrid>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub rounds: Option<usize>,
    pub dp_variant: Option<u32>,
    pub out: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl CampaignConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidInput(format!("cannot read config {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| Error::InvalidInput(format!("bad config {}: {e}", path.display())))
    }
}

pub fn parse_model(s: &str) -> Result<NoiseModel> {
    match s {
        "capacity" | "code_capacity" => Ok(NoiseModel::CodeCapacity),
        "phenom" | "phenomenological" => Ok(NoiseModel::Phenomenological),
        "circuit" | "circuit_level" => Ok(NoiseModel::CircuitLevel),
        other => invalid(format!(
            "unknown model '{other}' (expected capacity, phenom or circuit)"
        )),
    }
}

pub fn parse_dp_variant(v: u32) -> Result<DpVariant> {
    match v {
        16 => Ok(DpVariant::SixteenUniform),
        15 => Ok(DpVariant::FifteenNontrivial),
        other => invalid(format!("--dp-variant must be 16 or 15, got {other}")),
    }
}

pub fn parse_distances(s: &str) -> Result<Vec<usize>> {
    let out = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidInput(format!("bad distance '{t}'")))
        })
        .collect::<Result<Vec<_>>>()?;
    if out.is_empty() {
        return invalid("no distances given");
    }
    Ok(out)
}

fn parse_f64(t: &str) -> Result<f64> {
    let v: f64 = t
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad number '{t}'")))?;
    if !v.is_finite() {
        return invalid(format!("bad number '{t}'"));
    }
    Ok(v)
}

/// Grid points are rounded to 12 decimals so `0.02:0.04:0.002` yields the
/// literal values rather than accumulated float error.
pub fn parse_p_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (a, b, h) = (parse_f64(start)?, parse_f64(stop)?, parse_f64(step)?);
            if !(h > 0.0) || b < a {
                return invalid(format!("bad grid '{s}': need start <= stop and step > 0"));
            }
            let count = ((b - a) / h + 1e-9).floor() as usize + 1;
            if count > 100_000 {
                return invalid(format!("grid '{s}' has {count} points"));
            }
            Ok((0..count)
                .map(|i| ((a + i as f64 * h) * 1e12).round() / 1e12)
                .collect())
        }
        [list] => list.split(',').map(parse_f64).collect(),
        _ => invalid(format!("bad grid '{s}'")),
    }
}
