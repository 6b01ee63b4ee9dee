//! Lower bounds on the threshold from counting self-avoiding walks.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Best known estimate of the 4.8.8 connective constant.
pub const MU_488: f64 = 1.808_830_01;
/// Largest vertex degree of the space-time lattice used for
/// phenomenological noise.
pub const DELTA_MAX_PRISM: u32 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SawModel {
    Capacity,
    #[serde(alias = "phenomenological")]
    Phenom,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SawParams {
    pub mu: f64,
    pub delta_max: u32,
}

impl Default for SawParams {
    fn default() -> Self {
        SawParams {
            mu: MU_488,
            delta_max: DELTA_MAX_PRISM,
        }
    }
}

/// Smaller root of `p (1 - p) = c`, written to avoid cancellation.
pub fn smaller_root(c: f64) -> Result<f64> {
    if !(c > 0.0 && c <= 0.25) {
        return invalid(format!("p(1-p) = {c} has no root in (0, 1/2]"));
    }
    Ok(2.0 * c / (1.0 + (1.0 - 4.0 * c).max(0.0).sqrt()))
}

/// The right-hand side `c` of `p (1 - p) <= c`.
pub fn walk_constant(params: &SawParams, model: SawModel) -> Result<f64> {
    match model {
        SawModel::Capacity => {
            if !(params.mu > 1.0 && params.mu.is_finite()) {
                return invalid(format!(
                    "connective constant must exceed 1, got {}",
                    params.mu
                ));
            }
            Ok(1.0 / (4.0 * params.mu * params.mu))
        }
        SawModel::Phenom => {
            if params.delta_max < 3 {
                return invalid(format!(
                    "maximum degree must be at least 3, got {}",
                    params.delta_max
                ));
            }
            // A walk leaving a vertex has at most delta_max - 1 fresh edges.
            let g = f64::from(params.delta_max - 1);
            Ok(1.0 / (4.0 * g * g))
        }
    }
}

pub fn saw_bound(params: &SawParams, model: SawModel) -> Result<f64> {
    smaller_root(walk_constant(params, model)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residual_is_tiny() {
        for mu in [1.05, 1.5, MU_488, 2.5, 4.0] {
            let p = saw_bound(&SawParams { mu, delta_max: 10 }, SawModel::Capacity).unwrap();
            assert!((p * (1.0 - p) * 4.0 * mu * mu - 1.0).abs() < 1e-12);
            assert!(p > 0.0 && p <= 0.5);
        }
    }

    #[test]
    fn round_trip_quarter() {
        let mu = (1.0f64 / (4.0 * 0.25 * 0.75)).sqrt();
        let p = saw_bound(&SawParams { mu, delta_max: 10 }, SawModel::Capacity).unwrap();
        assert!((p - 0.25).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_params() {
        let bad = SawParams {
            mu: 1.0,
            delta_max: 2,
        };
        assert!(saw_bound(&bad, SawModel::Capacity).is_err());
        assert!(saw_bound(&bad, SawModel::Phenom).is_err());
    }
}
