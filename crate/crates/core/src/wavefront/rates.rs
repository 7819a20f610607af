//! Minimal speed and exponential decay rates of the linearized wave.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `c* = 2 sqrt(1 - lambda_0)`.
pub fn critical_speed(lambda0: f64) -> Result<f64> {
    if !lambda0.is_finite() {
        return Err(Error::Parameter(format!(
            "lambda0 must be finite, got {lambda0}"
        )));
    }
    if lambda0 >= 1.0 {
        return Err(Error::NoFiniteSpeed(lambda0));
    }
    if lambda0 <= 0.0 {
        return Err(Error::Parameter(format!(
            "lambda0 must be positive, got {lambda0}"
        )));
    }
    Ok(2.0 * (1.0 - lambda0).sqrt())
}

/// Roots of `gamma^2 - c gamma + (1 - lambda_i) = 0` for one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModeRates {
    Real {
        gamma: f64,
        gamma_tilde: f64,
    },
    /// `c` is below this mode's critical speed; the discriminant is negative.
    Complex {
        discriminant: f64,
    },
}

impl ModeRates {
    pub fn gamma(&self) -> Option<f64> {
        match self {
            ModeRates::Real { gamma, .. } => Some(*gamma),
            ModeRates::Complex { .. } => None,
        }
    }

    pub fn gamma_tilde(&self) -> Option<f64> {
        match self {
            ModeRates::Real { gamma_tilde, .. } => Some(*gamma_tilde),
            ModeRates::Complex { .. } => None,
        }
    }
}

pub fn decay_rates(c: f64, lambdas: &[f64]) -> Vec<ModeRates> {
    lambdas
        .iter()
        .map(|&lam| {
            let mut disc = c * c - 4.0 * (1.0 - lam);
            // c = c* exactly produces a rounding-level negative discriminant
            if disc < 0.0 && disc.abs() <= 1e-12 * c * c.max(1.0) {
                disc = 0.0;
            }
            if disc < 0.0 {
                ModeRates::Complex { discriminant: disc }
            } else {
                let s = disc.sqrt();
                ModeRates::Real {
                    gamma: 0.5 * (c - s),
                    gamma_tilde: 0.5 * (c + s),
                }
            }
        })
        .collect()
}
