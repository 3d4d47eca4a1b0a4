use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pressure closure p(rho).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateLaw {
    #[default]
    Pressureless,
    /// p = kappa * rho
    Linear { kappa: f64 },
    /// p = c^2 rho / 3
    Radiation { c_light: f64 },
}

impl StateLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            StateLaw::Pressureless => Ok(()),
            StateLaw::Linear { kappa } if kappa >= 0.0 && kappa.is_finite() => Ok(()),
            StateLaw::Linear { kappa } => Err(Error::Parameter(format!(
                "kappa must be >= 0 (got {kappa})"
            ))),
            StateLaw::Radiation { c_light } if c_light > 0.0 && c_light.is_finite() => Ok(()),
            StateLaw::Radiation { c_light } => Err(Error::Parameter(format!(
                "c_light must be > 0 (got {c_light})"
            ))),
        }
    }

    pub fn pressure(&self, rho: f64) -> f64 {
        match *self {
            StateLaw::Pressureless => 0.0,
            StateLaw::Linear { kappa } => kappa * rho,
            StateLaw::Radiation { c_light } => c_light * c_light * rho / 3.0,
        }
    }

    pub fn is_pressureless(&self) -> bool {
        matches!(self, StateLaw::Pressureless)
            || matches!(self, StateLaw::Linear { kappa } if *kappa == 0.0)
    }
}
