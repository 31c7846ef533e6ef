//! Line-of-sight effective channel gain and path-loss models.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::population::UserSample;

/// Below this `|sin(pi x / 2)|` the array factor is replaced by its limit.
const SINGULARITY_EPS: f64 = 1e-9;

/// Half-wavelength uniform linear array steered to `beam_angle`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayConfig {
    elements: u32,
    beam_angle: f64,
}

impl ArrayConfig {
    pub fn new(elements: u32, beam_angle: f64) -> Result<Self> {
        ensure(elements >= 1, "antenna elements", elements as f64, "must be >= 1")?;
        ensure(beam_angle.is_finite(), "beam angle", beam_angle, "must be finite")?;
        Ok(Self { elements, beam_angle })
    }

    pub fn elements(&self) -> u32 {
        self.elements
    }

    pub fn beam_angle(&self) -> f64 {
        self.beam_angle
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PathLossModel {
    /// `1 + d^exponent`.
    DistancePower { exponent: f64 },
    /// Close-in free-space reference distance model (1 m reference),
    /// `32.4 + 21 log10(d) + 20 log10(fc)` dB with `fc` in GHz.
    CloseIn { carrier_ghz: f64 },
}

impl PathLossModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PathLossModel::DistancePower { exponent } => ensure(
                exponent.is_finite() && exponent > 0.0,
                "path loss exponent",
                exponent,
                "must be finite and > 0",
            ),
            PathLossModel::CloseIn { carrier_ghz } => ensure(
                carrier_ghz.is_finite() && carrier_ghz > 0.0,
                "carrier frequency",
                carrier_ghz,
                "must be finite and > 0",
            ),
        }
    }
}

/// Normalised array factor `|sin(pi M x / 2) / (M sin(pi x / 2))|^2` at
/// `x = sin(beam) - sin(theta)`.
pub fn fejer_kernel(x: f64, elements: u32) -> f64 {
    let den = (0.5 * PI * x).sin();
    if den.abs() < SINGULARITY_EPS {
        return 1.0;
    }
    let m = f64::from(elements);
    let ratio = (0.5 * PI * m * x).sin() / (m * den);
    (ratio * ratio).min(1.0)
}

pub fn array_gain_factor(theta: f64, theta_bar: f64, elements: u32) -> f64 {
    fejer_kernel(theta_bar.sin() - theta.sin(), elements)
}

pub fn path_loss_linear(model: &PathLossModel, distance: f64) -> Result<f64> {
    ensure(distance.is_finite() && distance >= 0.0, "distance", distance, "must be finite and >= 0")?;
    match *model {
        PathLossModel::DistancePower { exponent } => Ok(1.0 + distance.powf(exponent)),
        PathLossModel::CloseIn { carrier_ghz } => {
            if distance < 1.0 {
                return Err(Error::BelowReferenceDistance(distance));
            }
            let db = 32.4 + 21.0 * distance.log10() + 20.0 * carrier_ghz.log10();
            Ok(db_to_linear(db))
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// Deterministic part of the gain, `M * F / PL`, for a user at `elevation`.
pub fn gain_factor(elevation: f64, path_loss: f64, array: &ArrayConfig) -> f64 {
    f64::from(array.elements) * array_gain_factor(elevation, array.beam_angle, array.elements) / path_loss
}

/// Effective channel gain `|alpha|^2 M F(theta, theta_bar) / PL` of a user
/// whose path loss has already been attached.
pub fn effective_gain(user: &UserSample, array: &ArrayConfig) -> f64 {
    user.fading_power() * gain_factor(user.elevation, user.path_loss, array)
}
