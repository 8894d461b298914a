//! Scale-constrained fine-tuning penalty.
//!
//! `L_scale` is the mean over Gaussians of `max(0, S - threshold)^2`, where `S`
//! is the geometric mean of the three per-axis scales. It is added to the image
//! loss as `L_total = L_orig + weight * L_scale`.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::scene::{Gaussian, GaussianCloud};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScaleLossConfig {
    pub weight: f64,
    pub threshold: f64,
}

impl Default for ScaleLossConfig {
    fn default() -> Self {
        Self { weight: 1.0, threshold: 0.05 }
    }
}

impl ScaleLossConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            return Err(Error::Config(format!("scale threshold {} must be positive", self.threshold)));
        }
        if !(self.weight >= 0.0 && self.weight.is_finite()) {
            return Err(Error::Config(format!("loss weight {} must be non-negative", self.weight)));
        }
        Ok(())
    }
}

pub fn geometric_mean_scale(g: &Gaussian) -> f64 {
    (g.scale.x * g.scale.y * g.scale.z).cbrt()
}

/// Unweighted `L_scale`. Multiply by `cfg.weight` for the contribution to the total loss.
pub fn l_scale(cloud: &GaussianCloud, cfg: &ScaleLossConfig) -> Result<f64> {
    cfg.validate()?;
    if cloud.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = cloud
        .gaussians
        .iter()
        .map(|g| {
            let excess = (geometric_mean_scale(g) - cfg.threshold).max(0.0);
            excess * excess
        })
        .sum();
    Ok(sum / cloud.len() as f64)
}

/// Gradient of [`l_scale`] with respect to each Gaussian's scale vector.
///
/// `dS/ds_x = S / (3 s_x)`; Gaussians at or below the threshold get zero.
pub fn l_scale_grad(cloud: &GaussianCloud, cfg: &ScaleLossConfig) -> Result<Vec<Vector3<f64>>> {
    cfg.validate()?;
    let n = cloud.len().max(1) as f64;
    Ok(cloud
        .gaussians
        .iter()
        .map(|g| {
            let s = geometric_mean_scale(g);
            let excess = s - cfg.threshold;
            if excess <= 0.0 {
                return Vector3::zeros();
            }
            let outer = 2.0 * excess / n;
            g.scale.map(|si| outer * s / (3.0 * si))
        })
        .collect())
}
