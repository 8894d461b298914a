//! Procedural scenes for desk-scale experiments.
//!
//! Sampling uses ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded through
//! `SeedableRng::seed_from_u64`. ChaCha is a counter-based stream cipher with a
//! fixed, platform-independent output stream, so a `(SceneSpec, seed)` pair
//! names exactly one cloud everywhere.

use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::sh::coeff_count;
use super::{Gaussian, GaussianCloud};
use crate::{Error, Result};

fn default_dc_amplitude() -> f64 {
    1.5
}

fn default_rest_amplitude() -> f64 {
    0.2
}

/// JSON-serialisable description of a random scene.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub count: usize,
    #[serde(default)]
    pub center: [f64; 3],
    /// Half-extents of the axis-aligned box positions are drawn from.
    pub extent: [f64; 3],
    /// Per-axis scales are log-uniform in this range.
    pub scale_range: [f64; 2],
    pub opacity_range: [f64; 2],
    #[serde(default)]
    pub sh_degree: usize,
    /// DC coefficients are uniform in `[-a, a]`.
    #[serde(default = "default_dc_amplitude")]
    pub dc_amplitude: f64,
    /// Higher-order coefficients are uniform in `[-a, a]`.
    #[serde(default = "default_rest_amplitude")]
    pub rest_amplitude: f64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            count: 1000,
            center: [0.0; 3],
            extent: [1.0; 3],
            scale_range: [0.01, 0.05],
            opacity_range: [0.2, 1.0],
            sh_degree: 0,
            dc_amplitude: default_dc_amplitude(),
            rest_amplitude: default_rest_amplitude(),
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("scene spec: {m}")));
        if self.count == 0 {
            return bad("count must be at least 1");
        }
        if self.extent.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return bad("extent must be finite and non-negative");
        }
        let [slo, shi] = self.scale_range;
        if !(slo > 0.0 && slo <= shi && shi.is_finite()) {
            return bad("scale_range must satisfy 0 < lo <= hi");
        }
        let [olo, ohi] = self.opacity_range;
        if !(0.0..=1.0).contains(&olo) || !(0.0..=1.0).contains(&ohi) || olo > ohi {
            return bad("opacity_range must lie in [0, 1] with lo <= hi");
        }
        if self.sh_degree > super::sh::MAX_SH_DEGREE {
            return bad("sh_degree must be at most 3");
        }
        if !(self.dc_amplitude >= 0.0 && self.rest_amplitude >= 0.0) {
            return bad("amplitudes must be non-negative");
        }
        Ok(())
    }
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

pub fn generate_synthetic_cloud(spec: &SceneSpec, seed: u64) -> Result<GaussianCloud> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_coeffs = coeff_count(spec.sh_degree);
    let (log_lo, log_hi) = (spec.scale_range[0].ln(), spec.scale_range[1].ln());
    let mut gaussians = Vec::with_capacity(spec.count);
    for _ in 0..spec.count {
        let position = Vector3::from_fn(|i, _| spec.center[i] + uniform(&mut rng, -spec.extent[i], spec.extent[i]));
        let q = loop {
            let q = Quaternion::new(
                rng.sample::<f64, _>(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            );
            if q.norm() > 1e-9 {
                break q;
            }
        };
        let scale = Vector3::from_fn(|_, _| uniform(&mut rng, log_lo, log_hi).exp());
        let opacity = uniform(&mut rng, spec.opacity_range[0], spec.opacity_range[1]);
        let mut sh = Vec::with_capacity(n_coeffs);
        let a = spec.dc_amplitude;
        sh.push(Vector3::from_fn(|_, _| uniform(&mut rng, -a, a)));
        let r = spec.rest_amplitude;
        for _ in 1..n_coeffs {
            sh.push(Vector3::from_fn(|_, _| uniform(&mut rng, -r, r)));
        }
        gaussians.push(Gaussian { position, rotation: UnitQuaternion::from_quaternion(q), scale, opacity, sh });
    }
    GaussianCloud::new(gaussians)
}
