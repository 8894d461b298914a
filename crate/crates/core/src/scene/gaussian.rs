use nalgebra::{UnitQuaternion, Vector3};

use crate::{Error, Result};

/// Index of a Gaussian inside its cloud. Radiance-cache tags are built from these.
pub type GaussianId = u32;

/// Padding ID used when a ray finds fewer significant Gaussians than the cache key needs.
pub const SENTINEL_ID: GaussianId = u32::MAX;

const QUAT_NORM_TOL: f64 = 1e-6;

/// One anisotropic 3D Gaussian with activated parameters.
///
/// `scale` holds per-axis standard deviations and `opacity` is already passed
/// through the sigmoid, so nothing downstream deals with log/logit space.
#[derive(Clone, Debug, PartialEq)]
pub struct Gaussian {
    pub position: Vector3<f64>,
    pub rotation: UnitQuaternion<f64>,
    pub scale: Vector3<f64>,
    pub opacity: f64,
    /// Spherical-harmonic coefficients, one RGB triple per basis function.
    pub sh: Vec<Vector3<f64>>,
}

impl Gaussian {
    /// A degree-0 Gaussian whose rendered color (before clamping) is `rgb`.
    pub fn with_color(position: Vector3<f64>, scale: Vector3<f64>, opacity: f64, rgb: Vector3<f64>) -> Self {
        let dc = (rgb - Vector3::repeat(0.5)) / super::sh::SH_C0;
        Self { position, rotation: UnitQuaternion::identity(), scale, opacity, sh: vec![dc] }
    }

    /// SH degree implied by the coefficient count.
    pub fn sh_degree(&self) -> Result<usize> {
        super::sh::degree_for_len(self.sh.len())
    }

    pub fn validate(&self, index: usize) -> Result<()> {
        let bad = |reason: String| Error::InvalidGaussian { index, reason };
        let n = self.rotation.quaternion().norm();
        if (n - 1.0).abs() > QUAT_NORM_TOL {
            return Err(bad(format!("rotation norm {n}")));
        }
        if !self.position.iter().all(|v| v.is_finite()) {
            return Err(bad("non-finite position".into()));
        }
        if !self.scale.iter().all(|&s| s.is_finite() && s > 0.0) {
            return Err(bad(format!("scale {:?} must be finite and positive", self.scale)));
        }
        if !(0.0..=1.0).contains(&self.opacity) {
            return Err(bad(format!("opacity {} outside [0, 1]", self.opacity)));
        }
        self.sh_degree()?;
        if !self.sh.iter().all(|c| c.iter().all(|v| v.is_finite())) {
            return Err(bad("non-finite SH coefficient".into()));
        }
        Ok(())
    }
}

/// A scene. A Gaussian's ID is its index in `gaussians` and is stable for the
/// lifetime of the cloud.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GaussianCloud {
    pub gaussians: Vec<Gaussian>,
}

impl GaussianCloud {
    pub fn new(gaussians: Vec<Gaussian>) -> Result<Self> {
        let cloud = Self { gaussians };
        cloud.validate()?;
        Ok(cloud)
    }

    pub fn len(&self) -> usize {
        self.gaussians.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaussians.is_empty()
    }

    pub fn get(&self, id: GaussianId) -> Option<&Gaussian> {
        self.gaussians.get(id as usize)
    }

    pub fn validate(&self) -> Result<()> {
        if self.gaussians.len() >= SENTINEL_ID as usize {
            return Err(Error::Config(format!("{} Gaussians exceed the 32-bit ID space", self.gaussians.len())));
        }
        self.gaussians.iter().enumerate().try_for_each(|(i, g)| g.validate(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = (GaussianId, &Gaussian)> {
        self.gaussians.iter().enumerate().map(|(i, g)| (i as GaussianId, g))
    }
}
