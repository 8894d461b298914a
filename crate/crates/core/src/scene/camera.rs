use nalgebra::{Matrix3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Pinhole intrinsics in pixels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

/// Camera pose plus intrinsics and image size.
///
/// `orientation` rotates camera coordinates into world coordinates. The camera
/// looks down its local +z axis with +x right and +y down.
#[derive(Clone, Debug, PartialEq)]
pub struct CameraPose {
    pub position: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
    pub intrinsics: Intrinsics,
    pub width: u32,
    pub height: u32,
    pub near: f64,
    pub far: f64,
}

impl CameraPose {
    /// Camera at `position` looking at `target`; `up` is the world direction that
    /// appears toward the top of the image.
    pub fn look_at(
        position: Vector3<f64>,
        target: Vector3<f64>,
        up: Vector3<f64>,
        intrinsics: Intrinsics,
        width: u32,
        height: u32,
    ) -> Self {
        let forward = (target - position).normalize();
        let right = forward.cross(&up).normalize();
        let down = forward.cross(&right);
        let rot = Matrix3::from_columns(&[right, down, forward]);
        let orientation = UnitQuaternion::from_matrix(&rot);
        Self { position, orientation, intrinsics, width, height, near: 0.01, far: 1000.0 }
    }

    /// Centered intrinsics with the same focal length on both axes.
    pub fn simple(
        position: Vector3<f64>,
        orientation: UnitQuaternion<f64>,
        focal: f64,
        width: u32,
        height: u32,
    ) -> Self {
        Self {
            position,
            orientation,
            intrinsics: Intrinsics { fx: focal, fy: focal, cx: width as f64 / 2.0, cy: height as f64 / 2.0 },
            width,
            height,
            near: 0.01,
            far: 1000.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidPose(m));
        if !(self.near > 0.0 && self.far > self.near) {
            return bad(format!("near {} / far {} must satisfy 0 < near < far", self.near, self.far));
        }
        if self.width == 0 || self.height == 0 {
            return bad("image size must be non-zero".into());
        }
        let k = &self.intrinsics;
        if !(k.fx > 0.0 && k.fy > 0.0 && k.cx.is_finite() && k.cy.is_finite()) {
            return bad(format!("bad intrinsics {k:?}"));
        }
        if !self.position.iter().all(|v| v.is_finite()) {
            return bad("non-finite position".into());
        }
        let n = self.orientation.quaternion().norm();
        if !n.is_finite() || (n - 1.0).abs() > 1e-6 {
            return bad(format!("orientation norm {n}"));
        }
        Ok(())
    }

    /// Rotation taking world directions into camera coordinates.
    pub fn world_to_camera_rotation(&self) -> Matrix3<f64> {
        self.orientation.to_rotation_matrix().matrix().transpose()
    }

    pub fn world_to_camera(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.orientation.inverse_transform_vector(&(p - self.position))
    }

    /// Pixel coordinates of a camera-space point (no clipping).
    pub fn project_camera_point(&self, p: &Vector3<f64>) -> (f64, f64) {
        let k = &self.intrinsics;
        (k.fx * p.x / p.z + k.cx, k.fy * p.y / p.z + k.cy)
    }
}
