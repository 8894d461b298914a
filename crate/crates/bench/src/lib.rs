//! Deterministic workloads shared by the criterion benches.

use nalgebra::{UnitQuaternion, Vector3};
use splatcache_core::scene::{generate_synthetic_cloud, SceneSpec};
use splatcache_core::trace::linear_trace;
use splatcache_core::{CameraPose, GaussianCloud};

/// A slab of Gaussians in front of [`camera`], dense enough that most tiles hold long lists.
pub fn scene(count: usize, sh_degree: usize) -> GaussianCloud {
    let spec = SceneSpec {
        count,
        extent: [1.6, 1.6, 0.5],
        scale_range: [0.01, 0.06],
        opacity_range: [0.2, 1.0],
        sh_degree,
        ..Default::default()
    };
    generate_synthetic_cloud(&spec, 0x5eed).expect("valid bench scene")
}

pub fn camera(width: u32, height: u32) -> CameraPose {
    CameraPose::simple(Vector3::new(0.0, 0.0, -5.0), UnitQuaternion::identity(), width as f64 * 0.9, width, height)
}

/// A slow sideways pan, the regime sort sharing and caching target.
pub fn pan(width: u32, height: u32, frames: usize) -> Vec<CameraPose> {
    linear_trace(&camera(width, height), Vector3::new(0.002, 0.0, 0.0), frames)
}
