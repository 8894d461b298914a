//! Scene representation: Gaussians, camera poses and their file formats.

mod camera;
mod gaussian;
pub mod ply;
pub mod sh;
pub mod synth;

pub use camera::{CameraPose, Intrinsics};
pub use gaussian::{Gaussian, GaussianCloud, GaussianId, SENTINEL_ID};
pub use sh::eval_sh_color;
pub use synth::{generate_synthetic_cloud, SceneSpec};
