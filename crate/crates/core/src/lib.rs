//! Tile-based 3D Gaussian splatting with sort sharing across frames,
//! a radiance cache keyed by the first significant Gaussians of each ray,
//! and trace-driven cycle models of a SIMT GPU and a dedicated rasterizer.
//!
//! The crate is organised bottom-up:
//!
//! - [`scene`]: Gaussians, cameras, PLY IO, spherical harmonics, synthetic scenes.
//! - [`pipeline`]: projection, tile binning and depth sorting, rasterization.
//! - [`s2`]: the sort-sharing scheduler (pose prediction, expanded viewports).
//! - [`rcache`]: the set-associative radiance cache and its tile-group manager.
//! - [`accel`]: GPU warp-divergence and NRU cycle/energy models.
//! - [`metrics`]: PSNR, SSIM and the sparsity/coherence characterizations.
//! - [`loss`]: the scale-constrained fine-tuning penalty and its gradient.
//! - [`trace`]: pose-trace files.

pub mod accel;
pub mod error;
pub mod loss;
pub mod metrics;
pub mod pipeline;
pub mod rcache;
pub mod s2;
pub mod scene;
pub mod trace;

pub use error::{Error, Result};
pub use pipeline::{render_frame, FrameStats, Image, RenderConfig, SortedSplattingTable};
pub use scene::{CameraPose, Gaussian, GaussianCloud, GaussianId, Intrinsics, SENTINEL_ID};
