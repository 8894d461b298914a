//! Projection, tile sorting and rasterization.

mod image;
pub mod project;
pub mod raster;
mod render;
mod stats;
mod table;

pub use image::{quantize, Image};
pub use project::{project_gaussian, project_gaussian_in, CullReason, PixelRect, ProjectedGaussian, ProjectedSet};
pub use raster::{compute_alpha, rasterize_tile, TileBounds, ALPHA_MAX, SIGNIFICANCE_CUTOFF};
pub use render::{
    build_table, render_frame, render_frame_cached, render_from_table, render_with_source, ShiftedTable, TileSource,
};
pub use stats::{CacheOutcome, FrameStats, PixelStats, TileStats};
pub use table::{bin_and_sort, Provenance, SortedSplattingTable, TileGrid, DEFAULT_TILE_SIZE};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderConfig {
    pub tile_size: u32,
    pub background: [f64; 3],
    /// Integration stops once transmittance drops below this.
    pub termination: f64,
    /// Worker threads; 0 uses the ambient rayon pool.
    pub workers: usize,
    /// How many leading significant IDs to record per pixel.
    pub record_k: usize,
    /// Record significant list positions per pixel (needed by the cycle models).
    pub record_trace: bool,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            tile_size: DEFAULT_TILE_SIZE,
            background: [0.0; 3],
            termination: 1e-4,
            workers: 0,
            record_k: 0,
            record_trace: false,
        }
    }
}

impl RenderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tile_size == 0 {
            return Err(Error::Config("tile_size must be positive".into()));
        }
        if !(self.termination >= 0.0 && self.termination < 1.0) {
            return Err(Error::Config(format!("termination {} must be in [0, 1)", self.termination)));
        }
        if !self.background.iter().all(|c| c.is_finite() && *c >= 0.0) {
            return Err(Error::Config("background must be finite and non-negative".into()));
        }
        Ok(())
    }
}
