use crate::rcache::CacheCounters;
use crate::scene::GaussianId;

use super::project::CullCounts;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CacheOutcome {
    /// Baseline mode, or fewer than `k` significant Gaussians before the list ended.
    #[default]
    Uncached,
    Hit,
    Miss,
}

/// What happened along one pixel's ray.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PixelStats {
    /// Gaussians whose alpha was evaluated; also the index at which iteration stopped.
    pub iterated: u32,
    pub significant: u32,
    /// Leading significant IDs in depth order (up to the recording depth).
    pub first_ids: Vec<GaussianId>,
    /// Transmittance fell below the termination threshold.
    pub terminated: bool,
    pub cache: CacheOutcome,
    /// List position (exclusive) at which the cache was queried.
    pub lookup_at: Option<u32>,
    /// List positions of significant Gaussians; filled only when tracing.
    pub significant_positions: Vec<u32>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TileStats {
    /// Tile coordinates in the rendered image.
    pub tile: (i32, i32),
    /// Length of the list the tile iterated.
    pub list_len: u32,
    /// Sorted, deduplicated IDs significant for at least one pixel of the tile.
    pub significant_ids: Vec<GaussianId>,
    /// The list came from outside the shared table's coverage and was empty.
    pub coverage_miss: bool,
}

/// Per-frame counters and traces.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FrameStats {
    pub width: u32,
    pub height: u32,
    pub tile_size: u32,
    pub tiles_x: u32,
    pub tiles_y: u32,
    /// Row-major, one per image pixel.
    pub pixels: Vec<PixelStats>,
    /// Row-major over the image tile grid.
    pub tiles: Vec<TileStats>,
    pub visible: usize,
    pub culled: CullCounts,
    pub sh_evals: usize,
    /// Keys in the sorted table the frame rendered from.
    pub table_keys: usize,
    pub cache: CacheCounters,
    pub coverage_misses: usize,
}

impl FrameStats {
    pub fn pixel(&self, x: u32, y: u32) -> &PixelStats {
        &self.pixels[(y * self.width + x) as usize]
    }

    pub fn tile(&self, tx: u32, ty: u32) -> &TileStats {
        &self.tiles[(ty * self.tiles_x + tx) as usize]
    }

    pub fn total_iterated(&self) -> u64 {
        self.pixels.iter().map(|p| p.iterated as u64).sum()
    }

    pub fn total_significant(&self) -> u64 {
        self.pixels.iter().map(|p| p.significant as u64).sum()
    }

    pub fn outcome_count(&self, outcome: CacheOutcome) -> usize {
        self.pixels.iter().filter(|p| p.cache == outcome).count()
    }
}
