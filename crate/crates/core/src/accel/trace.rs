use serde::{Deserialize, Serialize};

use crate::pipeline::{CacheOutcome, FrameStats};
use crate::{Error, Result};

/// One ray's execution: how far it iterated and where its significant
/// Gaussians sat in the tile list.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PixelTrace {
    pub iterated: u32,
    /// Ascending list positions below `iterated`.
    pub significant: Vec<u32>,
    pub lookup_at: Option<u32>,
    pub hit: bool,
    pub terminated: bool,
}

impl PixelTrace {
    /// Significance flag per iterated position.
    pub fn flags(&self, from: u32, to: u32) -> Vec<bool> {
        let mut out = vec![false; (to - from) as usize];
        for &p in &self.significant {
            if p >= from && p < to {
                out[(p - from) as usize] = true;
            }
        }
        out
    }

    /// Where a PE's own work ends and pooled work may start: the cache lookup
    /// for a missed ray, the end of the ray otherwise.
    pub fn split(&self) -> u32 {
        match (self.hit, self.lookup_at) {
            (false, Some(at)) => at,
            _ => self.iterated,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TileTrace {
    pub tile: (i32, i32),
    pub list_len: u32,
    /// Row-major over the tile's pixels.
    pub pixels: Vec<PixelTrace>,
}

impl TileTrace {
    pub fn integrations(&self) -> u64 {
        self.pixels.iter().map(|p| p.significant.len() as u64).sum()
    }

    pub fn alpha_evals(&self) -> u64 {
        self.pixels.iter().map(|p| p.iterated as u64).sum()
    }

    /// Length of the list prefix some pixel needed.
    pub fn fetched(&self) -> u32 {
        self.pixels.iter().map(|p| p.iterated).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExecTrace {
    pub tiles: Vec<TileTrace>,
}

impl ExecTrace {
    /// Requires a frame rendered with `record_trace` on.
    pub fn from_stats(stats: &FrameStats) -> Result<Self> {
        let t = stats.tile_size;
        let mut tiles = Vec::with_capacity(stats.tiles.len());
        for ty in 0..stats.tiles_y {
            for tx in 0..stats.tiles_x {
                let ts = stats.tile(tx, ty);
                let mut pixels = Vec::new();
                for y in ty * t..((ty + 1) * t).min(stats.height) {
                    for x in tx * t..((tx + 1) * t).min(stats.width) {
                        let p = stats.pixel(x, y);
                        if p.significant_positions.len() != p.significant as usize {
                            return Err(Error::Config("frame was rendered without trace recording".into()));
                        }
                        pixels.push(PixelTrace {
                            iterated: p.iterated,
                            significant: p.significant_positions.clone(),
                            lookup_at: p.lookup_at,
                            hit: p.cache == CacheOutcome::Hit,
                            terminated: p.terminated,
                        });
                    }
                }
                tiles.push(TileTrace { tile: ts.tile, list_len: ts.list_len, pixels });
            }
        }
        Ok(Self { tiles })
    }

    pub fn integrations(&self) -> u64 {
        self.tiles.iter().map(TileTrace::integrations).sum()
    }

    pub fn alpha_evals(&self) -> u64 {
        self.tiles.iter().map(TileTrace::alpha_evals).sum()
    }
}
