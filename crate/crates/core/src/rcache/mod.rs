//! Radiance cache: a set-associative store from the IDs of a ray's first `k`
//! significant Gaussians to the ray's final 8-bit color.

mod cache;
mod groups;
mod key;
mod plru;

pub use cache::{AlwaysMiss, CacheCounters, InsertOutcome, PixelCache, PopulateOnly, RadianceCache};
pub use groups::{CacheGroups, GroupGeometry, GroupStats};
pub use key::{make_key, CacheKey};
pub use plru::TreePlru;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Cache geometry and key layout.
///
/// Each ID contributes its `index_bits_per_id` lowest bits to the set index and
/// bits `[tag_lsb + tag_bits_per_id - 1 : tag_lsb]` to the tag. With the
/// defaults bit 2 of every ID is in neither field, so IDs differing only
/// there alias to the same entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RcConfig {
    pub k: usize,
    pub ways: usize,
    pub sets: usize,
    pub index_bits_per_id: u32,
    pub tag_lsb: u32,
    pub tag_bits_per_id: u32,
    /// Tile-group width in tiles.
    pub group_tiles_x: u32,
    /// Tile-group height in tiles.
    pub group_tiles_y: u32,
    /// Rays that end with fewer than `k` significant Gaussians store a
    /// sentinel-padded key. Such rays never query, so this is off by default.
    pub insert_short_rays: bool,
}

impl Default for RcConfig {
    fn default() -> Self {
        Self {
            k: 5,
            ways: 4,
            sets: 1024,
            index_bits_per_id: 2,
            tag_lsb: 3,
            tag_bits_per_id: 16,
            group_tiles_x: 4,
            group_tiles_y: 4,
            insert_short_rays: false,
        }
    }
}

/// Bytes of one stored RGB value.
const VALUE_BYTES: usize = 3;

impl RcConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("radiance cache: {m}")));
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if self.ways == 0 || !self.ways.is_power_of_two() || self.ways > 64 {
            return bad(format!("ways = {} must be a power of two in 1..=64", self.ways));
        }
        if self.tag_bits_per_id == 0 || self.k as u32 * self.tag_bits_per_id > 128 {
            return bad("k * tag_bits_per_id must be in 1..=128".into());
        }
        if self.tag_lsb + self.tag_bits_per_id > 32 || self.index_bits_per_id > 32 {
            return bad("tag/index bit ranges must fit in a 32-bit ID".into());
        }
        let index_bits = self.k as u32 * self.index_bits_per_id;
        if index_bits > 30 || self.sets != 1usize << index_bits {
            return bad(format!(
                "sets = {} but k * index_bits_per_id = {index_bits} requires 2^{index_bits}",
                self.sets
            ));
        }
        if self.group_tiles_x == 0 || self.group_tiles_y == 0 {
            return bad("tile group must be at least 1x1".into());
        }
        Ok(())
    }

    /// Modeled storage: `ways * sets * (tag bytes + value bytes)`.
    pub fn byte_size(&self) -> usize {
        let tag_bytes = (self.k * self.tag_bits_per_id as usize).div_ceil(8);
        self.ways * self.sets * (tag_bytes + VALUE_BYTES)
    }
}
