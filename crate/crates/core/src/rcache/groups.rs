//! Tile-group scoping. Every group of `group_tiles_x x group_tiles_y` image
//! tiles owns one cache instance that persists across frames; switching the
//! active group is recorded as a swap (its memory cost is charged by the
//! accelerator model, not here).

use super::{CacheCounters, PixelCache, RadianceCache, RcConfig};
use crate::pipeline::TileGrid;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroupGeometry {
    pub tiles_x: u32,
    pub tiles_y: u32,
}

impl GroupGeometry {
    pub fn from_config(cfg: &RcConfig) -> Self {
        Self { tiles_x: cfg.group_tiles_x, tiles_y: cfg.group_tiles_y }
    }

    /// Groups needed to cover an image grid of `tiles_x * tiles_y` tiles.
    pub fn group_counts(&self, grid: &TileGrid) -> (u32, u32) {
        (grid.tiles_x.div_ceil(self.tiles_x), grid.tiles_y.div_ceil(self.tiles_y))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GroupStats {
    pub group_id: usize,
    pub counters: CacheCounters,
    pub swaps: u64,
}

/// One persistent cache per tile group.
pub struct CacheGroups<C> {
    geometry: GroupGeometry,
    caches: Vec<C>,
    swaps: Vec<u64>,
    /// The group has completed a frame, so its cache holds earlier results.
    warm: Vec<bool>,
    factory: Box<dyn Fn() -> C + Send + Sync>,
}

impl CacheGroups<RadianceCache> {
    pub fn radiance(cfg: RcConfig) -> Result<Self> {
        RadianceCache::new(cfg)?;
        Ok(Self::with_factory(GroupGeometry::from_config(&cfg), move || {
            RadianceCache::new(cfg).expect("validated above")
        }))
    }
}

impl<C: PixelCache> CacheGroups<C> {
    pub fn with_factory(geometry: GroupGeometry, factory: impl Fn() -> C + Send + Sync + 'static) -> Self {
        Self { geometry, caches: Vec::new(), swaps: Vec::new(), warm: Vec::new(), factory: Box::new(factory) }
    }

    pub fn geometry(&self) -> GroupGeometry {
        self.geometry
    }

    fn ensure(&mut self, count: usize) {
        while self.caches.len() < count {
            self.caches.push((self.factory)());
            self.swaps.push(0);
            self.warm.push(false);
        }
    }

    /// Makes `group_id` the active group and returns its cache.
    pub fn tile_group_swap(&mut self, group_id: usize) -> &mut C {
        self.ensure(group_id + 1);
        self.swaps[group_id] += 1;
        &mut self.caches[group_id]
    }

    /// Caches for the first `count` groups, each marked as swapped in once.
    /// Used to hand disjoint groups to concurrent workers.
    pub fn swap_in_all(&mut self, count: usize) -> &mut [C] {
        self.ensure(count);
        self.swaps[..count].iter_mut().for_each(|s| *s += 1);
        &mut self.caches[..count]
    }

    /// Whether each of the first `count` groups has finished a frame.
    pub fn warm_flags(&mut self, count: usize) -> Vec<bool> {
        self.ensure(count);
        self.warm[..count].to_vec()
    }

    /// Records that the first `count` groups finished a frame.
    pub fn mark_warm(&mut self, count: usize) {
        self.ensure(count);
        self.warm[..count].iter_mut().for_each(|w| *w = true);
    }

    pub fn get(&self, group_id: usize) -> Option<&C> {
        self.caches.get(group_id)
    }

    pub fn stats(&self) -> Vec<GroupStats> {
        self.caches
            .iter()
            .zip(&self.swaps)
            .enumerate()
            .map(|(group_id, (c, &swaps))| GroupStats { group_id, counters: c.counters(), swaps })
            .collect()
    }

    pub fn total_counters(&self) -> CacheCounters {
        let mut total = CacheCounters::default();
        for c in &self.caches {
            total += c.counters();
        }
        total
    }

    pub fn total_swaps(&self) -> u64 {
        self.swaps.iter().sum()
    }
}
