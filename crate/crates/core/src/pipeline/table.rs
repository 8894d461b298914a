//! Tile binning and per-tile depth sorting.

use std::borrow::Cow;
use std::cmp::Ordering;

use super::project::{PixelRect, ProjectedGaussian};
use crate::scene::{CameraPose, GaussianId};

pub const DEFAULT_TILE_SIZE: u32 = 16;

/// A rectangular block of tiles. Tile `(i, j)` covers pixels
/// `[i*T, (i+1)*T) x [j*T, (j+1)*T)` of the base image it was laid out for;
/// `origin` may be negative when the grid extends past the image.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TileGrid {
    pub tile_size: u32,
    pub origin_x: i32,
    pub origin_y: i32,
    pub tiles_x: u32,
    pub tiles_y: u32,
}

impl TileGrid {
    pub fn for_image(width: u32, height: u32, tile_size: u32) -> Self {
        Self::expanded(width, height, tile_size, 0)
    }

    /// The image grid grown by `margin_tiles` whole tiles on every side.
    pub fn expanded(width: u32, height: u32, tile_size: u32, margin_tiles: u32) -> Self {
        let m = margin_tiles as i32;
        Self {
            tile_size,
            origin_x: -m,
            origin_y: -m,
            tiles_x: width.div_ceil(tile_size) + 2 * margin_tiles,
            tiles_y: height.div_ceil(tile_size) + 2 * margin_tiles,
        }
    }

    pub fn tile_count(&self) -> usize {
        self.tiles_x as usize * self.tiles_y as usize
    }

    pub fn contains(&self, tx: i32, ty: i32) -> bool {
        tx >= self.origin_x
            && ty >= self.origin_y
            && tx < self.origin_x + self.tiles_x as i32
            && ty < self.origin_y + self.tiles_y as i32
    }

    /// Row-major slot of tile `(tx, ty)`, if it lies in the grid.
    pub fn slot(&self, tx: i32, ty: i32) -> Option<usize> {
        self.contains(tx, ty)
            .then(|| (ty - self.origin_y) as usize * self.tiles_x as usize + (tx - self.origin_x) as usize)
    }

    pub fn tile_at_slot(&self, slot: usize) -> (i32, i32) {
        let tx = (slot % self.tiles_x as usize) as i32 + self.origin_x;
        let ty = (slot / self.tiles_x as usize) as i32 + self.origin_y;
        (tx, ty)
    }

    pub fn tile_rect(&self, tx: i32, ty: i32) -> PixelRect {
        let t = self.tile_size as f64;
        PixelRect { x0: tx as f64 * t, y0: ty as f64 * t, x1: (tx + 1) as f64 * t, y1: (ty + 1) as f64 * t }
    }

    /// Pixel extent of the whole grid.
    pub fn pixel_rect(&self) -> PixelRect {
        let t = self.tile_size as f64;
        PixelRect {
            x0: self.origin_x as f64 * t,
            y0: self.origin_y as f64 * t,
            x1: (self.origin_x + self.tiles_x as i32) as f64 * t,
            y1: (self.origin_y + self.tiles_y as i32) as f64 * t,
        }
    }

    /// Inclusive tile range covered by a Gaussian's bounding square, clamped to the grid.
    fn tile_span(&self, pg: &ProjectedGaussian) -> Option<(i32, i32, i32, i32)> {
        let t = self.tile_size as f64;
        let r = pg.radius as f64;
        let lo = |c: f64| ((c - r) / t).floor();
        let hi = |c: f64| ((c + r) / t).floor();
        let clamp_x = |v: f64| v.clamp(self.origin_x as f64, (self.origin_x + self.tiles_x as i32 - 1) as f64) as i32;
        let clamp_y = |v: f64| v.clamp(self.origin_y as f64, (self.origin_y + self.tiles_y as i32 - 1) as f64) as i32;
        let (x0, x1) = (lo(pg.mean2d.x), hi(pg.mean2d.x));
        let (y0, y1) = (lo(pg.mean2d.y), hi(pg.mean2d.y));
        if x1 < self.origin_x as f64
            || y1 < self.origin_y as f64
            || x0 >= (self.origin_x + self.tiles_x as i32) as f64
            || y0 >= (self.origin_y + self.tiles_y as i32) as f64
        {
            return None;
        }
        Some((clamp_x(x0), clamp_x(x1), clamp_y(y0), clamp_y(y1)))
    }
}

/// The pose a table was sorted for.
#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    pub pose: CameraPose,
    pub margin_tiles: u32,
    /// Median camera-space depth of the binned Gaussians, used to translate
    /// tile lookups between nearby poses.
    pub reference_depth: f64,
}

/// Per-tile Gaussian IDs in ascending `(depth, id)` order, stored CSR-style.
#[derive(Clone, Debug, PartialEq)]
pub struct SortedSplattingTable {
    pub grid: TileGrid,
    offsets: Vec<usize>,
    ids: Vec<GaussianId>,
    /// Sort-pose depth of each key, parallel to `ids`.
    depths: Vec<f64>,
    pub provenance: Provenance,
}

fn depth_order(a: &(f64, GaussianId), b: &(f64, GaussianId)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// Bins Gaussians into every tile their bounding square touches and sorts each
/// tile front to back, ties broken by ID.
pub fn bin_and_sort<'a, I>(projected: I, grid: TileGrid, provenance: Provenance) -> SortedSplattingTable
where
    I: IntoIterator<Item = &'a ProjectedGaussian>,
{
    let mut buckets: Vec<Vec<(f64, GaussianId)>> = vec![Vec::new(); grid.tile_count()];
    for pg in projected {
        let Some((x0, x1, y0, y1)) = grid.tile_span(pg) else {
            continue;
        };
        for ty in y0..=y1 {
            for tx in x0..=x1 {
                let slot = grid.slot(tx, ty).expect("span is clamped to the grid");
                buckets[slot].push((pg.depth, pg.id));
            }
        }
    }
    let mut offsets = Vec::with_capacity(buckets.len() + 1);
    let keys = buckets.iter().map(Vec::len).sum();
    let mut ids = Vec::with_capacity(keys);
    let mut depths = Vec::with_capacity(keys);
    offsets.push(0);
    for mut bucket in buckets {
        bucket.sort_by(depth_order);
        for (d, id) in bucket {
            depths.push(d);
            ids.push(id);
        }
        offsets.push(ids.len());
    }
    SortedSplattingTable { grid, offsets, ids, depths, provenance }
}

impl SortedSplattingTable {
    /// Sorted list of tile `(tx, ty)`, or `None` outside the grid.
    pub fn tile(&self, tx: i32, ty: i32) -> Option<&[GaussianId]> {
        self.grid.slot(tx, ty).map(|s| &self.ids[self.offsets[s]..self.offsets[s + 1]])
    }

    pub fn tile_at_slot(&self, slot: usize) -> &[GaussianId] {
        &self.ids[self.offsets[slot]..self.offsets[slot + 1]]
    }

    /// The depth-ordered union of every tile overlapping the half-open `rect`,
    /// and whether all of those tiles lie inside the grid.
    pub fn gather(&self, rect: &PixelRect) -> (Cow<'_, [GaussianId]>, bool) {
        let t = self.grid.tile_size as f64;
        let (tx0, ty0) = ((rect.x0 / t).floor() as i64, (rect.y0 / t).floor() as i64);
        let (tx1, ty1) = ((rect.x1 / t).ceil() as i64 - 1, (rect.y1 / t).ceil() as i64 - 1);
        let mut covered = true;
        let mut slots = Vec::new();
        for ty in ty0..=ty1 {
            for tx in tx0..=tx1 {
                match i32::try_from(tx).ok().zip(i32::try_from(ty).ok()).and_then(|(x, y)| self.grid.slot(x, y)) {
                    Some(s) => slots.push(s),
                    None => covered = false,
                }
            }
        }
        match slots.as_slice() {
            [] => (Cow::Borrowed(&[]), covered),
            [s] => (Cow::Borrowed(self.tile_at_slot(*s)), covered),
            _ => {
                let mut keys: Vec<(f64, GaussianId)> = slots
                    .iter()
                    .flat_map(|&s| {
                        let r = self.offsets[s]..self.offsets[s + 1];
                        self.depths[r.clone()].iter().copied().zip(self.ids[r].iter().copied())
                    })
                    .collect();
                keys.sort_by(depth_order);
                keys.dedup_by_key(|k| k.1);
                (Cow::Owned(keys.into_iter().map(|(_, id)| id).collect()), covered)
            }
        }
    }

    /// Total number of (tile, Gaussian) keys that were sorted.
    pub fn key_count(&self) -> usize {
        self.ids.len()
    }
}
