//! Front-to-back color integration, optionally short-circuited by a radiance cache.

use nalgebra::{Vector2, Vector3};

use super::project::ProjectedGaussian;
use super::stats::{CacheOutcome, PixelStats, TileStats};
use super::RenderConfig;
use crate::rcache::PixelCache;
use crate::scene::GaussianId;

/// Alphas at or below this never touch the pixel.
pub const SIGNIFICANCE_CUTOFF: f64 = 1.0 / 255.0;
/// Upper clamp on per-Gaussian alpha so transmittance never reaches zero.
pub const ALPHA_MAX: f64 = 0.99;

/// `min(0.99, opacity * exp(-d^T conic d / 2))` with `d` measured from the pixel center.
pub fn compute_alpha(pg: &ProjectedGaussian, pixel: Vector2<f64>) -> f64 {
    let d = pixel - pg.mean2d;
    let power = -0.5 * pg.conic.quadratic(d.x, d.y);
    (pg.opacity * power.exp()).min(ALPHA_MAX)
}

pub fn pixel_center(x: u32, y: u32) -> Vector2<f64> {
    Vector2::new(x as f64 + 0.5, y as f64 + 0.5)
}

/// Clipped pixel bounds of one tile in the rendered image.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TileBounds {
    pub tile: (i32, i32),
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl TileBounds {
    pub fn new(tx: u32, ty: u32, tile_size: u32, width: u32, height: u32) -> Self {
        Self {
            tile: (tx as i32, ty as i32),
            x0: tx * tile_size,
            y0: ty * tile_size,
            x1: ((tx + 1) * tile_size).min(width),
            y1: ((ty + 1) * tile_size).min(height),
        }
    }

    pub fn pixel_count(&self) -> usize {
        ((self.x1 - self.x0) * (self.y1 - self.y0)) as usize
    }
}

#[derive(Clone, Debug, Default)]
pub struct TileOutput {
    /// Row-major within the tile bounds.
    pub pixels: Vec<Vector3<f64>>,
    pub pixel_stats: Vec<PixelStats>,
    pub stats: TileStats,
}

/// Integrates one pixel over a depth-sorted list.
pub fn shade_pixel(
    list: &[&ProjectedGaussian],
    pixel: Vector2<f64>,
    cfg: &RenderConfig,
    cache: Option<&mut dyn PixelCache>,
    mut on_significant: impl FnMut(usize),
) -> (Vector3<f64>, PixelStats) {
    let k = cache.as_ref().map_or(0, |c| c.k());
    let query = cache.as_ref().is_some_and(|c| !c.populate_only());
    let record_k = cfg.record_k.max(k);
    let mut stats = PixelStats::default();
    let mut key_ids: Vec<GaussianId> = Vec::with_capacity(k);
    let mut color = Vector3::zeros();
    let mut gamma = 1.0;
    let mut cache = cache;

    for (pos, pg) in list.iter().enumerate() {
        stats.iterated = pos as u32 + 1;
        let alpha = compute_alpha(pg, pixel);
        if alpha <= SIGNIFICANCE_CUTOFF {
            continue;
        }
        stats.significant += 1;
        on_significant(pos);
        if stats.first_ids.len() < record_k {
            stats.first_ids.push(pg.id);
        }
        if cfg.record_trace {
            stats.significant_positions.push(pos as u32);
        }
        color += gamma * alpha * pg.rgb;
        gamma *= 1.0 - alpha;

        if let Some(c) = cache.as_deref_mut() {
            if key_ids.len() < k {
                key_ids.push(pg.id);
                if key_ids.len() == k && query {
                    stats.lookup_at = Some(stats.iterated);
                    if let Some(rgb) = c.lookup(&key_ids) {
                        stats.cache = CacheOutcome::Hit;
                        return (rgb, stats);
                    }
                    stats.cache = CacheOutcome::Miss;
                }
            }
        }
        if gamma < cfg.termination {
            stats.terminated = true;
            break;
        }
    }
    color += gamma * Vector3::from(cfg.background);
    if let Some(c) = cache {
        if key_ids.len() == k || c.stores_short_rays() {
            c.insert(&key_ids, &color);
        }
    }
    (color, stats)
}

/// Rasterizes every pixel of `bounds` from one resolved tile list.
pub fn rasterize_tile(
    list: &[&ProjectedGaussian],
    bounds: TileBounds,
    cfg: &RenderConfig,
    mut cache: Option<&mut dyn PixelCache>,
) -> TileOutput {
    let n = bounds.pixel_count();
    let mut out = TileOutput {
        pixels: Vec::with_capacity(n),
        pixel_stats: Vec::with_capacity(n),
        stats: TileStats { tile: bounds.tile, list_len: list.len() as u32, ..Default::default() },
    };
    let mut significant = vec![false; list.len()];
    for y in bounds.y0..bounds.y1 {
        for x in bounds.x0..bounds.x1 {
            let (rgb, stats) = shade_pixel(
                list,
                pixel_center(x, y),
                cfg,
                cache.as_mut().map(|c| &mut **c as &mut dyn PixelCache),
                |pos| significant[pos] = true,
            );
            out.pixels.push(rgb);
            out.pixel_stats.push(stats);
        }
    }
    let mut ids: Vec<GaussianId> = list.iter().zip(&significant).filter_map(|(pg, &s)| s.then_some(pg.id)).collect();
    ids.sort_unstable();
    out.stats.significant_ids = ids;
    out
}
