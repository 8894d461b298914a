use std::borrow::Cow;

use nalgebra::Vector3;
use rayon::prelude::*;

use super::project::{ProjectedGaussian, ProjectedSet};
use super::raster::{rasterize_tile, TileBounds, TileOutput};
use super::stats::FrameStats;
use super::table::{bin_and_sort, Provenance, SortedSplattingTable, TileGrid};
use super::{Image, RenderConfig};
use crate::rcache::{CacheCounters, CacheGroups, PixelCache, PopulateOnly};
use crate::scene::{CameraPose, GaussianCloud, GaussianId};
use crate::{Error, Result};

/// Where a rendered tile gets its sorted list from.
pub trait TileSource: Sync {
    /// Depth-ordered IDs for rendered tile `tile`, and whether the source
    /// fully covers that tile.
    fn list(&self, tile: (i32, i32)) -> (Cow<'_, [GaussianId]>, bool);
    fn key_count(&self) -> usize;
}

impl TileSource for SortedSplattingTable {
    fn list(&self, tile: (i32, i32)) -> (Cow<'_, [GaussianId]>, bool) {
        match self.tile(tile.0, tile.1) {
            Some(ids) => (Cow::Borrowed(ids), true),
            None => (Cow::Borrowed(&[]), false),
        }
    }

    fn key_count(&self) -> usize {
        SortedSplattingTable::key_count(self)
    }
}

/// A table read at a pixel offset: rendered tile `t` gathers every table tile
/// overlapping `t`'s pixel rectangle moved by `shift`.
pub struct ShiftedTable<'a> {
    pub table: &'a SortedSplattingTable,
    pub shift: (f64, f64),
}

impl TileSource for ShiftedTable<'_> {
    fn list(&self, tile: (i32, i32)) -> (Cow<'_, [GaussianId]>, bool) {
        let mut r = self.table.grid.tile_rect(tile.0, tile.1);
        r.x0 += self.shift.0;
        r.x1 += self.shift.0;
        r.y0 += self.shift.1;
        r.y1 += self.shift.1;
        self.table.gather(&r)
    }

    fn key_count(&self) -> usize {
        self.table.key_count()
    }
}

fn median_depth(set: &ProjectedSet) -> f64 {
    let mut depths: Vec<f64> = set.visible().map(|p| p.depth).collect();
    if depths.is_empty() {
        return 1.0;
    }
    let mid = depths.len() / 2;
    *depths.select_nth_unstable_by(mid, f64::total_cmp).1
}

/// Projects and sorts at `cam`, keeping Gaussians that touch the image grown by
/// `margin_tiles` whole tiles per side.
///
/// Screen coordinates stay in the unexpanded image's frame; the extra tiles get
/// negative or past-the-edge indices. This is the same projection as the
/// expanded camera from [`crate::s2::expand_viewport`], translated by the margin.
pub fn build_table(
    cloud: &GaussianCloud,
    cam: &CameraPose,
    margin_tiles: u32,
    tile_size: u32,
) -> Result<(SortedSplattingTable, ProjectedSet)> {
    cam.validate()?;
    let grid = TileGrid::expanded(cam.width, cam.height, tile_size, margin_tiles);
    let set = ProjectedSet::project(cloud, cam, Some(&grid.pixel_rect()));
    let provenance = Provenance { pose: cam.clone(), margin_tiles, reference_depth: median_depth(&set) };
    let table = bin_and_sort(set.visible(), grid, provenance);
    Ok((table, set))
}

fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(f))
}

fn resolve<'a>(set: &'a ProjectedSet, ids: &[GaussianId]) -> Vec<&'a ProjectedGaussian> {
    ids.iter().filter_map(|&id| set.get(id)).collect()
}

fn render_tile(
    set: &ProjectedSet,
    source: &dyn TileSource,
    bounds: TileBounds,
    cfg: &RenderConfig,
    cache: Option<&mut dyn PixelCache>,
) -> TileOutput {
    let (ids, covered) = source.list(bounds.tile);
    let list = resolve(set, &ids);
    let miss = !covered;
    let mut out = rasterize_tile(&list, bounds, cfg, cache);
    out.stats.coverage_miss = miss;
    out
}

/// Rasterizes a full image from already-projected Gaussians and a tile-list source.
pub fn render_with_source<C: PixelCache + Send>(
    set: &ProjectedSet,
    source: &dyn TileSource,
    width: u32,
    height: u32,
    cfg: &RenderConfig,
    caches: Option<&mut CacheGroups<C>>,
) -> Result<(Image, FrameStats)> {
    cfg.validate()?;
    let grid = TileGrid::for_image(width, height, cfg.tile_size);
    let bounds: Vec<TileBounds> = (0..grid.tiles_y)
        .flat_map(|ty| (0..grid.tiles_x).map(move |tx| (tx, ty)))
        .map(|(tx, ty)| TileBounds::new(tx, ty, cfg.tile_size, width, height))
        .collect();

    let (outputs, cache_delta) = match caches {
        None => {
            let outputs = with_workers(cfg.workers, || {
                bounds.par_iter().map(|b| render_tile(set, source, *b, cfg, None)).collect::<Vec<_>>()
            })?;
            (outputs, CacheCounters::default())
        }
        Some(groups) => {
            let geom = groups.geometry();
            let (gx, gy) = geom.group_counts(&grid);
            let mut members: Vec<Vec<usize>> = vec![Vec::new(); (gx * gy) as usize];
            for (slot, b) in bounds.iter().enumerate() {
                let (tx, ty) = (b.tile.0 as u32, b.tile.1 as u32);
                members[((ty / geom.tiles_y) * gx + tx / geom.tiles_x) as usize].push(slot);
            }
            let before = groups.total_counters();
            let warm = groups.warm_flags(members.len());
            let caches = groups.swap_in_all(members.len());
            let per_group = with_workers(cfg.workers, || {
                caches
                    .par_iter_mut()
                    .zip(members.par_iter().zip(&warm))
                    .map(|(cache, (slots, &warm))| {
                        slots
                            .iter()
                            .map(|&s| {
                                let out = if warm {
                                    render_tile(set, source, bounds[s], cfg, Some(cache as &mut dyn PixelCache))
                                } else {
                                    let mut fill = PopulateOnly(cache);
                                    render_tile(set, source, bounds[s], cfg, Some(&mut fill))
                                };
                                (s, out)
                            })
                            .collect::<Vec<_>>()
                    })
                    .collect::<Vec<_>>()
            })?;
            groups.mark_warm(members.len());
            let mut outputs = vec![TileOutput::default(); bounds.len()];
            for (slot, out) in per_group.into_iter().flatten() {
                outputs[slot] = out;
            }
            let after = groups.total_counters();
            let delta = CacheCounters {
                lookups: after.lookups - before.lookups,
                hits: after.hits - before.hits,
                misses: after.misses - before.misses,
                inserts: after.inserts - before.inserts,
                evictions: after.evictions - before.evictions,
            };
            (outputs, delta)
        }
    };

    let mut image = Image::filled(width, height, Vector3::from(cfg.background));
    let mut stats = FrameStats {
        width,
        height,
        tile_size: cfg.tile_size,
        tiles_x: grid.tiles_x,
        tiles_y: grid.tiles_y,
        pixels: vec![Default::default(); (width * height) as usize],
        tiles: Vec::with_capacity(bounds.len()),
        visible: set.visible_count(),
        culled: set.culled,
        sh_evals: set.sh_evals,
        table_keys: source.key_count(),
        cache: cache_delta,
        coverage_misses: 0,
    };
    for (b, out) in bounds.iter().zip(outputs) {
        let mut i = 0;
        for y in b.y0..b.y1 {
            for x in b.x0..b.x1 {
                image.set(x, y, out.pixels[i]);
                stats.pixels[(y * width + x) as usize] = out.pixel_stats[i].clone();
                i += 1;
            }
        }
        stats.coverage_misses += out.stats.coverage_miss as usize;
        stats.tiles.push(out.stats);
    }
    Ok((image, stats))
}

/// Baseline renderer: project, sort at the true pose, rasterize.
pub fn render_frame(cloud: &GaussianCloud, cam: &CameraPose, cfg: &RenderConfig) -> Result<(Image, FrameStats)> {
    let (table, set) = build_table(cloud, cam, 0, cfg.tile_size)?;
    render_with_source::<crate::rcache::AlwaysMiss>(&set, &table, cam.width, cam.height, cfg, None)
}

/// Baseline projection and sorting with radiance-cached rasterization.
///
/// A group's first frame renders exactly and only fills its cache; lookups
/// start with the group's next frame.
pub fn render_frame_cached<C: PixelCache + Send>(
    cloud: &GaussianCloud,
    cam: &CameraPose,
    cfg: &RenderConfig,
    caches: &mut CacheGroups<C>,
) -> Result<(Image, FrameStats)> {
    let (table, set) = build_table(cloud, cam, 0, cfg.tile_size)?;
    render_with_source(&set, &table, cam.width, cam.height, cfg, Some(caches))
}

/// Renders `cam` from a table sorted at another pose: Gaussians are re-projected
/// and re-colored at `cam`, but binning and order come from `table` read
/// through a pixel `shift` (see [`ShiftedTable`]).
pub fn render_from_table<C: PixelCache + Send>(
    cloud: &GaussianCloud,
    cam: &CameraPose,
    table: &SortedSplattingTable,
    shift: (f64, f64),
    cfg: &RenderConfig,
    caches: Option<&mut CacheGroups<C>>,
) -> Result<(Image, FrameStats)> {
    cam.validate()?;
    let set = ProjectedSet::project(cloud, cam, None);
    let source = ShiftedTable { table, shift };
    render_with_source(&set, &source, cam.width, cam.height, cfg, caches)
}
