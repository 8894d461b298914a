//! Sort sharing: sort once at a predicted pose over an expanded viewport, then
//! rasterize the next `window` frames from that one table.
//!
//! A rendered tile reads every table tile its pixel rectangle overlaps once
//! moved into the sorting view, so Gaussians binned into margin tiles reach
//! the rendered edge tiles as the camera moves.
//!
//! Frame `j` that closes a window launches the speculative sort for the next
//! window at `F_j + v * (window / 2) * dt`, i.e. roughly the middle of the frames
//! that will use it. It runs alongside frame `j`'s rasterization and is adopted
//! when the next window opens. Per-Gaussian geometry and SH colors are always
//! recomputed at the rendered pose; only binning and depth order are shared.

use nalgebra::{UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::pipeline::{build_table, render_from_table, FrameStats, Image, RenderConfig, SortedSplattingTable};
use crate::rcache::{AlwaysMiss, CacheGroups, PixelCache};
use crate::scene::{CameraPose, GaussianCloud};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct S2Config {
    /// Frames rendered from one sort.
    pub window: usize,
    /// Sorting-viewport margin per side, rounded up to whole tiles.
    pub margin_px: u32,
    /// Seconds between frames.
    pub frame_interval: f64,
}

impl Default for S2Config {
    fn default() -> Self {
        Self { window: 6, margin_px: 4, frame_interval: 1.0 / 90.0 }
    }
}

impl S2Config {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::Config("sharing window must be at least 1".into()));
        }
        if !(self.frame_interval > 0.0 && self.frame_interval.is_finite()) {
            return Err(Error::Config("frame interval must be positive".into()));
        }
        Ok(())
    }

    pub fn margin_tiles(&self, tile_size: u32) -> u32 {
        self.margin_px.div_ceil(tile_size)
    }
}

/// Camera velocity: world-space linear (units/s) and body-frame angular (rad/s, axis-angle).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Velocity {
    pub linear: Vector3<f64>,
    pub angular: Vector3<f64>,
}

pub fn estimate_velocity(prev: &CameraPose, cur: &CameraPose, dt: f64) -> Result<Velocity> {
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::Config(format!("frame interval {dt} must be positive")));
    }
    let delta = prev.orientation.inverse() * cur.orientation;
    Ok(Velocity { linear: (cur.position - prev.position) / dt, angular: delta.scaled_axis() / dt })
}

/// Extrapolates `cur` by `(window / 2) * dt`.
pub fn predict_pose(cur: &CameraPose, v: &Velocity, cfg: &S2Config) -> CameraPose {
    let t_r = cfg.window as f64 / 2.0 * cfg.frame_interval;
    CameraPose {
        position: cur.position + v.linear * t_r,
        orientation: cur.orientation * UnitQuaternion::from_scaled_axis(v.angular * t_r),
        ..cur.clone()
    }
}

/// The sorting viewport: the image grown by `ceil(margin_px / tile)` tiles per
/// side, principal point shifted to keep the original image centered. Focal
/// lengths are unchanged, so the field of view widens.
pub fn expand_viewport(pose: &CameraPose, margin_px: u32, tile_size: u32) -> CameraPose {
    let m = margin_px.div_ceil(tile_size) * tile_size;
    let mut out = pose.clone();
    out.width += 2 * m;
    out.height += 2 * m;
    out.intrinsics.cx += m as f64;
    out.intrinsics.cy += m as f64;
    out
}

/// Pixel displacement from the rendered view into the table's sorting view:
/// the rendered principal ray at the table's reference depth, projected into
/// the sorting pose, relative to the rendered principal point.
pub fn view_shift(render: &CameraPose, table: &SortedSplattingTable) -> (f64, f64) {
    let sort = &table.provenance.pose;
    let z = table.provenance.reference_depth;
    let point = render.position + render.orientation * Vector3::new(0.0, 0.0, z);
    let p = sort.world_to_camera(&point);
    if p.z.is_nan() || p.z <= 0.0 {
        return (0.0, 0.0);
    }
    let (u, v) = sort.project_camera_point(&p);
    let (dx, dy) = (u - render.intrinsics.cx, v - render.intrinsics.cy);
    if !(dx.is_finite() && dy.is_finite()) || dx.abs() > 1e7 || dy.abs() > 1e7 {
        return (0.0, 0.0);
    }
    (dx, dy)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortKind {
    /// No table yet: sorted synchronously at the current pose.
    Cold,
    /// Adopted the speculative table for a new window.
    Speculative,
    /// Window opened without a usable prediction: sorted synchronously.
    Fallback,
    /// Reused the active table.
    Reused,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEvent {
    pub frame: usize,
    pub kind: SortKind,
    /// Keys of the table this frame rendered from.
    pub table_keys: usize,
    /// A speculative sort for the next window was launched during this frame.
    pub speculated: bool,
    /// Pixel shift used to read the table.
    pub shift: (f64, f64),
    pub coverage_misses: usize,
}

impl ScheduleEvent {
    /// This frame started a new window with a freshly sorted table.
    pub fn sorted(&self) -> bool {
        self.kind != SortKind::Reused
    }
}

#[derive(Default)]
pub struct S2State {
    prev_pose: Option<CameraPose>,
    cur_pose: Option<CameraPose>,
    active: Option<SortedSplattingTable>,
    pending: Option<SortedSplattingTable>,
    frames_used: usize,
    frame: usize,
}

impl S2State {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn active_table(&self) -> Option<&SortedSplattingTable> {
        self.active.as_ref()
    }

    pub fn frames_used(&self) -> usize {
        self.frames_used
    }
}

fn speculate(
    cloud: &GaussianCloud,
    prev: &CameraPose,
    cur: &CameraPose,
    cfg: &S2Config,
    margin_tiles: u32,
    tile_size: u32,
) -> Option<SortedSplattingTable> {
    let v = estimate_velocity(prev, cur, cfg.frame_interval).ok()?;
    let predicted = predict_pose(cur, &v, cfg);
    // Non-finite predictions fail validation and leave the slot empty.
    build_table(cloud, &predicted, margin_tiles, tile_size).ok().map(|(t, _)| t)
}

/// Renders one frame of a sort-shared trace.
pub fn step(
    state: &mut S2State,
    pose: &CameraPose,
    cloud: &GaussianCloud,
    cfg: &S2Config,
    render_cfg: &RenderConfig,
) -> Result<(Image, FrameStats, ScheduleEvent)> {
    step_cached::<AlwaysMiss>(state, pose, cloud, cfg, render_cfg, None)
}

/// [`step`] with optional radiance-cached rasterization.
pub fn step_cached<C: PixelCache + Send>(
    state: &mut S2State,
    pose: &CameraPose,
    cloud: &GaussianCloud,
    cfg: &S2Config,
    render_cfg: &RenderConfig,
    caches: Option<&mut CacheGroups<C>>,
) -> Result<(Image, FrameStats, ScheduleEvent)> {
    cfg.validate()?;
    pose.validate()?;
    let tile = render_cfg.tile_size;
    let margin = cfg.margin_tiles(tile);
    state.prev_pose = state.cur_pose.replace(pose.clone());

    let mut kind = SortKind::Reused;
    if state.active.is_none() || state.frames_used >= cfg.window {
        kind = match state.pending.take() {
            Some(t) => {
                state.active = Some(t);
                SortKind::Speculative
            }
            None => {
                let first = state.active.is_none();
                state.active = Some(build_table(cloud, pose, margin, tile)?.0);
                if first {
                    SortKind::Cold
                } else {
                    SortKind::Fallback
                }
            }
        };
        state.frames_used = 0;
    }

    let closes_window = state.frames_used + 1 == cfg.window;
    let prev = state.prev_pose.clone();
    let active = state.active.as_ref().expect("active table set above");
    let shift = view_shift(pose, active);

    let render = || render_from_table(cloud, pose, active, shift, render_cfg, caches);
    let (rendered, pending) = match (closes_window, prev) {
        (true, Some(prev)) => rayon::join(render, || speculate(cloud, &prev, pose, cfg, margin, tile)),
        _ => (render(), None),
    };
    let (image, stats) = rendered?;
    let speculated = closes_window && state.prev_pose.is_some();
    if speculated {
        state.pending = pending;
    }

    let event = ScheduleEvent {
        frame: state.frame,
        kind,
        table_keys: active.key_count(),
        speculated,
        shift,
        coverage_misses: stats.coverage_misses,
    };
    state.frames_used += 1;
    state.frame += 1;
    Ok((image, stats, event))
}
