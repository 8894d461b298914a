//! Frame-by-frame rendering under one [`Mode`].

use splatcache_core::pipeline::render_frame_cached;
use splatcache_core::rcache::{CacheGroups, RadianceCache};
use splatcache_core::s2::{step, step_cached, S2State, ScheduleEvent};
use splatcache_core::{render_frame, CameraPose, FrameStats, GaussianCloud, Image, RenderConfig, Result};

use crate::config::{Mode, RunConfig};

pub struct Frame {
    pub image: Image,
    pub stats: FrameStats,
    /// Present in sort-shared modes.
    pub event: Option<ScheduleEvent>,
    /// Cache instances swapped in for this frame.
    pub swaps: u64,
}

impl Frame {
    /// Keys sorted on this frame's critical path.
    pub fn sorted_keys(&self) -> usize {
        match &self.event {
            Some(e) if e.sorted() => e.table_keys,
            Some(_) => 0,
            None => self.stats.table_keys,
        }
    }

    /// Keys of the table the frame rendered from.
    pub fn table_keys(&self) -> usize {
        self.event.as_ref().map_or(self.stats.table_keys, |e| e.table_keys)
    }
}

pub struct ModeRenderer<'a> {
    pub mode: Mode,
    cloud: &'a GaussianCloud,
    cfg: &'a RunConfig,
    render: RenderConfig,
    s2: S2State,
    caches: Option<CacheGroups<RadianceCache>>,
}

impl<'a> ModeRenderer<'a> {
    pub fn new(mode: Mode, cloud: &'a GaussianCloud, cfg: &'a RunConfig, render: RenderConfig) -> Result<Self> {
        let caches = if mode.rc() { Some(CacheGroups::radiance(cfg.rc)?) } else { None };
        Ok(Self { mode, cloud, cfg, render, s2: S2State::new(), caches })
    }

    pub fn s2_state(&self) -> &S2State {
        &self.s2
    }

    pub fn frame(&mut self, pose: &CameraPose) -> Result<Frame> {
        let swaps_before = self.caches.as_ref().map_or(0, |c| c.total_swaps());
        let (image, stats, event) = match (self.mode.s2(), self.caches.as_mut()) {
            (false, None) => {
                let (i, s) = render_frame(self.cloud, pose, &self.render)?;
                (i, s, None)
            }
            (false, Some(groups)) => {
                let (i, s) = render_frame_cached(self.cloud, pose, &self.render, groups)?;
                (i, s, None)
            }
            (true, None) => {
                let (i, s, e) = step(&mut self.s2, pose, self.cloud, &self.cfg.s2, &self.render)?;
                (i, s, Some(e))
            }
            (true, Some(groups)) => {
                let (i, s, e) = step_cached(&mut self.s2, pose, self.cloud, &self.cfg.s2, &self.render, Some(groups))?;
                (i, s, Some(e))
            }
        };
        let swaps = self.caches.as_ref().map_or(0, |c| c.total_swaps()) - swaps_before;
        Ok(Frame { image, stats, event, swaps })
    }
}
