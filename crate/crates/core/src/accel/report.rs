use serde::{Deserialize, Serialize};

use crate::rcache::CacheCounters;

use super::{simulate_gpu_tile, simulate_nru_tile, ExecTrace, HwConfig, NruMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RasterModel {
    Gpu,
    Nru(NruMode),
}

/// Everything one frame asked of the hardware.
#[derive(Clone, Copy, Debug)]
pub struct FrameWork<'a> {
    pub trace: &'a ExecTrace,
    /// Gaussians projected and color-evaluated.
    pub projected: usize,
    /// Keys sorted on the critical path this frame.
    pub sorted_keys: usize,
    /// Keys the frame's table would cost if this frame had sorted it.
    pub per_frame_keys: usize,
    pub cache: CacheCounters,
    /// Cache instances saved and reloaded.
    pub swaps: u64,
    pub cache_bytes: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageCycles {
    pub projection: f64,
    pub sorting: f64,
    pub rasterization: f64,
}

impl StageCycles {
    pub fn total(&self) -> f64 {
        self.projection + self.sorting + self.rasterization
    }
}

/// Picojoules.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub compute: f64,
    pub sram: f64,
    pub dram: f64,
}

impl EnergyBreakdown {
    pub fn total(&self) -> f64 {
        self.compute + self.sram + self.dram
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub frames: u64,
    pub cycles: StageCycles,
    /// Sorting cycles had every frame sorted its own table.
    pub per_frame_sort_cycles: f64,
    pub masked_fraction: Option<f64>,
    pub frontend_util: Option<f64>,
    pub backend_util: Option<f64>,
    pub fifo_stalls: u64,
    pub energy: EnergyBreakdown,
    pub fps: f64,
    pub alpha_evals: u64,
    pub integrations: u64,

    active_lane_cycles: u64,
    integration_lane_cycles: u64,
    frontend_slots: f64,
    backend_slots: f64,
    clock_hz: f64,
}

impl SimReport {
    /// Folds another frame (or run) into this one.
    pub fn merge(&mut self, other: &SimReport) {
        self.frames += other.frames;
        self.cycles.projection += other.cycles.projection;
        self.cycles.sorting += other.cycles.sorting;
        self.cycles.rasterization += other.cycles.rasterization;
        self.per_frame_sort_cycles += other.per_frame_sort_cycles;
        self.fifo_stalls += other.fifo_stalls;
        self.energy.compute += other.energy.compute;
        self.energy.sram += other.energy.sram;
        self.energy.dram += other.energy.dram;
        self.alpha_evals += other.alpha_evals;
        self.integrations += other.integrations;
        self.active_lane_cycles += other.active_lane_cycles;
        self.integration_lane_cycles += other.integration_lane_cycles;
        self.frontend_slots += other.frontend_slots;
        self.backend_slots += other.backend_slots;
        self.clock_hz = other.clock_hz;
        let gpu = self.masked_fraction.is_some() || other.masked_fraction.is_some();
        let nru = self.frontend_util.is_some() || other.frontend_util.is_some();
        self.refresh(gpu, nru);
    }

    fn refresh(&mut self, gpu: bool, nru: bool) {
        let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
        self.masked_fraction = gpu.then(|| {
            ratio((self.integration_lane_cycles - self.active_lane_cycles) as f64, self.integration_lane_cycles as f64)
        });
        self.frontend_util = nru.then(|| ratio(self.alpha_evals as f64, self.frontend_slots));
        self.backend_util = nru.then(|| ratio(self.integrations as f64, self.backend_slots));
        let per_frame = ratio(self.cycles.total(), self.frames as f64);
        self.fps = ratio(self.clock_hz, per_frame);
    }

    /// Active share of lanes during integration in the GPU model.
    pub fn active_lane_fraction(&self) -> Option<f64> {
        self.masked_fraction.map(|m| 1.0 - m)
    }

    /// Stage shares of total cycles, in projection, sorting, rasterization order.
    pub fn breakdown(&self) -> [f64; 3] {
        let t = self.cycles.total();
        if t <= 0.0 {
            return [0.0; 3];
        }
        [self.cycles.projection / t, self.cycles.sorting / t, self.cycles.rasterization / t]
    }

    pub const CSV_HEADER: &'static str =
        "variant,frames,projection_cycles,sorting_cycles,rasterization_cycles,total_cycles,\
per_frame_sort_cycles,masked_fraction,frontend_util,backend_util,fifo_stalls,energy_compute_pj,energy_sram_pj,\
energy_dram_pj,fps";

    pub fn csv_row(&self, variant: &str) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        format!(
            "{variant},{},{:.1},{:.1},{:.1},{:.1},{:.1},{},{},{},{},{:.1},{:.1},{:.1},{:.3}",
            self.frames,
            self.cycles.projection,
            self.cycles.sorting,
            self.cycles.rasterization,
            self.cycles.total(),
            self.per_frame_sort_cycles,
            opt(self.masked_fraction),
            opt(self.frontend_util),
            opt(self.backend_util),
            self.fifo_stalls,
            self.energy.compute,
            self.energy.sram,
            self.energy.dram,
            self.fps,
        )
    }
}

/// Charges one frame: projection and sorting from a per-item cost model,
/// rasterization from the chosen tile model, energy from operation counts
/// and memory traffic.
pub fn account_frame(work: &FrameWork, model: RasterModel, cfg: &HwConfig) -> SimReport {
    let mut r = SimReport { frames: 1, clock_hz: cfg.clock_hz, ..Default::default() };
    r.cycles.projection = work.projected as f64 * cfg.projection_cycles_per_gaussian;
    r.cycles.sorting = work.sorted_keys as f64 * cfg.sort_cycles_per_key;
    r.per_frame_sort_cycles = work.per_frame_keys as f64 * cfg.sort_cycles_per_key;

    let mut raster = 0u64;
    let mut fetched = 0u64;
    for tile in &work.trace.tiles {
        fetched += tile.fetched() as u64;
        match model {
            RasterModel::Gpu => {
                let g = simulate_gpu_tile(tile, cfg);
                raster += g.cycles;
                r.active_lane_cycles += g.active_lane_cycles;
                r.integration_lane_cycles += g.integration_lane_cycles;
                r.integrations += g.integrations;
                r.alpha_evals += tile.alpha_evals();
            }
            RasterModel::Nru(mode) => {
                let n = simulate_nru_tile(tile, cfg, mode);
                raster += n.cycles;
                r.fifo_stalls += n.fifo_stalls;
                r.integrations += n.integrations;
                r.alpha_evals += n.alpha_evals;
                let pes = (cfg.nru_count() * cfg.pes_per_nru) as f64;
                r.frontend_slots += n.cycles as f64 * pes * cfg.frontend_throughput as f64;
                r.backend_slots += n.cycles as f64 * cfg.nru_count() as f64 * cfg.backend_throughput as f64;
            }
        }
    }
    r.cycles.rasterization = match model {
        RasterModel::Gpu => raster.div_ceil(cfg.gpu_sms as u64) as f64,
        RasterModel::Nru(_) => raster as f64,
    };

    let e = &cfg.energy;
    let gbytes = cfg.gaussian_bytes as f64;
    r.energy.compute = r.alpha_evals as f64 * e.alpha_pj
        + r.integrations as f64 * e.blend_pj
        + work.projected as f64 * e.projection_pj
        + work.sorted_keys as f64 * e.sort_key_pj;
    let cache_accesses = (work.cache.lookups + work.cache.inserts) as f64;
    let sram_bytes = r.alpha_evals as f64 * gbytes + cache_accesses * cfg.cache_line_bytes as f64;
    r.energy.sram = sram_bytes * e.sram_byte_pj;
    let dram_bytes =
        (fetched as f64 + work.projected as f64) * gbytes + 2.0 * work.swaps as f64 * work.cache_bytes as f64;
    r.energy.dram = dram_bytes * e.sram_byte_pj * e.dram_sram_ratio;

    r.refresh(model == RasterModel::Gpu, model != RasterModel::Gpu);
    r
}
