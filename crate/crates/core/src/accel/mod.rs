//! Trace-driven performance and energy models of the rasterization stage: a
//! SIMT GPU baseline with warp divergence, and an accelerator built from neural
//! rendering units (NRUs) whose PEs compute transparency and feed a shared
//! color-integration backend through a FIFO.

mod gpu;
mod nru;
mod report;
mod trace;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use gpu::{simulate_gpu_tile, GpuTileReport};
pub use nru::{simulate_nru_tile, NruMode, NruTileReport};
pub use report::{account_frame, EnergyBreakdown, FrameWork, RasterModel, SimReport, StageCycles};
pub use trace::{ExecTrace, PixelTrace, TileTrace};

/// Per-operation energies in picojoules. DRAM bytes cost `dram_sram_ratio`
/// times an SRAM byte.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnergyTable {
    pub alpha_pj: f64,
    pub blend_pj: f64,
    pub projection_pj: f64,
    pub sort_key_pj: f64,
    pub sram_byte_pj: f64,
    pub dram_sram_ratio: f64,
}

impl Default for EnergyTable {
    fn default() -> Self {
        Self {
            alpha_pj: 4.0,
            blend_pj: 3.0,
            projection_pj: 40.0,
            sort_key_pj: 6.0,
            sram_byte_pj: 0.6,
            dram_sram_ratio: 25.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HwConfig {
    /// NRU array, columns by rows.
    pub nru_grid: [u32; 2],
    pub pes_per_nru: u32,
    /// Reporting only.
    pub clock_hz: f64,
    pub fifo_depth: u32,
    /// Significant Gaussians integrated per cycle per NRU.
    pub backend_throughput: u32,
    /// Gaussians issued per cycle per PE.
    pub frontend_throughput: u32,
    pub frontend_latency: u32,
    /// Bytes of one projected Gaussian record.
    pub gaussian_bytes: u32,
    pub dram_bytes_per_cycle: f64,
    pub warp_size: u32,
    pub gpu_sms: u32,
    pub gpu_schedulers: u32,
    /// Gaussians loaded into shared memory per synchronized batch.
    pub gpu_batch: u32,
    pub gpu_sync_cycles: u32,
    pub gpu_frontend_cycles: u32,
    pub gpu_backend_cycles: u32,
    pub projection_cycles_per_gaussian: f64,
    pub sort_cycles_per_key: f64,
    /// Bytes moved per cache lookup or insert.
    pub cache_line_bytes: u32,
    pub energy: EnergyTable,
}

impl Default for HwConfig {
    fn default() -> Self {
        Self {
            nru_grid: [8, 8],
            pes_per_nru: 4,
            clock_hz: 1e9,
            fifo_depth: 16,
            backend_throughput: 1,
            frontend_throughput: 1,
            frontend_latency: 3,
            gaussian_bytes: 48,
            dram_bytes_per_cycle: 64.0,
            warp_size: 32,
            gpu_sms: 8,
            gpu_schedulers: 4,
            gpu_batch: 256,
            gpu_sync_cycles: 32,
            gpu_frontend_cycles: 8,
            gpu_backend_cycles: 8,
            projection_cycles_per_gaussian: 2.0,
            sort_cycles_per_key: 4.0,
            cache_line_bytes: 13,
            energy: EnergyTable::default(),
        }
    }
}

impl HwConfig {
    pub fn nru_count(&self) -> u32 {
        self.nru_grid[0] * self.nru_grid[1]
    }

    pub fn validate(&self) -> Result<()> {
        let ints = [
            ("nru_grid", self.nru_count()),
            ("pes_per_nru", self.pes_per_nru),
            ("fifo_depth", self.fifo_depth),
            ("backend_throughput", self.backend_throughput),
            ("frontend_throughput", self.frontend_throughput),
            ("frontend_latency", self.frontend_latency),
            ("gaussian_bytes", self.gaussian_bytes),
            ("warp_size", self.warp_size),
            ("gpu_sms", self.gpu_sms),
            ("gpu_schedulers", self.gpu_schedulers),
            ("gpu_batch", self.gpu_batch),
            ("gpu_frontend_cycles", self.gpu_frontend_cycles),
            ("gpu_backend_cycles", self.gpu_backend_cycles),
        ];
        for (name, v) in ints {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        let floats = [
            ("clock_hz", self.clock_hz),
            ("dram_bytes_per_cycle", self.dram_bytes_per_cycle),
            ("dram_sram_ratio", self.energy.dram_sram_ratio),
        ];
        for (name, v) in floats {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        let costs = [
            self.projection_cycles_per_gaussian,
            self.sort_cycles_per_key,
            self.energy.alpha_pj,
            self.energy.blend_pj,
            self.energy.projection_pj,
            self.energy.sort_key_pj,
            self.energy.sram_byte_pj,
        ];
        if costs.iter().any(|c| !(*c >= 0.0 && c.is_finite())) {
            return Err(Error::Config("costs must be finite and non-negative".into()));
        }
        Ok(())
    }
}
