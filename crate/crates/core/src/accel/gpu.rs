use serde::{Deserialize, Serialize};

use super::{HwConfig, TileTrace};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GpuTileReport {
    pub cycles: u64,
    /// Idle share of lanes during color-integration phases.
    pub masked_fraction: f64,
    pub active_lane_cycles: u64,
    pub integration_lane_cycles: u64,
    pub integrations: u64,
}

/// One pixel per lane, warps filled in row-major order. A warp walks the
/// tile list in batches until its slowest lane finishes; every Gaussian costs
/// a frontend step, and a backend step if any lane finds it significant.
/// Warps are spread over the schedulers of one SM.
pub fn simulate_gpu_tile(trace: &TileTrace, cfg: &HwConfig) -> GpuTileReport {
    let lanes = cfg.warp_size as usize;
    let be = cfg.gpu_backend_cycles as u64;
    let mut report = GpuTileReport::default();
    let mut warp_cycles = 0u64;
    for warp in trace.pixels.chunks(lanes) {
        let span = warp.iter().map(|p| p.iterated).max().unwrap_or(0) as usize;
        if span == 0 {
            continue;
        }
        let mut active = vec![0u32; span];
        for p in warp {
            for &pos in &p.significant {
                active[pos as usize] += 1;
            }
        }
        let phases = active.iter().filter(|&&a| a > 0).count() as u64;
        let lane_hits: u64 = active.iter().map(|&a| a as u64).sum();
        let batches = span.div_ceil(cfg.gpu_batch as usize) as u64;
        warp_cycles +=
            batches * cfg.gpu_sync_cycles as u64 + span as u64 * cfg.gpu_frontend_cycles as u64 + phases * be;
        report.active_lane_cycles += lane_hits * be;
        report.integration_lane_cycles += phases * be * lanes as u64;
        report.integrations += lane_hits;
    }
    report.cycles = warp_cycles.div_ceil(cfg.gpu_schedulers as u64);
    report.masked_fraction = if report.integration_lane_cycles == 0 {
        0.0
    } else {
        1.0 - report.active_lane_cycles as f64 / report.integration_lane_cycles as f64
    };
    report
}
