use std::collections::{HashMap, HashSet};

use nalgebra::Vector2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::quality::luma;
use crate::pipeline::{
    build_table, compute_alpha, FrameStats, Image, ProjectedGaussian, RenderConfig, TileBounds, TileSource, TileStats,
    SIGNIFICANCE_CUTOFF,
};
use crate::scene::{CameraPose, GaussianCloud, GaussianId};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SignificantFraction {
    /// Mean over pixels that iterated anything of significant / iterated.
    pub mean_fraction: f64,
    pub mean_iterated: f64,
    pub pixels: usize,
}

pub fn significant_fraction(stats: &FrameStats) -> SignificantFraction {
    let mut out = SignificantFraction::default();
    let mut iterated = 0u64;
    let mut fraction = 0.0;
    for p in stats.pixels.iter().filter(|p| p.iterated > 0) {
        out.pixels += 1;
        iterated += p.iterated as u64;
        fraction += p.significant as f64 / p.iterated as f64;
    }
    if out.pixels > 0 {
        out.mean_fraction = fraction / out.pixels as f64;
        out.mean_iterated = iterated as f64 / out.pixels as f64;
    }
    out
}

/// `T * alpha * luma(color)` for each significant Gaussian along one ray, in depth order.
pub fn ray_contributions(list: &[&ProjectedGaussian], pixel: Vector2<f64>, termination: f64) -> Vec<(GaussianId, f64)> {
    let mut gamma = 1.0;
    let mut out = Vec::new();
    for pg in list {
        let alpha = compute_alpha(pg, pixel);
        if alpha <= SIGNIFICANCE_CUTOFF {
            continue;
        }
        out.push((pg.id, gamma * alpha * luma(&pg.rgb)));
        gamma *= 1.0 - alpha;
        if gamma < termination {
            break;
        }
    }
    out
}

/// Per-ray contributions of every pixel of a frame, pooled in row-major tile order.
pub fn frame_contributions(cloud: &GaussianCloud, cam: &CameraPose, cfg: &RenderConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let (table, set) = build_table(cloud, cam, 0, cfg.tile_size)?;
    let t = cfg.tile_size;
    let (tx, ty) = (cam.width.div_ceil(t), cam.height.div_ceil(t));
    let per_tile: Vec<Vec<f64>> = (0..tx * ty)
        .into_par_iter()
        .map(|i| {
            let (x, y) = (i % tx, i / tx);
            let (ids, _) = table.list((x as i32, y as i32));
            let list: Vec<&ProjectedGaussian> = ids.iter().filter_map(|&id| set.get(id)).collect();
            let b = TileBounds::new(x, y, t, cam.width, cam.height);
            let mut out = Vec::new();
            for py in b.y0..b.y1 {
                for px in b.x0..b.x1 {
                    let c = Vector2::new(px as f64 + 0.5, py as f64 + 0.5);
                    out.extend(ray_contributions(&list, c, cfg.termination).into_iter().map(|(_, v)| v));
                }
            }
            out
        })
        .collect();
    Ok(per_tile.concat())
}

/// Contributions sorted descending, cumulated and normalized so the last point is 1.
/// Empty when nothing contributes.
pub fn contribution_curve(contributions: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = contributions.iter().copied().filter(|c| *c > 0.0).collect();
    let total: f64 = v.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Vec::new();
    }
    v.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut curve: Vec<f64> = v
        .iter()
        .map(|c| {
            acc += c;
            acc / total
        })
        .collect();
    if let Some(last) = curve.last_mut() {
        *last = 1.0;
    }
    curve
}

/// Cumulative share of the strongest `fraction` of points (at least one).
pub fn share_of_top(curve: &[f64], fraction: f64) -> f64 {
    if curve.is_empty() {
        return 0.0;
    }
    let n = ((fraction * curve.len() as f64).ceil() as usize).clamp(1, curve.len());
    curve[n - 1]
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KDifference {
    pub k: usize,
    /// Pixels whose first `k` significant IDs agree across the two frames.
    pub matched: usize,
    /// Mean absolute 8-bit channel difference over matched pixels.
    pub mean_diff: f64,
}

/// Compares co-located pixels of two frames whose leading `k` significant IDs
/// agree. Only pixels with at least `max(ks)` significant Gaussians in both
/// frames take part, so every `k` is measured over the same population.
pub fn color_difference_vs_k(
    a: (&Image, &FrameStats),
    b: (&Image, &FrameStats),
    ks: &[usize],
) -> Result<Vec<KDifference>> {
    a.0.same_size(b.0)?;
    if a.1.pixels.len() != a.0.pixels.len() || b.1.pixels.len() != b.0.pixels.len() {
        return Err(Error::Config("stats do not match image".into()));
    }
    let kmax = ks.iter().copied().max().unwrap_or(0);
    for s in [a.1, b.1] {
        if s.pixels.iter().any(|p| (p.significant as usize).min(kmax) > p.first_ids.len()) {
            return Err(Error::Config(format!("frame recorded fewer than {kmax} leading IDs")));
        }
    }
    let (qa, qb) = (a.0.to_rgb8(), b.0.to_rgb8());
    Ok(ks
        .iter()
        .map(|&k| {
            let mut out = KDifference { k, ..Default::default() };
            let mut sum = 0.0;
            for (i, (pa, pb)) in a.1.pixels.iter().zip(&b.1.pixels).enumerate() {
                if k == 0
                    || pa.first_ids.len() < kmax
                    || pb.first_ids.len() < kmax
                    || pa.first_ids[..k] != pb.first_ids[..k]
                {
                    continue;
                }
                out.matched += 1;
                let d: f64 = (0..3).map(|c| (qa[3 * i + c] as f64 - qb[3 * i + c] as f64).abs()).sum();
                sum += d / 3.0;
            }
            if out.matched > 0 {
                out.mean_diff = sum / out.matched as f64;
            }
            out
        })
        .collect())
}

/// Inversions in `seq` (pairs `i < j` with `seq[i] > seq[j]`).
pub fn count_inversions(seq: &[usize]) -> u64 {
    fn sort(v: &mut [usize], buf: &mut Vec<usize>) -> u64 {
        let n = v.len();
        if n < 2 {
            return 0;
        }
        let mid = n / 2;
        let mut inv = sort(&mut v[..mid], buf) + sort(&mut v[mid..], buf);
        buf.clear();
        let (mut i, mut j) = (0, mid);
        while i < mid && j < n {
            if v[j] < v[i] {
                inv += (mid - i) as u64;
                buf.push(v[j]);
                j += 1;
            } else {
                buf.push(v[i]);
                i += 1;
            }
        }
        buf.extend_from_slice(&v[i..mid]);
        buf.extend_from_slice(&v[j..n]);
        v.copy_from_slice(buf);
        inv
    }
    let mut v = seq.to_vec();
    sort(&mut v, &mut Vec::with_capacity(seq.len()))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InversionStats {
    pub pairs: u64,
    pub inverted: u64,
}

impl InversionStats {
    pub fn rate(&self) -> f64 {
        if self.pairs == 0 {
            0.0
        } else {
            self.inverted as f64 / self.pairs as f64
        }
    }
}

/// Pairs of significant Gaussians present in both the shared and the exact
/// list of a tile whose relative order differs between the two.
pub fn order_inversion_rate(shared: &dyn TileSource, exact: &dyn TileSource, tiles: &[TileStats]) -> InversionStats {
    let mut out = InversionStats::default();
    for ts in tiles {
        let ((a, _), (b, _)) = (shared.list(ts.tile), exact.list(ts.tile));
        let significant: HashSet<GaussianId> = ts.significant_ids.iter().copied().collect();
        let pos_a: HashMap<GaussianId, usize> =
            a.iter().enumerate().filter(|(_, id)| significant.contains(id)).map(|(i, &id)| (id, i)).collect();
        let seq: Vec<usize> = b.iter().filter_map(|id| pos_a.get(id).copied()).collect();
        let m = seq.len() as u64;
        out.pairs += m * m.saturating_sub(1) / 2;
        out.inverted += count_inversions(&seq);
    }
    out
}

/// Per-frame series and summaries behind the characterization CSVs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CharzReport {
    pub fractions: Vec<SignificantFraction>,
    pub fraction_mean: f64,
    pub fraction_std: f64,
    pub contribution_curve: Vec<f64>,
    pub color_difference: Vec<KDifference>,
    /// Frame index and the inversions of the shared sort against an exact one.
    pub inversions: Vec<(usize, InversionStats)>,
    /// Frame index, PSNR, SSIM.
    pub quality: Vec<(usize, f64, f64)>,
}

impl CharzReport {
    /// Recomputes the fraction summary from the per-frame series.
    pub fn summarize(&mut self) {
        let n = self.fractions.len() as f64;
        if n == 0.0 {
            self.fraction_mean = 0.0;
            self.fraction_std = 0.0;
            return;
        }
        self.fraction_mean = self.fractions.iter().map(|f| f.mean_fraction).sum::<f64>() / n;
        let var = self.fractions.iter().map(|f| (f.mean_fraction - self.fraction_mean).powi(2)).sum::<f64>() / n;
        self.fraction_std = var.sqrt();
    }

    pub fn overall_inversion_rate(&self) -> f64 {
        let total = self.inversions.iter().fold(InversionStats::default(), |acc, (_, s)| InversionStats {
            pairs: acc.pairs + s.pairs,
            inverted: acc.inverted + s.inverted,
        });
        total.rate()
    }
}
