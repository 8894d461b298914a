use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use splatcache_core::accel::{account_frame, ExecTrace, FrameWork, HwConfig, SimReport};
use splatcache_core::loss::{geometric_mean_scale, l_scale, l_scale_grad};
use splatcache_core::metrics::{
    color_difference_vs_k, contribution_curve, frame_contributions, order_inversion_rate, psnr, share_of_top,
    significant_fraction, CharzReport, KDifference,
};
use splatcache_core::pipeline::{build_table, ShiftedTable};
use splatcache_core::scene::ply::write_ply;
use splatcache_core::scene::SceneSpec;
use splatcache_core::trace::PoseTrace;
use splatcache_core::{CameraPose, GaussianCloud, Image, RenderConfig};

use crate::config::{ImageFormat, LinearTrace, Mode, RunConfig, Variant};
use crate::runner::ModeRenderer;
use crate::{load_poses, load_scene, CliError, CliResult, InputContext, InternalContext};

/// Where a command's files go.
pub struct OutDir(PathBuf);

impl OutDir {
    pub fn create(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).internal(|| format!("creating output directory {}", dir.display()))?;
        Ok(Self(dir.to_path_buf()))
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }

    pub fn write(&self, name: &str, contents: impl AsRef<[u8]>) -> CliResult<PathBuf> {
        let path = self.path(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).internal(|| format!("creating {}", parent.display()))?;
        }
        fs::write(&path, contents).internal(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    pub fn write_image(&self, stem: &str, image: &Image, format: ImageFormat) -> CliResult<Option<PathBuf>> {
        let bytes = match format {
            ImageFormat::None => return Ok(None),
            ImageFormat::Ppm => {
                let mut buf = Vec::new();
                image.write_ppm(&mut buf)?;
                buf
            }
            ImageFormat::Png => {
                let rgb = image::RgbImage::from_raw(image.width, image.height, image.to_rgb8())
                    .ok_or_else(|| CliError::Internal(anyhow::anyhow!("image buffer size mismatch")))?;
                let mut buf = std::io::Cursor::new(Vec::new());
                rgb.write_to(&mut buf, image::ImageFormat::Png).internal(|| format!("encoding {stem}"))?;
                buf.into_inner()
            }
        };
        let ext = format.extension().expect("formats with files have extensions");
        self.write(&format!("{stem}.{ext}"), bytes).map(Some)
    }

    /// The effective configuration, so every output directory is reproducible.
    pub fn write_config(&self, cfg: &RunConfig) -> CliResult<()> {
        let text = cfg.to_toml().internal(|| "serializing configuration".into())?;
        self.write("config.toml", text).map(|_| ())
    }
}

fn csv(header: &str, rows: &[String]) -> String {
    let mut out = String::with_capacity(header.len() + rows.iter().map(|r| r.len() + 1).sum::<usize>() + 1);
    out.push_str(header);
    out.push('\n');
    for r in rows {
        out.push_str(r);
        out.push('\n');
    }
    out
}

fn json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).internal(|| "serializing JSON".into())?;
    s.push('\n');
    Ok(s)
}

struct Inputs {
    cloud: GaussianCloud,
    poses: Vec<CameraPose>,
}

fn prepare(cfg: &RunConfig, need_trace: bool) -> CliResult<(Inputs, OutDir)> {
    cfg.validate(need_trace).map_err(CliError::Input)?;
    let cloud = load_scene(cfg)?;
    let poses = if need_trace { load_poses(cfg)? } else { Vec::new() };
    let out = OutDir::create(&cfg.output.dir)?;
    out.write_config(cfg)?;
    Ok((Inputs { cloud, poses }, out))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RenderSummary {
    pub frames: usize,
    pub mean_psnr: Option<f64>,
    pub mean_ssim: Option<f64>,
    pub hit_rate: Option<f64>,
    pub sorts: Option<usize>,
}

/// Renders the trace under `cfg.mode`, plus `cfg.reference` for quality metrics.
pub fn render(cfg: &RunConfig) -> CliResult<RenderSummary> {
    let (inputs, out) = prepare(cfg, true)?;
    let mut main = ModeRenderer::new(cfg.mode, &inputs.cloud, cfg, cfg.render.clone())?;
    let mut reference = match cfg.reference {
        Some(m) => Some(ModeRenderer::new(m, &inputs.cloud, cfg, cfg.render.clone())?),
        None => None,
    };
    let (mut quality, mut cache_rows, mut schedule) = (Vec::new(), Vec::new(), Vec::new());
    let mut summary = RenderSummary { frames: inputs.poses.len(), ..Default::default() };
    let (mut psnr_sum, mut ssim_sum, mut hits, mut lookups, mut sorts) = (0.0, 0.0, 0u64, 0u64, 0usize);

    for (i, pose) in inputs.poses.iter().enumerate() {
        let frame = main.frame(pose)?;
        out.write_image(&format!("frames/frame_{i:04}"), &frame.image, cfg.output.image_format)?;
        if let Some(r) = reference.as_mut() {
            let base = r.frame(pose)?.image;
            let mut row = i.to_string();
            if cfg.metrics.psnr {
                let p = psnr(&frame.image, &base)?;
                psnr_sum += p;
                write!(row, ",{p:.6}").unwrap();
            }
            if cfg.metrics.ssim {
                let s = splatcache_core::metrics::ssim(&frame.image, &base)?;
                ssim_sum += s;
                write!(row, ",{s:.6}").unwrap();
            }
            quality.push(row);
        }
        if cfg.mode.rc() {
            let c = frame.stats.cache;
            hits += c.hits;
            lookups += c.lookups;
            let rate = if c.lookups > 0 { c.hits as f64 / c.lookups as f64 } else { 0.0 };
            cache_rows.push(format!(
                "{i},{},{},{},{},{},{rate:.6},{}",
                c.lookups, c.hits, c.misses, c.inserts, c.evictions, frame.swaps
            ));
        }
        if let Some(e) = &frame.event {
            sorts += e.sorted() as usize;
            schedule.push(format!(
                "{i},{},{},{},{:.6},{:.6},{}",
                serde_json::to_value(e.kind).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default(),
                e.table_keys,
                e.speculated,
                e.shift.0,
                e.shift.1,
                e.coverage_misses
            ));
        }
    }

    let n = inputs.poses.len() as f64;
    if reference.is_some() {
        let mut header = String::from("frame");
        if cfg.metrics.psnr {
            header.push_str(",psnr_db");
            summary.mean_psnr = Some(psnr_sum / n);
        }
        if cfg.metrics.ssim {
            header.push_str(",ssim");
            summary.mean_ssim = Some(ssim_sum / n);
        }
        out.write("quality.csv", csv(&header, &quality))?;
    }
    if cfg.mode.rc() {
        summary.hit_rate = Some(if lookups > 0 { hits as f64 / lookups as f64 } else { 0.0 });
        if cfg.metrics.cache_stats {
            out.write(
                "cache_stats.csv",
                csv("frame,lookups,hits,misses,inserts,evictions,hit_rate,swaps", &cache_rows),
            )?;
        }
    }
    if cfg.mode.s2() {
        summary.sorts = Some(sorts);
        out.write("schedule.csv", csv("frame,kind,table_keys,speculated,shift_x,shift_y,coverage_misses", &schedule))?;
    }
    Ok(summary)
}

/// Runs the characterization suite over the trace: significant-fraction
/// series, the pooled contribution curve, color difference against the
/// previous frame by prefix length, and shared-sort order inversions.
pub fn characterize(cfg: &RunConfig) -> CliResult<CharzReport> {
    let (inputs, out) = prepare(cfg, true)?;
    let kmax = *cfg.characterize.ks.iter().max().expect("validated non-empty");
    let render_cfg = RenderConfig { record_k: cfg.render.record_k.max(kmax), ..cfg.render.clone() };
    let mut baseline = ModeRenderer::new(Mode::Baseline, &inputs.cloud, cfg, render_cfg.clone())?;
    let mut shared = ModeRenderer::new(Mode::S2, &inputs.cloud, cfg, render_cfg.clone())?;

    let mut report = CharzReport::default();
    let (mut fig4, mut inversions) = (Vec::new(), Vec::new());
    let mut contributions = Vec::new();
    let mut pooled: Vec<KDifference> =
        cfg.characterize.ks.iter().map(|&k| KDifference { k, ..Default::default() }).collect();
    let mut prev = None;

    for (i, pose) in inputs.poses.iter().enumerate() {
        let frame = baseline.frame(pose)?;
        let f = significant_fraction(&frame.stats);
        if f.pixels > 0 {
            fig4.push(format!("{i},{:.6},{:.6},{}", f.mean_fraction, f.mean_iterated, f.pixels));
        }
        report.fractions.push(f);
        contributions.extend(frame_contributions(&inputs.cloud, pose, &render_cfg)?);

        if let Some((img, stats)) = &prev {
            let diffs = color_difference_vs_k((img, stats), (&frame.image, &frame.stats), &cfg.characterize.ks)?;
            for (acc, d) in pooled.iter_mut().zip(diffs) {
                acc.mean_diff += d.mean_diff * d.matched as f64;
                acc.matched += d.matched;
            }
        }

        let s = shared.frame(pose)?;
        let event = s.event.as_ref().expect("sort-shared frames carry an event");
        let table = shared.s2_state().active_table().expect("a table after the first frame");
        let (exact, _) = build_table(&inputs.cloud, pose, 0, render_cfg.tile_size)?;
        let inv = order_inversion_rate(&ShiftedTable { table, shift: event.shift }, &exact, &s.stats.tiles);
        if inv.pairs > 0 {
            inversions.push(format!("{i},{},{},{:.8}", inv.pairs, inv.inverted, inv.rate()));
        }
        report.inversions.push((i, inv));
        let quality = (psnr(&s.image, &frame.image)?, splatcache_core::metrics::ssim(&s.image, &frame.image)?);
        report.quality.push((i, quality.0, quality.1));

        prev = Some((frame.image, frame.stats));
    }

    report.summarize();
    report.contribution_curve = contribution_curve(&contributions);
    for d in &mut pooled {
        if d.matched > 0 {
            d.mean_diff /= d.matched as f64;
        }
    }
    let fig9: Vec<String> =
        pooled.iter().filter(|d| d.matched > 0).map(|d| format!("{},{},{:.6}", d.k, d.matched, d.mean_diff)).collect();
    report.color_difference = pooled;

    let curve = &report.contribution_curve;
    let points = cfg.characterize.curve_points;
    let fig8: Vec<String> = if curve.is_empty() {
        Vec::new()
    } else {
        (1..=points)
            .map(|j| {
                let fraction = j as f64 / points as f64;
                format!("{fraction:.6},{:.8}", share_of_top(curve, fraction))
            })
            .collect()
    };

    out.write("fig4.csv", csv("frame,significant_fraction,mean_iterated,pixels", &fig4))?;
    out.write("fig8.csv", csv("top_fraction,radiance_share", &fig8))?;
    out.write("fig9.csv", csv("k,matched_pixels,mean_abs_diff_8bit", &fig9))?;
    out.write("inversions.csv", csv("frame,pairs,inverted,rate", &inversions))?;
    // The full curve goes to the CSV at fixed resolution; the JSON keeps the summary.
    let mut summary = report.clone();
    summary.contribution_curve.clear();
    out.write("charz.json", json(&summary)?)?;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VariantReport {
    pub variant: String,
    /// GPU-model cycles over this variant's cycles.
    pub speedup: f64,
    /// GPU-model energy over this variant's energy.
    pub energy_saving: f64,
    pub report: SimReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimOutput {
    pub frames: usize,
    pub hw: HwConfig,
    pub variants: Vec<VariantReport>,
}

/// Renders the trace once per distinct mode among the variants and charges
/// every frame to each variant's hardware model.
pub fn simulate(cfg: &RunConfig) -> CliResult<SimOutput> {
    let (inputs, out) = prepare(cfg, true)?;
    let mut variants = vec![Variant::GPU];
    for v in &cfg.simulate.variants {
        if !variants.contains(v) {
            variants.push(*v);
        }
    }
    let render_cfg = RenderConfig { record_trace: true, ..cfg.render.clone() };
    let mut reports = vec![SimReport::default(); variants.len()];
    let modes: BTreeSet<Mode> = variants.iter().map(|v| v.mode).collect();
    for mode in modes {
        let mut renderer = ModeRenderer::new(mode, &inputs.cloud, cfg, render_cfg.clone())?;
        let cache_bytes = if mode.rc() { cfg.rc.byte_size() as u64 } else { 0 };
        for pose in &inputs.poses {
            let frame = renderer.frame(pose)?;
            let trace = ExecTrace::from_stats(&frame.stats)?;
            let work = FrameWork {
                trace: &trace,
                projected: frame.stats.visible,
                sorted_keys: frame.sorted_keys(),
                per_frame_keys: frame.table_keys(),
                cache: frame.stats.cache,
                swaps: frame.swaps,
                cache_bytes,
            };
            for (v, acc) in variants.iter().zip(reports.iter_mut()) {
                if v.mode == mode {
                    acc.merge(&account_frame(&work, v.raster.model(), &cfg.hw));
                }
            }
        }
    }

    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
    let gpu = reports[0].clone();
    let rows: Vec<VariantReport> = variants
        .iter()
        .zip(reports)
        .map(|(v, r)| VariantReport {
            variant: v.name(),
            speedup: ratio(gpu.cycles.total(), r.cycles.total()),
            energy_saving: ratio(gpu.energy.total(), r.energy.total()),
            report: r,
        })
        .collect();
    let csv_rows: Vec<String> = rows
        .iter()
        .map(|r| format!("{},{:.6},{:.6}", r.report.csv_row(&r.variant), r.speedup, r.energy_saving))
        .collect();
    let result = SimOutput { frames: inputs.poses.len(), hw: cfg.hw, variants: rows };
    out.write("breakdown.csv", csv(&format!("{},speedup,energy_saving", SimReport::CSV_HEADER), &csv_rows))?;
    out.write("sim.json", json(&result)?)?;
    Ok(result)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LossReport {
    pub gaussians: usize,
    pub above_threshold: usize,
    pub threshold: f64,
    pub weight: f64,
    pub l_scale: f64,
    /// `weight * l_scale`, the term added to the image loss.
    pub weighted: f64,
    pub mean_geometric_scale: f64,
    pub max_gradient_norm: f64,
}

/// Evaluates the scale penalty over the scene, optionally writing per-Gaussian gradients.
pub fn loss(cfg: &RunConfig, gradients: bool) -> CliResult<LossReport> {
    let (inputs, out) = prepare(cfg, false)?;
    let cloud = &inputs.cloud;
    let value = l_scale(cloud, &cfg.loss)?;
    let grad = l_scale_grad(cloud, &cfg.loss)?;
    let n = cloud.len();
    let report = LossReport {
        gaussians: n,
        above_threshold: cloud.gaussians.iter().filter(|g| geometric_mean_scale(g) > cfg.loss.threshold).count(),
        threshold: cfg.loss.threshold,
        weight: cfg.loss.weight,
        l_scale: value,
        weighted: cfg.loss.weight * value,
        mean_geometric_scale: if n > 0 {
            cloud.gaussians.iter().map(geometric_mean_scale).sum::<f64>() / n as f64
        } else {
            0.0
        },
        max_gradient_norm: grad.iter().map(|g| g.norm()).fold(0.0, f64::max),
    };
    if gradients {
        let rows: Vec<String> =
            grad.iter().enumerate().map(|(i, g)| format!("{i},{:e},{:e},{:e}", g.x, g.y, g.z)).collect();
        out.write("loss_grad.csv", csv("id,d_scale_x,d_scale_y,d_scale_z", &rows))?;
    }
    out.write("loss.json", json(&report)?)?;
    Ok(report)
}

/// Writes a synthetic scene as PLY and optionally a linear pose trace sampled every `dt` seconds.
pub fn gen_scene(spec: &SceneSpec, seed: u64, ply: &Path, trace: Option<(&Path, &LinearTrace, f64)>) -> CliResult<()> {
    let cloud =
        splatcache_core::scene::generate_synthetic_cloud(spec, seed).input(|| "generating synthetic scene".into())?;
    let mut bytes = Vec::new();
    write_ply(&cloud, &mut bytes)?;
    if let Some(parent) = ply.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).internal(|| format!("creating {}", parent.display()))?;
    }
    fs::write(ply, bytes).internal(|| format!("writing {}", ply.display()))?;
    if let Some((path, linear, dt)) = trace {
        if linear.frames == 0 {
            return Err(CliError::Input(anyhow::anyhow!("a trace needs at least one frame")));
        }
        let poses = linear.poses();
        let mut buf = Vec::new();
        PoseTrace::from_poses(&poses, dt)?.write(&mut buf)?;
        fs::write(path, buf).internal(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}
