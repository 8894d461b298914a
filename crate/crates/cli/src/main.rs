use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use splatcache_cli::commands;
use splatcache_cli::config::{ImageFormat, LinearTrace, RunConfig, SceneSource, SyntheticScene, TraceSource, Variant};
use splatcache_cli::{CliError, CliResult, Mode};
use splatcache_core::scene::SceneSpec;

/// Gaussian-splatting renderer with sort sharing and radiance caching, plus
/// cycle-level hardware models.
#[derive(Parser, Debug)]
#[command(name = "splatcache", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render a pose trace; writes frames, quality.csv, cache_stats.csv and schedule.csv.
    Render(Common),
    /// Sparsity and coherence statistics; writes fig4/fig8/fig9/inversions CSVs and charz.json.
    Characterize(Common),
    /// Cycle and energy models for a list of variants; writes sim.json and breakdown.csv.
    Simulate(Common),
    /// Evaluate the scale penalty of a scene; writes loss.json.
    Loss {
        #[command(flatten)]
        common: Common,
        /// Also write per-Gaussian gradients to loss_grad.csv.
        #[arg(long)]
        gradients: bool,
    },
    /// Write a synthetic scene as PLY, optionally with a linear pose trace.
    GenScene(GenScene),
}

/// Flags shared by the commands that read a run file. Flags win over the file.
#[derive(Args, Debug)]
struct Common {
    /// TOML run file.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Scene PLY (replaces the file's scene source).
    #[arg(long)]
    scene: Option<PathBuf>,
    /// JSON-lines pose trace (replaces the file's trace source).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// baseline, s2, rc or s2+rc.
    #[arg(long)]
    mode: Option<Mode>,
    /// Mode to compare against for PSNR/SSIM.
    #[arg(long)]
    reference: Option<Mode>,
    #[arg(long, env = "SPLATCACHE_OUT_DIR")]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<ImageFormat>,
    /// Worker threads for rasterization; 0 uses all cores. Outputs do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Frames rendered from one shared sort.
    #[arg(long)]
    window: Option<usize>,
    /// Sorting-viewport margin in pixels per side.
    #[arg(long)]
    margin: Option<u32>,
    /// Leading significant Gaussians in a cache key.
    #[arg(long)]
    k: Option<usize>,
    /// Comma-separated variants such as `gpu,nru,nru+s2+rc+remap`.
    #[arg(long, value_delimiter = ',')]
    variants: Option<Vec<Variant>>,
}

impl Common {
    fn resolve(self) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path).map_err(CliError::Input)?,
            None => RunConfig::default(),
        };
        if let Some(p) = self.scene {
            cfg.scene = SceneSource { ply: Some(p), synthetic: None };
        }
        if let Some(p) = self.trace {
            cfg.trace = TraceSource { path: Some(p), linear: None };
        }
        if let Some(m) = self.mode {
            cfg.mode = m;
        }
        if self.reference.is_some() {
            cfg.reference = self.reference;
        }
        if let Some(d) = self.out_dir {
            cfg.output.dir = d;
        }
        if let Some(f) = self.format {
            cfg.output.image_format = f;
        }
        if let Some(w) = self.workers {
            cfg.render.workers = w;
        }
        if let Some(n) = self.window {
            cfg.s2.window = n;
        }
        if let Some(m) = self.margin {
            cfg.s2.margin_px = m;
        }
        if let Some(k) = self.k {
            cfg.rc.k = k;
        }
        if let Some(v) = self.variants {
            cfg.simulate.variants = v;
        }
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct GenScene {
    /// Output PLY path.
    #[arg(short, long, default_value = "scene.ply")]
    output: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    sh_degree: usize,
    /// Half-extent of the cubic volume positions are drawn from.
    #[arg(long, default_value_t = 1.0)]
    extent: f64,
    /// Also write a linear trace with this many frames.
    #[arg(long)]
    trace_frames: Option<usize>,
    /// Path of the generated trace.
    #[arg(long, default_value = "trace.jsonl")]
    trace_output: PathBuf,
    /// Per-frame camera translation along x.
    #[arg(long, default_value_t = 0.002)]
    trace_step: f64,
    #[arg(long, default_value_t = 128)]
    width: u32,
    #[arg(long, default_value_t = 128)]
    height: u32,
}

impl GenScene {
    fn run(self) -> CliResult<String> {
        let synth = SyntheticScene {
            seed: self.seed,
            spec: SceneSpec {
                count: self.count,
                sh_degree: self.sh_degree,
                extent: [self.extent; 3],
                ..Default::default()
            },
        };
        synth.spec.validate().map_err(|e| CliError::Input(e.into()))?;
        let linear = LinearTrace {
            frames: self.trace_frames.unwrap_or(0),
            width: self.width,
            height: self.height,
            step: [self.trace_step, 0.0, 0.0],
            ..Default::default()
        };
        let dt = splatcache_core::s2::S2Config::default().frame_interval;
        let trace = self.trace_frames.map(|_| (self.trace_output.as_path(), &linear, dt));
        commands::gen_scene(&synth.spec, synth.seed, &self.output, trace)?;
        let mut msg = format!("wrote {} Gaussians to {}", self.count, self.output.display());
        if self.trace_frames.is_some() {
            msg.push_str(&format!(" and {} poses to {}", linear.frames, self.trace_output.display()));
        }
        Ok(msg)
    }
}

fn run(command: Command) -> CliResult<String> {
    match command {
        Command::Render(c) => {
            let cfg = c.resolve()?;
            let s = commands::render(&cfg)?;
            let mut msg = format!("rendered {} frames ({}) into {}", s.frames, cfg.mode, cfg.output.dir.display());
            if let Some(p) = s.mean_psnr {
                msg.push_str(&format!("; mean PSNR {p:.2} dB"));
            }
            if let Some(h) = s.hit_rate {
                msg.push_str(&format!("; cache hit rate {h:.4}"));
            }
            if let Some(n) = s.sorts {
                msg.push_str(&format!("; {n} sorts"));
            }
            Ok(msg)
        }
        Command::Characterize(c) => {
            let cfg = c.resolve()?;
            let r = commands::characterize(&cfg)?;
            Ok(format!(
                "characterized {} frames into {}; significant fraction {:.4} ± {:.4}; inversion rate {:.6}",
                r.fractions.len(),
                cfg.output.dir.display(),
                r.fraction_mean,
                r.fraction_std,
                r.overall_inversion_rate()
            ))
        }
        Command::Simulate(c) => {
            let cfg = c.resolve()?;
            let out = commands::simulate(&cfg)?;
            let parts: Vec<String> = out.variants.iter().map(|v| format!("{} {:.3}x", v.variant, v.speedup)).collect();
            Ok(format!(
                "simulated {} frames into {}; speedup vs gpu: {}",
                out.frames,
                cfg.output.dir.display(),
                parts.join(", ")
            ))
        }
        Command::Loss { common, gradients } => {
            let cfg = common.resolve()?;
            let r = commands::loss(&cfg, gradients)?;
            Ok(format!(
                "L_scale {:.6e} over {} Gaussians ({} above threshold {})",
                r.l_scale, r.gaussians, r.above_threshold, r.threshold
            ))
        }
        Command::GenScene(g) => g.run(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
