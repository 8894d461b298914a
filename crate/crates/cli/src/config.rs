//! The declarative run file. Every section is optional except the scene and
//! the trace, and every field has a default, so a minimal file is
//!
//! ```toml
//! [scene]
//! ply = "room.ply"
//!
//! [trace]
//! path = "orbit.jsonl"
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context};
use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use splatcache_core::accel::{HwConfig, NruMode, RasterModel};
use splatcache_core::loss::ScaleLossConfig;
use splatcache_core::rcache::RcConfig;
use splatcache_core::s2::S2Config;
use splatcache_core::scene::SceneSpec;
use splatcache_core::trace::linear_trace;
use splatcache_core::{CameraPose, RenderConfig};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scene: SceneSource,
    pub trace: TraceSource,
    #[serde(default)]
    pub mode: Mode,
    /// Mode rendered alongside `mode` for per-frame PSNR/SSIM.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<Mode>,
    #[serde(default)]
    pub render: RenderConfig,
    #[serde(default)]
    pub s2: S2Config,
    #[serde(default)]
    pub rc: RcConfig,
    #[serde(default)]
    pub hw: HwConfig,
    #[serde(default)]
    pub loss: ScaleLossConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub metrics: MetricToggles,
    #[serde(default)]
    pub characterize: CharzConfig,
    #[serde(default)]
    pub simulate: SimulateConfig,
}

/// Exactly one of `ply` or `synthetic`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ply: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticScene>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticScene {
    #[serde(default)]
    pub seed: u64,
    #[serde(flatten)]
    pub spec: SceneSpec,
}

/// Exactly one of `path` (a JSON-lines pose file) or `linear`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear: Option<LinearTrace>,
}

/// A camera translating at constant velocity with a fixed orientation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearTrace {
    pub frames: usize,
    pub width: u32,
    pub height: u32,
    /// Focal length in pixels; defaults to `0.9 * width`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub focal: Option<f64>,
    pub position: [f64; 3],
    /// `[w, x, y, z]`.
    pub orientation: [f64; 4],
    /// World-space translation per frame.
    pub step: [f64; 3],
}

impl Default for LinearTrace {
    fn default() -> Self {
        Self {
            frames: 30,
            width: 128,
            height: 128,
            focal: None,
            position: [0.0, 0.0, -5.0],
            orientation: [1.0, 0.0, 0.0, 0.0],
            step: [0.002, 0.0, 0.0],
        }
    }
}

impl LinearTrace {
    pub fn poses(&self) -> Vec<CameraPose> {
        let [w, x, y, z] = self.orientation;
        let start = CameraPose::simple(
            Vector3::from(self.position),
            UnitQuaternion::from_quaternion(Quaternion::new(w, x, y, z)),
            self.focal.unwrap_or(0.9 * self.width as f64),
            self.width,
            self.height,
        );
        linear_trace(&start, Vector3::from(self.step), self.frames)
    }
}

/// Which frame-level optimizations a render uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    #[default]
    Baseline,
    S2,
    Rc,
    S2Rc,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Baseline, Mode::S2, Mode::Rc, Mode::S2Rc];

    pub fn from_flags(s2: bool, rc: bool) -> Self {
        match (s2, rc) {
            (false, false) => Mode::Baseline,
            (true, false) => Mode::S2,
            (false, true) => Mode::Rc,
            (true, true) => Mode::S2Rc,
        }
    }

    pub fn s2(self) -> bool {
        matches!(self, Mode::S2 | Mode::S2Rc)
    }

    pub fn rc(self) -> bool {
        matches!(self, Mode::Rc | Mode::S2Rc)
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Baseline => "baseline",
            Mode::S2 => "s2",
            Mode::Rc => "rc",
            Mode::S2Rc => "s2+rc",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut s2 = false;
        let mut rc = false;
        for part in s.split('+').map(str::trim) {
            match part {
                "baseline" if s == "baseline" => {}
                "s2" if !s2 => s2 = true,
                "rc" if !rc => rc = true,
                _ => return Err(format!("unknown mode `{s}`; expected baseline, s2, rc or s2+rc")),
            }
        }
        Ok(Mode::from_flags(s2, rc))
    }
}

impl Serialize for Mode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Mode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// A simulated system: a rasterizer model plus the frame-level optimizations feeding it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variant {
    pub mode: Mode,
    pub raster: Raster,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Raster {
    Gpu,
    Nru,
    NruRemapped,
}

impl Raster {
    pub fn model(self) -> RasterModel {
        match self {
            Raster::Gpu => RasterModel::Gpu,
            Raster::Nru => RasterModel::Nru(NruMode::PerPixel),
            Raster::NruRemapped => RasterModel::Nru(NruMode::Remapped),
        }
    }
}

impl Variant {
    /// The plain GPU model every speedup is measured against.
    pub const GPU: Variant = Variant { mode: Mode::Baseline, raster: Raster::Gpu };

    pub fn name(&self) -> String {
        let mut parts = vec![match self.raster {
            Raster::Gpu => "gpu",
            Raster::Nru | Raster::NruRemapped => "nru",
        }];
        if self.mode.s2() {
            parts.push("s2");
        }
        if self.mode.rc() {
            parts.push("rc");
        }
        if self.raster == Raster::NruRemapped {
            parts.push("remap");
        }
        parts.join("+")
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    /// `+`-separated tokens: `gpu` or `nru` (default `nru`), then any of `s2`, `rc`, `remap`.
    fn from_str(s: &str) -> Result<Self, String> {
        let (mut gpu, mut nru, mut s2, mut rc, mut remap) = (false, false, false, false, false);
        for part in s.split('+').map(str::trim) {
            let flag = match part {
                "gpu" => &mut gpu,
                "nru" => &mut nru,
                "s2" => &mut s2,
                "rc" => &mut rc,
                "remap" => &mut remap,
                _ => return Err(format!("unknown variant token `{part}` in `{s}`")),
            };
            if *flag {
                return Err(format!("repeated token `{part}` in `{s}`"));
            }
            *flag = true;
        }
        if gpu && (nru || remap) {
            return Err(format!("variant `{s}` mixes the GPU model with NRU options"));
        }
        let raster = match (gpu, remap) {
            (true, _) => Raster::Gpu,
            (false, false) => Raster::Nru,
            (false, true) => Raster::NruRemapped,
        };
        Ok(Variant { mode: Mode::from_flags(s2, rc), raster })
    }
}

impl Serialize for Variant {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for Variant {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ImageFormat {
    #[default]
    Png,
    Ppm,
    /// Skip writing frames.
    None,
}

impl ImageFormat {
    pub fn extension(self) -> Option<&'static str> {
        match self {
            ImageFormat::Png => Some("png"),
            ImageFormat::Ppm => Some("ppm"),
            ImageFormat::None => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub image_format: ImageFormat,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), image_format: ImageFormat::Png }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricToggles {
    pub psnr: bool,
    pub ssim: bool,
    /// Per-frame cache counters for modes that use the radiance cache.
    pub cache_stats: bool,
}

impl Default for MetricToggles {
    fn default() -> Self {
        Self { psnr: true, ssim: true, cache_stats: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CharzConfig {
    /// Prefix lengths compared between consecutive frames.
    pub ks: Vec<usize>,
    /// Points on the contribution curve, as fractions of all contributors.
    pub curve_points: usize,
}

impl Default for CharzConfig {
    fn default() -> Self {
        Self { ks: vec![1, 2, 3, 4, 5], curve_points: 200 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub variants: Vec<Variant>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            variants: ["gpu", "nru", "nru+s2", "nru+rc+remap", "nru+s2+rc+remap"].map(|v| v.parse().unwrap()).to_vec(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg = Self::from_toml(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    pub fn to_toml(&self) -> anyhow::Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Makes relative input paths relative to the config file's directory.
    pub fn resolve_paths(&mut self, base: &Path) {
        for p in [self.scene.ply.as_mut(), self.trace.path.as_mut()].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    /// Commands that do not render skip the trace check.
    pub fn validate(&self, need_trace: bool) -> anyhow::Result<()> {
        match (&self.scene.ply, &self.scene.synthetic) {
            (Some(_), None) => {}
            (None, Some(s)) => s.spec.validate()?,
            _ => bail!("the scene needs exactly one source: `ply` or `synthetic`"),
        }
        match (&self.trace.path, &self.trace.linear) {
            (None, None) if !need_trace => {}
            (Some(_), None) => {}
            (None, Some(l)) => {
                if l.frames == 0 {
                    bail!("a linear trace needs at least one frame");
                }
            }
            _ => bail!("the trace needs exactly one source: `path` or `linear`"),
        }
        self.render.validate()?;
        self.s2.validate()?;
        self.rc.validate()?;
        self.hw.validate()?;
        self.loss.validate()?;
        if self.characterize.ks.is_empty() || self.characterize.ks.contains(&0) {
            bail!("characterize.ks must be a non-empty list of positive prefix lengths");
        }
        if self.characterize.curve_points == 0 {
            bail!("characterize.curve_points must be positive");
        }
        Ok(())
    }
}
