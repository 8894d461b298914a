//! Experiment harness behind the `splatcache` binary: a declarative run file,
//! scene and trace loading, and the render, characterize, simulate, loss and
//! gen-scene commands. Every command writes flat CSV or JSON files into the
//! output directory and is deterministic given its configuration and inputs.

pub mod commands;
pub mod config;
pub mod runner;

use std::fmt;
use std::io::BufReader;
use std::path::Path;

use anyhow::Context;
use splatcache_core::scene::generate_synthetic_cloud;
use splatcache_core::scene::ply::load_ply;
use splatcache_core::trace::PoseTrace;
use splatcache_core::{CameraPose, GaussianCloud};

pub use config::{Mode, RunConfig, Variant};

/// A failure tagged with the process exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    Usage(anyhow::Error),
    Input(anyhow::Error),
    Internal(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    /// Core errors describe bad scenes, poses or parameters; IO failures at
    /// this stage happen while writing results.
    pub fn from_core(e: splatcache_core::Error) -> Self {
        match e {
            splatcache_core::Error::Io(_) => CliError::Internal(e.into()),
            _ => CliError::Input(e.into()),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (CliError::Usage(e) | CliError::Input(e) | CliError::Internal(e)) = self;
        write!(f, "{e:#}")
    }
}

impl std::error::Error for CliError {}

impl From<splatcache_core::Error> for CliError {
    fn from(e: splatcache_core::Error) -> Self {
        CliError::from_core(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub(crate) trait InputContext<T> {
    fn input(self, what: impl FnOnce() -> String) -> CliResult<T>;
}

impl<T, E: Into<anyhow::Error>> InputContext<T> for Result<T, E> {
    fn input(self, what: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|e| CliError::Input(e.into().context(what())))
    }
}

pub(crate) trait InternalContext<T> {
    fn internal(self, what: impl FnOnce() -> String) -> CliResult<T>;
}

impl<T, E: Into<anyhow::Error>> InternalContext<T> for Result<T, E> {
    fn internal(self, what: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|e| CliError::Internal(e.into().context(what())))
    }
}

pub fn load_scene(cfg: &RunConfig) -> CliResult<GaussianCloud> {
    if let Some(path) = &cfg.scene.ply {
        let bytes = std::fs::read(path).input(|| format!("reading scene {}", path.display()))?;
        return load_ply(&bytes).input(|| format!("loading scene {}", path.display()));
    }
    let synth = cfg.scene.synthetic.as_ref().ok_or_else(|| CliError::Input(anyhow::anyhow!("no scene source")))?;
    generate_synthetic_cloud(&synth.spec, synth.seed).input(|| "generating synthetic scene".into())
}

pub fn load_trace_file(path: &Path) -> CliResult<Vec<CameraPose>> {
    let file = std::fs::File::open(path).input(|| format!("opening trace {}", path.display()))?;
    let trace = PoseTrace::read(BufReader::new(file)).input(|| format!("reading trace {}", path.display()))?;
    let poses = trace.poses();
    for (i, p) in poses.iter().enumerate() {
        p.validate().input(|| format!("{}: pose record {}", path.display(), i + 1))?;
    }
    Ok(poses)
}

pub fn load_poses(cfg: &RunConfig) -> CliResult<Vec<CameraPose>> {
    let poses = match (&cfg.trace.path, &cfg.trace.linear) {
        (Some(path), _) => load_trace_file(path)?,
        (None, Some(linear)) => linear.poses(),
        (None, None) => return Err(CliError::Input(anyhow::anyhow!("this command needs a pose trace"))),
    };
    if poses.is_empty() {
        return Err(CliError::Input(anyhow::anyhow!("the pose trace has no frames")));
    }
    for (i, p) in poses.iter().enumerate() {
        p.validate().context(format!("pose {i}")).map_err(CliError::Input)?;
    }
    Ok(poses)
}
