//! Pose traces as JSON lines: one header record with intrinsics, then one
//! `{"t", "position", "quaternion": [w, x, y, z]}` record per frame.

use std::io::{BufRead, Write};

use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::scene::{CameraPose, Intrinsics};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub intrinsics: Intrinsics,
    pub width: u32,
    pub height: u32,
    #[serde(default = "default_near")]
    pub near: f64,
    #[serde(default = "default_far")]
    pub far: f64,
}

fn default_near() -> f64 {
    0.01
}

fn default_far() -> f64 {
    1000.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoseRecord {
    pub t: f64,
    pub position: [f64; 3],
    pub quaternion: [f64; 4],
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoseTrace {
    pub header: TraceHeader,
    pub records: Vec<PoseRecord>,
}

impl PoseTrace {
    pub fn from_poses(poses: &[CameraPose], dt: f64) -> Result<Self> {
        let first = poses.first().ok_or_else(|| Error::Config("empty pose list".into()))?;
        let header = TraceHeader {
            intrinsics: first.intrinsics,
            width: first.width,
            height: first.height,
            near: first.near,
            far: first.far,
        };
        let records = poses
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let q = p.orientation.quaternion();
                PoseRecord { t: i as f64 * dt, position: p.position.into(), quaternion: [q.w, q.i, q.j, q.k] }
            })
            .collect();
        Ok(Self { header, records })
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut header = None;
        let mut records = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let err = |e: serde_json::Error| Error::Trace { line: lineno, reason: e.to_string() };
            if header.is_none() {
                header = Some(serde_json::from_str::<TraceHeader>(&line).map_err(err)?);
                continue;
            }
            let rec: PoseRecord = serde_json::from_str(&line).map_err(err)?;
            let n = Quaternion::new(rec.quaternion[0], rec.quaternion[1], rec.quaternion[2], rec.quaternion[3]).norm();
            if !(n > 0.0 && n.is_finite()) || !rec.position.iter().all(|v| v.is_finite()) {
                return Err(Error::Trace { line: lineno, reason: "degenerate pose".into() });
            }
            records.push(rec);
        }
        let header = header.ok_or(Error::Trace { line: 0, reason: "missing header record".into() })?;
        Ok(Self { header, records })
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer(&mut out, &self.header)?;
        out.write_all(b"\n")?;
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn poses(&self) -> Vec<CameraPose> {
        self.records
            .iter()
            .map(|r| {
                let [w, x, y, z] = r.quaternion;
                CameraPose {
                    position: Vector3::from(r.position),
                    orientation: UnitQuaternion::from_quaternion(Quaternion::new(w, x, y, z)),
                    intrinsics: self.header.intrinsics,
                    width: self.header.width,
                    height: self.header.height,
                    near: self.header.near,
                    far: self.header.far,
                }
            })
            .collect()
    }
}

/// `frames` poses translating from `start` by `step` per frame with a fixed orientation.
pub fn linear_trace(start: &CameraPose, step: Vector3<f64>, frames: usize) -> Vec<CameraPose> {
    (0..frames).map(|i| CameraPose { position: start.position + step * i as f64, ..start.clone() }).collect()
}
