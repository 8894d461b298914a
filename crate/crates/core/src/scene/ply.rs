//! Binary little-endian PLY in the layout written by 3DGS training code:
//! `x y z [nx ny nz] f_dc_0..2 f_rest_* opacity scale_0..2 rot_0..3`.
//!
//! Opacity is stored as a logit and scales as logs; both are activated on load
//! and inverted on write.

use std::collections::HashMap;
use std::io::Write;

use nalgebra::{Quaternion, UnitQuaternion, Vector3};

use super::sh::{coeff_count, degree_for_len};
use super::{Gaussian, GaussianCloud};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ScalarType {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl ScalarType {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "char" | "int8" => Self::I8,
            "uchar" | "uint8" => Self::U8,
            "short" | "int16" => Self::I16,
            "ushort" | "uint16" => Self::U16,
            "int" | "int32" => Self::I32,
            "uint" | "uint32" => Self::U32,
            "float" | "float32" => Self::F32,
            "double" | "float64" => Self::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Self::I8 | Self::U8 => 1,
            Self::I16 | Self::U16 => 2,
            Self::I32 | Self::U32 | Self::F32 => 4,
            Self::F64 => 8,
        }
    }

    fn read(self, b: &[u8]) -> f64 {
        match self {
            Self::I8 => b[0] as i8 as f64,
            Self::U8 => b[0] as f64,
            Self::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Self::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Self::I32 => i32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Self::U32 => u32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Self::F32 => f32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Self::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

struct Header {
    vertex_count: usize,
    /// name -> (byte offset within a record, type)
    props: HashMap<String, (usize, ScalarType)>,
    stride: usize,
    data_start: usize,
}

fn format_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    const END: &[u8] = b"end_header\n";
    let end = bytes.windows(END.len()).position(|w| w == END).ok_or_else(|| format_err("missing end_header"))?;
    let text = std::str::from_utf8(&bytes[..end]).map_err(|_| format_err("header is not UTF-8"))?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("ply") {
        return Err(format_err("missing `ply` magic"));
    }

    let mut vertex_count = None;
    let mut in_vertex = false;
    let mut seen_vertex = false;
    let mut props = HashMap::new();
    let mut stride = 0;
    for line in lines {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            [] | ["comment", ..] | ["obj_info", ..] => {}
            ["format", fmt, _version] => {
                if *fmt != "binary_little_endian" {
                    return Err(format_err(format!("unsupported PLY format `{fmt}`")));
                }
            }
            ["element", name, count] => {
                in_vertex = false;
                if seen_vertex {
                    // Elements after the vertex block are never read.
                    continue;
                }
                if *name != "vertex" {
                    return Err(format_err(format!("element `{name}` precedes `vertex`")));
                }
                vertex_count =
                    Some(count.parse::<usize>().map_err(|_| format_err(format!("bad vertex count `{count}`")))?);
                in_vertex = true;
                seen_vertex = true;
            }
            ["property", "list", ..] if in_vertex => {
                return Err(format_err("list properties on vertices are not supported"));
            }
            ["property", ty, name] if in_vertex => {
                let ty = ScalarType::parse(ty).ok_or_else(|| format_err(format!("unknown property type `{ty}`")))?;
                props.insert(name.to_string(), (stride, ty));
                stride += ty.size();
            }
            ["property", ..] => {}
            _ => return Err(format_err(format!("unrecognised header line `{line}`"))),
        }
    }
    let vertex_count = vertex_count.ok_or_else(|| format_err("no vertex element"))?;
    Ok(Header { vertex_count, props, stride, data_start: end + END.len() })
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Parses a 3DGS PLY. Gaussian `i` is the `i`-th vertex record.
pub fn load_ply(bytes: &[u8]) -> Result<GaussianCloud> {
    let header = parse_header(bytes)?;
    let prop = |name: &str| header.props.get(name).copied().ok_or_else(|| Error::MissingProperty(name.to_string()));

    let n_rest = (0..).take_while(|i| header.props.contains_key(&format!("f_rest_{i}"))).count();
    if n_rest % 3 != 0 {
        return Err(format_err(format!("{n_rest} f_rest properties is not a multiple of 3")));
    }
    let n_coeffs = 1 + n_rest / 3;
    degree_for_len(n_coeffs)?;

    let mut names: Vec<String> =
        ["x", "y", "z", "f_dc_0", "f_dc_1", "f_dc_2", "opacity"].iter().map(|s| s.to_string()).collect();
    names.extend((0..3).map(|i| format!("scale_{i}")));
    names.extend((0..4).map(|i| format!("rot_{i}")));
    names.extend((0..n_rest).map(|i| format!("f_rest_{i}")));
    let fields = names.iter().map(|n| prop(n)).collect::<Result<Vec<_>>>()?;

    let data = &bytes[header.data_start..];
    let needed = header.vertex_count * header.stride;
    if data.len() < needed {
        return Err(format_err(format!("truncated vertex data: need {needed} bytes, have {}", data.len())));
    }

    let mut gaussians = Vec::with_capacity(header.vertex_count);
    let mut values = vec![0.0; fields.len()];
    for index in 0..header.vertex_count {
        let record = &data[index * header.stride..(index + 1) * header.stride];
        for (slot, (name, &(offset, ty))) in values.iter_mut().zip(names.iter().zip(&fields)) {
            let v = ty.read(&record[offset..]);
            if v.is_nan() {
                return Err(Error::NonFinite { field: name.clone(), index });
            }
            *slot = v;
        }
        let v = &values;
        let position = Vector3::new(v[0], v[1], v[2]);
        let quat = Quaternion::new(v[10], v[11], v[12], v[13]);
        if quat.norm() == 0.0 || !quat.norm().is_finite() {
            return Err(Error::InvalidGaussian { index, reason: "degenerate rotation quaternion".into() });
        }
        let mut sh = Vec::with_capacity(n_coeffs);
        sh.push(Vector3::new(v[3], v[4], v[5]));
        let per_channel = n_coeffs - 1;
        for j in 0..per_channel {
            let at = |c: usize| v[14 + c * per_channel + j];
            sh.push(Vector3::new(at(0), at(1), at(2)));
        }
        let g = Gaussian {
            position,
            rotation: UnitQuaternion::from_quaternion(quat),
            scale: Vector3::new(v[7].exp(), v[8].exp(), v[9].exp()),
            opacity: sigmoid(v[6]),
            sh,
        };
        g.validate(index)?;
        gaussians.push(g);
    }
    Ok(GaussianCloud { gaussians })
}

/// Canonical writer: float32 properties, zero normals, channel-major `f_rest`.
pub fn write_ply<W: Write>(cloud: &GaussianCloud, mut out: W) -> Result<()> {
    let n_coeffs = cloud.gaussians.first().map_or(1, |g| g.sh.len());
    if cloud.gaussians.iter().any(|g| g.sh.len() != n_coeffs) {
        return Err(Error::Config("all Gaussians must share one SH degree to be written".into()));
    }
    let degree = degree_for_len(n_coeffs)?;
    let n_rest = 3 * (coeff_count(degree) - 1);

    let mut header = String::from("ply\nformat binary_little_endian 1.0\n");
    header += &format!("element vertex {}\n", cloud.len());
    for name in ["x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"] {
        header += &format!("property float {name}\n");
    }
    for i in 0..n_rest {
        header += &format!("property float f_rest_{i}\n");
    }
    header += "property float opacity\n";
    for i in 0..3 {
        header += &format!("property float scale_{i}\n");
    }
    for i in 0..4 {
        header += &format!("property float rot_{i}\n");
    }
    header += "end_header\n";
    out.write_all(header.as_bytes())?;

    let mut record = Vec::with_capacity(4 * (17 + n_rest));
    for g in &cloud.gaussians {
        record.clear();
        let mut put = |v: f64| record.extend_from_slice(&(v as f32).to_le_bytes());
        g.position.iter().for_each(|&v| put(v));
        (0..3).for_each(|_| put(0.0));
        g.sh[0].iter().for_each(|&v| put(v));
        for c in 0..3 {
            for coeff in &g.sh[1..] {
                put(coeff[c]);
            }
        }
        put(logit(g.opacity));
        g.scale.iter().for_each(|&s| put(s.ln()));
        let q = g.rotation.quaternion();
        [q.w, q.i, q.j, q.k].into_iter().for_each(&mut put);
        out.write_all(&record)?;
    }
    Ok(())
}

pub fn to_ply_bytes(cloud: &GaussianCloud) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_ply(cloud, &mut buf)?;
    Ok(buf)
}
