#![allow(dead_code)]

//! Independent reference implementations used as test oracles.

use nalgebra::{UnitQuaternion, Vector3};
use splatcache_core::scene::{eval_sh_color, generate_synthetic_cloud, SceneSpec};
use splatcache_core::{CameraPose, GaussianCloud};

pub fn front_camera(width: u32, height: u32) -> CameraPose {
    CameraPose::simple(Vector3::new(0.0, 0.0, -5.0), UnitQuaternion::identity(), width as f64 * 0.9, width, height)
}

pub fn scene(count: usize, sh_degree: usize, seed: u64) -> GaussianCloud {
    let spec = SceneSpec {
        count,
        extent: [1.6, 1.6, 1.5],
        scale_range: [0.01, 0.12],
        opacity_range: [0.05, 1.0],
        sh_degree,
        ..Default::default()
    };
    generate_synthetic_cloud(&spec, seed).unwrap()
}

/// Screen-space footprint computed without the library's projection code.
#[derive(Clone, Debug)]
pub struct Footprint {
    pub id: u32,
    pub u: f64,
    pub v: f64,
    /// Inverse covariance `[a, b, c]`.
    pub conic: [f64; 3],
    pub depth: f64,
    pub radius: f64,
    pub opacity: f64,
    pub rgb: [f64; 3],
}

fn quat_matrix(q: &UnitQuaternion<f64>) -> [[f64; 3]; 3] {
    let (w, x, y, z) = (q.w, q.i, q.j, q.k);
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

fn mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut o = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            o[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    o
}

fn transpose(a: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut o = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            o[i][j] = a[j][i];
        }
    }
    o
}

/// Brute-force projection: returns footprints for Gaussians inside the depth
/// range whose bounding square touches the image.
pub fn footprints(cloud: &GaussianCloud, cam: &CameraPose) -> Vec<Footprint> {
    let r_cw = quat_matrix(&cam.orientation);
    let w = transpose(&r_cw);
    let k = cam.intrinsics;
    let mut out = Vec::new();
    for (id, g) in cloud.gaussians.iter().enumerate() {
        let d = g.position - cam.position;
        let t: Vec<f64> = (0..3).map(|i| w[i][0] * d.x + w[i][1] * d.y + w[i][2] * d.z).collect();
        let z = t[2];
        if !(z > cam.near && z < cam.far) {
            continue;
        }
        let r = quat_matrix(&g.rotation);
        let mut rs = r;
        for row in rs.iter_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v *= g.scale[j];
            }
        }
        let sigma = mul(&rs, &transpose(&rs));
        let j = [[k.fx / z, 0.0, -k.fx * t[0] / (z * z)], [0.0, k.fy / z, -k.fy * t[1] / (z * z)]];
        let jw: Vec<[f64; 3]> =
            (0..2).map(|r| [0, 1, 2].map(|c| (0..3).map(|m| j[r][m] * w[m][c]).sum::<f64>())).collect();
        let mut cov = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                let mut s = 0.0;
                for p in 0..3 {
                    for q in 0..3 {
                        s += jw[a][p] * sigma[p][q] * jw[b][q];
                    }
                }
                cov[a][b] = s;
            }
        }
        cov[0][0] += 0.3;
        cov[1][1] += 0.3;
        let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
        if det <= 0.0 {
            continue;
        }
        let tr = cov[0][0] + cov[1][1];
        let lmax = tr / 2.0 + ((tr / 2.0).powi(2) - det).max(0.0).sqrt();
        let radius = (3.0 * lmax.sqrt()).ceil();
        let u = k.fx * t[0] / z + k.cx;
        let v = k.fy * t[1] / z + k.cy;
        let (wd, hd) = (cam.width as f64, cam.height as f64);
        if u + radius < 0.0 || u - radius >= wd || v + radius < 0.0 || v - radius >= hd {
            continue;
        }
        let rgb = eval_sh_color(g, &d.normalize()).unwrap();
        out.push(Footprint {
            id: id as u32,
            u,
            v,
            conic: [cov[1][1] / det, -cov[0][1] / det, cov[0][0] / det],
            depth: z,
            radius,
            opacity: g.opacity,
            rgb: [rgb.x, rgb.y, rgb.z],
        });
    }
    out
}

/// Per-pixel front-to-back compositing over the globally depth-sorted
/// footprints whose bounding square touches the pixel's tile.
pub fn oracle_render(
    cloud: &GaussianCloud,
    cam: &CameraPose,
    tile: u32,
    background: [f64; 3],
    termination: f64,
) -> Vec<[f64; 3]> {
    oracle_render_with(cloud, cam, tile, background, termination, true)
}

/// `skip_insignificant = false` integrates every overlapping Gaussian, however faint.
pub fn oracle_render_with(
    cloud: &GaussianCloud,
    cam: &CameraPose,
    tile: u32,
    background: [f64; 3],
    termination: f64,
    skip_insignificant: bool,
) -> Vec<[f64; 3]> {
    let mut fps = footprints(cloud, cam);
    fps.sort_by(|a, b| a.depth.partial_cmp(&b.depth).unwrap().then(a.id.cmp(&b.id)));
    let mut out = Vec::with_capacity((cam.width * cam.height) as usize);
    for y in 0..cam.height {
        for x in 0..cam.width {
            let (tx0, ty0) = ((x / tile * tile) as f64, (y / tile * tile) as f64);
            let (tx1, ty1) = (tx0 + tile as f64, ty0 + tile as f64);
            let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
            let mut col = [0.0; 3];
            let mut trans = 1.0;
            for f in &fps {
                if f.u + f.radius < tx0 || f.u - f.radius >= tx1 || f.v + f.radius < ty0 || f.v - f.radius >= ty1 {
                    continue;
                }
                let (dx, dy) = (px - f.u, py - f.v);
                let q = f.conic[0] * dx * dx + 2.0 * f.conic[1] * dx * dy + f.conic[2] * dy * dy;
                let alpha = (f.opacity * (-0.5 * q).exp()).min(0.99);
                if skip_insignificant && alpha <= 1.0 / 255.0 {
                    continue;
                }
                for (out, rgb) in col.iter_mut().zip(f.rgb) {
                    *out += trans * alpha * rgb;
                }
                trans *= 1.0 - alpha;
                if trans < termination {
                    break;
                }
            }
            for c in 0..3 {
                col[c] += trans * background[c];
            }
            out.push(col);
        }
    }
    out
}

/// Tree pseudo-LRU written as an explicit binary tree walk.
pub struct PlruOracle {
    ways: usize,
    /// `true` means the next victim is in the right subtree.
    node: Vec<bool>,
}

impl PlruOracle {
    pub fn new(ways: usize) -> Self {
        Self { ways, node: vec![false; ways.saturating_sub(1)] }
    }

    pub fn touch(&mut self, way: usize) {
        let (mut lo, mut hi, mut n) = (0, self.ways, 0);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if way < mid {
                self.node[n] = true;
                hi = mid;
                n = 2 * n + 1;
            } else {
                self.node[n] = false;
                lo = mid;
                n = 2 * n + 2;
            }
        }
    }

    pub fn victim(&self) -> usize {
        let (mut lo, mut hi, mut n) = (0, self.ways, 0);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.node[n] {
                lo = mid;
                n = 2 * n + 2;
            } else {
                hi = mid;
                n = 2 * n + 1;
            }
        }
        lo
    }
}
