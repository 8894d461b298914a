//! EWA projection of 3D Gaussians to screen-space footprints.

use nalgebra::{Matrix2, Matrix2x3, Matrix3, Vector2, Vector3};

use crate::scene::{eval_sh_color, CameraPose, Gaussian, GaussianCloud, GaussianId};

/// Low-pass dilation added to every projected covariance (pixels^2).
pub const COV2D_DILATION: f64 = 0.3;

/// Symmetric inverse covariance `[[a, b], [b, c]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Conic {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Conic {
    pub fn from_covariance(cov: &Matrix2<f64>) -> Option<Self> {
        let (a, b, c) = (cov[(0, 0)], cov[(0, 1)], cov[(1, 1)]);
        let det = a * c - b * b;
        if !(det > 0.0 && det.is_finite()) {
            return None;
        }
        Some(Self { a: c / det, b: -b / det, c: a / det })
    }

    /// `d^T conic d`.
    pub fn quadratic(&self, dx: f64, dy: f64) -> f64 {
        self.a * dx * dx + 2.0 * self.b * dx * dy + self.c * dy * dy
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectedGaussian {
    pub id: GaussianId,
    pub mean2d: Vector2<f64>,
    pub conic: Conic,
    pub depth: f64,
    pub rgb: Vector3<f64>,
    pub opacity: f64,
    pub radius: u32,
}

impl ProjectedGaussian {
    /// Closed bounding square `mean ± radius` overlaps the half-open rect.
    pub fn overlaps(&self, rect: &PixelRect) -> bool {
        let r = self.radius as f64;
        self.mean2d.x + r >= rect.x0
            && self.mean2d.x - r < rect.x1
            && self.mean2d.y + r >= rect.y0
            && self.mean2d.y - r < rect.y1
    }
}

/// Half-open pixel rectangle `[x0, x1) x [y0, y1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PixelRect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl PixelRect {
    pub fn image(width: u32, height: u32) -> Self {
        Self { x0: 0.0, y0: 0.0, x1: width as f64, y1: height as f64 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CullReason {
    /// Camera-space depth outside `(near, far)`.
    Depth,
    /// Bounding square misses the viewport.
    Viewport,
    /// A non-finite intermediate; counted so it never reaches rasterization.
    NonFinite,
}

/// Screen-space covariance `J W Σ W^T J^T + 0.3 I` and camera-space mean.
pub fn covariance_2d(g: &Gaussian, cam: &CameraPose) -> (Matrix2<f64>, Vector3<f64>) {
    let rot = g.rotation.to_rotation_matrix().into_inner();
    let m = rot * Matrix3::from_diagonal(&g.scale);
    let sigma = m * m.transpose();

    let w = cam.world_to_camera_rotation();
    let t = cam.world_to_camera(&g.position);
    let k = &cam.intrinsics;
    let (z, z2) = (t.z, t.z * t.z);
    let j = Matrix2x3::new(k.fx / z, 0.0, -k.fx * t.x / z2, 0.0, k.fy / z, -k.fy * t.y / z2);
    let jw = j * w;
    let cov = jw * sigma * jw.transpose() + Matrix2::identity() * COV2D_DILATION;
    (cov, t)
}

/// Projects one Gaussian. `cull_rect` is the viewport for footprint culling;
/// `None` disables it (depth culling always applies).
pub fn project_gaussian_in(
    g: &Gaussian,
    id: GaussianId,
    cam: &CameraPose,
    cull_rect: Option<&PixelRect>,
) -> Result<ProjectedGaussian, CullReason> {
    let t = cam.world_to_camera(&g.position);
    if !t.z.is_finite() {
        return Err(CullReason::NonFinite);
    }
    if !(t.z > cam.near && t.z < cam.far) {
        return Err(CullReason::Depth);
    }
    let (cov, t) = covariance_2d(g, cam);
    let conic = Conic::from_covariance(&cov).ok_or(CullReason::NonFinite)?;
    let mid = 0.5 * (cov[(0, 0)] + cov[(1, 1)]);
    let det = cov[(0, 0)] * cov[(1, 1)] - cov[(0, 1)] * cov[(0, 1)];
    let lambda_max = mid + (mid * mid - det).max(0.0).sqrt();
    let radius = (3.0 * lambda_max.sqrt()).ceil();
    let (u, v) = cam.project_camera_point(&t);
    if !(radius.is_finite() && u.is_finite() && v.is_finite()) || radius > u32::MAX as f64 {
        return Err(CullReason::NonFinite);
    }

    let view_dir = (g.position - cam.position).normalize();
    let rgb = eval_sh_color(g, &view_dir).map_err(|_| CullReason::NonFinite)?;
    if !rgb.iter().all(|c| c.is_finite()) {
        return Err(CullReason::NonFinite);
    }
    let pg = ProjectedGaussian {
        id,
        mean2d: Vector2::new(u, v),
        conic,
        depth: t.z,
        rgb,
        opacity: g.opacity,
        radius: radius as u32,
    };
    if let Some(rect) = cull_rect {
        if !pg.overlaps(rect) {
            return Err(CullReason::Viewport);
        }
    }
    Ok(pg)
}

pub fn project_gaussian(g: &Gaussian, id: GaussianId, cam: &CameraPose) -> Result<ProjectedGaussian, CullReason> {
    project_gaussian_in(g, id, cam, Some(&PixelRect::image(cam.width, cam.height)))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CullCounts {
    pub depth: usize,
    pub viewport: usize,
    pub non_finite: usize,
}

/// A whole cloud projected at one pose, indexed by Gaussian ID.
#[derive(Clone, Debug, Default)]
pub struct ProjectedSet {
    entries: Vec<Option<ProjectedGaussian>>,
    pub culled: CullCounts,
    /// Number of SH color evaluations performed.
    pub sh_evals: usize,
}

impl ProjectedSet {
    pub fn project(cloud: &GaussianCloud, cam: &CameraPose, cull_rect: Option<&PixelRect>) -> Self {
        let mut culled = CullCounts::default();
        let mut sh_evals = 0;
        let entries = cloud
            .iter()
            .map(|(id, g)| match project_gaussian_in(g, id, cam, cull_rect) {
                Ok(pg) => {
                    sh_evals += 1;
                    Some(pg)
                }
                Err(reason) => {
                    match reason {
                        CullReason::Depth => culled.depth += 1,
                        CullReason::Viewport => {
                            sh_evals += 1;
                            culled.viewport += 1
                        }
                        CullReason::NonFinite => culled.non_finite += 1,
                    }
                    None
                }
            })
            .collect();
        Self { entries, culled, sh_evals }
    }

    pub fn get(&self, id: GaussianId) -> Option<&ProjectedGaussian> {
        self.entries.get(id as usize).and_then(Option::as_ref)
    }

    pub fn visible(&self) -> impl Iterator<Item = &ProjectedGaussian> {
        self.entries.iter().flatten()
    }

    pub fn visible_count(&self) -> usize {
        self.entries.iter().filter(|e| e.is_some()).count()
    }

    /// Number of slots (the cloud size).
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
