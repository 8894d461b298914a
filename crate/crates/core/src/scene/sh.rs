//! Real spherical harmonics up to degree 3 in the basis and sign convention
//! used by standard 3DGS checkpoints.

use nalgebra::Vector3;

use super::Gaussian;
use crate::{Error, Result};

pub const SH_C0: f64 = 0.282_094_791_773_878_14;
pub const SH_C1: f64 = 0.488_602_511_902_919_9;
const SH_C2: [f64; 5] = [
    1.092_548_430_592_079_2,
    -1.092_548_430_592_079_2,
    0.315_391_565_252_520_05,
    -1.092_548_430_592_079_2,
    0.546_274_215_296_039_6,
];
const SH_C3: [f64; 7] = [
    -0.590_043_589_926_643_5,
    2.890_611_442_640_554,
    -0.457_045_799_464_465_8,
    0.373_176_332_590_115_4,
    -0.457_045_799_464_465_8,
    1.445_305_721_320_277,
    -0.590_043_589_926_643_5,
];

pub const MAX_SH_DEGREE: usize = 3;

/// Number of coefficients for a given degree.
pub const fn coeff_count(degree: usize) -> usize {
    (degree + 1) * (degree + 1)
}

pub fn degree_for_len(len: usize) -> Result<usize> {
    (0..=MAX_SH_DEGREE).find(|&d| coeff_count(d) == len).ok_or(Error::ShCoefficients(len))
}

/// View-dependent color of `g` seen along `view_dir` (unit vector from the
/// camera toward the Gaussian). Channels are clamped below at 0.
pub fn eval_sh_color(g: &Gaussian, view_dir: &Vector3<f64>) -> Result<Vector3<f64>> {
    let degree = degree_for_len(g.sh.len())?;
    let sh = &g.sh;
    let mut c = sh[0] * SH_C0;
    if degree >= 1 {
        let (x, y, z) = (view_dir.x, view_dir.y, view_dir.z);
        c += -SH_C1 * y * sh[1] + SH_C1 * z * sh[2] - SH_C1 * x * sh[3];
        if degree >= 2 {
            let (xx, yy, zz) = (x * x, y * y, z * z);
            let (xy, yz, xz) = (x * y, y * z, x * z);
            c += SH_C2[0] * xy * sh[4]
                + SH_C2[1] * yz * sh[5]
                + SH_C2[2] * (2.0 * zz - xx - yy) * sh[6]
                + SH_C2[3] * xz * sh[7]
                + SH_C2[4] * (xx - yy) * sh[8];
            if degree >= 3 {
                c += SH_C3[0] * y * (3.0 * xx - yy) * sh[9]
                    + SH_C3[1] * xy * z * sh[10]
                    + SH_C3[2] * y * (4.0 * zz - xx - yy) * sh[11]
                    + SH_C3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy) * sh[12]
                    + SH_C3[4] * x * (4.0 * zz - xx - yy) * sh[13]
                    + SH_C3[5] * z * (xx - yy) * sh[14]
                    + SH_C3[6] * x * (xx - 3.0 * yy) * sh[15];
            }
        }
    }
    Ok((c + Vector3::repeat(0.5)).map(|v| v.max(0.0)))
}
