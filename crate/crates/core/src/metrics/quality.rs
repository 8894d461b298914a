use nalgebra::Vector3;

use crate::pipeline::{quantize, Image};
use crate::Result;

/// Reported for identical images.
pub const PSNR_CAP: f64 = 99.0;
pub const SSIM_WINDOW: u32 = 8;

const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

pub fn luma(c: &Vector3<f64>) -> f64 {
    LUMA[0] * c.x + LUMA[1] * c.y + LUMA[2] * c.z
}

/// Peak signal-to-noise ratio over all channels after 8-bit quantization.
pub fn psnr(a: &Image, b: &Image) -> Result<f64> {
    a.same_size(b)?;
    let (qa, qb) = (a.to_rgb8(), b.to_rgb8());
    if qa.is_empty() {
        return Ok(PSNR_CAP);
    }
    let sse: f64 = qa.iter().zip(&qb).map(|(&x, &y)| (x as f64 - y as f64).powi(2)).sum();
    let mse = sse / qa.len() as f64;
    if mse == 0.0 {
        return Ok(PSNR_CAP);
    }
    Ok((10.0 * (255.0f64 * 255.0 / mse).log10()).min(PSNR_CAP))
}

fn luma8(img: &Image) -> Vec<f64> {
    img.pixels
        .iter()
        .map(|c| {
            let q = Vector3::new(quantize(c.x) as f64, quantize(c.y) as f64, quantize(c.z) as f64);
            luma(&q)
        })
        .collect()
}

/// Mean SSIM over every 8x8 window of 8-bit luma. Images smaller than a
/// window are scored as one window.
pub fn ssim(a: &Image, b: &Image) -> Result<f64> {
    a.same_size(b)?;
    let (w, h) = (a.width as usize, a.height as usize);
    if w == 0 || h == 0 {
        return Ok(1.0);
    }
    let (la, lb) = (luma8(a), luma8(b));
    let c1 = (0.01f64 * 255.0).powi(2);
    let c2 = (0.03f64 * 255.0).powi(2);
    let ww = (SSIM_WINDOW as usize).min(w);
    let wh = (SSIM_WINDOW as usize).min(h);
    let n = (ww * wh) as f64;
    let mut total = 0.0;
    let mut windows = 0usize;
    for y0 in 0..=(h - wh) {
        for x0 in 0..=(w - ww) {
            let (mut sa, mut sb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for y in y0..y0 + wh {
                for x in x0..x0 + ww {
                    let (va, vb) = (la[y * w + x], lb[y * w + x]);
                    sa += va;
                    sb += vb;
                    saa += va * va;
                    sbb += vb * vb;
                    sab += va * vb;
                }
            }
            let (ma, mb) = (sa / n, sb / n);
            let va = (saa / n - ma * ma).max(0.0);
            let vb = (sbb / n - mb * mb).max(0.0);
            let cov = sab / n - ma * mb;
            total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            windows += 1;
        }
    }
    Ok(total / windows as f64)
}
