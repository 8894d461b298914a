use std::io::Write;

use nalgebra::Vector3;

use crate::{Error, Result};

/// Linear float RGB image, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<Vector3<f64>>,
}

/// `round(clamp(c, 0, 1) * 255)`.
pub fn quantize(c: f64) -> u8 {
    (c.clamp(0.0, 1.0) * 255.0).round() as u8
}

impl Image {
    pub fn filled(width: u32, height: u32, color: Vector3<f64>) -> Self {
        Self { width, height, pixels: vec![color; width as usize * height as usize] }
    }

    pub fn get(&self, x: u32, y: u32) -> Vector3<f64> {
        self.pixels[(y * self.width + x) as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, c: Vector3<f64>) {
        self.pixels[(y * self.width + x) as usize] = c;
    }

    pub fn from_rgb8(width: u32, height: u32, data: &[u8]) -> Result<Self> {
        if data.len() != 3 * width as usize * height as usize {
            return Err(Error::Config(format!("{} bytes cannot hold a {width}x{height} RGB image", data.len())));
        }
        Ok(Self {
            width,
            height,
            pixels: data.chunks_exact(3).map(|p| Vector3::new(p[0] as f64, p[1] as f64, p[2] as f64) / 255.0).collect(),
        })
    }

    pub fn to_rgb8(&self) -> Vec<u8> {
        self.pixels.iter().flat_map(|p| [quantize(p.x), quantize(p.y), quantize(p.z)]).collect()
    }

    pub fn write_ppm<W: Write>(&self, mut out: W) -> Result<()> {
        write!(out, "P6\n{} {}\n255\n", self.width, self.height)?;
        out.write_all(&self.to_rgb8())?;
        Ok(())
    }

    pub fn same_size(&self, other: &Image) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::ImageSize(self.width, self.height, other.width, other.height));
        }
        Ok(())
    }

    /// Largest per-channel absolute difference.
    pub fn max_abs_diff(&self, other: &Image) -> Result<f64> {
        self.same_size(other)?;
        Ok(self.pixels.iter().zip(&other.pixels).map(|(a, b)| (a - b).abs().max()).fold(0.0, f64::max))
    }
}
