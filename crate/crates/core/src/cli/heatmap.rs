//! Distance matrices as PNG images, colour range fixed to `[0, 1]`.

use image::codecs::png::PngEncoder;
use image::{ExtendedColorType, ImageEncoder};

use crate::error::{Error, Result};
use crate::metric::DistanceMatrix;

/// Viridis sampled at 0, 0.25, 0.5, 0.75 and 1.
const STOPS: [[f64; 3]; 5] = [
    [68.0, 1.0, 84.0],
    [59.0, 82.0, 139.0],
    [33.0, 145.0, 140.0],
    [94.0, 201.0, 98.0],
    [253.0, 231.0, 37.0],
];

/// Colour of `v`, clamped into `[0, 1]`.
pub fn colour(v: f64) -> [u8; 3] {
    let v = v.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let i = (v.floor() as usize).min(STOPS.len() - 2);
    let f = v - i as f64;
    let mut c = [0u8; 3];
    for (k, out) in c.iter_mut().enumerate() {
        *out = (STOPS[i][k] + f * (STOPS[i + 1][k] - STOPS[i][k])).round() as u8;
    }
    c
}

pub fn render_rgb(m: &DistanceMatrix, cell: u32) -> Result<(u32, Vec<u8>)> {
    if cell == 0 {
        return Err(Error::Config("heatmap cell size must be positive".into()));
    }
    let n = m.size();
    if n == 0 {
        return Err(Error::Config("empty matrix".into()));
    }
    if let Some(v) = m.rows().iter().flatten().find(|v| !v.is_finite()) {
        return Err(Error::Config(format!("matrix holds non-finite value {v}")));
    }
    let side = n as u32 * cell;
    let mut px = Vec::with_capacity((side * side * 3) as usize);
    for y in 0..side {
        let row = &m.rows()[(y / cell) as usize];
        for x in 0..side {
            px.extend_from_slice(&colour(row[(x / cell) as usize]));
        }
    }
    Ok((side, px))
}

pub fn render_png(m: &DistanceMatrix, cell: u32) -> Result<Vec<u8>> {
    let (side, px) = render_rgb(m, cell)?;
    let mut out = Vec::new();
    PngEncoder::new(&mut out)
        .write_image(&px, side, side, ExtendedColorType::Rgb8)
        .map_err(|e| Error::Config(format!("png encoding failed: {e}")))?;
    Ok(out)
}
