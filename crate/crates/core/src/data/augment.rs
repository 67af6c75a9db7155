//! Training-time augmentation for channel-major RGB images.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::network::Matrix;
use crate::rng::rng;

pub const PAD: usize = 4;

/// Shape of a channel-major image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ImageShape {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl ImageShape {
    pub const CIFAR: ImageShape = ImageShape {
        channels: 3,
        height: 32,
        width: 32,
    };

    pub fn len(&self) -> usize {
        self.channels * self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Index into a `[-PAD, n + PAD)` coordinate reflected back into `[0, n)`.
fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let r = if i < 0 {
        -i
    } else if i >= n {
        2 * (n - 1) - i
    } else {
        i
    };
    r as usize
}

/// Reflect-pad by [`PAD`] pixels, crop back to the original size starting at
/// `offset` (row, column) in the padded image, then optionally mirror.
/// Offset `(PAD, PAD)` without a flip is the identity.
pub fn crop_and_flip(image: &[f64], shape: ImageShape, offset: (usize, usize), flip: bool, out: &mut [f64]) {
    let (h, w) = (shape.height, shape.width);
    for c in 0..shape.channels {
        let plane = &image[c * h * w..(c + 1) * h * w];
        let dst = &mut out[c * h * w..(c + 1) * h * w];
        for y in 0..h {
            let sy = reflect(y as isize + offset.0 as isize - PAD as isize, h);
            for x in 0..w {
                let xx = if flip { w - 1 - x } else { x };
                let sx = reflect(xx as isize + offset.1 as isize - PAD as isize, w);
                dst[y * w + x] = plane[sy * w + sx];
            }
        }
    }
}

/// Random horizontal flip (probability 1/2) and random reflect-padded crop
/// for every row of `batch`.
pub fn augment(batch: &Matrix, shape: ImageShape, seed: u64) -> Result<Matrix> {
    if batch.cols() != shape.len() || shape.height <= PAD || shape.width <= PAD {
        return Err(Error::Dimension(format!(
            "rows of {} values are not {}x{}x{} images",
            batch.cols(),
            shape.channels,
            shape.height,
            shape.width
        )));
    }
    let mut r = rng(seed);
    let mut out = Matrix::zeros(batch.rows(), batch.cols());
    for i in 0..batch.rows() {
        let flip = r.gen_bool(0.5);
        let offset = (r.gen_range(0..=2 * PAD), r.gen_range(0..=2 * PAD));
        crop_and_flip(batch.row(i), shape, offset, flip, out.row_mut(i));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: ImageShape = ImageShape {
        channels: 2,
        height: 6,
        width: 5,
    };

    fn ramp(shape: ImageShape) -> Vec<f64> {
        (0..shape.len()).map(|v| v as f64).collect()
    }

    #[test]
    fn centre_crop_is_identity() {
        let img = ramp(SMALL);
        let mut out = vec![0.0; img.len()];
        crop_and_flip(&img, SMALL, (PAD, PAD), false, &mut out);
        assert_eq!(out, img);
    }

    #[test]
    fn flip_twice_restores() {
        let img = ramp(SMALL);
        let mut once = vec![0.0; img.len()];
        let mut twice = vec![0.0; img.len()];
        crop_and_flip(&img, SMALL, (PAD, PAD), true, &mut once);
        assert_ne!(once, img);
        crop_and_flip(&once, SMALL, (PAD, PAD), true, &mut twice);
        assert_eq!(twice, img);
    }

    #[test]
    fn shifted_crop_reflects_edges() {
        let shape = ImageShape {
            channels: 1,
            height: 5,
            width: 5,
        };
        let img = ramp(shape);
        let mut out = vec![0.0; img.len()];
        // one pixel up and left: row -1 reflects to row 1, column -1 to column 1
        crop_and_flip(&img, shape, (PAD - 1, PAD - 1), false, &mut out);
        assert_eq!(out[0], img[6]);
        assert_eq!(out[1], img[5]);
        assert_eq!(out[6], img[0]);
    }

    #[test]
    fn batch_shape_preserved_and_checked() {
        let batch = Matrix::from_vec(3, SMALL.len(), (0..3 * SMALL.len()).map(|v| v as f64).collect()).unwrap();
        let out = augment(&batch, SMALL, 1).unwrap();
        assert_eq!((out.rows(), out.cols()), (3, SMALL.len()));
        assert_eq!(out, augment(&batch, SMALL, 1).unwrap());
        assert!(augment(&Matrix::zeros(1, 7), SMALL, 1).is_err());
    }
}
