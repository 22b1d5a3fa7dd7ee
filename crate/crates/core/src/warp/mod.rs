//! Occlusion-masked backward warping of the key-reference frame.

mod pipeline;

pub use pipeline::{reconstruct_sequence, PipelineError, Renderer};

use thiserror::Error;

use crate::motion::MotionField;
use crate::Scalar;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("image is {got:?}, expected {expected:?}")]
    DimensionMismatch { expected: (u32, u32), got: (u32, u32) },
    #[error("png: {0}")]
    Png(#[from] image::ImageError),
    #[error("buffer holds {got} bytes, expected {expected}")]
    BufferSize { expected: usize, got: usize },
}

/// 8-bit RGB image, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Image {
    pub width: u32,
    pub height: u32,
    pub data: Vec<u8>,
}

impl Image {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            data: vec![0; 3 * width as usize * height as usize],
        }
    }

    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        let mut img = Self::new(width, height);
        for px in img.data.chunks_exact_mut(3) {
            px.copy_from_slice(&rgb);
        }
        img
    }

    pub fn from_raw(width: u32, height: u32, data: Vec<u8>) -> Result<Self, ImageError> {
        let expected = 3 * width as usize * height as usize;
        if data.len() != expected {
            return Err(ImageError::BufferSize {
                expected,
                got: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    #[inline]
    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = 3 * (y as usize * self.width as usize + x as usize);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn set_pixel(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = 3 * (y as usize * self.width as usize + x as usize);
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn decode_png(bytes: &[u8]) -> Result<Self, ImageError> {
        let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)?.to_rgb8();
        let (width, height) = img.dimensions();
        Ok(Self {
            width,
            height,
            data: img.into_raw(),
        })
    }

    pub fn encode_png(&self) -> Result<Vec<u8>, ImageError> {
        use image::ImageEncoder;
        let mut out = Vec::new();
        image::codecs::png::PngEncoder::new(&mut out).write_image(
            &self.data,
            self.width,
            self.height,
            image::ExtendedColorType::Rgb8,
        )?;
        Ok(out)
    }
}

/// Bilinear sample at continuous pixel coordinates (centres at `i + 0.5`),
/// clamped to the image rectangle.
pub fn bilinear_sample<T: Scalar>(img: &Image, sx: T, sy: T) -> [T; 3] {
    let half = T::lit(0.5);
    let max_x = T::from_u32(img.width - 1).unwrap();
    let max_y = T::from_u32(img.height - 1).unwrap();
    let x = (sx - half).max(T::zero()).min(max_x);
    let y = (sy - half).max(T::zero()).min(max_y);
    let (x0, y0) = (x.floor(), y.floor());
    let (fx, fy) = (x - x0, y - y0);
    let x0 = x0.to_u32().unwrap();
    let y0 = y0.to_u32().unwrap();
    let x1 = (x0 + 1).min(img.width - 1);
    let y1 = (y0 + 1).min(img.height - 1);
    let (p00, p10, p01, p11) = (
        img.pixel(x0, y0),
        img.pixel(x1, y0),
        img.pixel(x0, y1),
        img.pixel(x1, y1),
    );
    let one = T::one();
    core::array::from_fn(|c| {
        let v = |p: [u8; 3]| T::from_u8(p[c]).unwrap();
        let top = v(p00) * (one - fx) + v(p10) * fx;
        let bottom = v(p01) * (one - fx) + v(p11) * fx;
        top * (one - fy) + bottom * fy
    })
}

#[inline]
fn to_u8<T: Scalar>(v: T) -> u8 {
    // `round` is half away from zero.
    v.round().max(T::zero()).min(T::lit(255.0)).to_u8().unwrap_or(0)
}

/// `out(p) = occlusion(p) * sample(ref, p + flow(p))`.
pub fn warp<T: Scalar>(reference: &Image, mf: &MotionField<T>) -> Result<Image, ImageError> {
    if (reference.width, reference.height) != (mf.width, mf.height) {
        return Err(ImageError::DimensionMismatch {
            expected: (mf.width, mf.height),
            got: (reference.width, reference.height),
        });
    }
    let half = T::lit(0.5);
    let mut out = Image::new(mf.width, mf.height);
    for y in 0..mf.height {
        for x in 0..mf.width {
            let i = y as usize * mf.width as usize + x as usize;
            let occ = mf.occlusion[i];
            if occ == T::zero() {
                continue;
            }
            let [fx, fy] = mf.flow[i];
            let sx = T::from_u32(x).unwrap() + half + fx;
            let sy = T::from_u32(y).unwrap() + half + fy;
            let s = bilinear_sample(reference, sx, sy);
            out.set_pixel(x, y, s.map(|v| to_u8(occ * v)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gradient(w: u32, h: u32) -> Image {
        let mut img = Image::new(w, h);
        for y in 0..h {
            for x in 0..w {
                img.set_pixel(x, y, [(x * 7 % 256) as u8, (y * 11 % 256) as u8, ((x + y) % 256) as u8]);
            }
        }
        img
    }

    #[test]
    fn identity_warp() {
        let img = gradient(20, 12);
        let out = warp(&img, &MotionField::<f64>::identity(20, 12)).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn zero_occlusion_is_black() {
        let img = gradient(20, 12);
        let mut mf = MotionField::<f64>::identity(20, 12);
        mf.occlusion.iter_mut().for_each(|o| *o = 0.0);
        let out = warp(&img, &mf).unwrap();
        assert!(out.data.iter().all(|&v| v == 0));
    }

    #[test]
    fn constant_shift_matches_array_shift() {
        let img = gradient(30, 9);
        let mut mf = MotionField::<f64>::identity(30, 9);
        mf.flow.iter_mut().for_each(|f| *f = [-10.0, 0.0]);
        let out = warp(&img, &mf).unwrap();
        for y in 0..9 {
            for x in 0..30u32 {
                let src = x.saturating_sub(10);
                assert_eq!(out.pixel(x, y), img.pixel(src, y));
            }
        }
    }

    #[test]
    fn half_pixel_blend_rounds_half_away() {
        let mut img = Image::new(2, 1);
        img.set_pixel(0, 0, [0, 10, 255]);
        img.set_pixel(1, 0, [1, 11, 254]);
        let mut mf = MotionField::<f64>::identity(2, 1);
        mf.flow[0] = [0.5, 0.0];
        let out = warp(&img, &mf).unwrap();
        assert_eq!(out.pixel(0, 0), [1, 11, 255]);
    }

    #[test]
    fn dimension_mismatch() {
        let img = gradient(4, 4);
        assert!(warp(&img, &MotionField::<f64>::identity(4, 5)).is_err());
    }

    #[test]
    fn png_round_trip() {
        let img = gradient(13, 7);
        let png = img.encode_png().unwrap();
        assert_eq!(Image::decode_png(&png).unwrap(), img);
    }
}
