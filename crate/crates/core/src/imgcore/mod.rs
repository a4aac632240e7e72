//! Pixel buffers, colour conversions, affine warping and codecs.

mod color;
pub mod io;
mod warp;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use color::{hsv_to_rgb, luma, rgb_to_hsv, to_grayscale_luma, HsvPixel};
pub use warp::{warp_affine, AffineMap, Interpolation};

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("invalid image dimensions {width}x{height} for {len} bytes")]
    InvalidDimensions {
        width: u32,
        height: u32,
        len: usize,
    },
    #[error("affine map is not invertible")]
    DegenerateAffine,
    #[error("unsupported pixel format {found}: only 8-bit RGB is accepted")]
    UnsupportedPixelFormat { found: String },
    #[error("failed to decode {path}: {message}")]
    Decode { path: String, message: String },
    #[error("failed to encode image: {0}")]
    Encode(String),
}

impl ImageError {
    pub fn kind(&self) -> &'static str {
        match self {
            ImageError::InvalidDimensions { .. } => "InvalidDimensions",
            ImageError::DegenerateAffine => "DegenerateAffine",
            ImageError::UnsupportedPixelFormat { .. } => "UnsupportedPixelFormat",
            ImageError::Decode { .. } => "Decode",
            ImageError::Encode(_) => "Encode",
        }
    }
}

/// Clamp to [0, 255] and round half away from zero.
#[inline]
pub fn to_byte(v: f32) -> u8 {
    if v.is_nan() {
        return 0;
    }
    v.clamp(0.0, 255.0).round() as u8
}

/// Interleaved row-major 8-bit RGB raster.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageRGB8 {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl std::fmt::Debug for ImageRGB8 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ImageRGB8")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl ImageRGB8 {
    pub fn from_raw(width: u32, height: u32, data: Vec<u8>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 || data.len() != width as usize * height as usize * 3 {
            return Err(ImageError::InvalidDimensions {
                width,
                height,
                len: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Image filled with a single colour.
    ///
    /// Panics if either dimension is zero.
    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let n = width as usize * height as usize;
        let mut data = Vec::with_capacity(n * 3);
        for _ in 0..n {
            data.extend_from_slice(&rgb);
        }
        Self {
            width,
            height,
            data,
        }
    }

    /// Build an image by evaluating `f(x, y)` at every pixel.
    ///
    /// Panics if either dimension is zero.
    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut data = Vec::with_capacity(width as usize * height as usize * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn set_pixel(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn pixels(&self) -> impl Iterator<Item = [u8; 3]> + '_ {
        self.data.chunks_exact(3).map(|p| [p[0], p[1], p[2]])
    }

    /// Apply `f` to every pixel, keeping dimensions.
    pub fn map_pixels(&self, mut f: impl FnMut([u8; 3]) -> [u8; 3]) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for p in self.data.chunks_exact(3) {
            data.extend_from_slice(&f([p[0], p[1], p[2]]));
        }
        Self {
            width: self.width,
            height: self.height,
            data,
        }
    }

    /// Apply a per-byte lookup table to every channel of every pixel.
    pub fn map_bytes(&self, lut: &[u8; 256]) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&b| lut[b as usize]).collect(),
        }
    }

    /// Copy out a `w`x`h` window starting at (`x`, `y`). Panics if it does
    /// not fit inside the image.
    pub fn crop(&self, x: u32, y: u32, w: u32, h: u32) -> Self {
        assert!(x + w <= self.width && y + h <= self.height, "crop out of bounds");
        let mut data = Vec::with_capacity(w as usize * h as usize * 3);
        for row in y..y + h {
            let start = (row as usize * self.width as usize + x as usize) * 3;
            data.extend_from_slice(&self.data[start..start + w as usize * 3]);
        }
        Self {
            width: w,
            height: h,
            data,
        }
    }

    /// One channel as a plane of bytes.
    pub fn channel(&self, c: usize) -> Vec<u8> {
        self.data.iter().skip(c).step_by(3).copied().collect()
    }

    pub(crate) fn from_planes(width: u32, height: u32, planes: [&[u8]; 3]) -> Self {
        let n = width as usize * height as usize;
        let mut data = Vec::with_capacity(n * 3);
        for ((&r, &g), &b) in planes[0][..n].iter().zip(&planes[1][..n]).zip(&planes[2][..n]) {
            data.extend_from_slice(&[r, g, b]);
        }
        Self {
            width,
            height,
            data,
        }
    }
}

/// Single-channel 8-bit raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage8 {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl GrayImage8 {
    pub fn from_raw(width: u32, height: u32, data: Vec<u8>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 || data.len() != width as usize * height as usize {
            return Err(ImageError::InvalidDimensions {
                width,
                height,
                len: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    /// Replicate into all three channels.
    pub fn to_rgb(&self) -> ImageRGB8 {
        ImageRGB8::from_planes(self.width, self.height, [&self.data, &self.data, &self.data])
    }
}
