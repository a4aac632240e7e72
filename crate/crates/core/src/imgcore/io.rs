//! PNG/JPEG decode and encode for 8-bit RGB rasters.

use std::fs;
use std::path::Path;

use image::{ColorType, DynamicImage, ImageFormat};
use jpeg_encoder::{Encoder, SamplingFactor};

use super::{ImageError, ImageRGB8};
use crate::error::{Error, Result};

fn from_dynamic(img: DynamicImage, origin: &str) -> Result<ImageRGB8, ImageError> {
    match img {
        DynamicImage::ImageRgb8(buf) => {
            let (w, h) = buf.dimensions();
            ImageRGB8::from_raw(w, h, buf.into_raw())
        }
        other => Err(ImageError::UnsupportedPixelFormat {
            found: format!("{:?} in {origin}", other.color()),
        }),
    }
}

/// Decode PNG or JPEG bytes. Anything that is not 8-bit RGB is rejected.
pub fn decode(bytes: &[u8]) -> Result<ImageRGB8, ImageError> {
    let format = image::guess_format(bytes).map_err(|e| ImageError::Decode {
        path: "<memory>".into(),
        message: e.to_string(),
    })?;
    if !matches!(format, ImageFormat::Png | ImageFormat::Jpeg) {
        return Err(ImageError::UnsupportedPixelFormat {
            found: format!("{format:?} container"),
        });
    }
    let img = image::load_from_memory_with_format(bytes, format).map_err(|e| {
        ImageError::Decode {
            path: "<memory>".into(),
            message: e.to_string(),
        }
    })?;
    from_dynamic(img, "<memory>")
}

pub fn read_image(path: impl AsRef<Path>) -> Result<ImageRGB8> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|e| match e {
        ImageError::Decode { message, .. } => ImageError::Decode {
            path: path.display().to_string(),
            message,
        }
        .into(),
        ImageError::UnsupportedPixelFormat { found } => ImageError::UnsupportedPixelFormat {
            found: format!("{found} ({})", path.display()),
        }
        .into(),
        other => other.into(),
    })
}

pub fn encode_png(img: &ImageRGB8) -> Result<Vec<u8>, ImageError> {
    let mut out = Vec::new();
    let encoder = image::codecs::png::PngEncoder::new(&mut out);
    image::ImageEncoder::write_image(
        encoder,
        img.as_raw(),
        img.width(),
        img.height(),
        ColorType::Rgb8.into(),
    )
    .map_err(|e| ImageError::Encode(e.to_string()))?;
    Ok(out)
}

/// Baseline JPEG at `quality` (1..=100) with 4:2:0 chroma subsampling.
pub fn encode_jpeg(img: &ImageRGB8, quality: u8) -> Result<Vec<u8>, ImageError> {
    let (w, h) = img.dimensions();
    if w > u16::MAX as u32 || h > u16::MAX as u32 {
        return Err(ImageError::Encode(format!(
            "{w}x{h} exceeds the JPEG size limit"
        )));
    }
    let mut out = Vec::new();
    let mut encoder = Encoder::new(&mut out, quality.clamp(1, 100));
    encoder.set_sampling_factor(SamplingFactor::R_4_2_0);
    encoder
        .encode(img.as_raw(), w as u16, h as u16, jpeg_encoder::ColorType::Rgb)
        .map_err(|e| ImageError::Encode(e.to_string()))?;
    Ok(out)
}

/// Write `bytes`, creating missing parent directories.
fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn write_png(img: &ImageRGB8, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), &encode_png(img)?)
}

pub fn write_jpeg(img: &ImageRGB8, quality: u8, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), &encode_jpeg(img, quality)?)
}
