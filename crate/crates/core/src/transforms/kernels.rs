// Pixel kernels behind `apply`. All arithmetic is f32 with a single
// clamp-and-round to bytes at the end of each kernel.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{ApplyOptions, TransformKind};
use crate::imgcore::{
    hsv_to_rgb, io, luma, rgb_to_hsv, to_byte, warp_affine, AffineMap, ImageError, ImageRGB8,
};

fn lut(f: impl Fn(f32) -> f32) -> [u8; 256] {
    let mut t = [0u8; 256];
    for (i, slot) in t.iter_mut().enumerate() {
        *slot = to_byte(f(i as f32));
    }
    t
}

pub(super) fn geometric(
    img: &ImageRGB8,
    kind: TransformKind,
    v: f64,
    opts: &ApplyOptions,
) -> Result<ImageRGB8, ImageError> {
    let cx = img.width() as f64 / 2.0;
    let cy = img.height() as f64 / 2.0;
    let map = match kind {
        TransformKind::ShearX => AffineMap::shear_x(v, cy),
        TransformKind::ShearY => AffineMap::shear_y(v, cx),
        TransformKind::TranslateX => AffineMap::translation(v as f32, 0.0),
        TransformKind::TranslateY => AffineMap::translation(0.0, v as f32),
        TransformKind::Rotate => AffineMap::rotation(v, cx, cy),
        _ => unreachable!("not a geometric kind"),
    };
    let map = map
        .with_fill(opts.fill)
        .with_interpolation(opts.interpolation);
    warp_affine(img, &map)
}

pub(super) fn brightness(img: &ImageRGB8, m: f32) -> ImageRGB8 {
    img.map_bytes(&lut(|v| m * v))
}

pub(super) fn channel_gain(img: &ImageRGB8, channel: usize, m: f32) -> ImageRGB8 {
    let t = lut(|v| m * v);
    img.map_pixels(|mut p| {
        p[channel] = t[p[channel] as usize];
        p
    })
}

pub(super) fn gamma(img: &ImageRGB8, g: f32) -> ImageRGB8 {
    img.map_bytes(&lut(|v| 255.0 * (v / 255.0).powf(g)))
}

pub(super) fn solarize(img: &ImageRGB8, threshold: u16) -> ImageRGB8 {
    let mut t = [0u8; 256];
    for (i, slot) in t.iter_mut().enumerate() {
        *slot = if i as u16 >= threshold { 255 - i as u8 } else { i as u8 };
    }
    img.map_bytes(&t)
}

pub(super) fn posterize(img: &ImageRGB8, bits: u8) -> ImageRGB8 {
    let mask = (0xFFu16 << (8 - bits as u16)) as u8;
    let mut t = [0u8; 256];
    for (i, slot) in t.iter_mut().enumerate() {
        *slot = i as u8 & mask;
    }
    img.map_bytes(&t)
}

/// Blend towards the image-wide mean luma.
pub(super) fn contrast(img: &ImageRGB8, m: f32) -> ImageRGB8 {
    let sum: f64 = img.pixels().map(|p| luma(p) as f64).sum();
    let mean = (sum / img.pixel_count() as f64) as f32;
    img.map_bytes(&lut(|v| mean + m * (v - mean)))
}

/// Blend each pixel towards its own luma.
pub(super) fn saturation(img: &ImageRGB8, m: f32) -> ImageRGB8 {
    img.map_pixels(|p| {
        let l = luma(p);
        let f = |c: u8| to_byte(l + m * (c as f32 - l));
        [f(p[0]), f(p[1]), f(p[2])]
    })
}

/// Blend against a 3x3 smoothed copy (centre weight 5, others 1, /13).
/// Border pixels have no full neighbourhood and are left as they are.
pub(super) fn sharpness(img: &ImageRGB8, m: f32) -> ImageRGB8 {
    let (w, h) = (img.width() as usize, img.height() as usize);
    if w < 3 || h < 3 {
        return img.clone();
    }
    let src = img.as_raw();
    let mut out = src.to_vec();
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            for c in 0..3 {
                let mut acc = 0.0f32;
                for dy in 0..3 {
                    for dx in 0..3 {
                        let wgt = if dx == 1 && dy == 1 { 5.0 } else { 1.0 };
                        acc += wgt * src[((y + dy - 1) * w + (x + dx - 1)) * 3 + c] as f32;
                    }
                }
                let smooth = acc / 13.0;
                let i = (y * w + x) * 3 + c;
                out[i] = to_byte(smooth + m * (src[i] as f32 - smooth));
            }
        }
    }
    ImageRGB8::from_raw(img.width(), img.height(), out).expect("same dimensions")
}

/// Normalised 1-D Gaussian taps for `sigma`, radius `ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f32) -> Vec<f32> {
    if sigma <= 0.0 {
        return vec![1.0];
    }
    let radius = (3.0 * sigma).ceil() as i32;
    let denom = 2.0 * sigma * sigma;
    let mut k: Vec<f32> = (-radius..=radius)
        .map(|i| (-((i * i) as f32) / denom).exp())
        .collect();
    let sum: f32 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Separable Gaussian blur with edge-replicated borders.
pub(super) fn gaussian_blur(img: &ImageRGB8, sigma: f32) -> ImageRGB8 {
    let k = gaussian_kernel(sigma);
    if k.len() == 1 {
        return img.clone();
    }
    let r = (k.len() / 2) as i64;
    let (w, h) = (img.width() as i64, img.height() as i64);
    let src = img.as_raw();
    let mut tmp = vec![0f32; src.len()];
    for y in 0..h {
        for x in 0..w {
            for c in 0..3 {
                let mut acc = 0.0f32;
                for (j, kv) in k.iter().enumerate() {
                    let sx = (x + j as i64 - r).clamp(0, w - 1);
                    acc += kv * src[((y * w + sx) * 3) as usize + c] as f32;
                }
                tmp[((y * w + x) * 3) as usize + c] = acc;
            }
        }
    }
    let mut out = vec![0u8; src.len()];
    for y in 0..h {
        for x in 0..w {
            for c in 0..3 {
                let mut acc = 0.0f32;
                for (j, kv) in k.iter().enumerate() {
                    let sy = (y + j as i64 - r).clamp(0, h - 1);
                    acc += kv * tmp[((sy * w + x) * 3) as usize + c];
                }
                out[((y * w + x) * 3) as usize + c] = to_byte(acc);
            }
        }
    }
    ImageRGB8::from_raw(img.width(), img.height(), out).expect("same dimensions")
}

/// Histogram-equalisation lookup table for one channel.
///
/// Integer-exact: with `h` the histogram and `last` the count in the
/// highest non-empty bin, `step = (N - last) / 255` (floor). A zero step
/// leaves the channel untouched; otherwise `lut[i] = min(255, (step/2 +
/// cum[i]) / step)` where `cum[i]` counts pixels strictly below `i`.
pub fn equalize_channel(plane: &[u8]) -> [u8; 256] {
    let mut hist = [0u64; 256];
    for &v in plane {
        hist[v as usize] += 1;
    }
    let mut identity = [0u8; 256];
    for (i, slot) in identity.iter_mut().enumerate() {
        *slot = i as u8;
    }
    let last = match hist.iter().rposition(|&c| c > 0) {
        Some(i) => hist[i],
        None => return identity,
    };
    let total: u64 = hist.iter().sum();
    let step = (total - last) / 255;
    if step == 0 {
        return identity;
    }
    let mut t = [0u8; 256];
    let mut n = step / 2;
    for i in 0..256 {
        t[i] = (n / step).min(255) as u8;
        n += hist[i];
    }
    t
}

pub(super) fn equalize(img: &ImageRGB8) -> ImageRGB8 {
    per_channel_lut(img, equalize_channel)
}

/// Stretch each channel's [min, max] onto [0, 255]; flat channels are kept.
pub(super) fn autocontrast(img: &ImageRGB8) -> ImageRGB8 {
    per_channel_lut(img, |plane| {
        let lo = *plane.iter().min().expect("non-empty");
        let hi = *plane.iter().max().expect("non-empty");
        let mut t = [0u8; 256];
        for (i, slot) in t.iter_mut().enumerate() {
            *slot = if hi > lo {
                to_byte((i as f32 - lo as f32) * 255.0 / (hi - lo) as f32)
            } else {
                i as u8
            };
        }
        t
    })
}

fn per_channel_lut(img: &ImageRGB8, make: impl Fn(&[u8]) -> [u8; 256]) -> ImageRGB8 {
    let luts = [
        make(&img.channel(0)),
        make(&img.channel(1)),
        make(&img.channel(2)),
    ];
    img.map_pixels(|p| {
        [
            luts[0][p[0] as usize],
            luts[1][p[1] as usize],
            luts[2][p[2] as usize],
        ]
    })
}

/// Rotate hue by `turns` of the colour circle.
pub(super) fn hue(img: &ImageRGB8, turns: f64) -> ImageRGB8 {
    // ±0.5 both reduce to exactly 0.5 here, so they share one code path
    let shift = turns.rem_euclid(1.0) as f32;
    img.map_pixels(|p| {
        let mut hsv = rgb_to_hsv(p);
        hsv.h += shift;
        if hsv.h >= 1.0 {
            hsv.h -= 1.0;
        }
        hsv_to_rgb(hsv)
    })
}

pub(super) fn gaussian_noise<R: Rng + ?Sized>(img: &ImageRGB8, variance: f64, rng: &mut R) -> ImageRGB8 {
    if variance == 0.0 {
        return img.clone();
    }
    let sigma = variance.sqrt() as f32;
    let data = img
        .as_raw()
        .iter()
        .map(|&b| {
            let z: f32 = rng.sample(StandardNormal);
            to_byte(b as f32 + sigma * z)
        })
        .collect();
    ImageRGB8::from_raw(img.width(), img.height(), data).expect("same dimensions")
}

const EMBOSS_KERNEL: [[f32; 3]; 3] = [[-1.0, -0.5, 0.0], [-0.5, 1.0, 0.5], [0.0, 0.5, 1.0]];

/// Relief filter: `in + strength * (conv(K) - in)` with edge-replicated
/// borders. `K` sums to one, so flat regions keep their value.
pub fn emboss(img: &ImageRGB8, strength: f32) -> ImageRGB8 {
    if strength == 0.0 {
        return img.clone();
    }
    let (w, h) = (img.width() as i64, img.height() as i64);
    let src = img.as_raw();
    let mut out = vec![0u8; src.len()];
    for y in 0..h {
        for x in 0..w {
            for c in 0..3 {
                let mut acc = 0.0f32;
                for (dy, row) in EMBOSS_KERNEL.iter().enumerate() {
                    let sy = (y + dy as i64 - 1).clamp(0, h - 1);
                    for (dx, kv) in row.iter().enumerate() {
                        let sx = (x + dx as i64 - 1).clamp(0, w - 1);
                        acc += kv * src[((sy * w + sx) * 3) as usize + c] as f32;
                    }
                }
                let i = ((y * w + x) * 3) as usize + c;
                let v = src[i] as f32;
                out[i] = to_byte(v + strength * (acc - v));
            }
        }
    }
    ImageRGB8::from_raw(img.width(), img.height(), out).expect("same dimensions")
}

pub(super) fn jpeg_round_trip(img: &ImageRGB8, quality: u8) -> Result<ImageRGB8, ImageError> {
    let bytes = io::encode_jpeg(img, quality)?;
    io::decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equalize_matches_hand_computed_lut() {
        // 4 zeros, 4 ones, 255 fours: N=263, last bin (4) excluded -> step=(263-255)/255=0
        let mut plane = vec![0u8; 4];
        plane.extend(vec![1u8; 4]);
        plane.extend(vec![4u8; 255]);
        assert_eq!(equalize_channel(&plane)[4], 4, "zero step is identity");

        // 300 zeros then 300 of value 10: step = 300/255 = 1
        let mut plane = vec![0u8; 300];
        plane.extend(vec![10u8; 300]);
        let t = equalize_channel(&plane);
        assert_eq!(t[0], 0);
        // n at i=10 is 0 + 300 -> min(255, 300) = 255
        assert_eq!(t[10], 255);
    }

    #[test]
    fn gaussian_kernel_shape() {
        let k = gaussian_kernel(1.0);
        assert_eq!(k.len(), 7);
        assert!((k.iter().sum::<f32>() - 1.0).abs() < 1e-6);
        assert_eq!(k[0], k[6]);
        assert_eq!(gaussian_kernel(0.0), vec![1.0]);
    }

    #[test]
    fn emboss_keeps_flat_images() {
        let img = ImageRGB8::filled(6, 6, [90, 120, 200]);
        assert_eq!(emboss(&img, 1.0), img);
    }

    #[test]
    fn sharpness_leaves_border() {
        let img = ImageRGB8::from_fn(5, 5, |x, y| [(x * 50) as u8, (y * 50) as u8, 0]);
        let out = sharpness(&img, 2.0);
        for i in 0..5 {
            assert_eq!(out.pixel(i, 0), img.pixel(i, 0));
            assert_eq!(out.pixel(0, i), img.pixel(0, i));
        }
    }

    #[test]
    fn contrast_zero_collapses_to_mean() {
        let img = ImageRGB8::from_raw(2, 1, vec![0, 0, 0, 200, 200, 200]).unwrap();
        let out = contrast(&img, 0.0);
        assert_eq!(out.as_raw(), &[100; 6]);
    }
}
