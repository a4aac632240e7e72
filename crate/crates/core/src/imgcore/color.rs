use super::{to_byte, GrayImage8, ImageRGB8};

/// Hexcone HSV with all components in unit range; `h` is a fraction of a
/// full turn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsvPixel {
    pub h: f32,
    pub s: f32,
    pub v: f32,
}

const LUMA_R: f32 = 0.299;
const LUMA_G: f32 = 0.587;
const LUMA_B: f32 = 0.114;

/// ITU-R BT.601 luma of an RGB triple, unrounded.
#[inline]
pub fn luma(p: [u8; 3]) -> f32 {
    LUMA_R * p[0] as f32 + LUMA_G * p[1] as f32 + LUMA_B * p[2] as f32
}

pub fn to_grayscale_luma(img: &ImageRGB8) -> GrayImage8 {
    let data = img.pixels().map(|p| to_byte(luma(p))).collect();
    GrayImage8::from_raw(img.width(), img.height(), data).expect("dimensions carried over")
}

pub fn rgb_to_hsv(p: [u8; 3]) -> HsvPixel {
    let r = p[0] as f32 / 255.0;
    let g = p[1] as f32 / 255.0;
    let b = p[2] as f32 / 255.0;
    let maxc = r.max(g).max(b);
    let minc = r.min(g).min(b);
    let v = maxc;
    if maxc == minc {
        return HsvPixel { h: 0.0, s: 0.0, v };
    }
    let range = maxc - minc;
    let s = range / maxc;
    let rc = (maxc - r) / range;
    let gc = (maxc - g) / range;
    let bc = (maxc - b) / range;
    let h = if r == maxc {
        bc - gc
    } else if g == maxc {
        2.0 + rc - bc
    } else {
        4.0 + gc - rc
    };
    let mut h = (h / 6.0).rem_euclid(1.0);
    if h >= 1.0 {
        h = 0.0;
    }
    HsvPixel { h, s, v }
}

pub fn hsv_to_rgb(hsv: HsvPixel) -> [u8; 3] {
    let HsvPixel { h, s, v } = hsv;
    if s <= 0.0 {
        let c = to_byte(v * 255.0);
        return [c, c, c];
    }
    let h6 = h.rem_euclid(1.0) * 6.0;
    let sector = h6.floor();
    let f = h6 - sector;
    let p = v * (1.0 - s);
    let q = v * (1.0 - s * f);
    let t = v * (1.0 - s * (1.0 - f));
    let (r, g, b) = match sector as i32 % 6 {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    };
    [to_byte(r * 255.0), to_byte(g * 255.0), to_byte(b * 255.0)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_red() {
        let hsv = rgb_to_hsv([255, 0, 0]);
        assert_eq!(hsv, HsvPixel { h: 0.0, s: 1.0, v: 1.0 });
    }

    #[test]
    fn gray_has_zero_saturation() {
        let hsv = rgb_to_hsv([128, 128, 128]);
        assert_eq!(hsv.s, 0.0);
        assert!((hsv.v - 0.502).abs() < 1e-3);
    }

    #[test]
    fn lattice_round_trip_within_one() {
        // 17 samples per axis: 0, 16, ..., 240, 255
        let axis: Vec<u8> = (0..17).map(|i| (i * 16).min(255) as u8).collect();
        for &r in &axis {
            for &g in &axis {
                for &b in &axis {
                    let back = hsv_to_rgb(rgb_to_hsv([r, g, b]));
                    for c in 0..3 {
                        let d = (back[c] as i16 - [r, g, b][c] as i16).abs();
                        assert!(d <= 1, "({r},{g},{b}) -> {back:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn hue_in_unit_range() {
        for p in [[0, 0, 255], [255, 0, 1], [10, 200, 30], [255, 255, 0]] {
            let h = rgb_to_hsv(p).h;
            assert!((0.0..1.0).contains(&h), "{p:?} -> {h}");
        }
    }

    #[test]
    fn luma_examples() {
        let img = ImageRGB8::from_raw(3, 1, vec![255, 255, 255, 255, 0, 0, 90, 90, 90]).unwrap();
        let g = to_grayscale_luma(&img);
        assert_eq!(g.as_raw(), &[255, 76, 90]);
    }

    #[test]
    fn gray_pixels_are_fixed_points_of_luma() {
        for v in 0..=255u8 {
            assert_eq!(to_byte(luma([v, v, v])), v);
        }
    }
}
