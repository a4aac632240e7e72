use serde::{Deserialize, Serialize};

use super::{to_byte, ImageError, ImageRGB8};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    Nearest,
    #[default]
    Bilinear,
    Bicubic,
}

/// Forward 2x3 affine map in pixel units: `dst = A * src + t`.
///
/// Pixel `(i, j)` covers `[i, i+1) x [j, j+1)`, so its centre sits at
/// `(i + 0.5, j + 0.5)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub matrix: [[f32; 3]; 2],
    pub fill: u8,
    pub interpolation: Interpolation,
}

/// sin/cos of an angle in degrees, exact at multiples of 90.
fn sin_cos_deg(deg: f64) -> (f64, f64) {
    let r = deg.rem_euclid(360.0);
    if r == 0.0 {
        (0.0, 1.0)
    } else if r == 90.0 {
        (1.0, 0.0)
    } else if r == 180.0 {
        (0.0, -1.0)
    } else if r == 270.0 {
        (-1.0, 0.0)
    } else {
        deg.to_radians().sin_cos()
    }
}

impl AffineMap {
    pub fn identity() -> Self {
        Self {
            matrix: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            fill: 0,
            interpolation: Interpolation::default(),
        }
    }

    pub fn translation(dx: f32, dy: f32) -> Self {
        Self {
            matrix: [[1.0, 0.0, dx], [0.0, 1.0, dy]],
            ..Self::identity()
        }
    }

    /// Counter-clockwise (as displayed, y pointing down) rotation about
    /// `(cx, cy)`.
    pub fn rotation(degrees: f64, cx: f64, cy: f64) -> Self {
        let (s, c) = sin_cos_deg(degrees);
        Self::about_point([[c, s], [-s, c]], cx, cy)
    }

    /// Horizontal shear with factor `tan(degrees)` about the row `cy`.
    pub fn shear_x(degrees: f64, cy: f64) -> Self {
        let k = degrees.to_radians().tan();
        Self::about_point([[1.0, k], [0.0, 1.0]], 0.0, cy)
    }

    /// Vertical shear with factor `tan(degrees)` about the column `cx`.
    pub fn shear_y(degrees: f64, cx: f64) -> Self {
        let k = degrees.to_radians().tan();
        Self::about_point([[1.0, 0.0], [k, 1.0]], cx, 0.0)
    }

    fn about_point(a: [[f64; 2]; 2], cx: f64, cy: f64) -> Self {
        // dst = A (src - c) + c
        let tx = cx - (a[0][0] * cx + a[0][1] * cy);
        let ty = cy - (a[1][0] * cx + a[1][1] * cy);
        Self {
            matrix: [
                [a[0][0] as f32, a[0][1] as f32, tx as f32],
                [a[1][0] as f32, a[1][1] as f32, ty as f32],
            ],
            ..Self::identity()
        }
    }

    pub fn with_fill(mut self, fill: u8) -> Self {
        self.fill = fill;
        self
    }

    pub fn with_interpolation(mut self, interpolation: Interpolation) -> Self {
        self.interpolation = interpolation;
        self
    }

    /// `self` applied after `first`.
    pub fn then_after(&self, first: &AffineMap) -> AffineMap {
        let a = &self.matrix;
        let b = &first.matrix;
        let mut m = [[0f32; 3]; 2];
        for r in 0..2 {
            m[r][0] = a[r][0] * b[0][0] + a[r][1] * b[1][0];
            m[r][1] = a[r][0] * b[0][1] + a[r][1] * b[1][1];
            m[r][2] = a[r][0] * b[0][2] + a[r][1] * b[1][2] + a[r][2];
        }
        AffineMap {
            matrix: m,
            ..*self
        }
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.matrix;
        m[0][0] as f64 * m[1][1] as f64 - m[0][1] as f64 * m[1][0] as f64
    }

    /// Inverse 2x3 matrix, mapping destination to source coordinates.
    pub fn inverse_matrix(&self) -> Result<[[f32; 3]; 2], ImageError> {
        let m = &self.matrix;
        if m.iter().flatten().any(|v| !v.is_finite()) {
            return Err(ImageError::DegenerateAffine);
        }
        let det = self.determinant();
        if det == 0.0 || !det.is_finite() {
            return Err(ImageError::DegenerateAffine);
        }
        let (a, b, c) = (m[0][0] as f64, m[0][1] as f64, m[0][2] as f64);
        let (d, e, f) = (m[1][0] as f64, m[1][1] as f64, m[1][2] as f64);
        let ia = e / det;
        let ib = -b / det;
        let id = -d / det;
        let ie = a / det;
        let ic = -(ia * c + ib * f);
        let if_ = -(id * c + ie * f);
        Ok([
            [ia as f32, ib as f32, ic as f32],
            [id as f32, ie as f32, if_ as f32],
        ])
    }
}

/// Catmull-Rom cubic (a = -0.5).
#[inline]
fn cubic_weight(x: f32) -> f32 {
    const A: f32 = -0.5;
    let x = x.abs();
    if x <= 1.0 {
        ((A + 2.0) * x - (A + 3.0)) * x * x + 1.0
    } else if x < 2.0 {
        ((A * x - 5.0 * A) * x + 8.0 * A) * x - 4.0 * A
    } else {
        0.0
    }
}

/// Resample `img` under `map`. Output pixels whose inverse-mapped centre
/// falls outside the source get `map.fill` on every channel; interior
/// samples near the border use edge-clamped taps.
pub fn warp_affine(img: &ImageRGB8, map: &AffineMap) -> Result<ImageRGB8, ImageError> {
    let inv = map.inverse_matrix()?;
    let (w, h) = img.dimensions();
    let (wf, hf) = (w as f32, h as f32);
    let src = img.as_raw();
    let stride = w as usize * 3;
    let fetch = |x: i64, y: i64, c: usize| -> f32 {
        let x = x.clamp(0, w as i64 - 1) as usize;
        let y = y.clamp(0, h as i64 - 1) as usize;
        src[y * stride + x * 3 + c] as f32
    };

    let mut out = Vec::with_capacity(src.len());
    for y in 0..h {
        let py = y as f32 + 0.5;
        for x in 0..w {
            let px = x as f32 + 0.5;
            let u = inv[0][0] * px + inv[0][1] * py + inv[0][2];
            let v = inv[1][0] * px + inv[1][1] * py + inv[1][2];
            if !(u >= 0.0 && u < wf && v >= 0.0 && v < hf) {
                out.extend_from_slice(&[map.fill; 3]);
                continue;
            }
            match map.interpolation {
                Interpolation::Nearest => {
                    let i = (v as usize * w as usize + u as usize) * 3;
                    out.extend_from_slice(&src[i..i + 3]);
                }
                Interpolation::Bilinear => {
                    let sx = u - 0.5;
                    let sy = v - 0.5;
                    let x0 = sx.floor();
                    let y0 = sy.floor();
                    let fx = sx - x0;
                    let fy = sy - y0;
                    let (x0, y0) = (x0 as i64, y0 as i64);
                    for c in 0..3 {
                        let top = fetch(x0, y0, c) * (1.0 - fx) + fetch(x0 + 1, y0, c) * fx;
                        let bottom =
                            fetch(x0, y0 + 1, c) * (1.0 - fx) + fetch(x0 + 1, y0 + 1, c) * fx;
                        out.push(to_byte(top * (1.0 - fy) + bottom * fy));
                    }
                }
                Interpolation::Bicubic => {
                    let sx = u - 0.5;
                    let sy = v - 0.5;
                    let x0 = sx.floor();
                    let y0 = sy.floor();
                    let fx = sx - x0;
                    let fy = sy - y0;
                    let (x0, y0) = (x0 as i64, y0 as i64);
                    let wx = [
                        cubic_weight(fx + 1.0),
                        cubic_weight(fx),
                        cubic_weight(1.0 - fx),
                        cubic_weight(2.0 - fx),
                    ];
                    let wy = [
                        cubic_weight(fy + 1.0),
                        cubic_weight(fy),
                        cubic_weight(1.0 - fy),
                        cubic_weight(2.0 - fy),
                    ];
                    for c in 0..3 {
                        let mut acc = 0.0f32;
                        for (j, wyj) in wy.iter().enumerate() {
                            let mut row = 0.0f32;
                            for (i, wxi) in wx.iter().enumerate() {
                                row += wxi * fetch(x0 - 1 + i as i64, y0 - 1 + j as i64, c);
                            }
                            acc += wyj * row;
                        }
                        out.push(to_byte(acc));
                    }
                }
            }
        }
    }
    Ok(ImageRGB8::from_raw(w, h, out).expect("same dimensions"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pattern(w: u32, h: u32) -> ImageRGB8 {
        ImageRGB8::from_fn(w, h, |x, y| {
            [
                (x * 37 + y * 11) as u8,
                (x * 5 + y * 91) as u8,
                (x ^ y).wrapping_mul(13) as u8,
            ]
        })
    }

    #[test]
    fn identity_is_noop_for_every_interpolation() {
        let img = pattern(13, 9);
        for interp in [
            Interpolation::Nearest,
            Interpolation::Bilinear,
            Interpolation::Bicubic,
        ] {
            let map = AffineMap::identity().with_interpolation(interp);
            assert_eq!(warp_affine(&img, &map).unwrap(), img, "{interp:?}");
        }
    }

    #[test]
    fn translating_by_width_fills_everything() {
        let img = pattern(16, 8);
        let map = AffineMap::translation(16.0, 0.0).with_fill(7);
        let out = warp_affine(&img, &map).unwrap();
        assert!(out.as_raw().iter().all(|&b| b == 7));
    }

    #[test]
    fn four_quarter_turns_restore_square_image() {
        for size in [8u32, 9, 16] {
            let img = pattern(size, size);
            let c = size as f64 / 2.0;
            let map = AffineMap::rotation(90.0, c, c).with_interpolation(Interpolation::Nearest);
            let mut cur = img.clone();
            for step in 0..4 {
                cur = warp_affine(&cur, &map).unwrap();
                if step < 3 {
                    assert_ne!(cur, img);
                }
            }
            assert_eq!(cur, img, "size {size}");
        }
    }

    #[test]
    fn quarter_turn_is_counter_clockwise() {
        // a bright pixel right of centre should land above centre
        let mut img = ImageRGB8::filled(4, 4, [0, 0, 0]);
        img.set_pixel(3, 1, [255, 255, 255]);
        let map = AffineMap::rotation(90.0, 2.0, 2.0).with_interpolation(Interpolation::Nearest);
        let out = warp_affine(&img, &map).unwrap();
        assert_eq!(out.pixel(1, 0), [255, 255, 255]);
    }

    #[test]
    fn singular_map_is_rejected() {
        let img = pattern(4, 4);
        let map = AffineMap {
            matrix: [[1.0, 2.0, 0.0], [2.0, 4.0, 0.0]],
            ..AffineMap::identity()
        };
        assert!(matches!(
            warp_affine(&img, &map),
            Err(ImageError::DegenerateAffine)
        ));
    }

    #[test]
    fn composition_matches_sequential_translation() {
        let a = AffineMap::translation(2.0, 1.0);
        let b = AffineMap::translation(-1.0, 3.0);
        let ab = a.then_after(&b);
        assert_eq!(ab.matrix, [[1.0, 0.0, 1.0], [0.0, 1.0, 4.0]]);
    }

    #[test]
    fn catmull_rom_partition_of_unity() {
        for i in 0..=20 {
            let f = i as f32 / 20.0;
            let s = cubic_weight(f + 1.0) + cubic_weight(f) + cubic_weight(1.0 - f) + cubic_weight(2.0 - f);
            assert!((s - 1.0).abs() < 1e-6);
        }
    }
}
