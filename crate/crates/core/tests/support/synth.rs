//! Synthetic inputs for tests and examples: random images, random stain
//! matrices and Beer-Lambert rendered tissue tiles.
//!
//! Rendering here is written independently of the library so it can serve
//! as an oracle for the stain code.

#![allow(dead_code)]

use std::path::Path;

use rand::Rng;
use strongaug::shiftgen::{DatasetManifest, ManifestEntry, MANIFEST_FILE};
use strongaug::ImageRGB8;

pub const I0: f64 = 255.0;

pub fn random_image<R: Rng>(rng: &mut R, w: u32, h: u32) -> ImageRGB8 {
    let mut data = vec![0u8; (w * h * 3) as usize];
    rng.fill(&mut data[..]);
    ImageRGB8::from_raw(w, h, data).unwrap()
}

pub fn unit(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

pub fn angle_between(a: [f64; 3], b: [f64; 3]) -> f64 {
    let (a, b) = (unit(a), unit(b));
    let d = (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]).clamp(-1.0, 1.0);
    d.acos().to_degrees()
}

/// Random stain pair with every component at least 0.25, so pure-stain
/// pixels clear a 0.15 OD tissue threshold in all channels, and the two
/// columns at least 20 degrees apart. The first column has the larger red
/// component, matching the haematoxylin labelling rule.
pub fn random_stain_pair<R: Rng>(rng: &mut R) -> ([f64; 3], [f64; 3]) {
    loop {
        let h = unit([
            rng.random_range(0.5..0.9),
            rng.random_range(0.4..0.8),
            rng.random_range(0.25..0.5),
        ]);
        let e = unit([
            rng.random_range(0.25..0.4),
            rng.random_range(0.8..1.0),
            rng.random_range(0.25..0.5),
        ]);
        if h.iter().chain(&e).all(|&v| v >= 0.25) && angle_between(h, e) >= 20.0 && h[0] > e[0]
        {
            return (h, e);
        }
    }
}

/// Beer-Lambert: intensity = I0 * 10^(-(h * ch + e * ce)), rounded.
pub fn render_pixel(h: [f64; 3], e: [f64; 3], ch: f64, ce: f64) -> [u8; 3] {
    let mut out = [0u8; 3];
    for c in 0..3 {
        let od = h[c] * ch + e[c] * ce;
        out[c] = (I0 * 10f64.powf(-od)).round().clamp(0.0, 255.0) as u8;
    }
    out
}

pub fn render(h: [f64; 3], e: [f64; 3], conc: &[[f64; 2]], w: u32, hgt: u32) -> ImageRGB8 {
    let data = conc
        .iter()
        .flat_map(|c| render_pixel(h, e, c[0], c[1]))
        .collect();
    ImageRGB8::from_raw(w, hgt, data).unwrap()
}

/// Concentrations mixing pure-haematoxylin, pure-eosin and mixed pixels
/// over a range of densities.
pub fn random_concentrations<R: Rng>(rng: &mut R, n: usize) -> Vec<[f64; 2]> {
    (0..n)
        .map(|_| match rng.random_range(0..3) {
            0 => [rng.random_range(0.6..1.6), 0.0],
            1 => [0.0, rng.random_range(0.6..1.6)],
            _ => [rng.random_range(0.1..1.0), rng.random_range(0.1..1.0)],
        })
        .collect()
}

/// Commonly used H&E reference vectors.
pub const REF_H: [f64; 3] = [0.65, 0.70, 0.29];
pub const REF_E: [f64; 3] = [0.07, 0.99, 0.11];

/// A small tissue-like tile: eosin-stained stroma with white lumen
/// patches and haematoxylin-dense round nuclei. Label 1 tiles have more
/// nuclei. Per-tile stain strengths vary by +-15%.
pub fn tissue_tile<R: Rng>(rng: &mut R, label: u8, size: u32) -> ImageRGB8 {
    let n = (size * size) as usize;
    let s = size as f64;
    let gain_h = rng.random_range(0.85..1.15);
    let gain_e = rng.random_range(0.85..1.15);
    let mut conc = vec![[0.0f64; 2]; n];
    for c in conc.iter_mut() {
        *c = [
            0.05 + rng.random_range(0.0..0.05),
            0.45 + rng.random_range(-0.1..0.1),
        ];
    }
    let mut disc = |cx: f64, cy: f64, r: f64, value: Option<[f64; 2]>, rng: &mut R| {
        for y in 0..size {
            for x in 0..size {
                let dx = x as f64 + 0.5 - cx;
                let dy = y as f64 + 0.5 - cy;
                if dx * dx + dy * dy <= r * r {
                    conc[(y * size + x) as usize] = match value {
                        Some(v) => [v[0] + rng.random_range(-0.05..0.05), v[1]],
                        None => [0.0, 0.0],
                    };
                }
            }
        }
    };
    for _ in 0..rng.random_range(1..=2) {
        let (cx, cy) = (rng.random_range(0.0..s), rng.random_range(0.0..s));
        disc(cx, cy, rng.random_range(0.1 * s..0.2 * s), None, rng);
    }
    let nuclei = if label == 1 {
        rng.random_range(9..=14)
    } else {
        rng.random_range(3..=7)
    };
    for _ in 0..nuclei {
        let (cx, cy) = (rng.random_range(0.0..s), rng.random_range(0.0..s));
        let dens = rng.random_range(0.8..1.1);
        disc(cx, cy, rng.random_range(0.06 * s..0.1 * s), Some([dens, 0.1]), rng);
    }
    for c in conc.iter_mut() {
        c[0] *= gain_h;
        c[1] *= gain_e;
    }
    render(unit(REF_H), unit(REF_E), &conc, size, size)
}

/// Write `images` as PNGs under `dir/img/` with a manifest. Ids are
/// `<prefix><index>`.
pub fn write_dataset(dir: &Path, prefix: &str, images: &[(ImageRGB8, u8)]) -> DatasetManifest {
    let entries = images
        .iter()
        .enumerate()
        .map(|(i, (img, label))| {
            let rel = format!("img/{prefix}{i:05}.png");
            strongaug::imgcore::io::write_png(img, dir.join(&rel)).unwrap();
            ManifestEntry {
                id: format!("{prefix}{i:05}"),
                path: rel,
                label: *label,
                padding: None,
            }
        })
        .collect();
    let m = DatasetManifest::new(entries).unwrap();
    m.write_atomic(&dir.join(MANIFEST_FILE)).unwrap();
    m
}
