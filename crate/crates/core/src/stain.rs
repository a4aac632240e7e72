//! Haematoxylin/eosin stain separation and intensity adjustment.
//!
//! Pixels are moved to optical density (OD), `OD_c = -log10(max(I_c, 1) / I0)`,
//! where stains mix linearly: `OD = M c` with `M` a 3x2 matrix of unit stain
//! vectors and `c` the per-pixel stain densities. [`macenko_fit`] estimates
//! `M` from the OD cloud of one image, [`solve_concentrations`] recovers `c`
//! and [`stain_adjust`] rescales each stain before rendering back to RGB.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imgcore::{to_byte, ImageRGB8};

/// Default OD threshold below which a pixel counts as background.
pub const DEFAULT_BETA: f64 = 0.15;
/// Default percentile (and its complement) of the extreme stain angles.
pub const DEFAULT_ALPHA: f64 = 1.0;
pub const DEFAULT_BACKGROUND: f64 = 255.0;
/// Minimum number of tissue pixels needed for a fit.
pub const MIN_TISSUE_PIXELS: usize = 200;

const MIN_COLUMN_ANGLE_DEG: f64 = 1.0;
const UNIT_NORM_TOLERANCE: f64 = 1e-6;
// second/first eigenvalue ratio below which the OD cloud is a line
const PLANE_RANK_RATIO: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum StainError {
    #[error("only {found} tissue pixels above OD {beta}, need at least {needed}")]
    InsufficientTissue {
        found: usize,
        needed: usize,
        beta: f64,
    },
    #[error("tissue optical densities do not span a plane")]
    DegenerateStainPlane,
    #[error("none of the {attempted} images could be fitted")]
    NoFittableImages { attempted: usize },
    #[error("invalid stain model: {0}")]
    InvalidModel(String),
    #[error("stain multipliers must be finite and non-negative, got h={h}, e={e}")]
    InvalidAdjustment { h: f64, e: f64 },
}

impl StainError {
    pub fn kind(&self) -> &'static str {
        match self {
            StainError::InsufficientTissue { .. } => "InsufficientTissue",
            StainError::DegenerateStainPlane => "DegenerateStainPlane",
            StainError::NoFittableImages { .. } => "NoFittableImages",
            StainError::InvalidModel(_) => "InvalidModel",
            StainError::InvalidAdjustment { .. } => "InvalidAdjustment",
        }
    }
}

/// Parameters and statistics recorded with a fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitMetadata {
    pub beta: f64,
    pub alpha: f64,
    /// Tissue pixels that entered the fit (summed over images for a mean model).
    pub pixel_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub images_used: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub images_skipped: Option<usize>,
}

/// Unit-norm haematoxylin (column 0) and eosin (column 1) OD vectors plus
/// the background intensity `I0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StainModelJson", into = "StainModelJson")]
pub struct StainModel {
    haematoxylin: [f64; 3],
    eosin: [f64; 3],
    background_intensity: f64,
    fit: Option<FitMetadata>,
}

/// On-disk layout: the 3x2 matrix as six row-major entries.
#[derive(Serialize, Deserialize)]
struct StainModelJson {
    stain_matrix: [f64; 6],
    background_intensity: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fit: Option<FitMetadata>,
}

impl TryFrom<StainModelJson> for StainModel {
    type Error = StainError;

    fn try_from(j: StainModelJson) -> Result<Self, StainError> {
        let m = j.stain_matrix;
        let h = [m[0], m[2], m[4]];
        let e = [m[1], m[3], m[5]];
        for (name, col) in [("haematoxylin", h), ("eosin", e)] {
            if (norm(col) - 1.0).abs() > UNIT_NORM_TOLERANCE {
                return Err(StainError::InvalidModel(format!(
                    "{name} column is not unit length"
                )));
            }
        }
        let mut model = StainModel::from_columns(h, e, j.background_intensity)?;
        // keep the stored columns bit-exact instead of renormalising
        model.haematoxylin = h;
        model.eosin = e;
        model.fit = j.fit;
        Ok(model)
    }
}

impl From<StainModel> for StainModelJson {
    fn from(s: StainModel) -> Self {
        let (h, e) = (s.haematoxylin, s.eosin);
        StainModelJson {
            stain_matrix: [h[0], e[0], h[1], e[1], h[2], e[2]],
            background_intensity: s.background_intensity,
            fit: s.fit,
        }
    }
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn normalized(v: [f64; 3]) -> Option<[f64; 3]> {
    let n = norm(v);
    (n > 0.0 && n.is_finite()).then(|| [v[0] / n, v[1] / n, v[2] / n])
}

/// Angle between two vectors, in degrees.
pub fn angle_deg(a: [f64; 3], b: [f64; 3]) -> f64 {
    let c = dot(a, b) / (norm(a) * norm(b));
    c.clamp(-1.0, 1.0).acos().to_degrees()
}

/// Decide which of two stain vectors is haematoxylin: the one with the
/// larger red OD component (ties broken on blue, then green). Symmetric in
/// its arguments.
pub fn order_stains(a: [f64; 3], b: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let key = |v: [f64; 3]| (v[0], v[2], v[1]);
    let (ka, kb) = (key(a), key(b));
    let a_first = ka
        .0
        .total_cmp(&kb.0)
        .then(ka.1.total_cmp(&kb.1))
        .then(ka.2.total_cmp(&kb.2))
        .is_ge();
    if a_first {
        (a, b)
    } else {
        (b, a)
    }
}

impl StainModel {
    /// Build a model from (not necessarily normalised) stain vectors.
    pub fn from_columns(
        haematoxylin: [f64; 3],
        eosin: [f64; 3],
        background_intensity: f64,
    ) -> Result<Self, StainError> {
        if !(background_intensity > 0.0 && background_intensity.is_finite()) {
            return Err(StainError::InvalidModel(format!(
                "background intensity must be positive, got {background_intensity}"
            )));
        }
        let mut cols = [[0.0; 3]; 2];
        for (slot, (name, col)) in cols
            .iter_mut()
            .zip([("haematoxylin", haematoxylin), ("eosin", eosin)])
        {
            if col.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(StainError::InvalidModel(format!(
                    "{name} column must be finite and non-negative: {col:?}"
                )));
            }
            *slot = normalized(col)
                .ok_or_else(|| StainError::InvalidModel(format!("{name} column is zero")))?;
        }
        let angle = angle_deg(cols[0], cols[1]);
        if angle <= MIN_COLUMN_ANGLE_DEG {
            return Err(StainError::InvalidModel(format!(
                "stain columns are only {angle:.3} degrees apart"
            )));
        }
        Ok(Self {
            haematoxylin: cols[0],
            eosin: cols[1],
            background_intensity,
            fit: None,
        })
    }

    /// Commonly cited reference H&E vectors; handy for synthetic data.
    pub fn reference() -> Self {
        Self::from_columns([0.65, 0.70, 0.29], [0.07, 0.99, 0.11], DEFAULT_BACKGROUND)
            .expect("valid reference vectors")
    }

    pub fn haematoxylin(&self) -> [f64; 3] {
        self.haematoxylin
    }

    pub fn eosin(&self) -> [f64; 3] {
        self.eosin
    }

    pub fn background_intensity(&self) -> f64 {
        self.background_intensity
    }

    pub fn fit_metadata(&self) -> Option<&FitMetadata> {
        self.fit.as_ref()
    }

    pub fn with_background(mut self, i0: f64) -> Result<Self, StainError> {
        if !(i0 > 0.0 && i0.is_finite()) {
            return Err(StainError::InvalidModel(format!(
                "background intensity must be positive, got {i0}"
            )));
        }
        self.background_intensity = i0;
        Ok(self)
    }

    /// Rows of the 3x2 stain matrix.
    pub fn matrix(&self) -> [[f64; 2]; 3] {
        let (h, e) = (self.haematoxylin, self.eosin);
        [[h[0], e[0]], [h[1], e[1]], [h[2], e[2]]]
    }

    /// `(M^T M)^-1 M^T`, the least-squares solver for `OD = M c`.
    pub fn pseudo_inverse(&self) -> [[f64; 3]; 2] {
        let (h, e) = (self.haematoxylin, self.eosin);
        let (a, b, d) = (dot(h, h), dot(h, e), dot(e, e));
        let det = a * d - b * b;
        let (ia, ib, id) = (d / det, -b / det, a / det);
        let mut p = [[0.0; 3]; 2];
        for c in 0..3 {
            p[0][c] = ia * h[c] + ib * e[c];
            p[1][c] = ib * h[c] + id * e[c];
        }
        p
    }

    /// OD vector for the given stain densities.
    pub fn od_for(&self, ch: f64, ce: f64) -> [f64; 3] {
        let (h, e) = (self.haematoxylin, self.eosin);
        [
            h[0] * ch + e[0] * ce,
            h[1] * ch + e[1] * ce,
            h[2] * ch + e[2] * ce,
        ]
    }
}

/// Per-pixel optical density.
#[derive(Debug, Clone, PartialEq)]
pub struct OdRaster {
    pub width: u32,
    pub height: u32,
    pub data: Vec<[f64; 3]>,
}

/// Per-pixel non-negative (haematoxylin, eosin) densities.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationMap {
    pub width: u32,
    pub height: u32,
    pub data: Vec<[f64; 2]>,
}

/// Multipliers applied to the haematoxylin and eosin densities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StainAdjustment {
    pub h: f64,
    pub e: f64,
}

impl StainAdjustment {
    pub fn new(h: f64, e: f64) -> Result<Self, StainError> {
        if !(h.is_finite() && e.is_finite() && h >= 0.0 && e >= 0.0) {
            return Err(StainError::InvalidAdjustment { h, e });
        }
        Ok(Self { h, e })
    }

    pub fn unchanged() -> Self {
        Self { h: 1.0, e: 1.0 }
    }
}

#[inline]
fn pixel_od(p: [u8; 3], i0: f64) -> [f64; 3] {
    let f = |v: u8| -((v.max(1) as f64) / i0).log10();
    [f(p[0]), f(p[1]), f(p[2])]
}

pub fn rgb_to_od(img: &ImageRGB8, i0: f64) -> OdRaster {
    OdRaster {
        width: img.width(),
        height: img.height(),
        data: img.pixels().map(|p| pixel_od(p, i0)).collect(),
    }
}

pub fn od_to_rgb(od: &OdRaster, i0: f64) -> ImageRGB8 {
    let mut data = Vec::with_capacity(od.data.len() * 3);
    for px in &od.data {
        for &v in px {
            data.push(to_byte((i0 * 10f64.powf(-v)) as f32));
        }
    }
    ImageRGB8::from_raw(od.width, od.height, data).expect("OD raster has valid dimensions")
}

/// Linear-interpolation percentile of sorted data, `p` in [0, 100].
fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    let rank = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Estimate the stain matrix of one image with the Macenko method.
///
/// Tissue pixels are those with OD above `beta` in every channel. Their OD
/// cloud is projected onto its two principal directions; the stain vectors
/// are the directions at the `alpha` and `100 - alpha` angle percentiles.
pub fn macenko_fit(img: &ImageRGB8, beta: f64, alpha: f64) -> Result<StainModel, StainError> {
    macenko_fit_with_background(img, beta, alpha, DEFAULT_BACKGROUND)
}

pub fn macenko_fit_with_background(
    img: &ImageRGB8,
    beta: f64,
    alpha: f64,
    i0: f64,
) -> Result<StainModel, StainError> {
    let tissue: Vec<[f64; 3]> = img
        .pixels()
        .map(|p| pixel_od(p, i0))
        .filter(|od| od.iter().all(|&v| v > beta))
        .collect();
    if tissue.len() < MIN_TISSUE_PIXELS {
        return Err(StainError::InsufficientTissue {
            found: tissue.len(),
            needed: MIN_TISSUE_PIXELS,
            beta,
        });
    }

    let n = tissue.len() as f64;
    let mut mean = [0.0; 3];
    for od in &tissue {
        for c in 0..3 {
            mean[c] += od[c] / n;
        }
    }
    let mut cov = Matrix3::<f64>::zeros();
    for od in &tissue {
        let d = Vector3::new(od[0] - mean[0], od[1] - mean[1], od[2] - mean[2]);
        cov += d * d.transpose();
    }
    cov /= n - 1.0;

    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let (l1, l2) = (eig.eigenvalues[order[0]], eig.eigenvalues[order[1]]);
    if l1.is_nan() || l1 <= 0.0 || l2 <= PLANE_RANK_RATIO * l1 {
        return Err(StainError::DegenerateStainPlane);
    }
    let axis = |i: usize| {
        let v = eig.eigenvectors.column(order[i]);
        let mut v = [v[0], v[1], v[2]];
        if v.iter().sum::<f64>() < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        v
    };
    let (e1, e2) = (axis(0), axis(1));

    let mut angles: Vec<f64> = tissue
        .iter()
        .map(|&od| dot(od, e2).atan2(dot(od, e1)))
        .collect();
    angles.sort_by(|a, b| a.total_cmp(b));
    let lo = percentile_sorted(&angles, alpha);
    let hi = percentile_sorted(&angles, 100.0 - alpha);
    let direction = |phi: f64| {
        let (s, c) = phi.sin_cos();
        // tiny negative components come from noise; stain vectors absorb
        // non-negatively in every channel
        [
            (e1[0] * c + e2[0] * s).max(0.0),
            (e1[1] * c + e2[1] * s).max(0.0),
            (e1[2] * c + e2[2] * s).max(0.0),
        ]
    };
    let v_lo = normalized(direction(lo)).ok_or(StainError::DegenerateStainPlane)?;
    let v_hi = normalized(direction(hi)).ok_or(StainError::DegenerateStainPlane)?;
    let (h, e) = order_stains(v_lo, v_hi);
    let mut model =
        StainModel::from_columns(h, e, i0).map_err(|_| StainError::DegenerateStainPlane)?;
    model.fit = Some(FitMetadata {
        beta,
        alpha,
        pixel_count: tissue.len(),
        images_used: None,
        images_skipped: None,
    });
    Ok(model)
}

/// Column-wise mean of per-image Macenko fits, renormalised.
///
/// Images that cannot be fitted are skipped and counted in the metadata.
/// Fitting runs in parallel; the reduction follows the slice order, so the
/// result does not depend on the thread count.
pub fn mean_stain_model(
    images: &[ImageRGB8],
    beta: f64,
    alpha: f64,
    i0: f64,
) -> Result<StainModel, StainError> {
    let fits: Vec<Option<StainModel>> = images
        .par_iter()
        .map(|img| macenko_fit_with_background(img, beta, alpha, i0).ok())
        .collect();
    mean_of_fits(fits, beta, alpha, i0)
}

/// Average already-computed fits (`None` marks a failed image).
pub fn mean_of_fits(
    fits: impl IntoIterator<Item = Option<StainModel>>,
    beta: f64,
    alpha: f64,
    i0: f64,
) -> Result<StainModel, StainError> {
    let mut h = [0.0; 3];
    let mut e = [0.0; 3];
    let (mut used, mut skipped, mut pixels) = (0usize, 0usize, 0usize);
    for fit in fits {
        match fit {
            Some(m) => {
                for c in 0..3 {
                    h[c] += m.haematoxylin[c];
                    e[c] += m.eosin[c];
                }
                used += 1;
                pixels += m.fit.as_ref().map_or(0, |f| f.pixel_count);
            }
            None => skipped += 1,
        }
    }
    if used == 0 {
        return Err(StainError::NoFittableImages { attempted: skipped });
    }
    let mut model = StainModel::from_columns(h, e, i0)?;
    model.fit = Some(FitMetadata {
        beta,
        alpha,
        pixel_count: pixels,
        images_used: Some(used),
        images_skipped: Some(skipped),
    });
    Ok(model)
}

/// Least-squares stain densities of an OD raster, negatives clamped to 0.
pub fn concentrations_from_od(od: &OdRaster, model: &StainModel) -> ConcentrationMap {
    let p = model.pseudo_inverse();
    let data = od
        .data
        .iter()
        .map(|&v| [dot(p[0], v).max(0.0), dot(p[1], v).max(0.0)])
        .collect();
    ConcentrationMap {
        width: od.width,
        height: od.height,
        data,
    }
}

pub fn solve_concentrations(img: &ImageRGB8, model: &StainModel) -> ConcentrationMap {
    concentrations_from_od(&rgb_to_od(img, model.background_intensity), model)
}

/// Render densities back to RGB through the model.
pub fn render_concentrations(conc: &ConcentrationMap, model: &StainModel) -> ImageRGB8 {
    let od = OdRaster {
        width: conc.width,
        height: conc.height,
        data: conc
            .data
            .iter()
            .map(|&[ch, ce]| model.od_for(ch, ce))
            .collect(),
    };
    od_to_rgb(&od, model.background_intensity)
}

/// Scale the haematoxylin and eosin densities of every pixel.
pub fn stain_adjust(img: &ImageRGB8, model: &StainModel, adj: StainAdjustment) -> ImageRGB8 {
    let mut conc = solve_concentrations(img, model);
    for c in &mut conc.data {
        c[0] *= adj.h;
        c[1] *= adj.e;
    }
    render_concentrations(&conc, model)
}

/// Root-mean-square byte difference over all channels.
pub fn rmse(a: &ImageRGB8, b: &ImageRGB8) -> f64 {
    assert_eq!(a.dimensions(), b.dimensions(), "images must share dimensions");
    let sum: f64 = a
        .as_raw()
        .iter()
        .zip(b.as_raw())
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum();
    (sum / a.as_raw().len() as f64).sqrt()
}
