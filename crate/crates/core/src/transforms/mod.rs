//! Catalog of magnitude-parameterised image transformations.
//!
//! Every kind has a legal magnitude domain, an optional no-effect value and
//! two flags: `affine` (geometric warps, of which a StrongAugment trace holds
//! at most one) and `evaluation_only` (never sampled by a training policy).
//!
//! Magnitude units per kind:
//!
//! | kind | unit |
//! |------|------|
//! | shear_x, shear_y, rotate | degrees |
//! | translate_x, translate_y | pixels |
//! | saturation, brightness, contrast, sharpness, red, green, blue | blend / gain factor |
//! | gamma | exponent |
//! | gaussian_blur | sigma in pixels |
//! | solarize | threshold byte (256 disables) |
//! | posterize | retained bits |
//! | hue | fraction of a hue turn |
//! | noise | variance in byte² |
//! | emboss | blend strength |
//! | jpeg | encoder quality |

mod grid;
mod kernels;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imgcore::{ImageError, ImageRGB8, Interpolation};

pub use grid::default_eval_grid;
pub use kernels::{emboss, equalize_channel, gaussian_kernel};

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("magnitude {value} for {kind} is outside its legal range [{lo}, {hi}]")]
    MagnitudeOutOfRange {
        kind: TransformKind,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("{kind} takes an integer magnitude, got {value}")]
    NonIntegerMagnitude { kind: TransformKind, value: f64 },
    #[error("{kind} takes no magnitude, got {value}")]
    UnexpectedMagnitude { kind: TransformKind, value: f64 },
    #[error("unknown transform kind `{0}`")]
    UnknownKind(String),
    #[error(transparent)]
    Image(#[from] ImageError),
}

impl TransformError {
    pub fn kind(&self) -> &'static str {
        match self {
            TransformError::MagnitudeOutOfRange { .. } => "MagnitudeOutOfRange",
            TransformError::NonIntegerMagnitude { .. } => "NonIntegerMagnitude",
            TransformError::UnexpectedMagnitude { .. } => "UnexpectedMagnitude",
            TransformError::UnknownKind(_) => "UnknownKind",
            TransformError::Image(e) => e.kind(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    Identity,
    ShearX,
    ShearY,
    TranslateX,
    TranslateY,
    Rotate,
    Saturation,
    Brightness,
    Contrast,
    Sharpness,
    GaussianBlur,
    Solarize,
    Posterize,
    Equalize,
    Autocontrast,
    Grayscale,
    Gamma,
    Hue,
    Red,
    Green,
    Blue,
    Noise,
    Emboss,
    Jpeg,
}

/// Legal magnitude values for a kind. Bounds are inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MagnitudeDomain {
    /// The kind ignores its magnitude; the canonical value is 0.
    None,
    Continuous { lo: f64, hi: f64 },
    Integer { lo: i64, hi: i64 },
}

impl MagnitudeDomain {
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            MagnitudeDomain::None => (0.0, 0.0),
            MagnitudeDomain::Continuous { lo, hi } => (lo, hi),
            MagnitudeDomain::Integer { lo, hi } => (lo as f64, hi as f64),
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        let (lo, hi) = self.bounds();
        v >= lo && v <= hi && (!self.is_integer() || v.fract() == 0.0)
    }

    pub fn is_integer(&self) -> bool {
        matches!(self, MagnitudeDomain::Integer { .. })
    }
}

impl TransformKind {
    pub const ALL: [TransformKind; 24] = [
        TransformKind::Identity,
        TransformKind::ShearX,
        TransformKind::ShearY,
        TransformKind::TranslateX,
        TransformKind::TranslateY,
        TransformKind::Rotate,
        TransformKind::Saturation,
        TransformKind::Brightness,
        TransformKind::Contrast,
        TransformKind::Sharpness,
        TransformKind::GaussianBlur,
        TransformKind::Solarize,
        TransformKind::Posterize,
        TransformKind::Equalize,
        TransformKind::Autocontrast,
        TransformKind::Grayscale,
        TransformKind::Gamma,
        TransformKind::Hue,
        TransformKind::Red,
        TransformKind::Green,
        TransformKind::Blue,
        TransformKind::Noise,
        TransformKind::Emboss,
        TransformKind::Jpeg,
    ];

    pub fn name(self) -> &'static str {
        use TransformKind::*;
        match self {
            Identity => "identity",
            ShearX => "shear_x",
            ShearY => "shear_y",
            TranslateX => "translate_x",
            TranslateY => "translate_y",
            Rotate => "rotate",
            Saturation => "saturation",
            Brightness => "brightness",
            Contrast => "contrast",
            Sharpness => "sharpness",
            GaussianBlur => "gaussian_blur",
            Solarize => "solarize",
            Posterize => "posterize",
            Equalize => "equalize",
            Autocontrast => "autocontrast",
            Grayscale => "grayscale",
            Gamma => "gamma",
            Hue => "hue",
            Red => "red",
            Green => "green",
            Blue => "blue",
            Noise => "noise",
            Emboss => "emboss",
            Jpeg => "jpeg",
        }
    }

    pub fn is_affine(self) -> bool {
        use TransformKind::*;
        matches!(self, ShearX | ShearY | TranslateX | TranslateY | Rotate)
    }

    pub fn is_evaluation_only(self) -> bool {
        matches!(
            self,
            TransformKind::Noise | TransformKind::Emboss | TransformKind::Jpeg
        )
    }

    /// Every value `apply` accepts for this kind. This is the hull of all
    /// preset policy ranges plus the no-effect value.
    pub fn domain(self) -> MagnitudeDomain {
        use MagnitudeDomain::{Continuous, Integer};
        use TransformKind::*;
        match self {
            Identity | Equalize | Autocontrast | Grayscale => MagnitudeDomain::None,
            ShearX | ShearY => Continuous { lo: -145.0, hi: 145.0 },
            TranslateX | TranslateY => Continuous { lo: -72.0, hi: 72.0 },
            Rotate => Continuous { lo: -135.0, hi: 135.0 },
            Saturation => Continuous { lo: 0.0, hi: 2.0 },
            Brightness | Contrast => Continuous { lo: 0.01, hi: 1.99 },
            Sharpness => Continuous { lo: 0.01, hi: 2.0 },
            GaussianBlur => Continuous { lo: 0.0, hi: 2.0 },
            Solarize => Integer { lo: 0, hi: 256 },
            Posterize => Integer { lo: 1, hi: 8 },
            Gamma => Continuous { lo: 0.1, hi: 1.9 },
            Hue => Continuous { lo: -0.5, hi: 0.5 },
            Red | Green | Blue => Continuous { lo: 0.01, hi: 1.99 },
            Noise => Continuous { lo: 0.0, hi: 1000.0 },
            Emboss => Continuous { lo: 0.0, hi: 1.0 },
            Jpeg => Integer { lo: 1, hi: 100 },
        }
    }

    /// Range swept by shifted-evaluation grids: the StrongAugment range for
    /// trainable kinds, the full legal range for evaluation-only ones.
    pub fn evaluation_range(self) -> MagnitudeDomain {
        use MagnitudeDomain::{Continuous, Integer};
        use TransformKind::*;
        match self {
            TranslateX | TranslateY => Continuous { lo: -32.0, hi: 32.0 },
            Brightness | Contrast | Gamma => Continuous { lo: 0.1, hi: 1.9 },
            Sharpness => Continuous { lo: 1.0, hi: 2.0 },
            Solarize => Integer { lo: 0, hi: 255 },
            other => other.domain(),
        }
    }

    /// Magnitude at which the transform leaves every image unchanged, for
    /// the kinds that have one in the augmentation-space table.
    pub fn no_effect(self) -> Option<f64> {
        use TransformKind::*;
        match self {
            ShearX | ShearY | TranslateX | TranslateY | Rotate => Some(0.0),
            Saturation | Brightness | Contrast | Sharpness => Some(1.0),
            GaussianBlur => Some(0.0),
            Solarize => Some(256.0),
            Posterize => Some(8.0),
            Gamma => Some(1.0),
            Hue => Some(0.0),
            Red | Green | Blue => Some(1.0),
            Identity | Equalize | Autocontrast | Grayscale | Noise | Emboss | Jpeg => None,
        }
    }

    pub fn unit(self) -> &'static str {
        use TransformKind::*;
        match self {
            Identity | Equalize | Autocontrast | Grayscale => "none",
            ShearX | ShearY | Rotate => "degrees",
            TranslateX | TranslateY => "pixels",
            Saturation | Brightness | Contrast | Sharpness | Red | Green | Blue => "factor",
            Gamma => "exponent",
            GaussianBlur => "sigma_pixels",
            Solarize => "threshold",
            Posterize => "bits",
            Hue => "turns",
            Noise => "variance_byte2",
            Emboss => "strength",
            Jpeg => "quality",
        }
    }
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TransformKind {
    type Err = TransformError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        let alias = match norm.as_str() {
            "auto_contrast" => "autocontrast",
            "blur" => "gaussian_blur",
            "gray" | "greyscale" => "grayscale",
            other => other,
        };
        TransformKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == alias)
            .ok_or_else(|| TransformError::UnknownKind(s.to_string()))
    }
}

/// A transform kind together with a validated magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMagnitude", into = "RawMagnitude")]
pub struct Magnitude {
    kind: TransformKind,
    value: f64,
}

#[derive(Serialize, Deserialize)]
struct RawMagnitude {
    kind: TransformKind,
    #[serde(default)]
    value: f64,
}

impl TryFrom<RawMagnitude> for Magnitude {
    type Error = TransformError;

    fn try_from(raw: RawMagnitude) -> Result<Self, Self::Error> {
        Magnitude::new(raw.kind, raw.value)
    }
}

impl From<Magnitude> for RawMagnitude {
    fn from(m: Magnitude) -> Self {
        RawMagnitude {
            kind: m.kind,
            value: m.value,
        }
    }
}

impl Magnitude {
    pub fn new(kind: TransformKind, value: f64) -> Result<Self, TransformError> {
        let domain = kind.domain();
        if domain == MagnitudeDomain::None {
            if value != 0.0 {
                return Err(TransformError::UnexpectedMagnitude { kind, value });
            }
            return Ok(Self { kind, value: 0.0 });
        }
        let (lo, hi) = domain.bounds();
        if !(value >= lo && value <= hi) {
            return Err(TransformError::MagnitudeOutOfRange {
                kind,
                value,
                lo,
                hi,
            });
        }
        if domain.is_integer() && value.fract() != 0.0 {
            return Err(TransformError::NonIntegerMagnitude { kind, value });
        }
        // normalise -0.0 so serialized output is stable
        Ok(Self {
            kind,
            value: value + 0.0,
        })
    }

    /// Parameterless kinds (identity, equalize, autocontrast, grayscale).
    pub fn bare(kind: TransformKind) -> Result<Self, TransformError> {
        Self::new(kind, 0.0)
    }

    pub fn no_effect(kind: TransformKind) -> Option<Self> {
        kind.no_effect().map(|v| Self { kind, value: v })
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn value(&self) -> f64 {
        self.value
    }
}

impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.kind.domain() == MagnitudeDomain::None {
            write!(f, "{}", self.kind)
        } else {
            write!(f, "{}({})", self.kind, self.value)
        }
    }
}

/// Resampling settings for the geometric kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApplyOptions {
    pub fill: u8,
    pub interpolation: Interpolation,
}

impl Default for ApplyOptions {
    fn default() -> Self {
        Self {
            fill: 0,
            interpolation: Interpolation::Nearest,
        }
    }
}

/// Apply one transformation with default geometric options.
///
/// `rng` is only drawn from by `noise`.
pub fn apply<R: Rng + ?Sized>(
    img: &ImageRGB8,
    m: &Magnitude,
    rng: &mut R,
) -> Result<ImageRGB8, TransformError> {
    apply_with(img, m, &ApplyOptions::default(), rng)
}

pub fn apply_with<R: Rng + ?Sized>(
    img: &ImageRGB8,
    m: &Magnitude,
    opts: &ApplyOptions,
    rng: &mut R,
) -> Result<ImageRGB8, TransformError> {
    use TransformKind::*;
    let v = m.value;
    let out = match m.kind {
        Identity => img.clone(),
        ShearX | ShearY | TranslateX | TranslateY | Rotate => {
            kernels::geometric(img, m.kind, v, opts)?
        }
        Saturation => kernels::saturation(img, v as f32),
        Brightness => kernels::brightness(img, v as f32),
        Contrast => kernels::contrast(img, v as f32),
        Sharpness => kernels::sharpness(img, v as f32),
        GaussianBlur => kernels::gaussian_blur(img, v as f32),
        Solarize => kernels::solarize(img, v as u16),
        Posterize => kernels::posterize(img, v as u8),
        Equalize => kernels::equalize(img),
        Autocontrast => kernels::autocontrast(img),
        Grayscale => crate::imgcore::to_grayscale_luma(img).to_rgb(),
        Gamma => kernels::gamma(img, v as f32),
        Hue => kernels::hue(img, v),
        Red => kernels::channel_gain(img, 0, v as f32),
        Green => kernels::channel_gain(img, 1, v as f32),
        Blue => kernels::channel_gain(img, 2, v as f32),
        Noise => kernels::gaussian_noise(img, v, rng),
        Emboss => kernels::emboss(img, v as f32),
        Jpeg => kernels::jpeg_round_trip(img, v as u8)?,
    };
    Ok(out)
}

/// Machine-readable description of one catalog entry.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CatalogEntry {
    pub kind: TransformKind,
    pub domain: MagnitudeDomain,
    pub evaluation_range: MagnitudeDomain,
    pub no_effect: Option<f64>,
    pub affine: bool,
    pub evaluation_only: bool,
    pub unit: String,
}

/// The whole catalog as written by `strongaug catalog`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Catalog {
    pub schema_version: u32,
    pub kinds: Vec<CatalogEntry>,
}

impl Catalog {
    pub fn current() -> Self {
        Self {
            schema_version: crate::SCHEMA_VERSION,
            kinds: TransformKind::ALL
                .iter()
                .map(|&kind| CatalogEntry {
                    kind,
                    domain: kind.domain(),
                    evaluation_range: kind.evaluation_range(),
                    no_effect: kind.no_effect(),
                    affine: kind.is_affine(),
                    evaluation_only: kind.is_evaluation_only(),
                    unit: kind.unit().to_string(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn affine_and_evaluation_only_flags() {
        let affine: Vec<_> = TransformKind::ALL.iter().filter(|k| k.is_affine()).collect();
        assert_eq!(affine.len(), 5);
        let eval: Vec<_> = TransformKind::ALL
            .iter()
            .filter(|k| k.is_evaluation_only())
            .map(|k| k.name())
            .collect();
        assert_eq!(eval, ["noise", "emboss", "jpeg"]);
    }

    #[test]
    fn no_effect_values_match_table() {
        use TransformKind::*;
        let expected = [
            (ShearX, 0.0),
            (ShearY, 0.0),
            (TranslateX, 0.0),
            (TranslateY, 0.0),
            (Rotate, 0.0),
            (Saturation, 1.0),
            (Brightness, 1.0),
            (Contrast, 1.0),
            (Sharpness, 1.0),
            (GaussianBlur, 0.0),
            (Solarize, 256.0),
            (Posterize, 8.0),
            (Gamma, 1.0),
            (Hue, 0.0),
            (Red, 1.0),
            (Green, 1.0),
            (Blue, 1.0),
        ];
        let with_entry: Vec<_> = TransformKind::ALL
            .iter()
            .filter_map(|k| k.no_effect().map(|v| (*k, v)))
            .collect();
        assert_eq!(with_entry, expected);
        for (k, v) in expected {
            assert!(k.domain().contains(v), "{k} no-effect {v} must be legal");
        }
    }

    #[test]
    fn magnitude_validation() {
        assert!(Magnitude::new(TransformKind::Brightness, 0.5).is_ok());
        let err = Magnitude::new(TransformKind::Brightness, 2.5).unwrap_err();
        match err {
            TransformError::MagnitudeOutOfRange { kind, lo, hi, .. } => {
                assert_eq!(kind, TransformKind::Brightness);
                assert_eq!((lo, hi), (0.01, 1.99));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            Magnitude::new(TransformKind::Posterize, 3.5),
            Err(TransformError::NonIntegerMagnitude { .. })
        ));
        assert!(matches!(
            Magnitude::new(TransformKind::Equalize, 1.0),
            Err(TransformError::UnexpectedMagnitude { .. })
        ));
        assert!(Magnitude::new(TransformKind::Rotate, f64::NAN).is_err());
        assert!(Magnitude::new(TransformKind::Solarize, 256.0).is_ok());
    }

    #[test]
    fn magnitude_json_is_validated() {
        let ok: Magnitude = serde_json::from_str(r#"{"kind":"hue","value":0.25}"#).unwrap();
        assert_eq!(ok.value(), 0.25);
        assert!(serde_json::from_str::<Magnitude>(r#"{"kind":"hue","value":0.75}"#).is_err());
        let eq: Magnitude = serde_json::from_str(r#"{"kind":"equalize"}"#).unwrap();
        assert_eq!(eq.kind(), TransformKind::Equalize);
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("shear-x".parse::<TransformKind>().unwrap(), TransformKind::ShearX);
        assert_eq!("Auto_Contrast".parse::<TransformKind>().unwrap(), TransformKind::Autocontrast);
        assert!("invert".parse::<TransformKind>().is_err());
        for k in TransformKind::ALL {
            assert_eq!(k.name().parse::<TransformKind>().unwrap(), k);
        }
    }

    #[test]
    fn catalog_serializes_every_kind() {
        let json = serde_json::to_value(Catalog::current()).unwrap();
        assert_eq!(json["schema_version"], 1);
        assert_eq!(json["kinds"].as_array().unwrap().len(), 24);
        let solarize = &json["kinds"][11];
        assert_eq!(solarize["kind"], "solarize");
        assert_eq!(solarize["no_effect"], 256.0);
        assert_eq!(solarize["domain"]["type"], "integer");
    }

    #[test]
    fn brightness_halves_constant_image() {
        let img = ImageRGB8::filled(5, 5, [100, 100, 100]);
        let m = Magnitude::new(TransformKind::Brightness, 0.5).unwrap();
        let out = apply(&img, &m, &mut stream(0, 0)).unwrap();
        assert_eq!(out, ImageRGB8::filled(5, 5, [50, 50, 50]));
    }

    #[test]
    fn solarize_zero_inverts() {
        let img = ImageRGB8::filled(2, 2, [10, 10, 10]);
        let m = Magnitude::new(TransformKind::Solarize, 0.0).unwrap();
        let out = apply(&img, &m, &mut stream(0, 0)).unwrap();
        assert_eq!(out.pixel(0, 0), [245, 245, 245]);
    }

    #[test]
    fn posterize_four_bits() {
        let img = ImageRGB8::filled(2, 2, [173, 173, 173]);
        let m = Magnitude::new(TransformKind::Posterize, 4.0).unwrap();
        let out = apply(&img, &m, &mut stream(0, 0)).unwrap();
        assert_eq!(out.pixel(1, 1), [160, 160, 160]);
    }

    #[test]
    fn geometric_kinds_honour_fill_option() {
        let img = ImageRGB8::filled(8, 8, [10, 20, 30]);
        let m = Magnitude::new(TransformKind::TranslateX, 8.0).unwrap();
        let opts = ApplyOptions {
            fill: 240,
            interpolation: Interpolation::Bilinear,
        };
        let out = apply_with(&img, &m, &opts, &mut stream(0, 0)).unwrap();
        assert!(out.as_raw().iter().all(|&b| b == 240));
    }
}
