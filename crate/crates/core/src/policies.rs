//! Augmentation policies: StrongAugment and the RandAugment / TrivialAugment
//! baselines, each over its own preset augmentation space.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imgcore::ImageRGB8;
use crate::transforms::{
    apply_with, ApplyOptions, Magnitude, MagnitudeDomain, TransformError, TransformKind,
};

/// StrongAugment always applies at least this many transforms...
pub const STRONG_MIN_OPS: usize = 2;
/// ...and never more than this many.
pub const STRONG_MAX_OPS: usize = 5;
/// Highest RandAugment level.
pub const RAND_AUGMENT_MAX_LEVEL: u32 = 30;

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("continuation probability must lie in [0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("RandAugment needs at least one operation")]
    InvalidOperationCount,
    #[error("RandAugment level must lie in [0, {RAND_AUGMENT_MAX_LEVEL}], got {0}")]
    InvalidLevel(u32),
    #[error("augmentation space `{0}` does not match its preset")]
    SpaceMismatch(String),
    #[error("policy {variant} cannot sample from the {space} space")]
    WrongSpace { variant: String, space: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceName {
    StrongAugment,
    RandAugment,
    TrivialAugment,
}

impl fmt::Display for SpaceName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpaceName::StrongAugment => "strong_augment",
            SpaceName::RandAugment => "rand_augment",
            SpaceName::TrivialAugment => "trivial_augment",
        })
    }
}

/// One transform in a space with its sampling range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceEntry {
    pub kind: TransformKind,
    pub range: MagnitudeDomain,
    pub affine: bool,
}

impl SpaceEntry {
    fn new(kind: TransformKind, range: MagnitudeDomain) -> Self {
        Self {
            kind,
            range,
            affine: kind.is_affine(),
        }
    }

    /// True if `value` lies in the sampling range or between the range and
    /// the kind's no-effect value (where level-based samplers start from).
    pub fn admits(&self, value: f64) -> bool {
        if self.range == MagnitudeDomain::None {
            return value == 0.0;
        }
        let (mut lo, mut hi) = self.range.bounds();
        if let Some(ne) = self.kind.no_effect() {
            lo = lo.min(ne);
            hi = hi.max(ne);
        }
        value >= lo && value <= hi
    }

    fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Magnitude {
        let value = match self.range {
            MagnitudeDomain::None => 0.0,
            MagnitudeDomain::Continuous { lo, hi } => rng.random_range(lo..=hi),
            MagnitudeDomain::Integer { lo, hi } => rng.random_range(lo..=hi) as f64,
        };
        Magnitude::new(self.kind, value).expect("preset ranges lie inside the catalog domain")
    }
}

/// Named list of transforms with magnitude ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpace")]
pub struct AugmentationSpace {
    pub name: SpaceName,
    pub entries: Vec<SpaceEntry>,
}

#[derive(Deserialize)]
struct RawSpace {
    name: SpaceName,
    #[serde(default)]
    entries: Option<Vec<SpaceEntry>>,
}

impl TryFrom<RawSpace> for AugmentationSpace {
    type Error = PolicyError;

    fn try_from(raw: RawSpace) -> Result<Self, PolicyError> {
        let preset = AugmentationSpace::preset(raw.name);
        match raw.entries {
            None => Ok(preset),
            Some(entries) if entries == preset.entries => Ok(preset),
            Some(_) => Err(PolicyError::SpaceMismatch(raw.name.to_string())),
        }
    }
}

fn cont(lo: f64, hi: f64) -> MagnitudeDomain {
    MagnitudeDomain::Continuous { lo, hi }
}

fn int(lo: i64, hi: i64) -> MagnitudeDomain {
    MagnitudeDomain::Integer { lo, hi }
}

impl AugmentationSpace {
    pub fn preset(name: SpaceName) -> Self {
        use TransformKind::*;
        let none = MagnitudeDomain::None;
        let entries: Vec<(TransformKind, MagnitudeDomain)> = match name {
            SpaceName::StrongAugment => vec![
                (Identity, none),
                (ShearX, cont(-145.0, 145.0)),
                (ShearY, cont(-145.0, 145.0)),
                (TranslateX, cont(-32.0, 32.0)),
                (TranslateY, cont(-32.0, 32.0)),
                (Rotate, cont(-135.0, 135.0)),
                (Saturation, cont(0.0, 2.0)),
                (Brightness, cont(0.1, 1.9)),
                (Contrast, cont(0.1, 1.9)),
                (Sharpness, cont(1.0, 2.0)),
                (GaussianBlur, cont(0.0, 2.0)),
                (Solarize, int(0, 255)),
                (Posterize, int(1, 8)),
                (Equalize, none),
                (Autocontrast, none),
                (Grayscale, none),
                (Gamma, cont(0.1, 1.9)),
                (Hue, cont(-0.5, 0.5)),
                (Red, cont(0.01, 1.99)),
                (Green, cont(0.01, 1.99)),
                (Blue, cont(0.01, 1.99)),
            ],
            SpaceName::RandAugment => vec![
                (Identity, none),
                (ShearX, cont(-17.0, 17.0)),
                (ShearY, cont(-17.0, 17.0)),
                (TranslateX, cont(-72.0, 72.0)),
                (TranslateY, cont(-72.0, 72.0)),
                (Rotate, cont(-30.0, 30.0)),
                (Saturation, cont(0.1, 1.9)),
                (Brightness, cont(0.1, 1.9)),
                (Contrast, cont(0.1, 1.9)),
                (Sharpness, cont(0.1, 1.9)),
                (Solarize, int(0, 255)),
                (Posterize, int(4, 8)),
                (Equalize, none),
                (Autocontrast, none),
            ],
            SpaceName::TrivialAugment => vec![
                (Identity, none),
                (ShearX, cont(-145.0, 145.0)),
                (ShearY, cont(-145.0, 145.0)),
                (TranslateX, cont(-32.0, 32.0)),
                (TranslateY, cont(-32.0, 32.0)),
                (Rotate, cont(-135.0, 135.0)),
                (Saturation, cont(0.01, 1.99)),
                (Brightness, cont(0.01, 1.99)),
                (Contrast, cont(0.01, 1.99)),
                (Sharpness, cont(0.01, 1.99)),
                (Solarize, int(0, 255)),
                (Posterize, int(1, 8)),
                (Equalize, none),
                (Autocontrast, none),
            ],
        };
        Self {
            name,
            entries: entries
                .into_iter()
                .map(|(k, r)| SpaceEntry::new(k, r))
                .collect(),
        }
    }

    pub fn strong_augment() -> Self {
        Self::preset(SpaceName::StrongAugment)
    }

    pub fn rand_augment() -> Self {
        Self::preset(SpaceName::RandAugment)
    }

    pub fn trivial_augment() -> Self {
        Self::preset(SpaceName::TrivialAugment)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, kind: TransformKind) -> Option<&SpaceEntry> {
        self.entries.iter().find(|e| e.kind == kind)
    }
}

/// Which sampler to run, with its hyper-parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyVariant {
    /// After two transforms, each further one (up to five) happens with
    /// probability `p`.
    StrongAugment { p: f64 },
    /// `n` uniform draws with replacement at fixed level `m` (0..=30).
    RandAugment { n: usize, m: u32 },
    /// One uniform draw with a uniform magnitude.
    TrivialAugment,
}

impl PolicyVariant {
    pub fn space_name(&self) -> SpaceName {
        match self {
            PolicyVariant::StrongAugment { .. } => SpaceName::StrongAugment,
            PolicyVariant::RandAugment { .. } => SpaceName::RandAugment,
            PolicyVariant::TrivialAugment => SpaceName::TrivialAugment,
        }
    }

    pub fn validate(&self) -> Result<(), PolicyError> {
        match *self {
            PolicyVariant::StrongAugment { p } if !(0.0..=1.0).contains(&p) => {
                Err(PolicyError::InvalidProbability(p))
            }
            PolicyVariant::RandAugment { n: 0, .. } => Err(PolicyError::InvalidOperationCount),
            PolicyVariant::RandAugment { m, .. } if m > RAND_AUGMENT_MAX_LEVEL => {
                Err(PolicyError::InvalidLevel(m))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPolicy")]
pub struct PolicyConfig {
    pub variant: PolicyVariant,
    pub space: AugmentationSpace,
}

#[derive(Deserialize)]
struct RawPolicy {
    variant: PolicyVariant,
    #[serde(default)]
    space: Option<AugmentationSpace>,
}

impl TryFrom<RawPolicy> for PolicyConfig {
    type Error = PolicyError;

    fn try_from(raw: RawPolicy) -> Result<Self, PolicyError> {
        match raw.space {
            Some(space) => PolicyConfig::new(raw.variant, space),
            None => PolicyConfig::for_variant(raw.variant),
        }
    }
}

impl PolicyConfig {
    pub fn new(variant: PolicyVariant, space: AugmentationSpace) -> Result<Self, PolicyError> {
        variant.validate()?;
        if space.name != variant.space_name() {
            return Err(PolicyError::WrongSpace {
                variant: variant.space_name().to_string(),
                space: space.name.to_string(),
            });
        }
        if space != AugmentationSpace::preset(space.name) {
            return Err(PolicyError::SpaceMismatch(space.name.to_string()));
        }
        Ok(Self { variant, space })
    }

    /// The variant paired with its preset space.
    pub fn for_variant(variant: PolicyVariant) -> Result<Self, PolicyError> {
        Self::new(variant, AugmentationSpace::preset(variant.space_name()))
    }

    pub fn strong(p: f64) -> Result<Self, PolicyError> {
        Self::for_variant(PolicyVariant::StrongAugment { p })
    }

    pub fn rand_augment(n: usize, m: u32) -> Result<Self, PolicyError> {
        Self::for_variant(PolicyVariant::RandAugment { n, m })
    }

    pub fn trivial() -> Self {
        Self::for_variant(PolicyVariant::TrivialAugment).expect("preset is valid")
    }
}

/// Transforms actually applied to one image, in order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AppliedTrace {
    pub steps: Vec<Magnitude>,
}

impl AppliedTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn kinds(&self) -> impl Iterator<Item = TransformKind> + '_ {
        self.steps.iter().map(|m| m.kind())
    }

    pub fn affine_count(&self) -> usize {
        self.kinds().filter(|k| k.is_affine()).count()
    }
}

/// StrongAugment: draw without replacement from `space`; two transforms
/// always, then up to three more, each continuing with probability `p`.
/// Once an affine kind is drawn, all affine kinds leave the pool.
pub fn sample_strong<R: Rng + ?Sized>(space: &AugmentationSpace, p: f64, rng: &mut R) -> AppliedTrace {
    let mut pool: Vec<&SpaceEntry> = space.entries.iter().collect();
    let mut steps = Vec::with_capacity(STRONG_MAX_OPS);
    for i in 0..STRONG_MAX_OPS {
        if pool.is_empty() || (i >= STRONG_MIN_OPS && !rng.random_bool(p)) {
            break;
        }
        let entry = pool.remove(rng.random_range(0..pool.len()));
        if entry.affine {
            pool.retain(|e| !e.affine);
        }
        steps.push(entry.sample_uniform(rng));
    }
    AppliedTrace { steps }
}

/// RandAugment magnitude for `entry` at `level`: move `level / 30` of the
/// way from the no-effect value towards an endpoint of the range. When the
/// no-effect value is interior, the endpoint is chosen by a fair coin.
pub fn rand_augment_magnitude<R: Rng + ?Sized>(
    entry: &SpaceEntry,
    level: u32,
    rng: &mut R,
) -> Magnitude {
    let (lo, hi) = match entry.range {
        MagnitudeDomain::None => {
            return Magnitude::bare(entry.kind).expect("parameterless kind");
        }
        r => r.bounds(),
    };
    let ne = entry.kind.no_effect().unwrap_or(lo);
    let endpoint = if ne > lo && ne < hi {
        if rng.random_bool(0.5) {
            hi
        } else {
            lo
        }
    } else if ne >= hi {
        lo
    } else {
        hi
    };
    let mut value = ne + (level as f64 / RAND_AUGMENT_MAX_LEVEL as f64) * (endpoint - ne);
    // rounding can overshoot the endpoint by an ulp
    value = value.clamp(lo.min(ne), hi.max(ne));
    if entry.range.is_integer() {
        value = value.round();
    }
    Magnitude::new(entry.kind, value).expect("level magnitudes stay inside the catalog domain")
}

pub fn sample_rand_augment<R: Rng + ?Sized>(
    space: &AugmentationSpace,
    n: usize,
    level: u32,
    rng: &mut R,
) -> AppliedTrace {
    let steps = (0..n)
        .map(|_| {
            let entry = &space.entries[rng.random_range(0..space.len())];
            rand_augment_magnitude(entry, level, rng)
        })
        .collect();
    AppliedTrace { steps }
}

pub fn sample_trivial<R: Rng + ?Sized>(space: &AugmentationSpace, rng: &mut R) -> AppliedTrace {
    let entry = &space.entries[rng.random_range(0..space.len())];
    AppliedTrace {
        steps: vec![entry.sample_uniform(rng)],
    }
}

pub fn sample_trace<R: Rng + ?Sized>(config: &PolicyConfig, rng: &mut R) -> AppliedTrace {
    match config.variant {
        PolicyVariant::StrongAugment { p } => sample_strong(&config.space, p, rng),
        PolicyVariant::RandAugment { n, m } => sample_rand_augment(&config.space, n, m, rng),
        PolicyVariant::TrivialAugment => sample_trivial(&config.space, rng),
    }
}

/// Apply a recorded trace in order.
pub fn apply_trace<R: Rng + ?Sized>(
    img: &ImageRGB8,
    trace: &AppliedTrace,
    opts: &ApplyOptions,
    rng: &mut R,
) -> Result<ImageRGB8, TransformError> {
    let mut cur = img.clone();
    for m in &trace.steps {
        cur = apply_with(&cur, m, opts, rng)?;
    }
    Ok(cur)
}

/// Sample a trace for `config` and apply it to `img`.
pub fn augment<R: Rng + ?Sized>(
    img: &ImageRGB8,
    config: &PolicyConfig,
    rng: &mut R,
) -> Result<(ImageRGB8, AppliedTrace), TransformError> {
    augment_with(img, config, &ApplyOptions::default(), rng)
}

pub fn augment_with<R: Rng + ?Sized>(
    img: &ImageRGB8,
    config: &PolicyConfig,
    opts: &ApplyOptions,
    rng: &mut R,
) -> Result<(ImageRGB8, AppliedTrace), TransformError> {
    let trace = sample_trace(config, rng);
    let out = apply_trace(img, &trace, opts, rng)?;
    Ok((out, trace))
}
