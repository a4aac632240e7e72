//! Robustness tooling for image classifiers.
//!
//! The crate bundles four pieces that are used together to measure how a
//! model reacts to controlled distribution shifts:
//!
//! - [`transforms`]: a catalog of magnitude-parameterised image
//!   transformations with exact pixel semantics,
//! - [`policies`]: StrongAugment, RandAugment and TrivialAugment samplers
//!   over that catalog,
//! - [`stain`]: Macenko stain-vector estimation and haematoxylin/eosin
//!   intensity adjustment,
//! - [`shiftgen`] and [`metrics`]: building shifted datasets on disk and
//!   scoring predictions on them with AUROC.
//!
//! Everything operates on [`ImageRGB8`], a plain interleaved 8-bit RGB
//! raster. All randomness flows through explicit seeded streams (see
//! [`rng`]), so every output is a pure function of its inputs and seed.

pub mod cli;
pub mod error;
pub mod imgcore;
pub mod metrics;
pub mod policies;
pub mod rng;
pub mod shiftgen;
pub mod stain;
pub mod transforms;

pub use error::{Error, Result};
pub use imgcore::{GrayImage8, ImageRGB8};
pub use policies::{augment, AppliedTrace, AugmentationSpace, PolicyConfig, PolicyVariant};
pub use stain::{StainAdjustment, StainModel};
pub use transforms::{Magnitude, TransformKind};

/// Version of the serialized transform catalog, manifest and report schemas.
pub const SCHEMA_VERSION: u32 = 1;
