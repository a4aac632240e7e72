//! Building distribution-shifted datasets on disk.
//!
//! A dataset is a directory with a `manifest.json` listing `(id, path,
//! label)` entries; image paths are relative to that directory. Shifting a
//! dataset applies one [`ShiftSpec`] to every image and writes a sibling
//! dataset with identical ids and labels plus a provenance record.
//!
//! Layout produced by [`stain_grid`] and the `shift` command:
//!
//! ```text
//! out_root/
//!   brightness_m0.4/manifest.json   # transform shifts: <kind>_m<value>
//!   stain_h0.5_e1.0/manifest.json   # stain shifts: stain_h<h>_e<e>
//! ```

mod manifest;
mod tiling;

use std::fs;
use std::path::Path;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, ErrorClass, Result};
use crate::imgcore::{io, ImageRGB8};
use crate::policies::{augment_with, AppliedTrace, PolicyConfig};
use crate::rng::stream;
use crate::stain::{stain_adjust, StainAdjustment, StainError, StainModel};
use crate::transforms::{apply_with, ApplyOptions, Magnitude, TransformKind};

pub use manifest::{DatasetManifest, LoadedManifest, ManifestEntry, Padding, Provenance};
pub(crate) use manifest::write_atomic;
pub use tiling::{tile_image, Tile, TileGridSpec, MAX_OVERLAP, MIN_TILE_SIZE};

pub const MANIFEST_FILE: &str = "manifest.json";
/// Default per-axis multipliers for stain grids.
pub const DEFAULT_STAIN_GRID: [f64; 5] = [0.0, 0.5, 1.0, 1.5, 2.0];

/// One entry that could not be processed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryFailure {
    pub id: String,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum ShiftError {
    #[error("invalid manifest: {0}")]
    InvalidManifest(String),
    #[error("duplicate sample id `{0}`")]
    DuplicateId(String),
    #[error("sample `{id}` has label {label}; labels must be 0 or 1")]
    InvalidLabel { id: String, label: u8 },
    #[error("path `{0}` must be relative and stay inside the dataset directory")]
    UnsafePath(String),
    #[error("invalid tile grid: {0}")]
    InvalidTileGrid(String),
    #[error("{} of {total} entries failed (first: {}: {})", failures.len(), failures[0].id, failures[0].message)]
    EntriesFailed {
        total: usize,
        failures: Vec<EntryFailure>,
    },
    #[error(transparent)]
    Stain(#[from] StainError),
}

impl ShiftError {
    pub fn kind(&self) -> &'static str {
        match self {
            ShiftError::InvalidManifest(_) => "InvalidManifest",
            ShiftError::DuplicateId(_) => "DuplicateId",
            ShiftError::InvalidLabel { .. } => "InvalidLabel",
            ShiftError::UnsafePath(_) => "UnsafePath",
            ShiftError::InvalidTileGrid(_) => "InvalidTileGrid",
            ShiftError::EntriesFailed { .. } => "EntriesFailed",
            ShiftError::Stain(e) => e.kind(),
        }
    }

    pub(crate) fn class(&self) -> ErrorClass {
        match self {
            ShiftError::InvalidTileGrid(_) => ErrorClass::Validation,
            ShiftError::Stain(StainError::InvalidAdjustment { .. } | StainError::InvalidModel(_)) => {
                ErrorClass::Validation
            }
            _ => ErrorClass::Data,
        }
    }
}

/// The shifting function applied to every image of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ShiftSpec {
    Transform {
        magnitude: Magnitude,
        /// Seeds the per-image noise streams; unused by deterministic kinds.
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        options: ApplyOptions,
    },
    Stain {
        h: f64,
        e: f64,
        model: StainModel,
    },
}

impl ShiftSpec {
    pub fn transform(magnitude: Magnitude, seed: u64) -> Self {
        ShiftSpec::Transform {
            magnitude,
            seed,
            options: ApplyOptions::default(),
        }
    }

    pub fn stain(h: f64, e: f64, model: StainModel) -> Result<Self, StainError> {
        StainAdjustment::new(h, e)?;
        Ok(ShiftSpec::Stain { h, e, model })
    }

    pub fn validate(&self) -> Result<(), StainError> {
        if let ShiftSpec::Stain { h, e, .. } = self {
            StainAdjustment::new(*h, *e)?;
        }
        Ok(())
    }

    pub fn coord(&self) -> DatasetCoord {
        match self {
            ShiftSpec::Transform { magnitude, .. } => DatasetCoord::Transform {
                kind: magnitude.kind(),
                value: magnitude.value(),
            },
            ShiftSpec::Stain { h, e, .. } => DatasetCoord::Stain { h: *h, e: *e },
        }
    }

    /// Directory name used for the shifted dataset.
    pub fn dataset_name(&self) -> String {
        self.coord().name()
    }

    fn output_extension(&self) -> &'static str {
        match self {
            ShiftSpec::Transform { magnitude, .. } if magnitude.kind() == TransformKind::Jpeg => {
                "jpg"
            }
            _ => "png",
        }
    }

    /// Shift one image. `index` selects the noise stream.
    pub fn apply(&self, img: &ImageRGB8, index: u64) -> Result<ImageRGB8> {
        match self {
            ShiftSpec::Transform {
                magnitude,
                seed,
                options,
            } => Ok(apply_with(img, magnitude, options, &mut stream(*seed, index))?),
            ShiftSpec::Stain { h, e, model } => {
                let adj = StainAdjustment::new(*h, *e)?;
                Ok(stain_adjust(img, model, adj))
            }
        }
    }

    /// Shift one image and encode it in the dataset's output format.
    fn apply_encoded(&self, img: &ImageRGB8, index: u64) -> Result<Vec<u8>> {
        match self {
            ShiftSpec::Transform { magnitude, .. } if magnitude.kind() == TransformKind::Jpeg => {
                Ok(io::encode_jpeg(img, magnitude.value() as u8)?)
            }
            _ => Ok(io::encode_png(&self.apply(img, index)?)?),
        }
    }
}

/// Position of a dataset on an evaluation axis, recoverable from its name.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetCoord {
    Transform { kind: TransformKind, value: f64 },
    Stain { h: f64, e: f64 },
    Named(String),
}

impl DatasetCoord {
    pub fn name(&self) -> String {
        match self {
            DatasetCoord::Transform { kind, value } => format!("{kind}_m{value:?}"),
            DatasetCoord::Stain { h, e } => format!("stain_h{h:?}_e{e:?}"),
            DatasetCoord::Named(n) => n.clone(),
        }
    }

    pub fn parse(name: &str) -> Self {
        if let Some(rest) = name.strip_prefix("stain_h") {
            if let Some((h, e)) = rest.split_once("_e") {
                if let (Ok(h), Ok(e)) = (h.parse::<f64>(), e.parse::<f64>()) {
                    return DatasetCoord::Stain { h, e };
                }
            }
        }
        if let Some((kind, value)) = name.rsplit_once("_m") {
            if let (Ok(kind), Ok(value)) = (kind.parse::<TransformKind>(), value.parse::<f64>()) {
                return DatasetCoord::Transform { kind, value };
            }
        }
        DatasetCoord::Named(name.to_string())
    }
}

fn with_extension(rel: &str, ext: &str) -> String {
    Path::new(rel)
        .with_extension(ext)
        .to_string_lossy()
        .replace('\\', "/")
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Run `f` over every entry in parallel, collecting results in manifest
/// order. Any failure fails the whole run with every failing id listed.
fn process_entries<T: Send>(
    loaded: &LoadedManifest,
    f: impl Fn(usize, &ManifestEntry) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let results: Vec<Result<T>> = loaded
        .manifest
        .entries
        .par_iter()
        .enumerate()
        .map(|(i, entry)| f(i, entry))
        .collect();
    let total = results.len();
    let mut ok = Vec::with_capacity(total);
    let mut failures = Vec::new();
    for (res, entry) in results.into_iter().zip(&loaded.manifest.entries) {
        match res {
            Ok(v) => ok.push(v),
            Err(e) => failures.push(EntryFailure {
                id: entry.id.clone(),
                message: e.to_string(),
            }),
        }
    }
    if failures.is_empty() {
        Ok(ok)
    } else {
        Err(ShiftError::EntriesFailed { total, failures }.into())
    }
}

/// Apply `spec` to every image of `loaded`, writing images and a manifest
/// under `out_dir`. The manifest is only written when every entry succeeds.
pub fn shift_dataset(
    loaded: &LoadedManifest,
    spec: &ShiftSpec,
    out_dir: &Path,
) -> Result<DatasetManifest> {
    spec.validate()?;
    let ext = spec.output_extension();
    let entries = process_entries(loaded, |i, entry| {
        let img = io::read_image(loaded.image_path(entry))?;
        let bytes = spec.apply_encoded(&img, i as u64)?;
        let rel = with_extension(&entry.path, ext);
        write_file(&out_dir.join(&rel), &bytes)?;
        Ok(ManifestEntry {
            path: rel,
            ..entry.clone()
        })
    })?;
    let seed = match spec {
        ShiftSpec::Transform { seed, .. } => Some(*seed),
        ShiftSpec::Stain { .. } => None,
    };
    let manifest = DatasetManifest {
        schema_version: crate::SCHEMA_VERSION,
        entries,
        provenance: Some(Provenance {
            parent: Some(loaded.source.to_string_lossy().into_owned()),
            shift_spec: Some(spec.clone()),
            seed,
            policy: None,
        }),
    };
    manifest.write_atomic(&out_dir.join(MANIFEST_FILE))?;
    Ok(manifest)
}

/// One shifted dataset per `(h, e)` pair, `h` varying slowest, each in
/// `out_root/stain_h<h>_e<e>/`.
pub fn stain_grid(
    loaded: &LoadedManifest,
    model: &StainModel,
    h_values: &[f64],
    e_values: &[f64],
    out_root: &Path,
) -> Result<Vec<DatasetManifest>> {
    if h_values.is_empty() || e_values.is_empty() {
        return Err(Error::InvalidArgument("stain grid axes must be non-empty".into()));
    }
    let mut out = Vec::with_capacity(h_values.len() * e_values.len());
    for &h in h_values {
        for &e in e_values {
            let spec = ShiftSpec::stain(h, e, model.clone())?;
            let dir = out_root.join(spec.dataset_name());
            out.push(shift_dataset(loaded, &spec, &dir)?);
        }
    }
    Ok(out)
}

/// One line of the augmentation audit log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub id: String,
    pub trace: AppliedTrace,
}

/// Augment every image once with `config`. Image `i` uses stream
/// `(seed, i)`, so the output does not depend on the worker count.
pub fn augment_dataset(
    loaded: &LoadedManifest,
    config: &PolicyConfig,
    opts: &ApplyOptions,
    seed: u64,
    out_dir: &Path,
) -> Result<(DatasetManifest, Vec<TraceRecord>)> {
    let results = process_entries(loaded, |i, entry| {
        let img = io::read_image(loaded.image_path(entry))?;
        let mut rng = stream(seed, i as u64);
        let (out, trace) = augment_with(&img, config, opts, &mut rng)?;
        let rel = with_extension(&entry.path, "png");
        write_file(&out_dir.join(&rel), &io::encode_png(&out)?)?;
        Ok((
            ManifestEntry {
                path: rel,
                ..entry.clone()
            },
            TraceRecord {
                id: entry.id.clone(),
                trace,
            },
        ))
    })?;
    let (entries, traces): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let manifest = DatasetManifest {
        schema_version: crate::SCHEMA_VERSION,
        entries,
        provenance: Some(Provenance {
            parent: Some(loaded.source.to_string_lossy().into_owned()),
            shift_spec: None,
            seed: Some(seed),
            policy: Some(config.clone()),
        }),
    };
    manifest.write_atomic(&out_dir.join(MANIFEST_FILE))?;
    Ok((manifest, traces))
}

/// Tile every image of `loaded` into `out_dir`. Tiles inherit the label of
/// their source image and get ids `<source id>_x<x>_y<y>`.
pub fn tile_dataset(
    loaded: &LoadedManifest,
    grid: &TileGridSpec,
    out_dir: &Path,
) -> Result<DatasetManifest> {
    let per_image = process_entries(loaded, |_, entry| {
        let img = io::read_image(loaded.image_path(entry))?;
        let stem = Path::new(&entry.path)
            .with_extension("")
            .to_string_lossy()
            .replace('\\', "/");
        let mut entries = Vec::new();
        for tile in tile_image(&img, grid) {
            let rel = format!("{stem}_x{}_y{}.png", tile.x, tile.y);
            write_file(&out_dir.join(&rel), &io::encode_png(&tile.image)?)?;
            entries.push(ManifestEntry {
                id: format!("{}_x{}_y{}", entry.id, tile.x, tile.y),
                path: rel,
                label: entry.label,
                padding: tile.padding,
            });
        }
        Ok(entries)
    })?;
    let manifest = DatasetManifest {
        schema_version: crate::SCHEMA_VERSION,
        entries: per_image.into_iter().flatten().collect(),
        provenance: Some(Provenance {
            parent: Some(loaded.source.to_string_lossy().into_owned()),
            ..Provenance::default()
        }),
    };
    manifest.validate()?;
    manifest.write_atomic(&out_dir.join(MANIFEST_FILE))?;
    Ok(manifest)
}

/// Keep at most `per_label` randomly chosen entries of each label, in their
/// original order, copying the kept images into `out_dir`.
pub fn subsample_per_label(
    loaded: &LoadedManifest,
    per_label: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<DatasetManifest> {
    let mut rng = stream(seed, 0);
    let mut keep = vec![false; loaded.manifest.len()];
    for label in 0..=1u8 {
        let idx: Vec<usize> = loaded
            .manifest
            .entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.label == label)
            .map(|(i, _)| i)
            .collect();
        let n = per_label.min(idx.len());
        for j in sample(&mut rng, idx.len(), n) {
            keep[idx[j]] = true;
        }
    }
    let mut entries = Vec::new();
    for (entry, _) in loaded.manifest.entries.iter().zip(&keep).filter(|(_, k)| **k) {
        let src = loaded.image_path(entry);
        let bytes = fs::read(&src).map_err(|e| Error::io(&src, e))?;
        write_file(&out_dir.join(&entry.path), &bytes)?;
        entries.push(entry.clone());
    }
    let manifest = DatasetManifest {
        schema_version: crate::SCHEMA_VERSION,
        entries,
        provenance: Some(Provenance {
            parent: Some(loaded.source.to_string_lossy().into_owned()),
            seed: Some(seed),
            ..Provenance::default()
        }),
    };
    manifest.write_atomic(&out_dir.join(MANIFEST_FILE))?;
    Ok(manifest)
}
