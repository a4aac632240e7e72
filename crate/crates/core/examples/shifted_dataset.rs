//! Build a small dataset from the bundled tiles and derive shifted copies
//! of it: one brightness shift and a 2x2 stain grid.
//!
//! ```text
//! cargo run --example shifted_dataset -- [out_dir]
//! ```

use std::path::{Path, PathBuf};

use strongaug::shiftgen::{
    shift_dataset, stain_grid, DatasetManifest, LoadedManifest, ManifestEntry, ShiftSpec,
    MANIFEST_FILE,
};
use strongaug::stain::{mean_stain_model, DEFAULT_ALPHA, DEFAULT_BACKGROUND, DEFAULT_BETA};
use strongaug::{Magnitude, TransformKind};

fn main() -> strongaug::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("strongaug_shifted"));
    let assets = Path::new(env!("CARGO_MANIFEST_DIR")).join("assets");

    // the clean dataset: manifest paths are relative to the manifest
    let clean = out.join("clean");
    let mut entries = Vec::new();
    let mut images = Vec::new();
    for i in 0..4 {
        let img = strongaug::imgcore::io::read_image(assets.join(format!("ihc_tile_{i}.png")))?;
        let path = format!("img/tile_{i}.png");
        strongaug::imgcore::io::write_png(&img, clean.join(&path))?;
        entries.push(ManifestEntry { id: format!("tile_{i}"), path, label: (i % 2) as u8, padding: None });
        images.push(img);
    }
    DatasetManifest::new(entries)?.write_atomic(&clean.join(MANIFEST_FILE))?;
    let loaded = LoadedManifest::load(clean.join(MANIFEST_FILE))?;

    let spec = ShiftSpec::transform(Magnitude::new(TransformKind::Brightness, 0.6)?, 0);
    let dir = out.join(spec.dataset_name());
    shift_dataset(&loaded, &spec, &dir)?;
    println!("{} -> {}", spec.dataset_name(), dir.display());

    let model = mean_stain_model(&images, DEFAULT_BETA, DEFAULT_ALPHA, DEFAULT_BACKGROUND)?;
    let grid = stain_grid(&loaded, &model, &[0.5, 1.5], &[0.5, 1.5], &out)?;
    for m in &grid {
        let spec = m.provenance.as_ref().and_then(|p| p.shift_spec.as_ref()).unwrap();
        println!("{} ({} images)", spec.dataset_name(), m.len());
    }
    Ok(())
}
