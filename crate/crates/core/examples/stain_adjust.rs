//! Fit stain vectors to a bundled immunohistochemistry tile and write a
//! 3x3 grid of haematoxylin/eosin intensity changes.
//!
//! ```text
//! cargo run --example stain_adjust -- [out_dir]
//! ```

use std::path::{Path, PathBuf};

use strongaug::imgcore::io::{read_image, write_png};
use strongaug::stain::{macenko_fit, rmse, stain_adjust, DEFAULT_ALPHA, DEFAULT_BETA};
use strongaug::StainAdjustment;

fn main() -> strongaug::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("strongaug_stain"));
    let img = read_image(Path::new(env!("CARGO_MANIFEST_DIR")).join("assets/ihc_tile_1.png"))?;

    let model = macenko_fit(&img, DEFAULT_BETA, DEFAULT_ALPHA)?;
    println!("haematoxylin {:.3?}", model.haematoxylin());
    println!("eosin        {:.3?}", model.eosin());
    if let Some(meta) = model.fit_metadata() {
        println!("tissue pixels {}", meta.pixel_count);
    }

    for h in [0.5, 1.0, 1.5] {
        for e in [0.5, 1.0, 1.5] {
            let shifted = stain_adjust(&img, &model, StainAdjustment::new(h, e)?);
            println!("h={h} e={e}: RMSE vs input {:.2}", rmse(&img, &shifted));
            write_png(&shifted, out.join(format!("h{h}_e{e}.png")))?;
        }
    }
    println!("wrote grid to {}", out.display());
    Ok(())
}
