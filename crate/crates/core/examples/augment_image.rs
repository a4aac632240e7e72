//! Draw a handful of StrongAugment samples for one tile and print what
//! each sample did.
//!
//! ```text
//! cargo run --example augment_image -- [out_dir] [seed]
//! ```

use std::path::{Path, PathBuf};

use strongaug::imgcore::io::{read_image, write_png};
use strongaug::rng::stream;
use strongaug::{augment, PolicyConfig};

fn main() -> strongaug::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("strongaug_augment"));
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);

    let tile = Path::new(env!("CARGO_MANIFEST_DIR")).join("assets/ihc_tile_0.png");
    let img = read_image(&tile)?;
    let config = PolicyConfig::strong(0.5)?;

    for i in 0..8 {
        // one stream per sample: sample i is reproducible on its own
        let (aug, trace) = augment(&img, &config, &mut stream(seed, i))?;
        let steps: Vec<String> = trace.steps.iter().map(|m| m.to_string()).collect();
        println!("sample {i}: {}", steps.join(" -> "));
        write_png(&aug, out.join(format!("sample_{i}.png")))?;
    }
    println!("wrote 8 samples to {}", out.display());
    Ok(())
}
