//! Stitch the bundled tiles into a larger "slide" and cut it back into
//! overlapping tiles. The last row and column snap to the slide edge;
//! only an image smaller than a tile gets padded.

use std::path::Path;

use strongaug::imgcore::io::read_image;
use strongaug::shiftgen::{tile_image, TileGridSpec};
use strongaug::ImageRGB8;

fn main() -> strongaug::Result<()> {
    let assets = Path::new(env!("CARGO_MANIFEST_DIR")).join("assets");
    let parts: Vec<ImageRGB8> = (0..4)
        .map(|i| read_image(assets.join(format!("ihc_tile_{i}.png"))))
        .collect::<Result<_, _>>()?;
    let (w, h) = parts[0].dimensions();
    // 2x2 mosaic, trimmed so the stride does not divide it
    let slide = ImageRGB8::from_fn(2 * w - 40, 2 * h - 70, |x, y| {
        parts[((y / h) * 2 + x / w) as usize].pixel(x % w, y % h)
    });

    let grid = TileGridSpec::new(192, 0.25)?;
    let tiles = tile_image(&slide, &grid);
    println!(
        "slide {:?}, tile {} with stride {}: {} tiles",
        slide.dimensions(),
        grid.tile_size,
        grid.stride(),
        tiles.len()
    );
    for t in &tiles {
        match t.padding {
            Some(p) => println!("  ({:>3}, {:>3}) padded, valid {}x{}", t.x, t.y, p.valid_width, p.valid_height),
            None => println!("  ({:>3}, {:>3})", t.x, t.y),
        }
    }

    let small = slide.crop(0, 0, 150, 100);
    for t in tile_image(&small, &grid) {
        let p = t.padding.expect("smaller than a tile");
        println!("{:?} crop -> one tile, valid {}x{}", small.dimensions(), p.valid_width, p.valid_height);
    }
    Ok(())
}
