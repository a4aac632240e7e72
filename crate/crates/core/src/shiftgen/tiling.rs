use serde::{Deserialize, Serialize};

use super::{Padding, ShiftError};
use crate::imgcore::ImageRGB8;

/// Square tiles of `tile_size` pixels overlapping by `overlap_fraction`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TileGridSpec {
    pub tile_size: u32,
    pub overlap_fraction: f64,
}

pub const MIN_TILE_SIZE: u32 = 32;
pub const MAX_OVERLAP: f64 = 0.9;

impl TileGridSpec {
    pub fn new(tile_size: u32, overlap_fraction: f64) -> Result<Self, ShiftError> {
        if tile_size < MIN_TILE_SIZE {
            return Err(ShiftError::InvalidTileGrid(format!(
                "tile size {tile_size} is below {MIN_TILE_SIZE}"
            )));
        }
        if !(0.0..=MAX_OVERLAP).contains(&overlap_fraction) {
            return Err(ShiftError::InvalidTileGrid(format!(
                "overlap {overlap_fraction} outside [0, {MAX_OVERLAP}]"
            )));
        }
        Ok(Self {
            tile_size,
            overlap_fraction,
        })
    }

    /// Distance between neighbouring tile origins, rounded half up.
    pub fn stride(&self) -> u32 {
        let s = (self.tile_size as f64 * (1.0 - self.overlap_fraction) + 0.5).floor();
        (s as u32).max(1)
    }

    /// Tile origins along an axis of length `len`. The last origin is moved
    /// inward so it ends exactly at `len`; an axis no longer than one tile
    /// gets a single origin at 0.
    pub fn origins(&self, len: u32) -> Vec<u32> {
        let tile = self.tile_size;
        if len <= tile {
            return vec![0];
        }
        let stride = self.stride();
        let span = len - tile;
        let count = span.div_ceil(stride) + 1;
        let mut v: Vec<u32> = (0..count - 1).map(|i| i * stride).collect();
        v.push(span);
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tile {
    pub x: u32,
    pub y: u32,
    pub image: ImageRGB8,
    /// Present when the source was smaller than a tile along some axis and
    /// the tile was zero-padded on the right and/or bottom.
    pub padding: Option<Padding>,
}

/// Cut `img` into tiles in row-major order of their origins.
pub fn tile_image(img: &ImageRGB8, grid: &TileGridSpec) -> Vec<Tile> {
    let (w, h) = img.dimensions();
    let t = grid.tile_size;
    let xs = grid.origins(w);
    let ys = grid.origins(h);
    let mut tiles = Vec::with_capacity(xs.len() * ys.len());
    for &y in &ys {
        for &x in &xs {
            let vw = t.min(w - x);
            let vh = t.min(h - y);
            let (image, padding) = if vw == t && vh == t {
                (img.crop(x, y, t, t), None)
            } else {
                let mut tile = ImageRGB8::filled(t, t, [0, 0, 0]);
                for ty in 0..vh {
                    for tx in 0..vw {
                        tile.set_pixel(tx, ty, img.pixel(x + tx, y + ty));
                    }
                }
                (
                    tile,
                    Some(Padding {
                        valid_width: vw,
                        valid_height: vh,
                    }),
                )
            };
            tiles.push(Tile {
                x,
                y,
                image,
                padding,
            });
        }
    }
    tiles
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(TileGridSpec::new(16, 0.0).is_err());
        assert!(TileGridSpec::new(64, 0.95).is_err());
        assert!(TileGridSpec::new(64, -0.1).is_err());
        assert_eq!(TileGridSpec::new(1024, 0.2).unwrap().stride(), 819);
        assert_eq!(TileGridSpec::new(32, 0.9).unwrap().stride(), 3);
    }

    #[test]
    fn origin_counts() {
        let g = TileGridSpec::new(1024, 0.0).unwrap();
        assert_eq!(g.origins(2048), [0, 1024]);
        let g = TileGridSpec::new(1024, 0.2).unwrap();
        assert_eq!(g.origins(2048), [0, 819, 1024]);
        assert_eq!(g.origins(1024), [0]);
        assert_eq!(g.origins(500), [0]);
    }

    #[test]
    fn small_image_single_padded_tile() {
        let img = ImageRGB8::filled(50, 40, [9, 9, 9]);
        let grid = TileGridSpec::new(64, 0.2).unwrap();
        let tiles = tile_image(&img, &grid);
        assert_eq!(tiles.len(), 1);
        let t = &tiles[0];
        assert_eq!(t.image.dimensions(), (64, 64));
        assert_eq!(
            t.padding,
            Some(Padding {
                valid_width: 50,
                valid_height: 40
            })
        );
        assert_eq!(t.image.pixel(49, 39), [9, 9, 9]);
        assert_eq!(t.image.pixel(50, 0), [0, 0, 0]);
    }
}
