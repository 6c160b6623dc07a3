//! Binary PGM (P5) emission for visual inspection of grids.

use crate::error::Result;
use crate::image::Image;
use std::io::Write;
use std::path::Path;

/// Encode as 8-bit binary PGM. With `normalize`, [min, max] is affinely
/// mapped onto [0, 255] (a constant image becomes uniform 128); without it,
/// samples are rounded and clamped to 0–255 as-is.
pub(crate) fn pgm_bytes(image: &Image, normalize: bool) -> Vec<u8> {
    let (rows, cols) = image.shape();
    let mut out = Vec::with_capacity(20 + rows * cols);
    out.extend_from_slice(format!("P5\n{cols} {rows}\n255\n").as_bytes());
    let (lo, hi) = image.min_max();
    for &v in image.as_slice() {
        let scaled = if normalize {
            if hi == lo {
                128.0
            } else {
                (v - lo) / (hi - lo) * 255.0
            }
        } else {
            v
        };
        out.push(scaled.round().clamp(0.0, 255.0) as u8);
    }
    out
}

/// Write the image as a binary PGM file.
pub fn write_pgm<P: AsRef<Path>>(image: &Image, path: P, normalize: bool) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&pgm_bytes(image, normalize))?;
    Ok(())
}
