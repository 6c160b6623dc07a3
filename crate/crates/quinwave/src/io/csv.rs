//! Minimal CSV emission for diagnostic grids (frequency responses,
//! training traces). Values are written with Rust's shortest-round-trip
//! float formatting, so parsing a field back with `str::parse::<f64>`
//! recovers the exact bits.

use crate::error::Result;
use crate::image::Image;
use std::io::Write;
use std::path::Path;

pub(crate) fn csv_bytes(grid: &Image) -> Vec<u8> {
    let (rows, cols) = grid.shape();
    let mut out = String::new();
    for r in 0..rows {
        for c in 0..cols {
            if c > 0 {
                out.push(',');
            }
            out.push_str(&format!("{}", grid.get(r, c)));
        }
        out.push('\n');
    }
    out.into_bytes()
}

/// Write a numeric grid as comma-separated values, one row per line.
pub fn write_csv_grid<P: AsRef<Path>>(grid: &Image, path: P) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&csv_bytes(grid))?;
    Ok(())
}
