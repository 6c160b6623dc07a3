//! Uncompressed BMP reading.
//!
//! Supports the two layouts the classic grayscale test corpora use:
//! 8-bit (palette index taken directly as the 0–255 intensity) and 24-bit
//! BGR (reduced to luminance 0.299·R + 0.587·G + 0.114·B). Anything
//! compressed, paletted to other depths, or pre-BITMAPINFOHEADER vintage is
//! rejected with a specific error rather than guessed at.

use crate::error::{Error, Result};
use crate::image::Image;
use std::path::Path;

const FILE_HEADER_LEN: usize = 14;
const MIN_DIB_LEN: usize = 40; // BITMAPINFOHEADER; V4/V5 extensions are fine

fn u16_at(b: &[u8], off: usize) -> u16 {
    u16::from_le_bytes([b[off], b[off + 1]])
}

fn u32_at(b: &[u8], off: usize) -> u32 {
    u32::from_le_bytes([b[off], b[off + 1], b[off + 2], b[off + 3]])
}

fn i32_at(b: &[u8], off: usize) -> i32 {
    i32::from_le_bytes([b[off], b[off + 1], b[off + 2], b[off + 3]])
}

/// Decode a BMP byte buffer to a grayscale intensity grid (0–255 range,
/// stored as f64; 24-bit inputs keep fractional luminance values).
pub(crate) fn read_bmp_bytes(bytes: &[u8]) -> Result<Image> {
    if bytes.len() < 2 || &bytes[0..2] != b"BM" {
        return Err(Error::NotBmp);
    }
    let header_len = FILE_HEADER_LEN + MIN_DIB_LEN;
    if bytes.len() < header_len {
        return Err(Error::TruncatedBmp {
            needed: header_len,
            got: bytes.len(),
        });
    }
    let dib_len = u32_at(bytes, 14) as usize;
    if dib_len < MIN_DIB_LEN {
        // BITMAPCOREHEADER and friends predate the fields below
        return Err(Error::NotBmp);
    }
    let pixel_offset = u32_at(bytes, 10) as usize;
    let width = i32_at(bytes, 18);
    let height = i32_at(bytes, 22);
    let bits = u16_at(bytes, 28);
    let compression = u32_at(bytes, 30);

    if compression != 0 {
        return Err(Error::CompressedBmp { compression });
    }
    if bits != 8 && bits != 24 {
        return Err(Error::UnsupportedBitDepth(bits));
    }
    if width <= 0 || height == 0 {
        return Err(Error::EmptyGrid);
    }
    let top_down = height < 0;
    let rows = height.unsigned_abs() as usize;
    let cols = width as usize;
    // rows are padded to 4-byte boundaries
    let stride = ((bits as usize * cols + 31) / 32) * 4;
    let needed = pixel_offset as u64 + stride as u64 * rows as u64;
    if (bytes.len() as u64) < needed {
        return Err(Error::TruncatedBmp {
            needed: needed as usize,
            got: bytes.len(),
        });
    }

    let mut data = Vec::with_capacity(rows * cols);
    for out_r in 0..rows {
        let src_r = if top_down { out_r } else { rows - 1 - out_r };
        let row = &bytes[pixel_offset + src_r * stride..];
        match bits {
            8 => {
                for c in 0..cols {
                    data.push(row[c] as f64);
                }
            }
            _ => {
                for c in 0..cols {
                    let b = row[3 * c] as f64;
                    let g = row[3 * c + 1] as f64;
                    let r = row[3 * c + 2] as f64;
                    data.push(0.299 * r + 0.587 * g + 0.114 * b);
                }
            }
        }
    }
    Image::from_vec(rows, cols, data)
}

/// Read a grayscale image from an uncompressed 8-bit or 24-bit BMP file.
pub fn read_bmp<P: AsRef<Path>>(path: P) -> Result<Image> {
    let bytes = std::fs::read(path)?;
    read_bmp_bytes(&bytes)
}
