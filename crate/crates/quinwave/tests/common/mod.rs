//! Shared helpers for the integration suites: independent brute-force
//! oracles and deterministic instance generators.
//!
//! The oracles here deliberately re-derive results from the definitions with
//! plain quadruple loops and explicit modular arithmetic — no code shared
//! with the library's optimized paths — so they can arbitrate correctness.

#![allow(dead_code)]

use quinwave::{Filter2D, FilterBank, Image};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

/// Brute-force circular convolution straight from the definition:
/// out[n] = Σ_p taps[p] · image[(n − p + anchor) mod (rows, cols)].
pub fn conv_oracle(image: &Image, filter: &Filter2D) -> Image {
    let (h, w) = image.shape();
    let (ar, ac) = (filter.anchor().0 as i64, filter.anchor().1 as i64);
    let mut out = Image::zeros(h, w).unwrap();
    for r in 0..h {
        for c in 0..w {
            let mut acc = 0.0;
            for pr in 0..filter.rows() {
                for pc in 0..filter.cols() {
                    let sr = (r as i64 - pr as i64 + ar).rem_euclid(h as i64) as usize;
                    let sc = (c as i64 - pc as i64 + ac).rem_euclid(w as i64) as usize;
                    acc += filter.tap(pr, pc) * image.get(sr, sc);
                }
            }
            out.set(r, c, acc);
        }
    }
    out
}

/// Brute-force forward pass composed only of oracle pieces: convolve, zero
/// the off-coset samples by explicit parity test, convolve, sum.
pub fn forward_oracle(image: &Image, bank: &FilterBank, parity: usize) -> Image {
    let (h, w) = image.shape();
    let mask_keep = |r: usize, c: usize| (r + c) % 2 == parity;
    let mut z0 = conv_oracle(image, &bank.h0);
    let mut z1 = conv_oracle(image, &bank.h1);
    for r in 0..h {
        for c in 0..w {
            if !mask_keep(r, c) {
                z0.set(r, c, 0.0);
                z1.set(r, c, 0.0);
            }
        }
    }
    let s0 = conv_oracle(&z0, &bank.f0);
    let s1 = conv_oracle(&z1, &bank.f1);
    let mut out = Image::zeros(h, w).unwrap();
    for r in 0..h {
        for c in 0..w {
            out.set(r, c, s0.get(r, c) + s1.get(r, c));
        }
    }
    out
}

pub fn max_abs_diff(a: &Image, b: &Image) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn seeded_rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_image(rng: &mut StdRng, rows: usize, cols: usize, lo: f64, hi: f64) -> Image {
    Image::from_fn(rows, cols, |_, _| rng.random_range(lo..hi)).unwrap()
}

pub fn random_filter(
    rng: &mut StdRng,
    rows: usize,
    cols: usize,
    anchor: (usize, usize),
) -> Filter2D {
    let taps = (0..rows * cols)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    Filter2D::new(rows, cols, taps, anchor).unwrap()
}

/// Serialize 8-bit grayscale pixels (row-major, top-down) as an uncompressed
/// bottom-up BMP with a 256-entry gray palette — built by hand, independent
/// of the library's reader.
pub fn bmp_bytes_gray8(rows: usize, cols: usize, pixels: &[u8]) -> Vec<u8> {
    assert_eq!(pixels.len(), rows * cols);
    let stride = (cols + 3) / 4 * 4;
    let data_size = stride * rows;
    let off = 14 + 40 + 256 * 4;
    let mut out = Vec::with_capacity(off + data_size);
    out.extend_from_slice(b"BM");
    out.extend_from_slice(&((off + data_size) as u32).to_le_bytes());
    out.extend_from_slice(&[0u8; 4]);
    out.extend_from_slice(&(off as u32).to_le_bytes());
    out.extend_from_slice(&40u32.to_le_bytes());
    out.extend_from_slice(&(cols as i32).to_le_bytes());
    out.extend_from_slice(&(rows as i32).to_le_bytes()); // positive: bottom-up
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&8u16.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes()); // uncompressed
    out.extend_from_slice(&(data_size as u32).to_le_bytes());
    out.extend_from_slice(&0i32.to_le_bytes());
    out.extend_from_slice(&0i32.to_le_bytes());
    out.extend_from_slice(&256u32.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    for i in 0..=255u8 {
        out.extend_from_slice(&[i, i, i, 0]);
    }
    for r in (0..rows).rev() {
        out.extend_from_slice(&pixels[r * cols..(r + 1) * cols]);
        out.resize(out.len() + (stride - cols), 0);
    }
    out
}

/// Serialize 24-bit pixels ((r, g, b), row-major, top-down) as an
/// uncompressed bottom-up BMP.
pub fn bmp_bytes_bgr24(rows: usize, cols: usize, pixels: &[(u8, u8, u8)]) -> Vec<u8> {
    assert_eq!(pixels.len(), rows * cols);
    let stride = (3 * cols + 3) / 4 * 4;
    let data_size = stride * rows;
    let off = 14 + 40;
    let mut out = Vec::with_capacity(off + data_size);
    out.extend_from_slice(b"BM");
    out.extend_from_slice(&((off + data_size) as u32).to_le_bytes());
    out.extend_from_slice(&[0u8; 4]);
    out.extend_from_slice(&(off as u32).to_le_bytes());
    out.extend_from_slice(&40u32.to_le_bytes());
    out.extend_from_slice(&(cols as i32).to_le_bytes());
    out.extend_from_slice(&(rows as i32).to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&24u16.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    out.extend_from_slice(&(data_size as u32).to_le_bytes());
    out.extend_from_slice(&0i32.to_le_bytes());
    out.extend_from_slice(&0i32.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    for r in (0..rows).rev() {
        for &(red, green, blue) in &pixels[r * cols..(r + 1) * cols] {
            out.extend_from_slice(&[blue, green, red]);
        }
        out.resize(out.len() + (stride - 3 * cols), 0);
    }
    out
}

/// [`synthetic_photo`] quantized to 8-bit and packed as BMP bytes.
pub fn photo_bmp_bytes(rows: usize, cols: usize, seed: u64) -> Vec<u8> {
    let photo = synthetic_photo(rows, cols, seed);
    let pixels: Vec<u8> = photo.as_slice().iter().map(|&v| v as u8).collect();
    bmp_bytes_gray8(rows, cols, &pixels)
}

/// Deterministic synthetic photograph: smooth illumination, an oriented
/// texture, a bright blob, a hard-edged box, and faint seeded grain. Values
/// are integers in 0..=255 so the image survives an 8-bit round trip.
pub fn synthetic_photo(rows: usize, cols: usize, seed: u64) -> Image {
    let mut rng = seeded_rng(seed);
    Image::from_fn(rows, cols, |r, c| {
        let x = c as f64 / cols as f64;
        let y = r as f64 / rows as f64;
        let ramp = 70.0 + 80.0 * x + 30.0 * y;
        let weave = 28.0 * (2.0 * std::f64::consts::PI * (3.0 * x + 7.0 * y)).sin()
            + 17.0 * (2.0 * std::f64::consts::PI * (11.0 * x - 2.0 * y)).cos();
        let blob = 60.0 * (-((x - 0.3).powi(2) + (y - 0.35).powi(2)) / 0.02).exp();
        let box_edge = if (0.55..0.85).contains(&x) && (0.55..0.8).contains(&y) {
            -45.0
        } else {
            0.0
        };
        let grain: f64 = rng.random_range(-4.0..4.0);
        (ramp + weave + blob + box_edge + grain).round().clamp(0.0, 255.0)
    })
    .unwrap()
}
