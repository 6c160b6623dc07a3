//! Dense 2-D grid of real samples.
//!
//! `Image` is the working representation for everything on the pixel raster:
//! input photographs, per-channel subband signals, reconstructions, and
//! diagnostic grids. Samples are `f64`, row-major, and required to be finite.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Image {
    /// All-zero grid. Rejects zero-sized shapes.
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyGrid);
        }
        Ok(Image {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        })
    }

    /// Wrap a row-major sample vector. Length must be `rows * cols` and every
    /// sample must be finite.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyGrid);
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: (rows, cols),
                got: (data.len() / cols.max(1), cols),
            });
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("image samples"));
        }
        Ok(Image { rows, cols, data })
    }

    /// Build from a per-sample closure `f(row, col)`.
    pub fn from_fn<F: FnMut(usize, usize) -> f64>(
        rows: usize,
        cols: usize,
        mut f: F,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Image::from_vec(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub(crate) fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Elementwise `self + other`.
    pub fn add(&self, other: &Image) -> Result<Image> {
        self.zip_with(other, |a, b| a + b)
    }

    /// Elementwise `self - other`.
    pub fn sub(&self, other: &Image) -> Result<Image> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Every sample multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Image {
        Image {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// Cyclic translation: output (r, c) takes the value of
    /// input ((r - dr) mod rows, (c - dc) mod cols), so the image content
    /// moves *down/right* by (dr, dc).
    pub fn shifted(&self, dr: i64, dc: i64) -> Image {
        let h = self.rows as i64;
        let w = self.cols as i64;
        let mut out = Image {
            rows: self.rows,
            cols: self.cols,
            data: vec![0.0; self.data.len()],
        };
        for r in 0..self.rows {
            let sr = (r as i64 - dr).rem_euclid(h) as usize;
            for c in 0..self.cols {
                let sc = (c as i64 - dc).rem_euclid(w) as usize;
                out.data[r * self.cols + c] = self.data[sr * self.cols + sc];
            }
        }
        out
    }

    pub fn min_max(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.data {
            if v < lo {
                lo = v;
            }
            if v > hi {
                hi = v;
            }
        }
        (lo, hi)
    }

    fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &Image, f: F) -> Result<Image> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch {
                expected: self.shape(),
                got: other.shape(),
            });
        }
        Ok(Image {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }
}
