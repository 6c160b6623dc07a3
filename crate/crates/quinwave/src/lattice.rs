//! Quincunx sublattice geometry and coset masking.
//!
//! The two-channel system decimates by the integer matrix
//!
//! ```text
//!     M = | 1  1 |
//!         | 1 -1 |
//! ```
//!
//! whose lattice M·Z² is the set of pixels (n1, n2) with n1 + n2 even — a
//! checkerboard rotated 45° relative to the raster. |det M| = 2, so the
//! raster splits into exactly two cosets, indexed by the parity of n1 + n2.
//! Downsampling to the sublattice and re-expanding back onto the raster is
//! realized in place: keep the samples on the chosen coset, zero the rest.

use crate::error::{Error, Result};
use crate::image::Image;

/// 2x2 integer decimation matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecimationMatrix {
    m: [[i64; 2]; 2],
}

impl DecimationMatrix {
    /// The quincunx matrix [[1, 1], [1, -1]].
    pub fn quincunx() -> Self {
        DecimationMatrix {
            m: [[1, 1], [1, -1]],
        }
    }

    pub fn new(m: [[i64; 2]; 2]) -> Self {
        DecimationMatrix { m }
    }

    pub fn entries(&self) -> [[i64; 2]; 2] {
        self.m
    }

    pub fn det(&self) -> i64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Matrix-vector product M·n.
    pub fn apply(&self, n: (i64, i64)) -> (i64, i64) {
        (
            self.m[0][0] * n.0 + self.m[0][1] * n.1,
            self.m[1][0] * n.0 + self.m[1][1] * n.1,
        )
    }

    /// Matrix product self · other.
    pub fn mul(&self, other: &DecimationMatrix) -> DecimationMatrix {
        let a = &self.m;
        let b = &other.m;
        DecimationMatrix {
            m: [
                [
                    a[0][0] * b[0][0] + a[0][1] * b[1][0],
                    a[0][0] * b[0][1] + a[0][1] * b[1][1],
                ],
                [
                    a[1][0] * b[0][0] + a[1][1] * b[1][0],
                    a[1][0] * b[0][1] + a[1][1] * b[1][1],
                ],
            ],
        }
    }

    /// Integer k-th power (k >= 0).
    pub fn pow(&self, k: u32) -> DecimationMatrix {
        let mut acc = DecimationMatrix::new([[1, 0], [0, 1]]);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Solve M·n = x over the integers. Returns the unique integer solution
    /// if one exists (i.e. x lies on the lattice generated by M), else None.
    ///
    /// Uses the adjugate: n = adj(M)·x / det(M); the solution is integral
    /// exactly when det divides both components.
    pub fn solve_integer(&self, x: (i64, i64)) -> Option<(i64, i64)> {
        let det = self.det();
        if det == 0 {
            return None;
        }
        let n0 = self.m[1][1] * x.0 - self.m[0][1] * x.1;
        let n1 = -self.m[1][0] * x.0 + self.m[0][0] * x.1;
        if n0 % det != 0 || n1 % det != 0 {
            return None;
        }
        Some((n0 / det, n1 / det))
    }

    /// True when x = M·n for some integer n.
    pub fn contains(&self, x: (i64, i64)) -> bool {
        self.solve_integer(x).is_some()
    }
}

/// Raster-shaped boolean mask selecting one quincunx coset.
///
/// Sample (r, c) is kept when (r + c) mod 2 equals `parity`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetMask {
    rows: usize,
    cols: usize,
    parity: u8,
    kept: Vec<bool>,
}

impl CosetMask {
    pub fn new(rows: usize, cols: usize, parity: u8) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyGrid);
        }
        if parity > 1 {
            return Err(Error::InvalidParity(parity));
        }
        let mut kept = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                kept.push((r + c) % 2 == parity as usize);
            }
        }
        Ok(CosetMask {
            rows,
            cols,
            parity,
            kept,
        })
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

    pub fn parity(&self) -> u8 {
        self.parity
    }

    #[inline]
    pub fn kept(&self, r: usize, c: usize) -> bool {
        self.kept[r * self.cols + c]
    }

    pub(crate) fn kept_slice(&self) -> &[bool] {
        &self.kept
    }

    pub fn count_kept(&self) -> usize {
        self.kept.iter().filter(|&&k| k).count()
    }

    /// Zero every sample off this coset; kept samples pass through.
    pub fn apply(&self, image: &Image) -> Result<Image> {
        if image.shape() != self.shape() {
            return Err(Error::DimensionMismatch {
                expected: self.shape(),
                got: image.shape(),
            });
        }
        let mut out = image.clone();
        for (v, &keep) in out.as_mut_slice().iter_mut().zip(&self.kept) {
            if !keep {
                *v = 0.0;
            }
        }
        Ok(out)
    }
}

/// Free-function form of [`CosetMask::apply`].
pub fn apply_mask(image: &Image, mask: &CosetMask) -> Result<Image> {
    mask.apply(image)
}
