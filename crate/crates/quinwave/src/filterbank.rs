//! Two-channel filter bank over the quincunx lattice.
//!
//! The forward path mirrors a two-layer convolutional network:
//!
//! ```text
//!   y_k   = a ⊛ h_k            (analysis convolution, circular)
//!   z_k   = mask ⊙ y_k          (coset downsample/upsample in place)
//!   ã     = z_0 ⊛ f_0 + z_1 ⊛ f_1   (synthesis convolution and sum)
//! ```
//!
//! All convolutions are true circular convolutions: the kernel index is
//! subtracted, with an explicit anchor fixing where tap (0, 0) acts,
//!
//! ```text
//!   out[n] = Σ_p taps[p] · image[(n − p + anchor) mod (rows, cols)]
//! ```
//!
//! Equivalently, tap p acts at displacement d = p − anchor, and `out[n]`
//! gathers `image[n − d]`. A tap left/above the anchor therefore reaches
//! *ahead* of the output sample — synthesis filters need that anticausal
//! reach to undo the coset masking, which is why the bank stores an anchor
//! per filter instead of assuming (0, 0).

use crate::error::{Error, Result};
use crate::image::Image;
use crate::lattice::{apply_mask, CosetMask};

/// Small dense 2-D filter: tap grid plus the anchor cell that multiplies the
/// current sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Filter2D {
    rows: usize,
    cols: usize,
    taps: Vec<f64>,
    anchor: (usize, usize),
}

impl Filter2D {
    pub fn new(rows: usize, cols: usize, taps: Vec<f64>, anchor: (usize, usize)) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyGrid);
        }
        if taps.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: (rows, cols),
                got: (taps.len() / cols.max(1), cols),
            });
        }
        if !taps.iter().all(|t| t.is_finite()) {
            return Err(Error::NonFinite("filter taps"));
        }
        if anchor.0 >= rows || anchor.1 >= cols {
            return Err(Error::AnchorOutOfBounds {
                anchor,
                shape: (rows, cols),
            });
        }
        Ok(Filter2D {
            rows,
            cols,
            taps,
            anchor,
        })
    }

    /// Anchor defaults to (0, 0).
    pub fn from_taps(rows: usize, cols: usize, taps: Vec<f64>) -> Result<Self> {
        Filter2D::new(rows, cols, taps, (0, 0))
    }

    /// 1x1 unit tap: convolution with it is the identity.
    pub fn identity() -> Self {
        Filter2D {
            rows: 1,
            cols: 1,
            taps: vec![1.0],
            anchor: (0, 0),
        }
    }

    pub fn zeros(rows: usize, cols: usize, anchor: (usize, usize)) -> Result<Self> {
        Filter2D::new(rows, cols, vec![0.0; rows * cols], anchor)
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

    pub fn anchor(&self) -> (usize, usize) {
        self.anchor
    }

    #[inline]
    pub fn tap(&self, r: usize, c: usize) -> f64 {
        self.taps[r * self.cols + c]
    }

    pub fn set_tap(&mut self, r: usize, c: usize, v: f64) {
        self.taps[r * self.cols + c] = v;
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub(crate) fn taps_mut(&mut self) -> &mut [f64] {
        &mut self.taps
    }

    pub fn tap_sum(&self) -> f64 {
        self.taps.iter().sum()
    }

    /// Tap positions as displacements from the anchor, paired with values.
    /// Displacement d means the filter reads `image[n - d]` into `out[n]`.
    pub fn displacements(&self) -> Vec<((i64, i64), f64)> {
        let mut out = Vec::with_capacity(self.taps.len());
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.push((
                    (r as i64 - self.anchor.0 as i64, c as i64 - self.anchor.1 as i64),
                    self.tap(r, c),
                ));
            }
        }
        out
    }
}

/// Circular 2-D convolution of `image` with `filter`.
///
/// True convolution (kernel index subtracted), toroidal wrap at the borders,
/// accumulation in fixed tap order so results are bit-reproducible.
pub fn conv2_circular(image: &Image, filter: &Filter2D) -> Result<Image> {
    let (h, w) = image.shape();
    if filter.rows() > h || filter.cols() > w {
        return Err(Error::FilterTooLarge {
            filter: filter.shape(),
            image: (h, w),
        });
    }
    let mut out = Image::zeros(h, w)?;
    let (ar, ac) = (filter.anchor.0 as i64, filter.anchor.1 as i64);
    for pr in 0..filter.rows {
        for pc in 0..filter.cols {
            let t = filter.tap(pr, pc);
            if t == 0.0 {
                // zero-padded taps contribute nothing; skipping keeps the
                // summation order of the nonzero taps fixed
                continue;
            }
            // out[r][c] += t * image[(r + sr) mod h][(c + sc) mod w]
            let sr = (ar - pr as i64).rem_euclid(h as i64) as usize;
            let sc = (ac - pc as i64).rem_euclid(w as i64) as usize;
            for r in 0..h {
                let src = image.row((r + sr) % h);
                let dst = &mut out.as_mut_slice()[r * w..(r + 1) * w];
                let head = w - sc;
                for c in 0..head {
                    dst[c] += t * src[c + sc];
                }
                for c in head..w {
                    dst[c] += t * src[c + sc - w];
                }
            }
        }
    }
    Ok(out)
}

/// The four learned filters of the two-channel system.
///
/// h0/h1 are the analysis pair (layer one), f0/f1 the synthesis pair
/// (layer two). All four share one tap-grid shape; anchors may differ.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    pub h0: Filter2D,
    pub h1: Filter2D,
    pub f0: Filter2D,
    pub f1: Filter2D,
}

impl FilterBank {
    pub fn new(h0: Filter2D, h1: Filter2D, f0: Filter2D, f1: Filter2D) -> Result<Self> {
        let shape = h0.shape();
        if h1.shape() != shape || f0.shape() != shape || f1.shape() != shape {
            return Err(Error::BankShapeMismatch);
        }
        Ok(FilterBank { h0, h1, f0, f1 })
    }

    pub fn filter_shape(&self) -> (usize, usize) {
        self.h0.shape()
    }

    /// Filters in canonical export order with their names.
    pub fn named_filters(&self) -> [(&'static str, &Filter2D); 4] {
        [
            ("h0", &self.h0),
            ("h1", &self.h1),
            ("f0", &self.f0),
            ("f1", &self.f1),
        ]
    }

    /// Reference perfect-reconstruction pair on the quincunx lattice — the
    /// two-tap Haar bank. With s = 1/√2:
    ///
    /// ```text
    ///   h0 = [ s  s ]   anchor (0,0)      f0 = [ s  s ]   anchor (0,1)
    ///   h1 = [ s -s ]   anchor (0,0)      f1 = [-s  s ]   anchor (0,1)
    /// ```
    ///
    /// Analysis pairs each sample with its left neighbour; synthesis anchors
    /// one cell to the right, giving it the anticausal tap that puts every
    /// sample back in place. Reconstruction is exact on any grid with even
    /// side lengths, for either shared-coset parity.
    pub fn quincunx_haar() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        FilterBank {
            h0: Filter2D::new(1, 2, vec![s, s], (0, 0)).expect("static taps"),
            h1: Filter2D::new(1, 2, vec![s, -s], (0, 0)).expect("static taps"),
            f0: Filter2D::new(1, 2, vec![s, s], (0, 1)).expect("static taps"),
            f1: Filter2D::new(1, 2, vec![-s, s], (0, 1)).expect("static taps"),
        }
    }
}

/// Everything the forward pass computes, cached for gradient evaluation.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// Analysis outputs before masking.
    pub y0: Image,
    pub y1: Image,
    /// Masked channel signals (the retained subband samples).
    pub z0: Image,
    pub z1: Image,
    /// Reconstruction ã.
    pub recon: Image,
}

/// Analysis half: convolve with h0/h1 and mask both channels.
pub fn analysis(image: &Image, bank: &FilterBank, mask: &CosetMask) -> Result<(Image, Image)> {
    if mask.shape() != image.shape() {
        return Err(Error::DimensionMismatch {
            expected: image.shape(),
            got: mask.shape(),
        });
    }
    let z0 = apply_mask(&conv2_circular(image, &bank.h0)?, mask)?;
    let z1 = apply_mask(&conv2_circular(image, &bank.h1)?, mask)?;
    Ok((z0, z1))
}

/// Synthesis half: convolve each channel with its synthesis filter and sum.
pub fn synthesis(z0: &Image, z1: &Image, bank: &FilterBank) -> Result<Image> {
    if z0.shape() != z1.shape() {
        return Err(Error::DimensionMismatch {
            expected: z0.shape(),
            got: z1.shape(),
        });
    }
    conv2_circular(z0, &bank.f0)?.add(&conv2_circular(z1, &bank.f1)?)
}

/// Full forward pass; returns all intermediates.
pub fn forward(image: &Image, bank: &FilterBank, mask: &CosetMask) -> Result<ForwardTrace> {
    if mask.shape() != image.shape() {
        return Err(Error::DimensionMismatch {
            expected: image.shape(),
            got: mask.shape(),
        });
    }
    let y0 = conv2_circular(image, &bank.h0)?;
    let y1 = conv2_circular(image, &bank.h1)?;
    let z0 = apply_mask(&y0, mask)?;
    let z1 = apply_mask(&y1, mask)?;
    let recon = synthesis(&z0, &z1, bank)?;
    Ok(ForwardTrace {
        y0,
        y1,
        z0,
        z1,
        recon,
    })
}

/// Peak signal-to-noise ratio in decibels with the given peak amplitude.
/// A zero-MSE pair returns positive infinity.
pub fn psnr_with_peak(reference: &Image, test: &Image, peak: f64) -> Result<f64> {
    if reference.shape() != test.shape() {
        return Err(Error::DimensionMismatch {
            expected: reference.shape(),
            got: test.shape(),
        });
    }
    let n = (reference.rows() * reference.cols()) as f64;
    let mut acc = 0.0;
    for (a, b) in reference.as_slice().iter().zip(test.as_slice()) {
        let d = a - b;
        acc += d * d;
    }
    let mse = acc / n;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak / mse).log10())
}

/// PSNR for 8-bit-range imagery: peak fixed at 255.
pub fn psnr(reference: &Image, test: &Image) -> Result<f64> {
    psnr_with_peak(reference, test, 255.0)
}

/// One probe's reconstruction quality.
#[derive(Debug, Clone, Copy)]
pub struct ProbeReport {
    pub max_abs_error: f64,
    pub psnr: f64,
}

/// Run each probe image through the bank and report the reconstruction
/// error. At least one probe is required.
pub fn pr_error(bank: &FilterBank, mask: &CosetMask, probes: &[Image]) -> Result<Vec<ProbeReport>> {
    if probes.is_empty() {
        return Err(Error::NoProbes);
    }
    let mut reports = Vec::with_capacity(probes.len());
    for probe in probes {
        let trace = forward(probe, bank, mask)?;
        let mut max_abs = 0.0f64;
        for (a, b) in probe.as_slice().iter().zip(trace.recon.as_slice()) {
            max_abs = max_abs.max((a - b).abs());
        }
        reports.push(ProbeReport {
            max_abs_error: max_abs,
            psnr: psnr(probe, &trace.recon)?,
        });
    }
    Ok(reports)
}
