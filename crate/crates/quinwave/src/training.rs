//! Gradient training of the filter bank against one image.
//!
//! The objective is the summed squared reconstruction error
//!
//! ```text
//!   L = Σ_n (a[n] − ã[n])²
//! ```
//!
//! minimized over all four filters' taps by full-batch gradient descent with
//! Nesterov momentum. The gradients are exact (analytic backprop through the
//! linear forward path), and [`finite_diff_grad`] provides the independent
//! numerical check used by the gradcheck tooling.
//!
//! Internally `train` rescales intensities to [0,1] before optimizing: the
//! filter bank is linear in the image, so the learned bank and every PSNR
//! figure are identical to what raw-intensity training would give at a
//! stable step size, but the default learning rate is well-conditioned at
//! native image scales. Reported loss values are in those normalized units.

use crate::error::{Error, Result};
use crate::filterbank::{forward, psnr_with_peak, Filter2D, FilterBank, ForwardTrace};
use crate::image::Image;
use crate::lattice::CosetMask;

/// Reference pixel count for the learning-rate rescaling rule: the default
/// rate is tuned for 512×512 inputs, and the summed loss grows linearly with
/// pixel count, so other sizes scale the rate by (512·512)/(rows·cols).
const REFERENCE_PIXELS: f64 = 512.0 * 512.0;

/// Loss blowup factor (relative to the starting loss) treated as divergence.
const DIVERGENCE_FACTOR: f64 = 1e3;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Step size η. The published default assumes 512×512 inputs; see
    /// `lr_auto_scale`.
    pub learning_rate: f64,
    /// Nesterov momentum μ in [0, 1).
    pub momentum: f64,
    /// Hard iteration bound (recorded evaluations).
    pub max_iterations: usize,
    /// Stop once reconstruction PSNR reaches this many dB.
    pub target_psnr: f64,
    /// Side length of the square learned filters.
    pub filter_size: usize,
    /// Secondary stop: quit when the loss falls to this value or below.
    pub loss_floor: f64,
    /// Seed for randomized tooling built on top of training (probe and
    /// gradcheck instance generation). The optimizer itself is
    /// deterministic and does not consume it.
    pub seed: u64,
    /// Which coset both channels keep (0 or 1).
    pub mask_parity: u8,
    /// Rescale the learning rate by (512·512)/(rows·cols) so the default
    /// step size behaves the same at any image size. No-op at 512×512.
    pub lr_auto_scale: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 2e-7,
            momentum: 0.9,
            max_iterations: 15000,
            target_psnr: 70.0,
            filter_size: 4,
            loss_floor: 1e-6,
            seed: 0,
            mask_parity: 0,
            lr_auto_scale: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "learning_rate must be positive and finite, got {}",
                self.learning_rate
            )));
        }
        if !(self.momentum.is_finite() && (0.0..1.0).contains(&self.momentum)) {
            return Err(Error::InvalidConfig(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        if !(self.target_psnr.is_finite() && self.target_psnr > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "target_psnr must be positive, got {}",
                self.target_psnr
            )));
        }
        if self.filter_size < 2 {
            return Err(Error::InvalidConfig(format!(
                "filter_size must be at least 2, got {}",
                self.filter_size
            )));
        }
        if !(self.loss_floor.is_finite() && self.loss_floor >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "loss_floor must be non-negative, got {}",
                self.loss_floor
            )));
        }
        if self.mask_parity > 1 {
            return Err(Error::InvalidParity(self.mask_parity));
        }
        Ok(())
    }

    /// Step size actually applied for an image of the given shape.
    pub fn effective_learning_rate(&self, rows: usize, cols: usize) -> f64 {
        if self.lr_auto_scale {
            self.learning_rate * REFERENCE_PIXELS / (rows as f64 * cols as f64)
        } else {
            self.learning_rate
        }
    }
}

/// Summed squared error Σ (a[n] − ã[n])² in fixed row-major order.
pub fn loss(image: &Image, recon: &Image) -> Result<f64> {
    if image.shape() != recon.shape() {
        return Err(Error::DimensionMismatch {
            expected: image.shape(),
            got: recon.shape(),
        });
    }
    let mut acc = 0.0;
    for (a, b) in image.as_slice().iter().zip(recon.as_slice()) {
        let d = a - b;
        acc += d * d;
    }
    Ok(acc)
}

/// Per-filter loss gradients, shaped like the bank's tap grids.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub h0: Vec<f64>,
    pub h1: Vec<f64>,
    pub f0: Vec<f64>,
    pub f1: Vec<f64>,
}

impl Gradients {
    pub fn is_finite(&self) -> bool {
        self.h0
            .iter()
            .chain(&self.h1)
            .chain(&self.f0)
            .chain(&self.f1)
            .all(|g| g.is_finite())
    }

    /// Largest tap-gradient magnitude across all four filters.
    pub fn max_abs(&self) -> f64 {
        self.h0
            .iter()
            .chain(&self.h1)
            .chain(&self.f0)
            .chain(&self.f1)
            .fold(0.0f64, |m, g| m.max(g.abs()))
    }
}

/// Cross-correlation of `signal` against shifted copies of `base`, one value
/// per tap position of a (rows×cols, anchor) grid:
///
/// ```text
///   out[p] = Σ_n signal[n] · base[(n − p + anchor) mod (H, W)]
/// ```
///
/// This is exactly ∂/∂taps of a circular convolution, evaluated against the
/// upstream sensitivity `signal`.
fn tap_gradient(
    signal: &Image,
    base: &Image,
    rows: usize,
    cols: usize,
    anchor: (usize, usize),
) -> Vec<f64> {
    let (h, w) = signal.shape();
    let mut out = vec![0.0; rows * cols];
    for pr in 0..rows {
        for pc in 0..cols {
            let sr = (anchor.0 as i64 - pr as i64).rem_euclid(h as i64) as usize;
            let sc = (anchor.1 as i64 - pc as i64).rem_euclid(w as i64) as usize;
            let mut acc = 0.0;
            for r in 0..h {
                let sig = signal.row(r);
                let src = base.row((r + sr) % h);
                let head = w - sc;
                for c in 0..head {
                    acc += sig[c] * src[c + sc];
                }
                for c in head..w {
                    acc += sig[c] * src[c + sc - w];
                }
            }
            out[pr * cols + pc] = acc;
        }
    }
    out
}

/// Adjoint of convolution with `filter`: correlation of `signal` with the
/// taps, out[m] = Σ_p taps[p] · signal[(m + p − anchor) mod (H, W)].
fn correlate(signal: &Image, filter: &Filter2D) -> Image {
    let (h, w) = signal.shape();
    let mut out = Image::zeros(h, w).expect("signal validated nonempty");
    let (ar, ac) = (filter.anchor().0 as i64, filter.anchor().1 as i64);
    for pr in 0..filter.rows() {
        for pc in 0..filter.cols() {
            let t = filter.tap(pr, pc);
            if t == 0.0 {
                continue;
            }
            let sr = (pr as i64 - ar).rem_euclid(h as i64) as usize;
            let sc = (pc as i64 - ac).rem_euclid(w as i64) as usize;
            for r in 0..h {
                let src = signal.row((r + sr) % h);
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
    out
}

fn validate_trace(
    image: &Image,
    bank: &FilterBank,
    mask: &CosetMask,
    trace: &ForwardTrace,
) -> Result<()> {
    let shape = image.shape();
    if mask.shape() != shape {
        return Err(Error::DimensionMismatch {
            expected: shape,
            got: mask.shape(),
        });
    }
    for img in [&trace.y0, &trace.y1, &trace.z0, &trace.z1, &trace.recon] {
        if img.shape() != shape {
            return Err(Error::StaleTrace("trace shape differs from image"));
        }
    }
    if bank.h0.rows() > shape.0 || bank.h0.cols() > shape.1 {
        return Err(Error::FilterTooLarge {
            filter: bank.filter_shape(),
            image: shape,
        });
    }
    // a trace from a different mask (or with tampered channels) breaks the
    // z = mask ⊙ y identity; full staleness detection is a caller contract
    let kept = mask.kept_slice();
    for (z, y) in [(&trace.z0, &trace.y0), (&trace.z1, &trace.y1)] {
        for ((&zv, &yv), &keep) in z.as_slice().iter().zip(y.as_slice()).zip(kept) {
            let expect = if keep { yv } else { 0.0 };
            if zv != expect {
                return Err(Error::StaleTrace("channel signals are not masked analysis outputs"));
            }
        }
    }
    Ok(())
}

/// Exact analytic gradients of the summed squared error with respect to
/// every filter tap.
///
/// With residual r[n] = −2(a[n] − ã[n]):
/// * synthesis taps see the channel signals directly:
///   g_fk[p] = Σ_n r[n] · z_k[(n − p + anchor_fk) mod (H, W)]
/// * the sensitivity entering channel k is the correlation of r with f_k,
///   zeroed off-coset by the mask, and the analysis taps correlate it with
///   the input: g_hk[p] = Σ_n b_k[n] · a[(n − p + anchor_hk) mod (H, W)].
pub fn gradients(
    image: &Image,
    bank: &FilterBank,
    mask: &CosetMask,
    trace: &ForwardTrace,
) -> Result<Gradients> {
    validate_trace(image, bank, mask, trace)?;
    let residual = trace.recon.sub(image)?.scaled(2.0); // −2(a − ã)
    let (fr, fc) = bank.filter_shape();

    let g_f0 = tap_gradient(&residual, &trace.z0, fr, fc, bank.f0.anchor());
    let g_f1 = tap_gradient(&residual, &trace.z1, fr, fc, bank.f1.anchor());

    let b0 = mask.apply(&correlate(&residual, &bank.f0))?;
    let b1 = mask.apply(&correlate(&residual, &bank.f1))?;

    let g_h0 = tap_gradient(&b0, image, fr, fc, bank.h0.anchor());
    let g_h1 = tap_gradient(&b1, image, fr, fc, bank.h1.anchor());

    let g = Gradients {
        h0: g_h0,
        h1: g_h1,
        f0: g_f0,
        f1: g_f1,
    };
    if !g.is_finite() {
        return Err(Error::NonFiniteGradient);
    }
    Ok(g)
}

/// Central-difference numerical gradient of the loss with respect to every
/// tap: (L(tap + eps) − L(tap − eps)) / (2·eps), re-running the forward pass
/// per perturbation. Independent of the analytic path; used to audit it.
pub fn finite_diff_grad(
    image: &Image,
    bank: &FilterBank,
    mask: &CosetMask,
    eps: f64,
) -> Result<Gradients> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "finite-difference eps must be positive, got {eps}"
        )));
    }
    let eval = |b: &FilterBank| -> Result<f64> {
        let t = forward(image, b, mask)?;
        loss(image, &t.recon)
    };
    fn filter_mut(b: &mut FilterBank, which: usize) -> &mut Filter2D {
        match which {
            0 => &mut b.h0,
            1 => &mut b.h1,
            2 => &mut b.f0,
            _ => &mut b.f1,
        }
    }
    let mut work = bank.clone();
    let (fr, fc) = bank.filter_shape();
    let mut grads = Vec::with_capacity(4);
    for which in 0..4usize {
        let mut g = vec![0.0; fr * fc];
        for idx in 0..fr * fc {
            let original = filter_mut(&mut work, which).taps()[idx];
            filter_mut(&mut work, which).taps_mut()[idx] = original + eps;
            let plus = eval(&work)?;
            filter_mut(&mut work, which).taps_mut()[idx] = original - eps;
            let minus = eval(&work)?;
            filter_mut(&mut work, which).taps_mut()[idx] = original;
            g[idx] = (plus - minus) / (2.0 * eps);
        }
        grads.push(g);
    }
    let f1 = grads.pop().unwrap();
    let f0 = grads.pop().unwrap();
    let h1 = grads.pop().unwrap();
    let h0 = grads.pop().unwrap();
    Ok(Gradients { h0, h1, f0, f1 })
}

/// Worst per-coefficient relative disagreement between two gradient sets,
/// with denominators clamped at 1e−12.
pub fn max_relative_error(a: &Gradients, b: &Gradients) -> f64 {
    let pair = |x: &[f64], y: &[f64]| -> f64 {
        x.iter()
            .zip(y)
            .map(|(&p, &q)| (p - q).abs() / p.abs().max(q.abs()).max(1e-12))
            .fold(0.0, f64::max)
    };
    pair(&a.h0, &b.h0)
        .max(pair(&a.h1, &b.h1))
        .max(pair(&a.f0, &b.f0))
        .max(pair(&a.f1, &b.f1))
}

/// Deterministic starting bank: a small 2×2 lowpass core (constant taps,
/// sum √2) for h0/f0 and a 2×2 column-alternating highpass core
/// (magnitudes summing to √2, zero net sum) for h1/f1, zero-padded into the
/// requested size×size grid around each filter's anchor. Analysis anchors
/// sit at the floor-center of the grid, synthesis anchors at the
/// ceil-center (the adjoint position), so reconstruction-capable tap
/// patterns are representable at every size.
pub fn init_filters(size: usize) -> Result<FilterBank> {
    if size < 2 {
        return Err(Error::InvalidConfig(format!(
            "filter_size must be at least 2, got {size}"
        )));
    }
    let q = std::f64::consts::SQRT_2 / 4.0; // each core tap: √2 / core area
    let analysis_anchor = ((size - 1) / 2, (size - 1) / 2);
    let synthesis_anchor = (size / 2, size / 2);

    // core occupies displacements {0,1}² for analysis filters and {−1,0}²
    // for synthesis filters, both measured from the anchor
    let build = |anchor: (usize, usize), corner: (i64, i64), highpass: bool| -> Result<Filter2D> {
        let mut taps = vec![0.0; size * size];
        for dr in 0..2i64 {
            for dc in 0..2i64 {
                let r = (anchor.0 as i64 + corner.0 + dr) as usize;
                let c = (anchor.1 as i64 + corner.1 + dc) as usize;
                let sign = if highpass && dc == 1 { -1.0 } else { 1.0 };
                taps[r * size + c] = sign * q;
            }
        }
        Filter2D::new(size, size, taps, anchor)
    };

    Ok(FilterBank {
        h0: build(analysis_anchor, (0, 0), false)?,
        h1: build(analysis_anchor, (0, 0), true)?,
        f0: build(synthesis_anchor, (-1, -1), false)?,
        f1: build(synthesis_anchor, (-1, -1), true)?,
    })
}

/// Why training stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Reconstruction PSNR reached the configured target.
    TargetPsnr,
    /// Loss fell to the configured floor.
    LossFloor,
    /// Iteration budget exhausted.
    MaxIterations,
    /// Loss became non-finite or blew up relative to its starting value.
    Divergence,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StopReason::TargetPsnr => "target-psnr",
            StopReason::LossFloor => "loss-floor",
            StopReason::MaxIterations => "max-iterations",
            StopReason::Divergence => "divergence",
        })
    }
}

/// Mutable optimizer state: current bank, one velocity per tap, and the
/// per-iteration histories (one entry per recorded evaluation).
#[derive(Debug, Clone)]
pub struct TrainState {
    pub bank: FilterBank,
    pub velocity: Gradients,
    pub iteration: usize,
    pub loss_history: Vec<f64>,
    pub psnr_history: Vec<f64>,
}

impl TrainState {
    pub fn new(bank: FilterBank) -> Self {
        let (r, c) = bank.filter_shape();
        let zeros = vec![0.0; r * c];
        TrainState {
            bank,
            velocity: Gradients {
                h0: zeros.clone(),
                h1: zeros.clone(),
                f0: zeros.clone(),
                f1: zeros,
            },
            iteration: 0,
            loss_history: Vec::new(),
            psnr_history: Vec::new(),
        }
    }

    fn record(&mut self, loss: f64, psnr: f64) {
        self.loss_history.push(loss);
        self.psnr_history.push(psnr);
        self.iteration = self.loss_history.len();
    }
}

/// One Nesterov-momentum update, applied in place to every tap:
///
/// ```text
///   v ← μ·v − η·g
///   θ ← θ + μ·v − η·g     (the freshly updated v)
/// ```
///
/// With μ = 0 this is a plain gradient step. Rejects non-finite gradients.
pub fn sgd_nesterov_step(
    state: &mut TrainState,
    grads: &Gradients,
    learning_rate: f64,
    momentum: f64,
) -> Result<()> {
    if !grads.is_finite() {
        return Err(Error::NonFiniteGradient);
    }
    let apply = |taps: &mut [f64], vel: &mut [f64], g: &[f64]| {
        for i in 0..taps.len() {
            vel[i] = momentum * vel[i] - learning_rate * g[i];
            taps[i] += momentum * vel[i] - learning_rate * g[i];
        }
    };
    apply(
        state.bank.h0.taps_mut(),
        &mut state.velocity.h0,
        &grads.h0,
    );
    apply(
        state.bank.h1.taps_mut(),
        &mut state.velocity.h1,
        &grads.h1,
    );
    apply(
        state.bank.f0.taps_mut(),
        &mut state.velocity.f0,
        &grads.f0,
    );
    apply(
        state.bank.f1.taps_mut(),
        &mut state.velocity.f1,
        &grads.f1,
    );
    Ok(())
}

/// Outcome of a training run. Histories have one entry per recorded
/// iteration; on divergence the partial histories and last finite bank are
/// preserved. Loss values are in normalized intensity units (input scaled
/// to [0,1]); PSNR values are ordinary decibels against the native image.
#[derive(Debug, Clone)]
pub struct TrainResult {
    pub bank: FilterBank,
    pub final_loss: f64,
    pub final_psnr: f64,
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub loss_history: Vec<f64>,
    pub psnr_history: Vec<f64>,
    /// Learning rate actually applied after any auto-scaling.
    pub effective_learning_rate: f64,
}

/// Train the default-initialized bank against `image`.
pub fn train(image: &Image, config: &TrainConfig) -> Result<TrainResult> {
    train_from_bank(image, config, init_filters(config.filter_size)?)
}

/// Train starting from a caller-supplied bank (initialization override).
///
/// The image must have even side lengths (so the coset structure tiles the
/// torus) and be at least as large as the filters.
pub fn train_from_bank(
    image: &Image,
    config: &TrainConfig,
    initial_bank: FilterBank,
) -> Result<TrainResult> {
    config.validate()?;
    let (rows, cols) = image.shape();
    if rows % 2 != 0 || cols % 2 != 0 {
        return Err(Error::OddDimensions { rows, cols });
    }
    let (fr, fc) = initial_bank.filter_shape();
    if fr > rows || fc > cols {
        return Err(Error::FilterTooLarge {
            filter: (fr, fc),
            image: (rows, cols),
        });
    }
    let mask = CosetMask::new(rows, cols, config.mask_parity)?;
    // optimize on [0,1] intensities; the bank is linear in the image so the
    // result applies to the native scale unchanged, and PSNR (peak 1 here)
    // equals the peak-255 figure on raw intensities
    let work = image.scaled(1.0 / 255.0);
    let eta = config.effective_learning_rate(rows, cols);

    let mut state = TrainState::new(initial_bank);
    let mut stop = StopReason::MaxIterations;
    let mut initial_loss = f64::INFINITY;

    for pass in 0..config.max_iterations {
        let trace = forward(&work, &state.bank, &mask)?;
        let l = loss(&work, &trace.recon)?;
        let p = psnr_with_peak(&work, &trace.recon, 1.0)?;
        state.record(l, p);
        if pass == 0 {
            initial_loss = l;
        }
        if !l.is_finite() || l > DIVERGENCE_FACTOR * initial_loss {
            stop = StopReason::Divergence;
            break;
        }
        if p >= config.target_psnr {
            stop = StopReason::TargetPsnr;
            break;
        }
        if l <= config.loss_floor {
            stop = StopReason::LossFloor;
            break;
        }
        if pass + 1 == config.max_iterations {
            // budget exhausted; do not take a step that would go unrecorded
            break;
        }
        let g = gradients(&work, &state.bank, &mask, &trace)?;
        if sgd_nesterov_step(&mut state, &g, eta, config.momentum).is_err() {
            stop = StopReason::Divergence;
            break;
        }
    }

    let final_loss = *state.loss_history.last().expect("at least one iteration");
    let final_psnr = *state.psnr_history.last().expect("at least one iteration");
    Ok(TrainResult {
        bank: state.bank,
        final_loss,
        final_psnr,
        iterations: state.iteration,
        stop_reason: stop,
        loss_history: state.loss_history,
        psnr_history: state.psnr_history,
        effective_learning_rate: eta,
    })
}
