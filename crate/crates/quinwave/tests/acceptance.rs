//! Acceptance gate: one test per shipped guarantee, each ending in a single
//! printed PASS line with its measured margin. Every tolerance and budget is
//! pinned here as a constant — nothing is imported from the library's own
//! notion of "good enough".
//!
//! The reference-scale descent check (`training_descends_at_reference_scale`)
//! runs 1001 full 512×512 evaluations and dominates the suite's runtime;
//! override its budget with `QUINWAVE_SMOKE_ITERS` when iterating locally.

mod common;

use common::*;
use quinwave::lattice::{CosetMask, DecimationMatrix};
use quinwave::{
    cascade_scaling, conv2_circular, export_filters, finite_diff_grad, forward, gradients,
    load_filters, max_relative_error, read_bmp, train, BankMetadata, Filter2D, FilterBank, Image,
    StopReason, TrainConfig,
};
use rand::RngExt;
use std::time::Instant;

// ---- pinned tolerances and budgets --------------------------------------

/// Worst analytic-vs-finite-difference relative gradient error allowed.
const GRADCHECK_TOL: f64 = 1e-6;
const GRADCHECK_INSTANCES: usize = 20;
const GRADCHECK_BUDGET_S: f64 = 10.0;

/// Optimized convolution vs the definitional quadruple loop.
const CONV_TOL: f64 = 1e-12;
const CONV_INSTANCES: usize = 100;
const CONV_BUDGET_S: f64 = 5.0;

/// Reference-bank reconstruction error, exhaustive and randomized.
const HAAR_TOL: f64 = 1e-10;
const HAAR_BUDGET_S: f64 = 30.0;

/// Small-crop training targets.
const SMALL_CROP_DB: f64 = 70.0;
const SMALL_CROP_MAX_ITERS: usize = 30_000;
const SMALL_CROP_BUDGET_S: f64 = 300.0;
const MA_WINDOW: usize = 100;

/// Gradient magnitude at a perfect-reconstruction bank.
const STATIONARY_TOL: f64 = 1e-12;

/// Cascade integral drift allowed for filters whose taps sum to √2.
const CASCADE_INTEGRAL_TOL: f64 = 1e-6;
const CASCADE_LEVELS: usize = 8;

// --------------------------------------------------------------------------

fn pass(name: &str, detail: String) {
    println!("acceptance {name}: PASS ({detail})");
}

/// Analytic gradients agree with central finite differences on random
/// instances to near machine precision.
#[test]
fn gradient_check_on_random_instances() {
    let t0 = Instant::now();
    let mut rng = seeded_rng(201);
    let mask = CosetMask::new(8, 8, 0).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..GRADCHECK_INSTANCES {
        let img = random_image(&mut rng, 8, 8, 0.0, 1.0);
        let bank = FilterBank::new(
            random_filter(&mut rng, 3, 3, (1, 1)),
            random_filter(&mut rng, 3, 3, (1, 1)),
            random_filter(&mut rng, 3, 3, (1, 1)),
            random_filter(&mut rng, 3, 3, (1, 1)),
        )
        .unwrap();
        let trace = forward(&img, &bank, &mask).unwrap();
        let analytic = gradients(&img, &bank, &mask, &trace).unwrap();
        let numeric = finite_diff_grad(&img, &bank, &mask, 1e-3).unwrap();
        worst = worst.max(max_relative_error(&analytic, &numeric));
    }
    let dt = t0.elapsed().as_secs_f64();
    assert!(
        worst < GRADCHECK_TOL,
        "worst relative gradient error {worst:e} exceeds {GRADCHECK_TOL:e}"
    );
    assert!(dt < GRADCHECK_BUDGET_S, "took {dt:.2}s");
    pass(
        "gradient-check",
        format!("{GRADCHECK_INSTANCES} instances, worst rel err {worst:.2e}, {dt:.2}s"),
    );
}

/// The optimized circular convolution equals the definitional quadruple
/// loop over random shapes, anchors, and taps.
#[test]
fn convolution_matches_definition() {
    let t0 = Instant::now();
    let mut rng = seeded_rng(202);
    let mut worst = 0.0f64;
    for _ in 0..CONV_INSTANCES {
        let h = 2 * rng.random_range(1..=8); // even, 2..=16
        let w = 2 * rng.random_range(1..=8);
        let fr = rng.random_range(1..=h.min(5));
        let fc = rng.random_range(1..=w.min(5));
        let anchor = (rng.random_range(0..fr), rng.random_range(0..fc));
        let img = random_image(&mut rng, h, w, -100.0, 100.0);
        let f = random_filter(&mut rng, fr, fc, anchor);
        let fast = conv2_circular(&img, &f).unwrap();
        worst = worst.max(max_abs_diff(&fast, &conv_oracle(&img, &f)));
    }
    let dt = t0.elapsed().as_secs_f64();
    assert!(worst < CONV_TOL, "worst deviation {worst:e}");
    assert!(dt < CONV_BUDGET_S, "took {dt:.2}s");
    pass(
        "convolution-oracle",
        format!("{CONV_INSTANCES} instances, worst abs diff {worst:.2e}, {dt:.2}s"),
    );
}

/// The reference two-tap bank reconstructs every binary 4×4 image (all 2^16
/// of them) and random continuous 8×8 probes.
#[test]
fn reference_bank_reconstructs_exhaustively() {
    let t0 = Instant::now();
    let bank = FilterBank::quincunx_haar();
    let mask4 = CosetMask::new(4, 4, 0).unwrap();
    let mut worst = 0.0f64;
    for code in 0u32..(1 << 16) {
        let img = Image::from_fn(4, 4, |r, c| ((code >> (r * 4 + c)) & 1) as f64).unwrap();
        let recon = forward(&img, &bank, &mask4).unwrap().recon;
        worst = worst.max(max_abs_diff(&img, &recon));
    }
    let mask8 = CosetMask::new(8, 8, 0).unwrap();
    let mut rng = seeded_rng(203);
    for _ in 0..100 {
        let img = random_image(&mut rng, 8, 8, 0.0, 255.0);
        let recon = forward(&img, &bank, &mask8).unwrap().recon;
        worst = worst.max(max_abs_diff(&img, &recon));
    }
    let dt = t0.elapsed().as_secs_f64();
    assert!(worst < HAAR_TOL, "worst reconstruction error {worst:e}");
    assert!(dt < HAAR_BUDGET_S, "took {dt:.2}s");
    pass(
        "reference-bank-reconstruction",
        format!("65536 exhaustive + 100 random probes, worst err {worst:.2e}, {dt:.2}s"),
    );
}

/// The two coset masks partition every grid cell exactly once, for every
/// grid up to 16×16.
#[test]
fn coset_masks_partition_every_grid() {
    let mut grids = 0usize;
    for h in 1..=16usize {
        for w in 1..=16usize {
            let ones = Image::from_fn(h, w, |_, _| 1.0).unwrap();
            let kept0 = CosetMask::new(h, w, 0).unwrap().apply(&ones).unwrap();
            let kept1 = CosetMask::new(h, w, 1).unwrap().apply(&ones).unwrap();
            let mut count0 = 0usize;
            for r in 0..h {
                for c in 0..w {
                    let (a, b) = (kept0.get(r, c), kept1.get(r, c));
                    assert!(a == 0.0 || a == 1.0, "mask must pass or zero, got {a}");
                    assert_eq!(a + b, 1.0, "cell ({r},{c}) of {h}x{w} not covered once");
                    assert_eq!(a == 1.0, (r + c) % 2 == 0, "parity misassigned");
                    count0 += a as usize;
                }
            }
            if h % 2 == 0 && w % 2 == 0 {
                assert_eq!(count0 * 2, h * w, "even grids split evenly");
            }
            grids += 1;
        }
    }
    pass(
        "coset-partition",
        format!("{grids} grid shapes exhaustively partitioned"),
    );
}

fn moving_average_violations(loss: &[f64], window: usize) -> usize {
    if loss.len() <= window {
        return 0;
    }
    let mean = |i: usize| loss[i..i + window].iter().sum::<f64>() / window as f64;
    let mut violations = 0;
    let mut prev = mean(0);
    for i in 1..=loss.len() - window {
        let cur = mean(i);
        if cur > prev {
            violations += 1;
        }
        prev = cur;
    }
    violations
}

/// Training a 2×2 bank on a 64×64 photographic crop reaches the target
/// reconstruction quality well inside the iteration and time budget, with a
/// monotonically non-increasing smoothed loss.
#[test]
fn training_reaches_target_on_small_crop() {
    let t0 = Instant::now();
    let image = synthetic_photo(64, 64, 7);
    let config = TrainConfig {
        learning_rate: 1.6e-6,
        filter_size: 2,
        max_iterations: SMALL_CROP_MAX_ITERS,
        ..TrainConfig::default()
    };
    let result = train(&image, &config).unwrap();
    let dt = t0.elapsed().as_secs_f64();
    assert_eq!(
        result.stop_reason,
        StopReason::TargetPsnr,
        "stopped by {} at {:.4} dB after {} iterations",
        result.stop_reason,
        result.final_psnr,
        result.iterations
    );
    assert!(result.final_psnr >= SMALL_CROP_DB);
    assert!(result.iterations <= SMALL_CROP_MAX_ITERS);
    let violations = moving_average_violations(&result.loss_history, MA_WINDOW);
    assert_eq!(
        violations, 0,
        "{MA_WINDOW}-iteration moving average of the loss must never increase"
    );
    assert!(dt < SMALL_CROP_BUDGET_S, "took {dt:.2}s");
    pass(
        "small-crop-training",
        format!(
            "{:.4} dB at iteration {}, smoothed loss monotone, {dt:.2}s",
            result.final_psnr, result.iterations
        ),
    );
}

/// At the published defaults and full 512×512 scale the loss strictly
/// descends from its starting value without diverging.
#[test]
fn training_descends_at_reference_scale() {
    let iters: usize = std::env::var("QUINWAVE_SMOKE_ITERS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(1001);
    let image = synthetic_photo(512, 512, 7);
    let config = TrainConfig {
        max_iterations: iters,
        ..TrainConfig::default()
    };
    let result = train(&image, &config).unwrap();
    assert_ne!(result.stop_reason, StopReason::Divergence);
    let first = result.loss_history[0];
    let last = *result.loss_history.last().unwrap();
    assert!(
        last < first,
        "loss failed to descend: {first:e} -> {last:e} over {} evaluations",
        result.loss_history.len()
    );
    pass(
        "reference-scale-descent",
        format!(
            "loss {first:.4} -> {last:.4} over {} evaluations, stop={}",
            result.loss_history.len(),
            result.stop_reason
        ),
    );
}

/// A perfect-reconstruction bank is a stationary point: every gradient
/// entry vanishes to rounding noise.
#[test]
fn gradients_vanish_at_perfect_reconstruction() {
    let bank = FilterBank::quincunx_haar();
    let mask = CosetMask::new(8, 8, 0).unwrap();
    let mut rng = seeded_rng(207);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let img = random_image(&mut rng, 8, 8, 0.0, 1.0);
        let trace = forward(&img, &bank, &mask).unwrap();
        let g = gradients(&img, &bank, &mask, &trace).unwrap();
        worst = worst.max(g.max_abs());
    }
    assert!(
        worst <= STATIONARY_TOL,
        "gradient magnitude {worst:e} at a perfect-reconstruction bank"
    );
    pass(
        "stationary-at-perfect-reconstruction",
        format!("20 probes, max |gradient| {worst:.2e}"),
    );
}

/// The cascade refinement preserves unit integral whenever the driving
/// filter's taps sum to √2 — the two-scale normalization is not leaking
/// mass level to level.
#[test]
fn cascade_preserves_unit_integral() {
    let m = DecimationMatrix::quincunx();
    let mut cases = vec![FilterBank::quincunx_haar().f0];
    let mut rng = seeded_rng(208);
    for _ in 0..4 {
        let mut taps: Vec<f64> = (0..9).map(|_| rng.random_range(-0.5..0.5)).collect();
        let shift = (std::f64::consts::SQRT_2 - taps.iter().sum::<f64>()) / 9.0;
        for t in &mut taps {
            *t += shift;
        }
        cases.push(Filter2D::new(3, 3, taps, (1, 1)).unwrap());
    }
    let mut worst = 0.0f64;
    for f in &cases {
        let cascade = cascade_scaling(f, &m, CASCADE_LEVELS).unwrap();
        assert_eq!(cascade.integrals.len(), CASCADE_LEVELS + 1);
        for &v in &cascade.integrals {
            worst = worst.max((v - 1.0).abs());
        }
    }
    assert!(
        worst < CASCADE_INTEGRAL_TOL,
        "integral drifted {worst:e} from 1 across {CASCADE_LEVELS} levels"
    );
    pass(
        "cascade-integral-preservation",
        format!(
            "{} filters x {CASCADE_LEVELS} levels, worst drift {worst:.2e}",
            cases.len()
        ),
    );
}

/// Everything written to disk survives the trip back: bank files reload
/// bit-exactly, BMP pixels arrive untouched, and rerunning the binary
/// reproduces artifacts byte for byte.
#[test]
fn artifacts_round_trip_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = seeded_rng(209);

    // bank file: random coefficients come back with identical bits
    let bank = FilterBank::new(
        random_filter(&mut rng, 3, 3, (1, 1)),
        random_filter(&mut rng, 3, 3, (1, 1)),
        random_filter(&mut rng, 3, 3, (2, 2)),
        random_filter(&mut rng, 3, 3, (2, 2)),
    )
    .unwrap();
    let meta = BankMetadata {
        source_image: "probe.bmp".into(),
        config_echo: "round-trip".into(),
        final_psnr: 71.5,
        iterations: 42,
    };
    let bank_path = dir.path().join("bank.txt");
    export_filters(&bank, &meta, &bank_path).unwrap();
    let (loaded, loaded_meta) = load_filters(&bank_path).unwrap();
    assert_eq!(loaded, bank, "coefficients must reload bit-exactly");
    assert_eq!(loaded_meta, meta);

    // 8-bit BMP: every pixel value arrives exactly
    let pixels: Vec<u8> = (0..8 * 10).map(|i| (i * 37 % 256) as u8).collect();
    let gray_path = dir.path().join("gray.bmp");
    std::fs::write(&gray_path, bmp_bytes_gray8(8, 10, &pixels)).unwrap();
    let gray = read_bmp(&gray_path).unwrap();
    assert_eq!(gray.shape(), (8, 10));
    for (i, &p) in pixels.iter().enumerate() {
        assert_eq!(gray.as_slice()[i], p as f64, "pixel {i}");
    }

    // 24-bit BMP: luminance reduction matches the written formula exactly
    let rgb: Vec<(u8, u8, u8)> = (0..4 * 4)
        .map(|i| ((i * 53 % 256) as u8, (i * 97 % 256) as u8, (i * 11 % 256) as u8))
        .collect();
    let color_path = dir.path().join("color.bmp");
    std::fs::write(&color_path, bmp_bytes_bgr24(4, 4, &rgb)).unwrap();
    let color = read_bmp(&color_path).unwrap();
    for (i, &(r, g, b)) in rgb.iter().enumerate() {
        let expect = 0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64;
        assert_eq!(color.as_slice()[i], expect, "pixel {i}");
    }

    // rerunning the trainer reproduces artifacts byte for byte
    let bmp_path = dir.path().join("photo.bmp");
    std::fs::write(&bmp_path, photo_bmp_bytes(16, 16, 5)).unwrap();
    let mut artifact_sets = Vec::new();
    for sub in ["a", "b"] {
        let out_dir = dir.path().join(sub);
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_quinwave"))
            .args([
                "train",
                bmp_path.to_str().unwrap(),
                "--out-dir",
                out_dir.to_str().unwrap(),
                "--filter-size",
                "2",
                "--max-iterations",
                "60",
            ])
            .output()
            .expect("binary should spawn")
            .status;
        assert_eq!(status.code(), Some(0));
        let set: Vec<Vec<u8>> = ["filters.txt", "trace.csv", "recon.pgm"]
            .iter()
            .map(|f| std::fs::read(out_dir.join(f)).unwrap())
            .collect();
        artifact_sets.push(set);
    }
    assert_eq!(
        artifact_sets[0], artifact_sets[1],
        "training artifacts must be byte-identical across reruns"
    );

    pass(
        "artifact-round-trips",
        "bank bit-exact, BMP pixels exact, CLI reruns byte-identical".to_string(),
    );
}
