//! Command-line front end: train a bank against an image, audit gradients,
//! verify reconstruction of a saved bank, and render diagnostic surfaces.
//!
//! Exit codes: 0 success, 2 bad usage or invalid parameters, 3 unreadable or
//! unwritable files, 4 training diverged, 5 a verification check failed.
//! Output is deterministic — repeated runs with the same inputs produce
//! byte-identical files and stdout.

use clap::{Args, Parser, Subcommand};
use quinwave::lattice::{CosetMask, DecimationMatrix};
use quinwave::{
    cascade_scaling, cascade_wavelet, export_filters, finite_diff_grad, forward, freq_response,
    gradients, load_filters, max_relative_error, pr_error, read_bmp, train, write_csv_grid,
    write_pgm, BankMetadata, Error, Filter2D, FilterBank, Image, Result, StopReason, TrainConfig,
};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_DIVERGED: u8 = 4;
const EXIT_CHECK_FAILED: u8 = 5;

#[derive(Parser)]
#[command(
    name = "quinwave",
    version,
    about = "Image-matched two-channel wavelet design on the quincunx lattice"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a filter bank to reconstruct the given image.
    Train(TrainArgs),
    /// Compare analytic gradients against central finite differences.
    Gradcheck(GradcheckArgs),
    /// Check that a saved bank reconstructs random probe images.
    Prcheck(PrcheckArgs),
    /// Render frequency responses and cascade surfaces for a saved bank.
    Render(RenderArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Input image: uncompressed 8-bit or 24-bit BMP.
    image: PathBuf,
    /// Directory receiving filters.txt, trace.csv and recon.pgm.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Base step size (rescaled by pixel count unless disabled).
    #[arg(long, default_value_t = TrainConfig::default().learning_rate)]
    learning_rate: f64,
    /// Nesterov momentum in [0, 1).
    #[arg(long, default_value_t = TrainConfig::default().momentum)]
    momentum: f64,
    /// Hard bound on training iterations.
    #[arg(long, default_value_t = TrainConfig::default().max_iterations)]
    max_iterations: usize,
    /// Stop once reconstruction PSNR reaches this many dB.
    #[arg(long, default_value_t = TrainConfig::default().target_psnr)]
    target_psnr: f64,
    /// Side length of the square learned filters.
    #[arg(long, default_value_t = TrainConfig::default().filter_size)]
    filter_size: usize,
    /// Secondary stop: quit once the loss falls this low.
    #[arg(long, default_value_t = TrainConfig::default().loss_floor)]
    loss_floor: f64,
    /// Seed recorded in the config (the optimizer itself is deterministic).
    #[arg(long, default_value_t = TrainConfig::default().seed)]
    seed: u64,
    /// Coset kept by both channels (0 or 1).
    #[arg(long, default_value_t = TrainConfig::default().mask_parity)]
    mask_parity: u8,
    /// Apply the base learning rate as-is instead of rescaling by
    /// (512·512)/(rows·cols).
    #[arg(long)]
    no_lr_auto_scale: bool,
}

impl TrainArgs {
    fn to_config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            momentum: self.momentum,
            max_iterations: self.max_iterations,
            target_psnr: self.target_psnr,
            filter_size: self.filter_size,
            loss_floor: self.loss_floor,
            seed: self.seed,
            mask_parity: self.mask_parity,
            lr_auto_scale: !self.no_lr_auto_scale,
        }
    }
}

#[derive(Args)]
struct GradcheckArgs {
    /// Number of random problem instances.
    #[arg(long, default_value_t = 20)]
    instances: usize,
    /// Probe image side length (even).
    #[arg(long, default_value_t = 8)]
    size: usize,
    /// Side length of the random filters.
    #[arg(long, default_value_t = 3)]
    filter_size: usize,
    /// Central-difference step.
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    /// Worst relative error allowed before the check fails.
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
    /// Seed for instance generation.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Corrupt one analytic gradient entry (self-test of the checker).
    #[arg(long, hide = true)]
    corrupt: bool,
}

#[derive(Args)]
struct PrcheckArgs {
    /// Saved filter bank file.
    bank: PathBuf,
    /// Number of random probe images.
    #[arg(long, default_value_t = 8)]
    probes: usize,
    /// Probe side length (even).
    #[arg(long, default_value_t = 16)]
    size: usize,
    /// Minimum acceptable reconstruction PSNR over all probes, in dB.
    #[arg(long, default_value_t = 70.0)]
    threshold: f64,
    /// Seed for probe generation.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Coset kept by both channels (0 or 1).
    #[arg(long, default_value_t = 0)]
    mask_parity: u8,
}

#[derive(Args)]
struct RenderArgs {
    /// Saved filter bank file.
    bank: PathBuf,
    /// Directory receiving the rendered surfaces.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Frequency-response resolution per axis (odd values sample DC exactly).
    #[arg(long, default_value_t = 65)]
    grid: usize,
    /// Cascade refinement levels for the scaling surface.
    #[arg(long, default_value_t = 8)]
    levels: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Train(a) => cmd_train(&a),
        Command::Gradcheck(a) => cmd_gradcheck(&a),
        Command::Prcheck(a) => cmd_prcheck(&a),
        Command::Render(a) => cmd_render(&a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::InvalidConfig(_) | Error::InvalidParity(_) => EXIT_USAGE,
        _ => EXIT_IO,
    }
}

fn config_line(c: &TrainConfig) -> String {
    format!(
        "learning_rate={:e} momentum={} max_iterations={} target_psnr={} filter_size={} \
         loss_floor={:e} seed={} mask_parity={} lr_auto_scale={}",
        c.learning_rate,
        c.momentum,
        c.max_iterations,
        c.target_psnr,
        c.filter_size,
        c.loss_floor,
        c.seed,
        c.mask_parity,
        c.lr_auto_scale
    )
}

fn file_name_of(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn trace_csv(loss: &[f64], psnr: &[f64]) -> String {
    let mut s = String::from("iteration,loss,psnr\n");
    for (i, (l, p)) in loss.iter().zip(psnr).enumerate() {
        s.push_str(&format!("{i},{l},{p}\n"));
    }
    s
}

fn cmd_train(args: &TrainArgs) -> Result<u8> {
    let config = args.to_config();
    config.validate()?;
    let image = read_bmp(&args.image)?;
    let (rows, cols) = image.shape();
    println!(
        "train: image {} ({rows}x{cols} pixels)",
        args.image.display()
    );
    println!("config: {}", config_line(&config));
    println!(
        "effective learning rate: {:e}",
        config.effective_learning_rate(rows, cols)
    );

    let result = train(&image, &config)?;

    std::fs::create_dir_all(&args.out_dir)?;
    let meta = BankMetadata {
        source_image: file_name_of(&args.image),
        config_echo: config_line(&config),
        final_psnr: result.final_psnr,
        iterations: result.iterations,
    };
    let filters_path = args.out_dir.join("filters.txt");
    export_filters(&result.bank, &meta, &filters_path)?;
    let trace_path = args.out_dir.join("trace.csv");
    std::fs::write(
        &trace_path,
        trace_csv(&result.loss_history, &result.psnr_history),
    )?;
    let mask = CosetMask::new(rows, cols, config.mask_parity)?;
    let trace = forward(&image, &result.bank, &mask)?;
    let recon_path = args.out_dir.join("recon.pgm");
    write_pgm(&trace.recon, &recon_path, false)?;

    println!("wrote {}", filters_path.display());
    println!("wrote {}", trace_path.display());
    println!("wrote {}", recon_path.display());
    println!(
        "result: loss={:e} psnr={:.4} dB iterations={} stop={}",
        result.final_loss, result.final_psnr, result.iterations, result.stop_reason
    );
    Ok(if result.stop_reason == StopReason::Divergence {
        EXIT_DIVERGED
    } else {
        0
    })
}

/// Random bank with the training anchor convention: analysis filters
/// anchored at the floor center, synthesis filters at the ceiling center.
fn random_bank(rng: &mut StdRng, size: usize) -> Result<FilterBank> {
    let mut mk = |anchor: (usize, usize)| -> Result<Filter2D> {
        let taps = (0..size * size)
            .map(|_| rng.random_range(-0.75..0.75))
            .collect();
        Filter2D::new(size, size, taps, anchor)
    };
    let a = ((size - 1) / 2, (size - 1) / 2);
    let s = (size / 2, size / 2);
    FilterBank::new(mk(a)?, mk(a)?, mk(s)?, mk(s)?)
}

fn random_image(rng: &mut StdRng, rows: usize, cols: usize, peak: f64) -> Image {
    let vals = (0..rows * cols).map(|_| rng.random_range(0.0..peak)).collect();
    Image::from_vec(rows, cols, vals).expect("finite by construction")
}

fn cmd_gradcheck(args: &GradcheckArgs) -> Result<u8> {
    if args.instances == 0 {
        return Err(Error::InvalidConfig("need at least one instance".into()));
    }
    if args.size == 0 || args.size % 2 != 0 {
        return Err(Error::InvalidConfig(format!(
            "probe size must be even and positive, got {}",
            args.size
        )));
    }
    println!(
        "gradcheck: {} instances, {0}x{1} images, {2}x{2} filters, eps={3:e}, tolerance={4:e}",
        args.instances, args.size, args.filter_size, args.eps, args.tolerance
    );
    let mut worst = 0.0f64;
    for i in 0..args.instances {
        let mut rng = StdRng::seed_from_u64(args.seed.wrapping_add(i as u64));
        let image = random_image(&mut rng, args.size, args.size, 1.0);
        let bank = random_bank(&mut rng, args.filter_size)?;
        let mask = CosetMask::new(args.size, args.size, 0)?;
        let trace = forward(&image, &bank, &mask)?;
        let mut analytic = gradients(&image, &bank, &mask, &trace)?;
        if args.corrupt {
            analytic.h0[0] += 0.5;
        }
        let numeric = finite_diff_grad(&image, &bank, &mask, args.eps)?;
        let rel = max_relative_error(&analytic, &numeric);
        println!("instance {i}: max relative error {rel:e}");
        worst = worst.max(rel);
    }
    println!(
        "gradcheck: worst relative error {worst:e} (tolerance {:e})",
        args.tolerance
    );
    if worst < args.tolerance {
        println!("gradcheck: PASS");
        Ok(0)
    } else {
        println!("gradcheck: FAIL");
        Ok(EXIT_CHECK_FAILED)
    }
}

fn cmd_prcheck(args: &PrcheckArgs) -> Result<u8> {
    if args.size == 0 || args.size % 2 != 0 {
        return Err(Error::InvalidConfig(format!(
            "probe size must be even and positive, got {}",
            args.size
        )));
    }
    let (bank, meta) = load_filters(&args.bank)?;
    let (fr, fc) = bank.filter_shape();
    println!(
        "prcheck: bank {} ({fr}x{fc} filters, trained on {}, {} iterations)",
        args.bank.display(),
        meta.source_image,
        meta.iterations
    );
    println!(
        "config: probes={} size={} threshold={} dB seed={} mask_parity={}",
        args.probes, args.size, args.threshold, args.seed, args.mask_parity
    );
    let mut rng = StdRng::seed_from_u64(args.seed);
    let probes: Vec<Image> = (0..args.probes)
        .map(|_| random_image(&mut rng, args.size, args.size, 255.0))
        .collect();
    let mask = CosetMask::new(args.size, args.size, args.mask_parity)?;
    let reports = pr_error(&bank, &mask, &probes)?;
    let mut worst = f64::INFINITY;
    for (i, r) in reports.iter().enumerate() {
        println!(
            "probe {i}: max abs error {:.3e}, psnr {:.4} dB",
            r.max_abs_error, r.psnr
        );
        worst = worst.min(r.psnr);
    }
    println!(
        "prcheck: worst psnr {:.4} dB (threshold {} dB)",
        worst, args.threshold
    );
    if worst >= args.threshold {
        println!("prcheck: PASS");
        Ok(0)
    } else {
        println!("prcheck: FAIL");
        Ok(EXIT_CHECK_FAILED)
    }
}

fn trail(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:.6e}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_render(args: &RenderArgs) -> Result<u8> {
    let (bank, meta) = load_filters(&args.bank)?;
    let (fr, fc) = bank.filter_shape();
    println!(
        "render: bank {} ({fr}x{fc} filters, trained on {})",
        args.bank.display(),
        meta.source_image
    );
    println!(
        "config: grid={} levels={} out_dir={}",
        args.grid,
        args.levels,
        args.out_dir.display()
    );
    std::fs::create_dir_all(&args.out_dir)?;

    for (name, filter) in bank.named_filters() {
        eprintln!("render: frequency response {name}");
        let grid = freq_response(filter, args.grid)?;
        write_csv_grid(&grid, args.out_dir.join(format!("freq_{name}.csv")))?;
        write_pgm(&grid, args.out_dir.join(format!("freq_{name}.pgm")), true)?;
        let (lo, hi) = grid.min_max();
        println!("freq_{name}: magnitude range [{lo:.6e}, {hi:.6e}]");
    }

    let m = DecimationMatrix::quincunx();
    eprintln!("render: cascading scaling surface to level {}", args.levels);
    let scaling = cascade_scaling(&bank.f0, &m, args.levels)?;
    eprintln!("render: wavelet surface");
    let wavelet = cascade_wavelet(&bank.f1, &scaling.surface, &m)?;

    write_csv_grid(scaling.surface.values(), args.out_dir.join("scaling.csv"))?;
    write_pgm(scaling.surface.values(), args.out_dir.join("scaling.pgm"), true)?;
    write_csv_grid(wavelet.values(), args.out_dir.join("wavelet.csv"))?;
    write_pgm(wavelet.values(), args.out_dir.join("wavelet.pgm"), true)?;

    let (sr, sc) = scaling.surface.values().shape();
    let (wr, wc) = wavelet.values().shape();
    println!(
        "scaling: {sr}x{sc} samples at level {}, integral {:.6e}",
        scaling.surface.level(),
        scaling.surface.integral()
    );
    println!("scaling integral trail: {}", trail(&scaling.integrals));
    println!("scaling residual trail: {}", trail(&scaling.residual_l1));
    println!(
        "wavelet: {wr}x{wc} samples at level {}, integral {:.6e}",
        wavelet.level(),
        wavelet.integral()
    );
    Ok(0)
}
