//! quinwave — image-matched two-channel wavelet design on the quincunx lattice.

pub mod error;
pub mod filterbank;
pub mod image;
pub mod io;
pub mod lattice;
pub mod render;
pub mod training;

pub use error::{Error, Result};
pub use filterbank::{
    analysis, conv2_circular, forward, pr_error, psnr, psnr_with_peak, synthesis, Filter2D,
    FilterBank, ForwardTrace, ProbeReport,
};
pub use image::Image;
pub use io::{export_filters, load_filters, read_bmp, write_csv_grid, write_pgm, BankMetadata};
pub use lattice::{apply_mask, CosetMask, DecimationMatrix};
pub use render::{cascade_scaling, cascade_wavelet, freq_response, CascadeScaling, SampledSurface};
pub use training::{
    finite_diff_grad, gradients, init_filters, loss, max_relative_error, sgd_nesterov_step, train,
    train_from_bank, Gradients, StopReason, TrainConfig, TrainResult, TrainState,
};
