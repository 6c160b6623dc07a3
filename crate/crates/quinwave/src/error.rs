//! Crate-wide error type.
//!
//! Every fallible operation in the library returns [`Result`]. Variants carry
//! enough context (expected vs. got shapes, offending values) that a caller
//! can print the error and know what to fix without a backtrace.

use std::fmt;
use std::io;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug)]
pub enum Error {
    /// Two grids that must share a shape do not.
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    /// A grid with a zero-sized row or column count.
    EmptyGrid,
    /// A grid that must have even side lengths (coset tiling) does not.
    OddDimensions { rows: usize, cols: usize },
    /// Filter tap grid is larger than the image it is applied to.
    FilterTooLarge {
        filter: (usize, usize),
        image: (usize, usize),
    },
    /// Filter anchor lies outside the tap grid.
    AnchorOutOfBounds {
        anchor: (usize, usize),
        shape: (usize, usize),
    },
    /// A sample, tap, or derived quantity is NaN or infinite.
    NonFinite(&'static str),
    /// Coset parity must be 0 or 1.
    InvalidParity(u8),
    /// A training or rendering parameter is out of its documented range.
    InvalidConfig(String),
    /// The four filters of a bank do not share one tap-grid shape.
    BankShapeMismatch,
    /// A forward trace does not belong to the (image, bank, mask) triple it
    /// was presented with.
    StaleTrace(&'static str),
    /// A gradient contained NaN or infinity; the optimizer has diverged.
    NonFiniteGradient,
    /// Decimation matrix is not a valid two-channel (|det| = 2) lattice map.
    NotQuincunx { det: i64 },
    /// A sampled surface was refined over one lattice but presented to an
    /// operation using another; the sampling densities/geometries disagree.
    DensityMismatch {
        expected: [[i64; 2]; 2],
        got: [[i64; 2]; 2],
    },
    /// The cascade index grid outgrew the hard safety bound.
    CascadeTooLarge { cells: usize, limit: usize },
    Io(io::Error),
    /// Input file is not a BMP (missing "BM" magic).
    NotBmp,
    /// BMP uses a compression mode other than BI_RGB.
    CompressedBmp { compression: u32 },
    /// BMP bit depth outside the supported {8, 24}.
    UnsupportedBitDepth(u16),
    /// BMP file ends before the declared pixel data.
    TruncatedBmp { needed: usize, got: usize },
    /// Filter file carries an unknown format/version line.
    BankFileVersion { found: String },
    /// Filter file is structurally broken at a given line.
    BankFileFormat { line: usize, reason: String },
    /// At least one probe image is required.
    NoProbes,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, got } => write!(
                f,
                "dimension mismatch: expected {}x{}, got {}x{}",
                expected.0, expected.1, got.0, got.1
            ),
            Error::EmptyGrid => write!(f, "grid has zero rows or columns"),
            Error::OddDimensions { rows, cols } => write!(
                f,
                "image dimensions must be even for coset tiling, got {rows}x{cols}"
            ),
            Error::FilterTooLarge { filter, image } => write!(
                f,
                "filter {}x{} larger than image {}x{}",
                filter.0, filter.1, image.0, image.1
            ),
            Error::AnchorOutOfBounds { anchor, shape } => write!(
                f,
                "anchor ({}, {}) outside {}x{} tap grid",
                anchor.0, anchor.1, shape.0, shape.1
            ),
            Error::NonFinite(what) => write!(f, "non-finite value in {what}"),
            Error::InvalidParity(p) => write!(f, "coset parity must be 0 or 1, got {p}"),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::BankShapeMismatch => {
                write!(f, "all four filters of a bank must share one shape")
            }
            Error::StaleTrace(what) => write!(f, "forward trace inconsistent: {what}"),
            Error::NonFiniteGradient => write!(f, "gradient is non-finite (divergence)"),
            Error::NotQuincunx { det } => write!(
                f,
                "decimation matrix must have |det| = 2 for a two-channel system, det = {det}"
            ),
            Error::DensityMismatch { expected, got } => write!(
                f,
                "surface sampling lattice mismatch: refined by {expected:?}, presented with {got:?}"
            ),
            Error::CascadeTooLarge { cells, limit } => write!(
                f,
                "cascade grid would need {cells} cells (limit {limit}); reduce iterations"
            ),
            Error::Io(e) => write!(f, "i/o error: {e}"),
            Error::NotBmp => write!(f, "not a BMP file (missing BM magic)"),
            Error::CompressedBmp { compression } => write!(
                f,
                "compressed BMP not supported (biCompression = {compression}, need BI_RGB = 0)"
            ),
            Error::UnsupportedBitDepth(bits) => {
                write!(f, "unsupported BMP bit depth {bits} (need 8 or 24)")
            }
            Error::TruncatedBmp { needed, got } => write!(
                f,
                "BMP pixel data truncated: need {needed} bytes, file has {got}"
            ),
            Error::BankFileVersion { found } => {
                write!(f, "unrecognized filter file version line: {found:?}")
            }
            Error::BankFileFormat { line, reason } => {
                write!(f, "malformed filter file at line {line}: {reason}")
            }
            Error::NoProbes => write!(f, "at least one probe image is required"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<io::Error> for Error {
    fn from(e: io::Error) -> Self {
        Error::Io(e)
    }
}
