//! File formats: BMP ingestion, PGM/CSV emission, filter-bank persistence.
//!
//! Every writer is deterministic — identical inputs produce byte-identical
//! files — so repeated runs of the tooling can be diffed.

pub mod bank;
pub mod bmp;
pub mod csv;
pub mod pgm;

pub use bank::{export_filters, load_filters, BankMetadata};
pub use bmp::read_bmp;
pub use csv::write_csv_grid;
pub use pgm::write_pgm;
