//! Filter-bank persistence: a human-auditable, versioned text format whose
//! coefficients round-trip bit-exactly (written with 17 significant
//! decimal digits, the injectivity threshold for IEEE-754 doubles).
//!
//! Layout:
//!
//! ```text
//!   quinwave-filterbank v1
//!   source_image <name>
//!   config <free-form echo of the training configuration>
//!   final_psnr <decibels, scientific notation>
//!   iterations <count>
//!   filter h0 rows R cols C anchor AR AC
//!   <R lines of C space-separated coefficients>
//!   ... (h1, f0, f1 blocks in that order)
//! ```

use crate::error::{Error, Result};
use crate::filterbank::{Filter2D, FilterBank};
use std::io::Write;
use std::path::Path;

const FORMAT_LINE: &str = "quinwave-filterbank v1";
const FILTER_ORDER: [&str; 4] = ["h0", "h1", "f0", "f1"];

/// Provenance recorded alongside the coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct BankMetadata {
    /// Name (not path) of the image the bank was trained against.
    pub source_image: String,
    /// Human-readable echo of the training configuration.
    pub config_echo: String,
    /// Reconstruction PSNR at the end of training, in dB.
    pub final_psnr: f64,
    /// Training iterations performed.
    pub iterations: usize,
}

impl BankMetadata {
    /// Placeholder metadata for banks that did not come out of training.
    pub fn untrained(source: &str) -> Self {
        BankMetadata {
            source_image: source.to_string(),
            config_echo: "none".to_string(),
            final_psnr: f64::INFINITY,
            iterations: 0,
        }
    }
}

pub(crate) fn bank_to_string(bank: &FilterBank, meta: &BankMetadata) -> String {
    let mut s = String::new();
    s.push_str(FORMAT_LINE);
    s.push('\n');
    s.push_str(&format!("source_image {}\n", meta.source_image));
    s.push_str(&format!("config {}\n", meta.config_echo));
    s.push_str(&format!("final_psnr {:.16e}\n", meta.final_psnr));
    s.push_str(&format!("iterations {}\n", meta.iterations));
    for (name, filter) in bank.named_filters() {
        s.push_str(&format!(
            "filter {} rows {} cols {} anchor {} {}\n",
            name,
            filter.rows(),
            filter.cols(),
            filter.anchor().0,
            filter.anchor().1
        ));
        for r in 0..filter.rows() {
            let row: Vec<String> = (0..filter.cols())
                .map(|c| format!("{:.16e}", filter.tap(r, c)))
                .collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
    }
    s
}

fn bad(line: usize, reason: impl Into<String>) -> Error {
    Error::BankFileFormat {
        line,
        reason: reason.into(),
    }
}

pub(crate) fn bank_from_str(text: &str) -> Result<(FilterBank, BankMetadata)> {
    let mut lines = text.lines().enumerate();
    let mut next_line = |expect: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((i, l)) => Ok((i + 1, l.to_string())),
            None => Err(bad(0, format!("file ended early, expected {expect}"))),
        }
    };

    let (_, first) = next_line("format line")?;
    if first.trim() != FORMAT_LINE {
        return Err(Error::BankFileVersion { found: first });
    }

    let mut meta_field = |key: &str| -> Result<(usize, String)> {
        let (n, l) = next_line(key)?;
        match l.split_once(' ') {
            Some((k, v)) if k == key => Ok((n, v.trim().to_string())),
            _ => Err(bad(n, format!("expected `{key} <value>`"))),
        }
    };
    let (_, source_image) = meta_field("source_image")?;
    let (_, config_echo) = meta_field("config")?;
    let (pn, psnr_text) = meta_field("final_psnr")?;
    let final_psnr: f64 = psnr_text
        .parse()
        .map_err(|_| bad(pn, format!("unparseable final_psnr `{psnr_text}`")))?;
    let (itn, iter_text) = meta_field("iterations")?;
    let iterations: usize = iter_text
        .parse()
        .map_err(|_| bad(itn, format!("unparseable iterations `{iter_text}`")))?;

    let mut filters = Vec::with_capacity(4);
    for expect_name in FILTER_ORDER {
        let (hn, header) = next_line("filter header")?;
        let t: Vec<&str> = header.split_whitespace().collect();
        if t.len() != 9 || t[0] != "filter" || t[2] != "rows" || t[4] != "cols" || t[6] != "anchor"
        {
            return Err(bad(
                hn,
                "expected `filter <name> rows <r> cols <c> anchor <ar> <ac>`",
            ));
        }
        if t[1] != expect_name {
            return Err(bad(
                hn,
                format!("expected filter `{expect_name}`, found `{}`", t[1]),
            ));
        }
        let parse_num = |s: &str, what: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| bad(hn, format!("unparseable {what} `{s}`")))
        };
        let rows = parse_num(t[3], "rows")?;
        let cols = parse_num(t[5], "cols")?;
        let ar = parse_num(t[7], "anchor row")?;
        let ac = parse_num(t[8], "anchor col")?;
        let mut taps = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (rn, row) = next_line("coefficient row")?;
            let mut count = 0usize;
            for field in row.split_whitespace() {
                let v: f64 = field
                    .parse()
                    .map_err(|_| bad(rn, format!("unparseable coefficient `{field}`")))?;
                taps.push(v);
                count += 1;
            }
            if count != cols {
                return Err(bad(
                    rn,
                    format!("expected {cols} coefficients in row, found {count}"),
                ));
            }
        }
        filters.push(Filter2D::new(rows, cols, taps, (ar, ac))?);
    }
    for (i, l) in lines {
        if !l.trim().is_empty() {
            return Err(bad(i + 1, "unexpected content after last filter block"));
        }
    }
    let f1 = filters.pop().unwrap();
    let f0 = filters.pop().unwrap();
    let h1 = filters.pop().unwrap();
    let h0 = filters.pop().unwrap();
    let bank = FilterBank::new(h0, h1, f0, f1)?;
    Ok((
        bank,
        BankMetadata {
            source_image,
            config_echo,
            final_psnr,
            iterations,
        },
    ))
}

/// Write the bank and its provenance to a versioned text file.
pub fn export_filters<P: AsRef<Path>>(
    bank: &FilterBank,
    meta: &BankMetadata,
    path: P,
) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(bank_to_string(bank, meta).as_bytes())?;
    Ok(())
}

/// Load a bank written by [`export_filters`]. Coefficients are bit-exact.
pub fn load_filters<P: AsRef<Path>>(path: P) -> Result<(FilterBank, BankMetadata)> {
    let text = std::fs::read_to_string(path)?;
    bank_from_str(&text)
}
