use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numfmt::sci;
use crate::solver::LocalizationRecord;

pub const CSV_HEADER: [&str; 11] = [
    "bc",
    "L",
    "t",
    "x",
    "p",
    "error",
    "std_error",
    "bound_aL",
    "exact_variance",
    "n_effective",
    "seed",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// Format implied by the file extension.
    pub fn from_path(path: &Path) -> Result<Self> {
        path.extension()
            .and_then(|e| e.to_str())
            .unwrap_or("")
            .parse()
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Config(format!("unknown output format '{other}'"))),
        }
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    }
}

/// Writes records as CSV or JSON with 17 significant digits per float.
pub fn emit_records(records: &[LocalizationRecord], path: &Path, format: Format) -> Result<()> {
    match format {
        Format::Json => write_json(&records, path),
        Format::Csv => {
            let file = File::create(path).map_err(io_err(path))?;
            let mut w = csv::Writer::from_writer(BufWriter::new(file));
            w.write_record(CSV_HEADER).map_err(|e| csv_err(path, e))?;
            for r in records {
                let row = [
                    r.bc.name().to_string(),
                    sci(r.l),
                    sci(r.t),
                    sci(r.x),
                    sci(r.p),
                    sci(r.error),
                    sci(r.std_error),
                    sci(r.bound_al),
                    r.exact_variance.map(sci).unwrap_or_default(),
                    r.n_effective.to_string(),
                    r.seed.to_string(),
                ];
                w.write_record(&row).map_err(|e| csv_err(path, e))?;
            }
            w.flush().map_err(io_err(path))
        }
    }
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| io_err(path)(std::io::Error::other(e)))?;
    writeln!(w).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

fn field<T: FromStr>(rec: &csv::StringRecord, i: usize, path: &Path) -> Result<T> {
    let raw = rec.get(i).unwrap_or("");
    raw.parse().map_err(|_| Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("cannot parse column {} value '{raw}'", CSV_HEADER[i]),
        ),
    })
}

/// Reads records written by [`emit_records`].
pub fn read_records(path: &Path, format: Format) -> Result<Vec<LocalizationRecord>> {
    match format {
        Format::Json => {
            let file = File::open(path).map_err(io_err(path))?;
            serde_json::from_reader(std::io::BufReader::new(file))
                .map_err(|e| io_err(path)(std::io::Error::other(e)))
        }
        Format::Csv => {
            let mut rd = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
            let header = rd.headers().map_err(|e| csv_err(path, e))?.clone();
            if header.iter().ne(CSV_HEADER) {
                return Err(Error::Io {
                    path: path.to_path_buf(),
                    source: std::io::Error::new(
                        std::io::ErrorKind::InvalidData,
                        "unexpected CSV header",
                    ),
                });
            }
            let mut out = Vec::new();
            for row in rd.records() {
                let row = row.map_err(|e| csv_err(path, e))?;
                let exact = row.get(8).unwrap_or("");
                out.push(LocalizationRecord {
                    bc: field(&row, 0, path)?,
                    l: field(&row, 1, path)?,
                    t: field(&row, 2, path)?,
                    x: field(&row, 3, path)?,
                    p: field(&row, 4, path)?,
                    error: field(&row, 5, path)?,
                    std_error: field(&row, 6, path)?,
                    bound_al: field(&row, 7, path)?,
                    exact_variance: if exact.is_empty() {
                        None
                    } else {
                        Some(field(&row, 8, path)?)
                    },
                    n_effective: field(&row, 9, path)?,
                    seed: field(&row, 10, path)?,
                });
            }
            Ok(out)
        }
    }
}
