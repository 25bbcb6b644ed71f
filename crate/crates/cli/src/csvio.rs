//! Numeric matrices as delimited text.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use hdsign::SampleMatrix;

use crate::error::{CliError, Result};

/// Reads an `n x p` matrix, one observation per record. Rows and columns in
/// diagnostics are 1-based and count the header line when present.
pub fn read_matrix_from<R: Read>(reader: R, header: bool, delimiter: u8) -> Result<SampleMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(header)
        .delimiter(delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut data = Vec::new();
    let mut p = None;
    let mut n = 0;
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 1 + usize::from(header);
        if record.iter().all(str::is_empty) {
            continue;
        }
        match p {
            None => p = Some(record.len()),
            Some(p) if p != record.len() => {
                return Err(CliError::Row {
                    row,
                    reason: format!("has {} columns, expected {p}", record.len()),
                })
            }
            _ => {}
        }
        for (j, field) in record.iter().enumerate() {
            let cell = |reason: String| CliError::Cell {
                row,
                col: j + 1,
                reason,
            };
            let v: f64 = field
                .parse()
                .map_err(|_| cell(format!("cannot parse {field:?} as a number")))?;
            if !v.is_finite() {
                return Err(cell(format!("value {field:?} is not finite")));
            }
            data.push(v);
        }
        n += 1;
    }
    let p = p.ok_or(CliError::Empty)?;
    Ok(SampleMatrix::new(data, n, p)?)
}

/// Reads a file, choosing tab-separated parsing for `.tsv` paths.
pub fn read_matrix(path: &Path, header: bool) -> Result<SampleMatrix> {
    let file = File::open(path).map_err(|source| CliError::Open {
        path: path.to_path_buf(),
        source,
    })?;
    let delimiter = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("tsv") => b'\t',
        _ => b',',
    };
    read_matrix_from(file, header, delimiter)
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn full_precision(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_matrix<W: Write>(writer: W, x: &SampleMatrix, delimiter: u8) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().delimiter(delimiter).from_writer(writer);
    for row in x.rows() {
        wtr.write_record(row.iter().map(|v| full_precision(*v)))?;
    }
    wtr.flush()?;
    Ok(())
}
