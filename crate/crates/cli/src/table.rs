//! Tabular output in csv, tsv, or padded text.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::csvio::full_precision;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    Csv,
    Tsv,
    #[default]
    Table,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "tsv" => Ok(Self::Tsv),
            "table" | "text" => Ok(Self::Table),
            other => Err(format!("unknown output format {other:?} (expected csv, tsv or table)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Csv => "csv",
            Self::Tsv => "tsv",
            Self::Table => "table",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(i64),
    /// Printed with `decimals` places in table mode.
    Fixed(f64, usize),
    /// Printed in scientific notation with `digits` significant digits in
    /// table mode.
    Sci(f64, usize),
}

impl Cell {
    fn machine(&self) -> String {
        match self {
            Self::Text(s) => s.clone(),
            Self::Int(v) => v.to_string(),
            Self::Fixed(v, _) | Self::Sci(v, _) => full_precision(*v),
        }
    }

    fn human(&self) -> String {
        match self {
            Self::Text(s) => s.clone(),
            Self::Int(v) => v.to_string(),
            Self::Fixed(v, d) => format!("{v:.d$}", d = *d),
            Self::Sci(v, d) => format!("{v:.d$e}", d = d.saturating_sub(1)),
        }
    }

    fn numeric(&self) -> bool {
        !matches!(self, Self::Text(_))
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Self::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Self::Text(s)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Self::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Self::Text(v.to_string())
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Self {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, out: &mut W, format: Format) -> Result<()> {
        match format {
            Format::Csv => self.write_delimited(out, b','),
            Format::Tsv => self.write_delimited(out, b'\t'),
            Format::Table => self.write_padded(out),
        }
    }

    fn write_delimited<W: Write>(&self, out: &mut W, delimiter: u8) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new().delimiter(delimiter).from_writer(out);
        wtr.write_record(&self.headers)?;
        for row in &self.rows {
            wtr.write_record(row.iter().map(Cell::machine))?;
        }
        wtr.flush()?;
        Ok(())
    }

    fn write_padded<W: Write>(&self, out: &mut W) -> Result<()> {
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Cell::human).collect()).collect();
        let widths: Vec<usize> = (0..self.headers.len())
            .map(|c| {
                cells
                    .iter()
                    .map(|r| r[c].chars().count())
                    .chain(std::iter::once(self.headers[c].chars().count()))
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        // numbers right-aligned, text left-aligned; header follows its column
        let right: Vec<bool> = (0..self.headers.len())
            .map(|c| self.rows.first().is_some_and(|r| r[c].numeric()))
            .collect();
        let line = |fields: &[String]| {
            fields
                .iter()
                .enumerate()
                .map(|(c, f)| {
                    if right[c] {
                        format!("{f:>w$}", w = widths[c])
                    } else {
                        format!("{f:<w$}", w = widths[c])
                    }
                })
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        writeln!(out, "{}", line(&self.headers))?;
        for row in &cells {
            writeln!(out, "{}", line(row))?;
        }
        Ok(())
    }
}
