//! Text output shared by the simulators and the command-line tool.
//!
//! CSV files are comma separated with a header row and LF endings; every
//! real number is written with 12 significant digits.

use std::io::{BufRead, Write};

use crate::{Error, Result};

/// 12 significant digits in scientific notation.
pub fn format_number(x: f64) -> String {
    format!("{x:.11e}")
}

/// A CSV cell: counters are written as integers, everything else through [`format_number`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(u64),
    Real(f64),
}

impl Cell {
    fn render(self) -> String {
        match self {
            Cell::Int(n) => n.to_string(),
            Cell::Real(x) => format_number(x),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

/// Writes a header and rows of cells.
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: impl IntoIterator<Item = Vec<Cell>>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::InvalidParameter(format!(
                "row has {} cells, header has {}",
                row.len(),
                header.len()
            )));
        }
        w.write_record(row.into_iter().map(Cell::render)).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `key,value` pairs under a `key,value` header.
pub fn write_key_values<W: Write>(out: W, pairs: &[(&str, String)]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["key", "value"]).map_err(csv_error)?;
    for (k, v) in pairs {
        w.write_record([*k, v.as_str()]).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Parsed numeric CSV: header plus rows of reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

/// Reads a CSV whose cells are all numeric.
pub fn read_csv<R: std::io::Read>(input: R) -> Result<Table> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_error)?.iter().map(str::to_string).collect::<Vec<_>>();
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        let row = rec
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("row {}: {s:?}: {e}", i + 2))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}

fn csv_error(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

/// Uniform axis as written in a grid file header.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if count < 2 || !(max > min) || !min.is_finite() || !max.is_finite() {
            return Err(Error::InvalidParameter(format!("bad axis [{min}, {max}] with {count} points")));
        }
        Ok(Self { min, max, count })
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }

    pub fn value(&self, i: usize) -> f64 {
        self.min + i as f64 * self.step()
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }
}

/// Grid file: `x min max count`, `p min max count`, then one line per p
/// value (ascending) holding the x-ordered values.
pub fn write_grid<W: Write>(mut out: W, x: Axis, p: Axis, rows: &[Vec<f64>]) -> Result<()> {
    if rows.len() != p.count || rows.iter().any(|r| r.len() != x.count) {
        return Err(Error::InvalidParameter("grid shape does not match its axes".into()));
    }
    writeln!(out, "x {} {} {}", format_number(x.min), format_number(x.max), x.count)?;
    writeln!(out, "p {} {} {}", format_number(p.min), format_number(p.max), p.count)?;
    for row in rows {
        let line = row.iter().map(|v| format_number(*v)).collect::<Vec<_>>().join(" ");
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn read_grid<R: BufRead>(input: R) -> Result<(Axis, Axis, Vec<Vec<f64>>)> {
    let mut lines = input.lines().enumerate();
    let mut axis = |label: &str| -> Result<Axis> {
        let (i, line) = lines.next().ok_or_else(|| Error::Parse(format!("missing {label} axis line")))?;
        let line = line?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 4 || parts[0] != label {
            return Err(Error::Parse(format!("line {}: expected '{label} <min> <max> <count>'", i + 1)));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)));
        let count = parts[3].parse::<usize>().map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
        Axis::new(num(parts[1])?, num(parts[2])?, count)
    };
    let x = axis("x")?;
    let p = axis("p")?;
    let mut rows = Vec::with_capacity(p.count);
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|s| s.parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", i + 1))))
            .collect::<Result<Vec<_>>>()?;
        if row.len() != x.count {
            return Err(Error::Parse(format!("line {}: expected {} values, found {}", i + 1, x.count, row.len())));
        }
        rows.push(row);
    }
    if rows.len() != p.count {
        return Err(Error::Parse(format!("expected {} rows, found {}", p.count, rows.len())));
    }
    Ok((x, p, rows))
}
