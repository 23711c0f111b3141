//! Wide-format CSV ingestion and fixed-point output.
//!
//! A sample file has one header row and one row per curve. Header cells are
//! either numeric grid points (`0,0.0213,...`) or labels such as `t_1..t_J`;
//! in the latter case the grid comes from a separate file or defaults to the
//! closed uniform grid.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{invalid, PfpError, Result};
use crate::funkdata::{DiscreteSample, Grid};
use crate::scalar::Scalar;

/// Raw contents of a wide CSV file.
#[derive(Debug, Clone)]
pub struct WideTable<T: Scalar> {
    pub header: Vec<String>,
    /// Grid read from the header, when every header cell is a number.
    pub header_grid: Option<Vec<T>>,
    pub values: DMatrix<T>,
}

impl<T: Scalar> WideTable<T> {
    /// Combines the table with an explicit grid, the header grid, or the
    /// uniform grid, in that order of preference.
    pub fn into_sample(self, grid: Option<Grid<T>>) -> Result<DiscreteSample<T>> {
        let j = self.values.ncols();
        let grid = match (grid, self.header_grid) {
            (Some(g), _) => g,
            (None, Some(points)) => Grid::from_points(points)?,
            (None, None) => Grid::uniform(j)?,
        };
        DiscreteSample::new(grid, self.values)
    }
}

fn parse_cell<T: Scalar>(cell: &str, row: usize, col: usize) -> Result<T> {
    let v: f64 = cell
        .trim()
        .parse()
        .map_err(|_| PfpError::Parse(format!("row {row}, column {col}: `{cell}` is not a number")))?;
    if !v.is_finite() {
        return Err(PfpError::Parse(format!("row {row}, column {col}: non-finite value")));
    }
    Ok(T::lit(v))
}

pub fn read_wide<T: Scalar, R: Read>(reader: R) -> Result<WideTable<T>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.len() < 2 {
        return Err(invalid!("a sample needs at least 2 columns, got {}", header.len()));
    }
    let header_grid = header
        .iter()
        .map(|h| h.parse::<f64>().ok().filter(|v| v.is_finite()).map(T::lit))
        .collect::<Option<Vec<T>>>();
    let mut data = Vec::new();
    let mut n = 0;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(PfpError::Parse(format!(
                "row {} has {} fields, header has {}",
                i + 1,
                rec.len(),
                header.len()
            )));
        }
        for (j, cell) in rec.iter().enumerate() {
            data.push(parse_cell(cell, i + 1, j + 1)?);
        }
        n += 1;
    }
    if n == 0 {
        return Err(invalid!("the file holds no curves"));
    }
    let values = DMatrix::from_row_slice(n, header.len(), &data);
    Ok(WideTable { header, header_grid, values })
}

pub fn read_wide_path<T: Scalar>(path: &Path) -> Result<WideTable<T>> {
    read_wide(std::fs::File::open(path)?)
}

/// Reads grid points separated by commas, whitespace or newlines.
pub fn parse_grid<T: Scalar>(text: &str) -> Result<Grid<T>> {
    let points = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .enumerate()
        .map(|(i, s)| parse_cell(s, 1, i + 1))
        .collect::<Result<Vec<T>>>()?;
    Grid::from_points(points)
}

pub fn read_grid_path<T: Scalar>(path: &Path) -> Result<Grid<T>> {
    parse_grid(&std::fs::read_to_string(path)?)
}

/// Loads a sample from `path`, using `grid_path` when given.
pub fn load_sample<T: Scalar>(path: &Path, grid_path: Option<&Path>) -> Result<DiscreteSample<T>> {
    let table = read_wide_path(path)?;
    let grid = grid_path.map(read_grid_path).transpose()?;
    table.into_sample(grid)
}

/// Six-decimal fixed point, with negative zero printed as zero.
pub fn format_fixed(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

/// Default header `t_1,...,t_J`.
pub fn default_header(j: usize) -> Vec<String> {
    (1..=j).map(|i| format!("t_{i}")).collect()
}

/// Writes rows of values under `header` in six-decimal fixed point.
pub fn write_wide<T: Scalar, W: Write>(mut out: W, header: &[String], rows: &DMatrix<T>) -> Result<()> {
    if rows.ncols() != header.len() && rows.nrows() > 0 {
        return Err(invalid!("{} header cells for {} columns", header.len(), rows.ncols()));
    }
    writeln!(out, "{}", header.join(","))?;
    for r in 0..rows.nrows() {
        let cells: Vec<String> = rows.row(r).iter().map(|v| format_fixed(v.as_f64())).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn write_sample<T: Scalar, W: Write>(out: W, sample: &DiscreteSample<T>) -> Result<()> {
    write_wide(out, &default_header(sample.grid().len()), sample.values())
}
