//! Delimited text tables: counts, covariates and square result matrices.

use crate::data::CountDataset;
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use std::fmt::Write as _;
use std::path::Path;

const MAX_OFFENDERS: usize = 10;

/// Tab or comma; chosen from the header line when not given.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Delimiter {
    Tab,
    Comma,
}

impl Delimiter {
    fn as_char(self) -> char {
        match self {
            Delimiter::Tab => '\t',
            Delimiter::Comma => ',',
        }
    }

    fn sniff(header: &str) -> Self {
        if header.contains('\t') {
            Delimiter::Tab
        } else {
            Delimiter::Comma
        }
    }
}

struct RawTable {
    columns: Vec<String>,
    row_ids: Vec<String>,
    cells: Vec<Vec<String>>,
}

fn split_table(text: &str, delim: Option<Delimiter>) -> Result<RawTable> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse { message: "empty table".into(), offenders: vec![] })?;
    let d = delim.unwrap_or_else(|| Delimiter::sniff(header)).as_char();
    let columns: Vec<String> = header.split(d).skip(1).map(|s| s.trim().to_string()).collect();
    let mut row_ids = Vec::new();
    let mut cells = Vec::new();
    let mut bad = Vec::new();
    for (r, line) in lines.enumerate() {
        let mut parts = line.split(d).map(str::trim);
        row_ids.push(parts.next().unwrap_or("").to_string());
        let row: Vec<String> = parts.map(str::to_string).collect();
        if row.len() != columns.len() {
            bad.push(format!("row {}: {} cells, header has {}", r + 1, row.len(), columns.len()));
        }
        cells.push(row);
    }
    if !bad.is_empty() {
        bad.truncate(MAX_OFFENDERS);
        return Err(Error::Parse { message: "ragged table".into(), offenders: bad });
    }
    Ok(RawTable { columns, row_ids, cells })
}

/// Counts with column names in the header and row ids in the first column.
pub fn parse_count_table(text: &str, delim: Option<Delimiter>) -> Result<CountDataset> {
    let raw = split_table(text, delim)?;
    let (n, p) = (raw.row_ids.len(), raw.columns.len());
    let mut counts = vec![0u64; n * p];
    let mut bad = Vec::new();
    for (i, row) in raw.cells.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            match cell.parse::<u64>() {
                Ok(v) => counts[j * n + i] = v,
                Err(_) => {
                    if bad.len() < MAX_OFFENDERS {
                        bad.push(format!("row {}, column {}: '{cell}'", i + 1, raw.columns[j]));
                    }
                }
            }
        }
    }
    if !bad.is_empty() {
        return Err(Error::Parse { message: "cells must be nonnegative integers".into(), offenders: bad });
    }
    CountDataset::from_columns(n, p, counts)?
        .with_names(raw.columns, raw.row_ids)
        .map_err(|e| Error::Parse { message: e.to_string(), offenders: vec![] })
}

pub fn read_count_table(path: &Path, delim: Option<Delimiter>) -> Result<CountDataset> {
    parse_count_table(&std::fs::read_to_string(path)?, delim)
}

pub fn format_count_table(ds: &CountDataset) -> String {
    let mut s = String::from("id");
    for c in ds.column_names() {
        s.push('\t');
        s.push_str(c);
    }
    s.push('\n');
    for (i, id) in ds.row_ids().iter().enumerate() {
        s.push_str(id);
        for j in 0..ds.ncols() {
            let _ = write!(s, "\t{}", ds.get(i, j));
        }
        s.push('\n');
    }
    s
}

pub fn write_count_table(path: &Path, ds: &CountDataset) -> Result<()> {
    std::fs::write(path, format_count_table(ds))?;
    Ok(())
}

/// Attach real-valued covariates whose rows are matched by id.
pub fn attach_covariates(ds: &mut CountDataset, text: &str, delim: Option<Delimiter>) -> Result<()> {
    let raw = split_table(text, delim)?;
    let mut bad = Vec::new();
    let mut values = vec![vec![0.0; ds.nrows()]; raw.columns.len()];
    for (i, id) in ds.row_ids().iter().enumerate() {
        let Some(r) = raw.row_ids.iter().position(|x| x == id) else {
            bad.push(format!("row id '{id}' missing from the covariate table"));
            continue;
        };
        for (c, cell) in raw.cells[r].iter().enumerate() {
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => values[c][i] = v,
                _ => bad.push(format!("row {id}, column {}: '{cell}'", raw.columns[c])),
            }
        }
    }
    if !bad.is_empty() {
        bad.truncate(MAX_OFFENDERS);
        return Err(Error::Parse { message: "bad covariate table".into(), offenders: bad });
    }
    for (name, v) in raw.columns.iter().zip(&values) {
        ds.push_covariate(name, v)?;
    }
    Ok(())
}

/// Square matrix with a header row and a name column, six decimals.
pub fn format_matrix(names: &[String], m: &DMatrix<f64>) -> String {
    let mut s = String::from("node");
    for n in names {
        s.push('\t');
        s.push_str(n);
    }
    s.push('\n');
    for (i, n) in names.iter().enumerate() {
        s.push_str(n);
        for j in 0..m.ncols() {
            let _ = write!(s, "\t{:.6}", m[(i, j)]);
        }
        s.push('\n');
    }
    s
}

pub fn parse_matrix(text: &str) -> Result<(Vec<String>, DMatrix<f64>)> {
    let raw = split_table(text, Some(Delimiter::Tab))?;
    let p = raw.columns.len();
    if raw.row_ids.len() != p {
        return Err(Error::Parse { message: "matrix is not square".into(), offenders: vec![] });
    }
    let mut m = DMatrix::zeros(p, p);
    for (i, row) in raw.cells.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            m[(i, j)] = cell.parse().map_err(|_| Error::Parse {
                message: "non-numeric matrix cell".into(),
                offenders: vec![format!("row {}, column {}: '{cell}'", i + 1, j + 1)],
            })?;
        }
    }
    Ok((raw.columns, m))
}
