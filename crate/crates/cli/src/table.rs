//! Numeric CSV files: comma-separated, one header row, '.' decimal point.

use std::io::{Read, Write};
use std::path::Path;

use rvine_core::CopulaSample;

use crate::error::{CliError, CliResult};

/// A numeric table with named columns, stored by rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn n_cols(&self) -> usize {
        self.header.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn from_columns(header: Vec<String>, cols: &[Vec<f64>]) -> Self {
        let n = cols.first().map_or(0, Vec::len);
        let rows = (0..n)
            .map(|i| cols.iter().map(|c| c[i]).collect())
            .collect();
        Table { header, rows }
    }

    pub fn from_sample(sample: &CopulaSample) -> Self {
        let header = (1..=sample.dim()).map(|j| format!("u{j}")).collect();
        let rows = sample.rows().map(<[f64]>::to_vec).collect();
        Table { header, rows }
    }

    /// The table as copula-scale observations; column `j` becomes label `j + 1`.
    pub fn to_sample(&self) -> CliResult<CopulaSample> {
        if self.rows.is_empty() {
            return Err(CliError::invalid("the data file has no rows"));
        }
        CopulaSample::from_rows(&self.rows)
            .map_err(|e| CliError::invalid(format!("data is not on the copula scale: {e}")))
    }
}

pub fn read_table(reader: impl Read) -> CliResult<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::invalid(format!("cannot read CSV header: {e}")))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(CliError::invalid("the CSV header is empty"));
    }
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        // line 1 is the header
        let line = i + 2;
        let record = record.map_err(|e| CliError::invalid(format!("line {line}: {e}")))?;
        let row = record
            .iter()
            .zip(&header)
            .map(|(cell, name)| {
                let x: f64 = cell.trim().parse().map_err(|_| {
                    CliError::invalid(format!(
                        "line {line}, column '{name}': '{cell}' is not a number"
                    ))
                })?;
                if x.is_finite() {
                    Ok(x)
                } else {
                    Err(CliError::invalid(format!(
                        "line {line}, column '{name}': value is not finite"
                    )))
                }
            })
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}

pub fn read_table_file(path: &Path) -> CliResult<Table> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::invalid(format!("cannot open {}: {e}", path.display())))?;
    read_table(file).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

/// Writes values with the shortest representation that parses back exactly.
pub fn write_table(table: &Table, writer: impl Write) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| CliError::invalid(format!("cannot write CSV: {e}"));
    w.write_record(&table.header).map_err(io)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|x| x.to_string()))
            .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
