//! Dense matrix CSV (row-major, no header), eigenvalue CSV `index,lambda`,
//! and per-trial experiment records.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HermitianMatrix;
use crate::error::{Error, Result};

pub fn write_matrix<W: Write>(a: &HermitianMatrix, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    let m = a.matrix();
    for i in 0..m.nrows() {
        w.write_record(m.row(i).iter().map(|x| format!("{x:e}")))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix<R: Read>(reader: R) -> Result<HermitianMatrix> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {}: `{f}`: {e}", line + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("empty matrix file".into()));
    }
    HermitianMatrix::from_rows(&rows)
}

pub fn read_matrix_file(path: impl AsRef<Path>) -> Result<HermitianMatrix> {
    read_matrix(std::fs::File::open(path)?)
}

pub fn write_eigenvalues<W: Write>(a: &HermitianMatrix, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["index", "lambda"])?;
    for (i, x) in a.eigenvalues().iter().enumerate() {
        w.write_record([i.to_string(), format!("{x:e}")])?;
    }
    w.flush()?;
    Ok(())
}

/// One measured quantity of one seeded trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub seed: u64,
    #[serde(rename = "N")]
    pub n: usize,
    pub quantity: String,
    pub value: f64,
}
