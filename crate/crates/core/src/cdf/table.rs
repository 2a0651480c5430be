//! CSV import and export: CDF tables with header `x,F` and sample files
//! (one value per line, or CSV with a `value` column).

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::{Cdf, SteppedCdf};
use crate::error::{Error, Result};

pub fn write_table<W: Write>(cdf: &Cdf, grid: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "F"])?;
    for &x in grid {
        w.write_record([x.to_string(), cdf.cdf(x).to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_table_file(cdf: &Cdf, grid: &[f64], path: impl AsRef<Path>) -> Result<()> {
    write_table(cdf, grid, File::create(path)?)
}

/// Reads an `x,F` table as a piecewise-linear CDF, completing it at either
/// end when it does not reach 0 or 1.
pub fn read_table<R: Read>(input: R) -> Result<Cdf> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = r.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse(format!("missing `{name}` column in CDF table")))
    };
    let (ix, iv) = (col("x")?, col("F")?);
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64> {
            let s = rec.get(i).unwrap_or("");
            s.parse()
                .map_err(|_| Error::Parse(format!("row {}: `{s}` is not a number", line + 2)))
        };
        xs.push(parse(ix)?);
        vs.push(parse(iv)?);
    }
    Ok(Cdf::new(SteppedCdf::tabulated(xs, vs)?))
}

pub fn read_table_file(path: impl AsRef<Path>) -> Result<Cdf> {
    read_table(File::open(path)?)
}

pub fn read_samples<R: Read>(input: R) -> Result<Vec<f64>> {
    let mut lines = Vec::new();
    for line in BufReader::new(input).lines() {
        let line = line?;
        if !line.trim().is_empty() {
            lines.push(line);
        }
    }
    let Some(first) = lines.first() else {
        return Err(Error::Parse("sample file is empty".into()));
    };
    if first.trim().parse::<f64>().is_ok() {
        return lines
            .iter()
            .enumerate()
            .map(|(i, l)| {
                l.trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("line {}: `{}` is not a number", i + 1, l)))
            })
            .collect();
    }
    let joined = lines.join("\n");
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(joined.as_bytes());
    let col = r
        .headers()?
        .iter()
        .position(|h| h == "value")
        .ok_or_else(|| Error::Parse("sample CSV has no `value` column".into()))?;
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let s = rec.get(col).unwrap_or("");
        out.push(
            s.parse()
                .map_err(|_| Error::Parse(format!("row {}: `{s}` is not a number", i + 2)))?,
        );
    }
    Ok(out)
}

pub fn read_samples_file(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    read_samples(File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdf::empirical_cdf;

    #[test]
    fn delta_table() {
        let d = empirical_cdf(&[0.0]).unwrap();
        let mut buf = Vec::new();
        write_table(&d, &[-1.0, 0.0, 1.0], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x,F\n-1,0\n0,1\n1,1\n");
    }

    #[test]
    fn table_round_trip() {
        let text = "x,F\n0,0\n0.5,0.5\n1,1\n";
        let f = read_table(text.as_bytes()).unwrap();
        assert_eq!(f.cdf(0.25), 0.25);
        assert!(read_table("x,G\n0,0\n".as_bytes()).is_err());
        assert!(read_table("x,F\n0,0.7\n1,0.2\n".as_bytes()).is_err());
    }

    #[test]
    fn sample_formats() {
        assert_eq!(read_samples("1\n2.5\n\n-3\n".as_bytes()).unwrap(), vec![1.0, 2.5, -3.0]);
        let csv = "id,value\na,1.5\nb,2\n";
        assert_eq!(read_samples(csv.as_bytes()).unwrap(), vec![1.5, 2.0]);
        assert!(read_samples("id\n1\n".as_bytes()).is_err());
        assert!(read_samples("".as_bytes()).is_err());
    }
}
