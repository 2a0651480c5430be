//! Batch driver for the `freemax` library. Every subcommand builds a
//! [`ReportDocument`] whose payload depends only on the parsed arguments
//! and the bytes of the input files, so reruns are byte-identical.

pub mod args;
mod commands;

use std::fmt;
use std::io::Write;
use std::path::Path;

use clap::Parser;
use serde::Serialize;
use sha2::{Digest, Sha256};

use freemax::cdf::table::write_table_file;
use freemax::Cdf;

use args::{Cli, Format};

/// Machine-readable failure classes; each maps to its own exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    Usage,
    UnreadableInput,
    InvalidArgument,
    MalformedInput,
    MissingSeed,
    Numerical,
    OutputFailed,
}

impl ErrorCode {
    pub fn exit_status(self) -> i32 {
        match self {
            ErrorCode::Usage => 2,
            ErrorCode::UnreadableInput => 3,
            ErrorCode::InvalidArgument => 4,
            ErrorCode::MalformedInput => 5,
            ErrorCode::MissingSeed => 6,
            ErrorCode::Numerical => 7,
            ErrorCode::OutputFailed => 8,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CliError {
    pub code: ErrorCode,
    pub exit_status: i32,
    pub message: String,
}

impl CliError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        CliError {
            code,
            exit_status: code.exit_status(),
            message: message.into(),
        }
    }

    pub(crate) fn usage(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::Usage, message)
    }

    pub(crate) fn missing_seed(what: &str) -> Self {
        Self::new(ErrorCode::MissingSeed, format!("{what} is stochastic and needs --seed"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.code, self.message)
    }
}

impl From<freemax::Error> for CliError {
    fn from(e: freemax::Error) -> Self {
        use freemax::Error as E;
        let code = match &e {
            E::InvalidArgument { .. }
            | E::NotACdf(_)
            | E::DimensionMismatch { .. }
            | E::EmptyConditioning { .. }
            | E::Degenerate(_) => ErrorCode::InvalidArgument,
            E::NotHermitian(_) | E::Parse(_) | E::Csv(_) | E::Json(_) => ErrorCode::MalformedInput,
            E::Io(_) => ErrorCode::UnreadableInput,
            E::Numerical(_) => ErrorCode::Numerical,
        };
        CliError::new(code, e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Serialize)]
pub struct Metadata {
    pub tool_version: &'static str,
    pub command: String,
    pub seed: Option<u64>,
    /// SHA-256 of the canonical argument JSON followed by every input
    /// file's bytes, in reading order.
    pub inputs_hash: String,
}

#[derive(Debug, Serialize)]
pub struct ReportDocument {
    pub metadata: Metadata,
    pub payload: serde_json::Value,
}

/// A subcommand result: the JSON payload and its CSV rendering.
pub(crate) struct Payload {
    json: serde_json::Value,
    csv: Vec<u8>,
}

impl Payload {
    pub(crate) fn rows<T: Serialize>(rows: &[T]) -> CliResult<Self> {
        Ok(Payload {
            json: to_json(rows)?,
            csv: csv_rows(rows)?,
        })
    }

    pub(crate) fn new<T: Serialize + ?Sized>(json: &T, csv: Vec<u8>) -> CliResult<Self> {
        Ok(Payload {
            json: to_json(json)?,
            csv,
        })
    }
}

fn to_json<T: Serialize + ?Sized>(v: &T) -> CliResult<serde_json::Value> {
    serde_json::to_value(v).map_err(|e| CliError::new(ErrorCode::Numerical, e.to_string()))
}

pub(crate) fn csv_rows<T: Serialize>(rows: &[T]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)
            .map_err(|e| CliError::new(ErrorCode::OutputFailed, e.to_string()))?;
    }
    w.into_inner()
        .map_err(|e| CliError::new(ErrorCode::OutputFailed, e.to_string()))
}

/// Reads input files and folds everything that determines the payload
/// into the inputs hash.
pub(crate) struct Context {
    hasher: Sha256,
}

impl Context {
    fn new(cli: &Cli) -> CliResult<Self> {
        let mut hasher = Sha256::new();
        hasher.update(serde_json::to_vec(cli).map_err(|e| CliError::usage(e.to_string()))?);
        Ok(Context { hasher })
    }

    pub(crate) fn read(&mut self, path: &Path) -> CliResult<Vec<u8>> {
        let bytes = std::fs::read(path).map_err(|e| {
            CliError::new(ErrorCode::UnreadableInput, format!("{}: {e}", path.display()))
        })?;
        self.hasher.update((bytes.len() as u64).to_le_bytes());
        self.hasher.update(&bytes);
        Ok(bytes)
    }

    fn finish(self) -> String {
        self.hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Writes `F` at the grid points as a CSV table with header `x,F`.
pub fn emit_cdf_table(f: &Cdf, grid: &[f64], path: impl AsRef<Path>) -> freemax::Result<()> {
    write_table_file(f, grid, path)
}

/// Caps rayon's global pool at `FREEMAX_THREADS` when set.
fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("FREEMAX_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            CliError::new(
                ErrorCode::InvalidArgument,
                format!("FREEMAX_THREADS must be a positive integer, got `{v}`"),
            )
        })?;
    // Fails only if a pool already exists, in which case it is kept.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs one invocation and returns the serialized report.
pub fn execute(cli: &Cli) -> CliResult<Vec<u8>> {
    configure_threads()?;
    let mut ctx = Context::new(cli)?;
    let (command, seed, payload) = commands::dispatch(cli, &mut ctx)?;
    match cli.format {
        Format::Csv => Ok(payload.csv),
        Format::Json => {
            let doc = ReportDocument {
                metadata: Metadata {
                    tool_version: env!("CARGO_PKG_VERSION"),
                    command,
                    seed,
                    inputs_hash: ctx.finish(),
                },
                payload: payload.json,
            };
            let mut out = serde_json::to_vec_pretty(&doc)
                .map_err(|e| CliError::new(ErrorCode::OutputFailed, e.to_string()))?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

fn write_output(cli: &Cli, bytes: &[u8]) -> CliResult<()> {
    let res = match &cli.out {
        Some(path) => std::fs::write(path, bytes),
        None => std::io::stdout().write_all(bytes),
    };
    res.map_err(|e| CliError::new(ErrorCode::OutputFailed, e.to_string()))
}

fn report_error(e: &CliError) -> i32 {
    let body = serde_json::json!({ "error": e });
    eprintln!("{body}");
    e.exit_status
}

/// Parses `argv`, runs the subcommand and returns the exit status. Errors
/// are printed to stderr as `{"error": {code, exit_status, message}}`.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            return report_error(&CliError::usage(e.to_string().trim_end()));
        }
    };
    match execute(&cli).and_then(|bytes| write_output(&cli, &bytes)) {
        Ok(()) => 0,
        Err(e) => report_error(&e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use freemax::cdf::{empirical_cdf, table::read_table_file};
    use freemax::laws::{make_law, LawKind, LawSpec};

    #[test]
    fn delta_and_uniform_tables() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        emit_cdf_table(&empirical_cdf(&[0.0]).unwrap(), &[-1.0, 0.0, 1.0], &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "x,F\n-1,0\n0,1\n1,1\n");
        let u = make_law(&LawSpec::new(LawKind::Uniform)).unwrap();
        emit_cdf_table(&u, &[0.0, 0.5, 1.0], &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "x,F\n0,0\n0.5,0.5\n1,1\n");
    }

    #[test]
    fn exported_table_reimports_within_interpolation_bound() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pareto.csv");
        let f = make_law(&LawSpec::with_shape(LawKind::FreeTypeII, 2.0)).unwrap();
        let grid: Vec<f64> = (0..=400).map(|i| 1.0 + i as f64 * 0.05).collect();
        emit_cdf_table(&f, &grid, &path).unwrap();
        let g = read_table_file(&path).unwrap();
        for w in grid.windows(2) {
            // F is monotone, so linear interpolation is off by at most the
            // rise of F across the cell.
            let bound = f.cdf(w[1]) - f.cdf(w[0]);
            for t in [0.25, 0.5, 0.75] {
                let x = w[0] + t * (w[1] - w[0]);
                assert!((g.cdf(x) - f.cdf(x)).abs() <= bound + 1e-15);
            }
            assert!((g.cdf(w[0]) - f.cdf(w[0])).abs() <= 1e-15);
        }
    }

    #[test]
    fn exit_statuses_are_distinct() {
        use ErrorCode::*;
        let codes = [
            Usage,
            UnreadableInput,
            InvalidArgument,
            MalformedInput,
            MissingSeed,
            Numerical,
            OutputFailed,
        ];
        let mut s: Vec<i32> = codes.iter().map(|c| c.exit_status()).collect();
        s.sort_unstable();
        s.dedup();
        assert_eq!(s.len(), codes.len());
        assert!(!s.contains(&0) && !s.contains(&1));
    }
}
