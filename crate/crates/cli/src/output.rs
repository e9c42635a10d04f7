use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::Format;

/// Error reported as `{"error": kind, "message": ...}` on stderr.
#[derive(Debug, Serialize)]
pub struct CliError {
    pub error: String,
    pub message: String,
}

impl CliError {
    pub fn new(kind: &str, message: impl Into<String>) -> Self {
        Self {
            error: kind.to_string(),
            message: message.into(),
        }
    }

    pub fn report(&self) {
        let text = serde_json::to_string(self).unwrap_or_else(|_| format!("{{\"error\":\"{}\"}}", self.error));
        eprintln!("{text}");
    }
}

impl From<embedlab::Error> for CliError {
    fn from(e: embedlab::Error) -> Self {
        use embedlab::Error::*;
        let kind = match &e {
            InvalidInput(_) => "invalid_input",
            DimensionMismatch { .. } => "dimension_mismatch",
            UnsupportedDimension { .. } => "unsupported_dimension",
            NotAccessible(_) => "not_accessible",
            NoChannel(_) => "no_channel",
            DegenerateFixedPoint(_) => "degenerate_fixed_point",
            MemoryRequired { .. } => "memory_required",
            Undefined(_) => "undefined",
            Numerical(_) => "numerical",
        };
        CliError::new(kind, e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::new("csv", e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::new("json", e.to_string())
    }
}

pub fn io_error(path: &Path, e: io::Error) -> CliError {
    CliError::new("io", format!("{}: {e}", path.display()))
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| io_error(path, e))
}

/// Destination of the primary output.
pub struct Sink {
    inner: Box<dyn Write>,
    path: Option<std::path::PathBuf>,
}

impl Sink {
    pub fn open(path: Option<&Path>) -> Result<Self, CliError> {
        let inner: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| io_error(p, e))?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        Ok(Self {
            inner,
            path: path.map(Path::to_path_buf),
        })
    }

    fn wrap(&self, e: io::Error) -> CliError {
        match &self.path {
            Some(p) => io_error(p, e),
            None => CliError::new("io", format!("stdout: {e}")),
        }
    }

    pub fn json<T: Serialize>(&mut self, value: &T) -> Result<(), CliError> {
        serde_json::to_writer_pretty(&mut self.inner, value)?;
        writeln!(self.inner).map_err(|e| self.wrap(e))
    }

    /// Records as CSV (with header) or as a JSON array.
    pub fn table<T: Serialize>(&mut self, format: Format, rows: &[T]) -> Result<(), CliError> {
        match format {
            Format::Json => self.json(&rows),
            Format::Csv => {
                let mut w = csv::Writer::from_writer(&mut self.inner);
                for r in rows {
                    w.serialize(r)?;
                }
                w.flush().map_err(|e| CliError::new("io", e.to_string()))
            }
        }
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.inner.flush().map_err(|e| self.wrap(e))
    }
}
