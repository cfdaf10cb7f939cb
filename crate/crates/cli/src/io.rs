use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;

use k3iso_core::decide::DecideError;
use k3iso_core::mukai_model::ModelError;
use k3iso_core::qsolve::SolveError;
use k3iso_core::scan::ScanError;

/// Machine-readable error object; `kind` is one of `io`, `input`, `invalid`.
#[derive(Debug, Serialize)]
pub struct Failure {
    pub error: String,
    pub kind: &'static str,
}

impl Failure {
    pub fn invalid(error: impl ToString) -> Self {
        Failure {
            error: error.to_string(),
            kind: "invalid",
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            error: e.to_string(),
            kind: "io",
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        let kind = if e.is_io() { "io" } else { "input" };
        Failure {
            error: e.to_string(),
            kind,
        }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure {
            error: e.to_string(),
            kind: "io",
        }
    }
}

macro_rules! invalid_from {
    ($($t:ty),*) => {
        $(impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::invalid(e)
            }
        })*
    };
}

invalid_from!(DecideError, ModelError, SolveError, ScanError);

fn is_stdio(path: &Path) -> bool {
    path.as_os_str() == "-"
}

pub fn read_input(path: &Path) -> Result<String, Failure> {
    let mut text = String::new();
    if is_stdio(path) {
        io::stdin().read_to_string(&mut text)?;
    } else {
        File::open(path)
            .and_then(|mut f| f.read_to_string(&mut text))
            .map_err(|e| Failure {
                error: format!("{}: {e}", path.display()),
                kind: "io",
            })?;
    }
    Ok(text)
}

pub fn open_output(path: &Path) -> Result<Box<dyn Write>, Failure> {
    if is_stdio(path) {
        return Ok(Box::new(BufWriter::new(io::stdout().lock())));
    }
    let f = File::create(path).map_err(|e| Failure {
        error: format!("{}: {e}", path.display()),
        kind: "io",
    })?;
    Ok(Box::new(BufWriter::new(f)))
}

/// Pretty JSON followed by a newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut w = open_output(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Writes the error object to the requested output, or stdout if that fails,
/// and a one-line message to stderr.
pub fn report_failure(failure: &Failure, out: &Path) {
    eprintln!("k3iso: {}", failure.error);
    if write_json(out, failure).is_err() && !is_stdio(out) {
        let _ = write_json(Path::new("-"), failure);
    }
}
