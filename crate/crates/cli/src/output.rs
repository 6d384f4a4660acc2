//! Exit classification and all-or-nothing file output.

use std::io::{BufWriter, Write};
use std::path::Path;

use tempfile::NamedTempFile;

/// Why a command stopped. Numerical failures exit with 1, the rest with 2.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Io(String),
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Numerical(_) => 1,
            Failure::Usage(_) | Failure::Io(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Io(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<pinchlab::Error> for Failure {
    fn from(e: pinchlab::Error) -> Self {
        if e.is_input_error() {
            Failure::Io(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

fn io(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so a failed run leaves no partial output.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<(), Failure>
where
    F: FnOnce(&mut dyn Write) -> Result<(), Failure>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = NamedTempFile::new_in(dir).map_err(|e| io(path, e))?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        fill(&mut w)?;
        w.flush().map_err(|e| io(path, e))?;
    }
    tmp.persist(path).map_err(|e| io(path, e.error))?;
    Ok(())
}

/// To `path` atomically, or to standard output.
pub fn emit<F>(path: Option<&Path>, fill: F) -> Result<(), Failure>
where
    F: FnOnce(&mut dyn Write) -> Result<(), Failure>,
{
    match path {
        Some(p) => write_atomic(p, fill),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            fill(&mut lock)?;
            lock.flush().map_err(|e| Failure::Io(e.to_string()))
        }
    }
}
