//! Cross-checking against an external DIMACS solver executable.

use std::io::Write;
use std::path::PathBuf;
use std::process::Command;

use super::{write_dimacs, CnfFormula, Status};

#[derive(Debug, thiserror::Error)]
pub enum ExternalError {
    #[error("failed to run external solver {0:?}: {1}")]
    Spawn(PathBuf, String),
    #[error("external solver produced no recognizable 's' line")]
    NoStatusLine,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Shells out to a MiniSat-compatible solver binary (`solver <cnf-file>`),
/// reading the standard `s SATISFIABLE` / `s UNSATISFIABLE` result line.
#[derive(Debug, Clone)]
pub struct ExternalSolver {
    pub path: PathBuf,
}

impl ExternalSolver {
    pub fn new(path: impl Into<PathBuf>) -> ExternalSolver {
        ExternalSolver { path: path.into() }
    }

    pub fn solve(&self, f: &CnfFormula) -> Result<Status, ExternalError> {
        let mut file = tempfile::NamedTempFile::new()?;
        write_dimacs(f, &[], &mut file)?;
        file.flush()?;
        let out = Command::new(&self.path)
            .arg(file.path())
            .output()
            .map_err(|e| ExternalError::Spawn(self.path.clone(), e.to_string()))?;
        let stdout = String::from_utf8_lossy(&out.stdout);
        for line in stdout.lines() {
            let line = line.trim();
            // MiniSat prints the bare word; competition solvers use 's ...'.
            if line == "s SATISFIABLE" || line == "SATISFIABLE" {
                return Ok(Status::Sat);
            }
            if line == "s UNSATISFIABLE" || line == "UNSATISFIABLE" {
                return Ok(Status::Unsat);
            }
        }
        Err(ExternalError::NoStatusLine)
    }
}
