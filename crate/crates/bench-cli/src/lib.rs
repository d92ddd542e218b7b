//! Experiment runner around `poem-core`: problem construction from a
//! source string, seeded runs over parameter grids, and deterministic CSV
//! emission for the three standard report families (value traces, final
//! value sweeps, step-size traces).

pub mod csv_io;
pub mod runner;
pub mod spec;

use thiserror::Error;

/// Harness errors carry their process exit code: 1 for an invalid
/// experiment description, 2 for anything that failed while touching the
/// filesystem or datasets.
#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid spec: {0}")]
    Spec(String),
    #[error("i/o failure: {0}")]
    Io(String),
}

impl BenchError {
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Spec(_) => 1,
            BenchError::Io(_) => 2,
        }
    }

    pub fn spec(msg: impl Into<String>) -> Self {
        BenchError::Spec(msg.into())
    }

    pub fn io(msg: impl Into<String>) -> Self {
        BenchError::Io(msg.into())
    }
}

impl From<std::io::Error> for BenchError {
    fn from(e: std::io::Error) -> Self {
        BenchError::Io(e.to_string())
    }
}
