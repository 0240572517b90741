use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the simulation, diagram, calibration and CLI layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{}line {line}: {message}", source_prefix(.file))]
    Parse {
        file: Option<PathBuf>,
        line: u64,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("integration failed at step {step} (t = {time} s): {message}")]
    Integration {
        step: usize,
        time: f64,
        message: String,
    },

    #[error("no cooling descriptor: {0}")]
    Descriptor(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("missing input: {0}")]
    Missing(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn source_prefix(file: &Option<PathBuf>) -> String {
    match file {
        Some(p) => format!("{}: ", p.display()),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Tags an error with the context it occurred in (a target temperature,
    /// a point id, ...). Structured variants keep their shape.
    pub fn context(self, what: impl std::fmt::Display) -> Self {
        match self {
            Error::Integration {
                step,
                time,
                message,
            } => Error::Integration {
                step,
                time,
                message: format!("{what}: {message}"),
            },
            Error::Domain(m) => Error::Domain(format!("{what}: {m}")),
            Error::Calibration(m) => Error::Calibration(format!("{what}: {m}")),
            Error::Descriptor(m) => Error::Descriptor(format!("{what}: {m}")),
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
