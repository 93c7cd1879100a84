use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of the operation (non-positive altitude,
    /// zero grid divisions, negative volume, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unknown {kind} id {id}")]
    Lookup { kind: &'static str, id: u64 },

    /// A reservation would over-commit a resource profile.
    #[error("reservation conflict on [{start}, {end}]: {reason}")]
    Conflict {
        start: f64,
        end: f64,
        reason: &'static str,
    },

    /// A path that is not contiguous in the graph, or a computing node that is
    /// not on the path.
    #[error("structural error: {0}")]
    Structural(String),

    /// Exhaustive enumeration exceeded its guard.
    #[error("enumeration guard exceeded after {0} partial paths")]
    Capacity(usize),

    #[error("no finite route for subtask {task}/{subtask}")]
    Infeasible { task: u64, subtask: u32 },

    #[error("stale plan: {0}")]
    StalePlan(String),

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
