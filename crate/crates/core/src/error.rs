use std::path::PathBuf;

use crate::engine::ConfigError;
use crate::knowledge::StaleWrite;
use crate::metrics::MetricsError;
use crate::policy::PolicyError;
use crate::world::WorldError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    World(#[from] WorldError),

    #[error(transparent)]
    Policy(#[from] PolicyError),

    #[error(transparent)]
    Metrics(#[from] MetricsError),

    #[error(transparent)]
    StaleWrite(#[from] StaleWrite),

    #[error("invalid robot roster: {0}")]
    Roster(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("{0}")]
    Input(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
