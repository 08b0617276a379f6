use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("regular schedule with T = {horizon}, N = {budget} collapses to {distinct} distinct times")]
    RegularCollision {
        horizon: usize,
        budget: usize,
        distinct: usize,
    },

    #[error("schedule unevaluable: all {draws} Monte Carlo draws degenerated")]
    Unevaluable { draws: usize },

    #[error("relative gain undefined: reference MSE is {0}")]
    UndefinedGain(f64),

    #[error("selection pool is empty: every expected value is zero")]
    EmptySelectionPool,

    #[error("population extinct at generation {generation}")]
    PopulationExtinct { generation: usize },

    #[error("all {trials} random trials were unevaluable")]
    NoEvaluableTrial { trials: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
