use std::path::PathBuf;

use thiserror::Error;
use treetune_core::dataset::DatasetError;
use treetune_core::hpo::HpoError;
use treetune_core::metalearn::MetaError;
use treetune_core::metrics::MetricError;
use treetune_core::FitError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Hpo(#[from] HpoError),
    #[error(transparent)]
    Meta(#[from] MetaError),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Internal(String),
}

impl Error {
    pub fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Parse { path: path.into(), message: message.to_string() }
    }

    /// Process exit status: 1 usage, 2 data, 3 internal.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Usage(_) => 1,
            Error::Fit(FitError::InvalidParams(_)) => 1,
            Error::Read { .. } | Error::Parse { .. } | Error::Data(_) | Error::Dataset(_) | Error::Metric(_) | Error::Fit(_) => 2,
            Error::Hpo(HpoError::Fit(FitError::InvalidParams(_))) | Error::Hpo(HpoError::NoIterations) => 1,
            Error::Hpo(_) => 2,
            Error::Meta(MetaError::UsesMetadata | MetaError::SchemaMismatch { .. } | MetaError::MissingDataset) => 1,
            Error::Meta(_) => 2,
            Error::Write { .. } | Error::Internal(_) => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
