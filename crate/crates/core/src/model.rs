use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Dataset;
use crate::gbt::{self, BoostedModel};
use crate::matrix::Matrix;
use crate::params::{Algorithm, HyperParams};
use crate::rf::{self, Forest};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("invalid hyperparameters: {0}")]
    InvalidParams(String),
    #[error("the row or column sample is empty")]
    EmptySample,
    #[error("expected {expected} feature columns, got {got}")]
    ColumnMismatch { expected: usize, got: usize },
    #[error("non-finite feature or response value")]
    NonFinite,
}

/// A fitted forest or boosted model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "lowercase")]
pub enum Model {
    Rf(Forest),
    Gbt(BoostedModel),
}

impl Model {
    pub fn fit(train: &Dataset, params: &HyperParams, seed: u64) -> Result<Model, FitError> {
        match params {
            HyperParams::Rf(p) => rf::fit_forest(train, p, seed).map(Model::Rf),
            HyperParams::Gbt(p) => gbt::fit_gbt(train, p, seed).map(Model::Gbt),
        }
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>, FitError> {
        match self {
            Model::Rf(f) => f.predict(x),
            Model::Gbt(b) => b.predict(x),
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        match self {
            Model::Rf(_) => Algorithm::Rf,
            Model::Gbt(_) => Algorithm::Gbt,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            Model::Rf(f) => f.n_features,
            Model::Gbt(b) => b.n_features,
        }
    }
}
