//! Tree-ensemble regression with automated hyperparameter selection.
//!
//! This crate holds the numerical core: dataset cleaning and splitting,
//! Nash-Sutcliffe and modified Kling-Gupta efficiencies, a random forest
//! and a regularized gradient boosting engine, the hyperparameter strategies
//! (package defaults, optimal defaults, random search) and the meta-learning
//! recommender built on a database of past trials.
//!
//! The crate is `no_std` with `alloc`. The default `std` feature adds
//! rayon-backed parallelism; results are bit-identical with or without it.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod dataset;
pub mod gbt;
pub mod hpo;
pub mod math;
pub mod matrix;
pub mod metalearn;
pub mod metrics;
pub mod model;
pub mod params;
pub mod par;
pub mod rf;
pub mod rng;
pub mod tree;

pub use dataset::{Dataset, FoldPlan, RawDataset, SplitSpec};
pub use gbt::{BoostedModel, GbtHyperParams};
pub use matrix::Matrix;
pub use metrics::{Metric, Score, ScoreReport};
pub use model::{FitError, Model};
pub use params::{Algorithm, HyperParams, Strategy};
pub use rf::{Forest, Mtry, RfHyperParams};
pub use tree::RegressionTree;
