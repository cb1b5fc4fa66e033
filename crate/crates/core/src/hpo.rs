//! Cross-validated scoring of configurations and bounded random search.

use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{self, Dataset, DatasetError, FoldPlan};
use crate::metrics::{Metric, Score};
use crate::model::{FitError, Model};
use crate::params::{Algorithm, HyperParams, SearchSpace, Strategy};
use crate::par;
use crate::rng::{self, streams};

pub use crate::params::{default_params, optimal_default_params, sample_random};

/// Fold count used for tuning.
pub const DEFAULT_FOLDS: usize = 10;
/// A trial with more failed folds than this is rejected.
pub const MAX_FAILED_FOLDS: usize = 2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HpoError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error("fold plan covers {plan} rows but the training set has {data}")]
    FoldMismatch { plan: usize, data: usize },
    #[error("iterations must be at least 1")]
    NoIterations,
    #[error("every trial was rejected")]
    AllRejected,
}

/// Monotonic clock in seconds, used to fill `wall_time` when provided.
pub type Clock = fn() -> f64;

/// One evaluated configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub algorithm: Algorithm,
    pub strategy: Strategy,
    pub params: HyperParams,
    /// Per-fold scores in fold order; `None` where NSE was undefined.
    pub cv_scores: Vec<Option<Score>>,
    /// Mean over the folds where the metric is defined.
    pub cv_mean_nse: Option<f64>,
    pub cv_mean_kge: Option<f64>,
    pub test_score: Option<Score>,
    /// Seconds spent; absent unless a clock was supplied.
    pub wall_time: Option<f64>,
    pub seed: u64,
    /// More than [`MAX_FAILED_FOLDS`] folds failed under the tuning metric.
    pub rejected: bool,
    pub failure: Option<String>,
}

impl TrialRecord {
    pub fn cv_mean(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Nse => self.cv_mean_nse,
            Metric::Kge => self.cv_mean_kge,
        }
    }

    pub fn failed_folds(&self, metric: Metric) -> usize {
        self.cv_scores
            .iter()
            .filter(|s| s.and_then(|s| s.get(metric)).is_none())
            .count()
    }
}

fn mean_defined(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    if v.is_empty() {
        None
    } else {
        Some(v.iter().sum::<f64>() / v.len() as f64)
    }
}

/// Fit on `train`, predict `test` and score. `None` when NSE is undefined.
pub fn fit_and_score(train: &Dataset, test: &Dataset, params: &HyperParams, seed: u64) -> Result<Option<Score>, FitError> {
    let model = Model::fit(train, params, seed)?;
    let pred = model.predict(test.features())?;
    Ok(Score::compute(test.response(), &pred).ok())
}

/// K-fold CV of one configuration. Fold `f` is fit with stream `f` of
/// `seed`. The returned record has no test score.
pub fn evaluate_config(
    d_train: &Dataset,
    params: &HyperParams,
    strategy: Strategy,
    folds: &FoldPlan,
    metric: Metric,
    seed: u64,
    clock: Option<Clock>,
) -> Result<TrialRecord, HpoError> {
    if folds.n() != d_train.n() {
        return Err(HpoError::FoldMismatch { plan: folds.n(), data: d_train.n() });
    }
    params.validate()?;
    let start = clock.map(|c| c());
    let scores: Vec<Result<Option<Score>, FitError>> = par::map_indexed(folds.k, |f| {
        let train = d_train.subset(&folds.out_of_fold_rows(f));
        let hold = d_train.subset(&folds.fold_rows(f));
        fit_and_score(&train, &hold, params, rng::derive_seed(seed, f as u64))
    });
    let cv_scores = scores.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut rec = TrialRecord {
        algorithm: params.algorithm(),
        strategy,
        params: *params,
        cv_mean_nse: mean_defined(cv_scores.iter().map(|s| s.map(|s| s.nse))),
        cv_mean_kge: mean_defined(cv_scores.iter().map(|s| s.and_then(|s| s.kge))),
        cv_scores,
        test_score: None,
        wall_time: None,
        seed,
        rejected: false,
        failure: None,
    };
    let failed = rec.failed_folds(metric);
    if failed > MAX_FAILED_FOLDS {
        rec.rejected = true;
        rec.failure = Some(alloc::format!("{failed} of {} folds have no {metric} score", folds.k));
    }
    if let (Some(c), Some(s)) = (clock, start) {
        rec.wall_time = Some(c() - s);
    }
    Ok(rec)
}

/// Orders trials best-first by cv mean of `metric`; rejected trials and
/// trials without a mean go last. The sort is stable.
pub fn sort_trials(trials: &mut [TrialRecord], metric: Metric) {
    let key = |t: &TrialRecord| if t.rejected { None } else { t.cv_mean(metric) };
    trials.sort_by(|a, b| match (key(a), key(b)) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => core::cmp::Ordering::Less,
        (None, Some(_)) => core::cmp::Ordering::Greater,
        (None, None) => core::cmp::Ordering::Equal,
    });
}

#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    pub iterations: usize,
    pub metric: Metric,
    pub seed: u64,
    pub folds: usize,
    pub clock: Option<Clock>,
}

impl SearchOptions {
    pub fn new(iterations: usize, metric: Metric, seed: u64) -> Self {
        Self { iterations, metric, seed, folds: DEFAULT_FOLDS, clock: None }
    }
}

/// The fold plan a search with this seed uses.
pub fn search_folds(d_train: &Dataset, k: usize, seed: u64) -> Result<FoldPlan, DatasetError> {
    dataset::kfold_partition(d_train, k, rng::derive_seed(seed, streams::FOLDS))
}

/// Random search: `iterations` configurations scored on one shared fold
/// plan and returned best-first. Trial `i` samples its configuration and fits
/// from its own stream of `seed`.
pub fn run_random_search(d_train: &Dataset, algorithm: Algorithm, opts: &SearchOptions) -> Result<Vec<TrialRecord>, HpoError> {
    if opts.iterations == 0 {
        return Err(HpoError::NoIterations);
    }
    let folds = search_folds(d_train, opts.folds, opts.seed)?;
    let space = SearchSpace::for_algorithm(algorithm);
    let trials: Vec<Result<TrialRecord, HpoError>> = par::map_indexed(opts.iterations, |i| {
        let trial_seed = rng::derive_seed(opts.seed, i as u64);
        let params = sample_random(&space, d_train.n(), trial_seed);
        evaluate_config(d_train, &params, Strategy::Random, &folds, opts.metric, trial_seed, opts.clock)
    });
    let mut trials = trials.into_iter().collect::<Result<Vec<_>, _>>()?;
    if trials.iter().all(|t| t.rejected || t.cv_mean(opts.metric).is_none()) {
        return Err(HpoError::AllRejected);
    }
    sort_trials(&mut trials, opts.metric);
    Ok(trials)
}

/// Winner of a best-first trial list, if it was not rejected.
pub fn best_trial(trials: &[TrialRecord]) -> Option<&TrialRecord> {
    trials.first().filter(|t| !t.rejected)
}
