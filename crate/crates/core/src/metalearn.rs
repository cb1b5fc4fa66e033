//! Meta-learning of hyperparameters.
//!
//! A meta-database holds one record per (dataset, algorithm, trial): the
//! configuration on its sampling scale, summary statistics of the training
//! data, and the test scores standardized within the (dataset, algorithm)
//! group. A meta-model is a random forest regressing a standardized score on
//! those columns; recommending a configuration means scoring a candidate pool
//! with it and keeping the argmax. Dropping the dataset statistics gives a
//! model of how configurations fare on a generic dataset, whose argmax is a
//! new set of optimal defaults.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{self, Dataset, DatasetError, SplitSpec};
use crate::hpo;
use crate::math;
use crate::matrix::Matrix;
use crate::metrics::{self, Metric, Score};
use crate::model::FitError;
use crate::params::{default_params, optimal_default_params, Algorithm, HyperParams, SearchSpace, Strategy};
use crate::par;
use crate::rf::{self, Forest, RfHyperParams};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetaError {
    #[error("at least {need} rows are needed for meta-features, got {got}")]
    TooFewRows { need: usize, got: usize },
    #[error("at least 2 datasets are needed, got {0}")]
    TooFewDatasets(usize),
    #[error("the meta-database has no {0} records")]
    EmptySlice(Algorithm),
    #[error("no dataset produced usable trials")]
    NothingUsable,
    #[error("the candidate pool is empty")]
    EmptyPool,
    #[error("candidate {index} is a {got} configuration but the meta-model scores {expected}")]
    SchemaMismatch { index: usize, expected: Algorithm, got: Algorithm },
    #[error("this meta-model uses dataset meta-features; a dataset is required")]
    MissingDataset,
    #[error("new optimal defaults need a meta-model trained without meta-features")]
    UsesMetadata,
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Fit(#[from] FitError),
}

/// Summary statistics of a training set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaFeatures {
    pub n_obs: f64,
    pub n_features: f64,
    /// `p / n`.
    pub dimensionality: f64,
    pub response_mean: f64,
    pub response_sd: f64,
    /// `sd / |mean|`, 0 when the mean is 0.
    pub response_cv: f64,
    pub response_skewness: f64,
    pub response_excess_kurtosis: f64,
    pub mean_abs_feature_response_corr: f64,
    pub max_abs_feature_response_corr: f64,
    pub mean_abs_feature_feature_corr: f64,
    pub imputed_fraction: f64,
}

impl MetaFeatures {
    pub const NAMES: [&'static str; 12] = [
        "mf_n_obs",
        "mf_n_features",
        "mf_dimensionality",
        "mf_response_mean",
        "mf_response_sd",
        "mf_response_cv",
        "mf_response_skewness",
        "mf_response_excess_kurtosis",
        "mf_mean_abs_feature_response_corr",
        "mf_max_abs_feature_response_corr",
        "mf_mean_abs_feature_feature_corr",
        "mf_imputed_fraction",
    ];

    pub fn to_vec(&self) -> Vec<f64> {
        alloc::vec![
            self.n_obs,
            self.n_features,
            self.dimensionality,
            self.response_mean,
            self.response_sd,
            self.response_cv,
            self.response_skewness,
            self.response_excess_kurtosis,
            self.mean_abs_feature_response_corr,
            self.max_abs_feature_response_corr,
            self.mean_abs_feature_feature_corr,
            self.imputed_fraction,
        ]
    }
}

/// Meta-features of a cleaned dataset. Moments use population central
/// moments (`g1`, `g2`); constant columns correlate 0 with everything.
pub fn extract_meta_features(d: &Dataset) -> Result<MetaFeatures, MetaError> {
    let n = d.n();
    if n < 3 {
        return Err(MetaError::TooFewRows { need: 3, got: n });
    }
    let p = d.p();
    let y = d.response();
    let mean = math::mean(y);
    let sd = math::sample_sd(y);
    let moment = |k: i32| y.iter().map(|v| (1..=k).fold(1.0, |acc, _| acc * (v - mean))).sum::<f64>() / n as f64;
    let (m2, m3, m4) = (moment(2), moment(3), moment(4));
    let (skew, kurt) = if m2 > 0.0 { (m3 / (m2 * math::sqrt(m2)), m4 / (m2 * m2) - 3.0) } else { (0.0, 0.0) };

    let columns: Vec<Vec<f64>> = (0..p).map(|j| d.features().column(j)).collect();
    let fr: Vec<f64> = columns.iter().map(|c| math::abs(math::pearson(c, y))).collect();
    let mut ff_sum = 0.0;
    let mut ff_count = 0usize;
    for i in 0..p {
        for j in i + 1..p {
            ff_sum += math::abs(math::pearson(&columns[i], &columns[j]));
            ff_count += 1;
        }
    }
    Ok(MetaFeatures {
        n_obs: n as f64,
        n_features: p as f64,
        dimensionality: p as f64 / n as f64,
        response_mean: mean,
        response_sd: sd,
        response_cv: if mean != 0.0 { sd / math::abs(mean) } else { 0.0 },
        response_skewness: skew,
        response_excess_kurtosis: kurt,
        mean_abs_feature_response_corr: fr.iter().sum::<f64>() / p as f64,
        max_abs_feature_response_corr: fr.iter().cloned().fold(0.0, f64::max),
        mean_abs_feature_feature_corr: if ff_count > 0 { ff_sum / ff_count as f64 } else { 0.0 },
        imputed_fraction: d.imputed_cells as f64 / (n * p) as f64,
    })
}

/// One trial in the meta-database.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaRecord {
    pub dataset: String,
    pub algorithm: Algorithm,
    pub strategy: Strategy,
    pub trial: usize,
    pub params: HyperParams,
    /// `params` on the sampling scale, in [`HyperParams::encoded_names`] order.
    pub encoded: Vec<f64>,
    pub meta: MetaFeatures,
    pub raw_kge: Option<f64>,
    pub raw_nse: Option<f64>,
    pub std_kge: f64,
    pub std_nse: f64,
    pub seed: u64,
}

impl MetaRecord {
    pub fn standardized(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Nse => self.std_nse,
            Metric::Kge => self.std_kge,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetaDbOptions {
    /// Random configurations per (dataset, algorithm); defaults and optimal
    /// defaults are added on top.
    pub iterations: usize,
    pub test_fraction: f64,
    pub seed: u64,
}

impl MetaDbOptions {
    pub fn new(seed: u64) -> Self {
        Self { iterations: 100, test_fraction: 0.2, seed }
    }
}

/// Configurations tried per (dataset, algorithm): default, optimal default,
/// then `iterations` random draws from the trial streams of `seed`.
pub fn trial_configs(algorithm: Algorithm, iterations: usize, n: usize, seed: u64) -> Vec<(Strategy, HyperParams)> {
    let space = SearchSpace::for_algorithm(algorithm);
    let mut v = alloc::vec![
        (Strategy::Default, default_params(algorithm)),
        (Strategy::OptDefault, optimal_default_params(algorithm)),
    ];
    v.extend((0..iterations).map(|i| (Strategy::Random, hpo::sample_random(&space, n, rng::derive_seed(seed, i as u64)))));
    v
}

fn group_seed(seed: u64, dataset: usize, algorithm: Algorithm) -> u64 {
    rng::derive_seed(rng::derive_seed(seed, dataset as u64), algorithm as u64)
}

/// The train/test split a meta-database build uses for dataset `index`.
pub fn metadb_split(d: &Dataset, index: usize, opts: &MetaDbOptions) -> Result<(Dataset, Dataset), DatasetError> {
    dataset::train_test_split(d, SplitSpec { test_fraction: opts.test_fraction, seed: rng::derive_seed(opts.seed, index as u64) })
}

/// Builds the meta-database: every configuration from [`trial_configs`] is
/// fit on each dataset's training split and scored on its test split.
///
/// Within a group, trials whose KGE is undefined (constant predictions) are
/// standardized at the group's worst observed KGE and keep `raw_kge: None`.
/// A group where no trial has a defined score is skipped with a warning.
pub fn build_meta_database(datasets: &[Dataset], opts: &MetaDbOptions) -> Result<Vec<MetaRecord>, MetaError> {
    if datasets.len() < 2 {
        return Err(MetaError::TooFewDatasets(datasets.len()));
    }
    struct Prepared {
        train: Dataset,
        test: Dataset,
        meta: MetaFeatures,
    }
    let mut prepared = Vec::with_capacity(datasets.len());
    for (i, d) in datasets.iter().enumerate() {
        let (train, test) = metadb_split(d, i, opts)?;
        let meta = extract_meta_features(&train)?;
        prepared.push(Prepared { train, test, meta });
    }

    let per_group = opts.iterations + 2;
    let groups: Vec<(usize, Algorithm)> = (0..datasets.len())
        .flat_map(|d| Algorithm::ALL.into_iter().map(move |a| (d, a)))
        .collect();
    let configs: Vec<Vec<(Strategy, HyperParams)>> = groups
        .iter()
        .map(|&(d, a)| trial_configs(a, opts.iterations, prepared[d].train.n(), group_seed(opts.seed, d, a)))
        .collect();

    let scores: Vec<Result<Option<Score>, FitError>> = par::map_indexed(groups.len() * per_group, |job| {
        let (g, t) = (job / per_group, job % per_group);
        let (d, a) = groups[g];
        let p = &prepared[d];
        let fit_seed = rng::derive_seed(group_seed(opts.seed, d, a), (per_group + t) as u64);
        hpo::fit_and_score(&p.train, &p.test, &configs[g][t].1, fit_seed)
    });
    let scores = scores.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut records = Vec::with_capacity(scores.len());
    for (g, &(d, a)) in groups.iter().enumerate() {
        let group = &scores[g * per_group..(g + 1) * per_group];
        let nse: Vec<Option<f64>> = group.iter().map(|s| s.map(|s| s.nse)).collect();
        let kge: Vec<Option<f64>> = group.iter().map(|s| s.and_then(|s| s.kge)).collect();
        let (Some(std_nse), Some(std_kge)) = (standardize_with_floor(&nse), standardize_with_floor(&kge)) else {
            log::warn!("skipping {} on `{}`: no trial produced a defined score", a, datasets[d].name);
            continue;
        };
        let seed = group_seed(opts.seed, d, a);
        for t in 0..per_group {
            let (strategy, params) = configs[g][t];
            records.push(MetaRecord {
                dataset: datasets[d].name.clone(),
                algorithm: a,
                strategy,
                trial: t,
                params,
                encoded: params.encode(prepared[d].train.p()),
                meta: prepared[d].meta,
                raw_kge: kge[t],
                raw_nse: nse[t],
                std_kge: std_kge[t],
                std_nse: std_nse[t],
                seed: rng::derive_seed(seed, (per_group + t) as u64),
            });
        }
    }
    if records.is_empty() {
        return Err(MetaError::NothingUsable);
    }
    Ok(records)
}

/// Standardizes the defined values, filling undefined ones with the group
/// minimum first. `None` when nothing is defined.
fn standardize_with_floor(values: &[Option<f64>]) -> Option<Vec<f64>> {
    let worst = values.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
    if !worst.is_finite() {
        return None;
    }
    let filled: Vec<f64> = values.iter().map(|v| v.unwrap_or(worst)).collect();
    metrics::standardize_scores(&filled).ok()
}

/// Provenance of a meta-model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaManifest {
    pub datasets: Vec<String>,
    pub records: usize,
    pub seed: u64,
    /// Median feature count of the training datasets; resolves the `sqrt(p)`
    /// rule when no dataset is given.
    pub reference_p: usize,
    /// Median training-set size of the training datasets.
    pub reference_n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaModel {
    pub target: Metric,
    pub algorithm: Algorithm,
    pub uses_metadata: bool,
    /// Input columns, hyperparameters first.
    pub columns: Vec<String>,
    pub forest: Forest,
    pub manifest: MetaManifest,
}

/// Forest settings used for every meta-model.
pub fn meta_model_params() -> RfHyperParams {
    match optimal_default_params(Algorithm::Rf) {
        HyperParams::Rf(p) => p,
        HyperParams::Gbt(_) => unreachable!(),
    }
}

fn median_usize(mut v: Vec<usize>) -> usize {
    v.sort_unstable();
    v[v.len() / 2]
}

/// Fits a meta-model for `algorithm` predicting the standardized `target`.
pub fn train_meta_model(
    db: &[MetaRecord],
    target: Metric,
    algorithm: Algorithm,
    uses_metadata: bool,
    seed: u64,
) -> Result<MetaModel, MetaError> {
    let slice: Vec<&MetaRecord> = db.iter().filter(|r| r.algorithm == algorithm).collect();
    if slice.is_empty() {
        return Err(MetaError::EmptySlice(algorithm));
    }
    let mut columns: Vec<String> = HyperParams::encoded_names(algorithm).iter().map(|s| s.to_string()).collect();
    if uses_metadata {
        columns.extend(MetaFeatures::NAMES.iter().map(|s| s.to_string()));
    }
    let rows: Vec<Vec<f64>> = slice
        .iter()
        .map(|r| {
            let mut row = r.encoded.clone();
            if uses_metadata {
                row.extend(r.meta.to_vec());
            }
            row
        })
        .collect();
    let y: Vec<f64> = slice.iter().map(|r| r.standardized(target)).collect();
    let data = Dataset::new("meta", columns.clone(), Matrix::from_rows(&rows), y)?;
    let forest = rf::fit_forest(&data, &meta_model_params(), seed)?;

    let mut datasets: Vec<String> = slice.iter().map(|r| r.dataset.clone()).collect();
    datasets.sort();
    datasets.dedup();
    let per_dataset = |f: fn(&MetaFeatures) -> f64| {
        datasets
            .iter()
            .map(|name| f(&slice.iter().find(|r| &r.dataset == name).expect("listed").meta) as usize)
            .collect::<Vec<usize>>()
    };
    let manifest = MetaManifest {
        reference_p: median_usize(per_dataset(|m| m.n_features)),
        reference_n: median_usize(per_dataset(|m| m.n_obs)),
        datasets,
        records: slice.len(),
        seed,
    };
    Ok(MetaModel { target, algorithm, uses_metadata, columns, forest, manifest })
}

/// Candidates a recommendation chooses among.
#[derive(Clone, Debug, PartialEq)]
pub enum Candidates {
    List(Vec<HyperParams>),
    /// Default, optimal default and `size` random draws.
    Generate { size: usize, seed: u64 },
}

/// Default pool size for generated candidates.
pub const DEFAULT_POOL: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub params: HyperParams,
    pub predicted: f64,
    /// Position of the winner in the candidate pool.
    pub index: usize,
    pub pool_size: usize,
}

impl MetaModel {
    /// Predicted standardized score for each candidate.
    pub fn score_candidates(&self, d_new: Option<&Dataset>, pool: &[HyperParams]) -> Result<Vec<f64>, MetaError> {
        let meta = match (self.uses_metadata, d_new) {
            (true, Some(d)) => Some(extract_meta_features(d)?.to_vec()),
            (true, None) => return Err(MetaError::MissingDataset),
            (false, _) => None,
        };
        let p = d_new.map_or(self.manifest.reference_p, Dataset::p);
        let mut rows = Vec::with_capacity(pool.len());
        for (index, c) in pool.iter().enumerate() {
            if c.algorithm() != self.algorithm {
                return Err(MetaError::SchemaMismatch { index, expected: self.algorithm, got: c.algorithm() });
            }
            let mut row = c.encode(p);
            if let Some(m) = &meta {
                row.extend_from_slice(m);
            }
            rows.push(row);
        }
        let x = Matrix::from_rows(&rows);
        Ok(self.forest.predict(&x)?)
    }

    /// Candidates to score. A generated pool holds the default and optimal
    /// default configurations followed by `size` random draws.
    pub fn pool(&self, d_new: Option<&Dataset>, candidates: &Candidates) -> Vec<HyperParams> {
        match candidates {
            Candidates::List(v) => v.clone(),
            Candidates::Generate { size, seed } => {
                let n = d_new.map_or(self.manifest.reference_n, Dataset::n);
                trial_configs(self.algorithm, *size, n, *seed).into_iter().map(|(_, p)| p).collect()
            }
        }
    }
}

/// The candidate with the highest predicted standardized score; ties go to
/// the earliest candidate.
pub fn recommend(model: &MetaModel, d_new: Option<&Dataset>, candidates: &Candidates) -> Result<Recommendation, MetaError> {
    let pool = model.pool(d_new, candidates);
    if pool.is_empty() {
        return Err(MetaError::EmptyPool);
    }
    let scores = model.score_candidates(d_new, &pool)?;
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = i;
        }
    }
    Ok(Recommendation { params: pool[best], predicted: scores[best], index: best, pool_size: pool.len() })
}

/// Configuration predicted best for a generic dataset by a meta-model
/// trained without meta-features.
pub fn compute_new_optimal_defaults(model: &MetaModel, pool_size: usize, seed: u64) -> Result<Recommendation, MetaError> {
    if model.uses_metadata {
        return Err(MetaError::UsesMetadata);
    }
    recommend(model, None, &Candidates::Generate { size: pool_size, seed })
}
