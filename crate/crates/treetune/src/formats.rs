//! File formats: versioned JSON for models, newline-delimited JSON plus
//! flattened CSV for trial logs and meta-databases.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use treetune_core::hpo::TrialRecord;
use treetune_core::metalearn::{MetaFeatures, MetaModel, MetaRecord};
use treetune_core::{Algorithm, HyperParams, Model};

use crate::error::{Error, Result};
use crate::io;

pub const MODEL_FORMAT: &str = "treetune-model";
pub const META_MODEL_FORMAT: &str = "treetune-meta-model";
pub const FORMAT_VERSION: u32 = 1;

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value).map_err(|e| Error::Internal(e.to_string()))?;
    v.push(b'\n');
    Ok(v)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    io::write_file(path, &to_json(value)?)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = io::read_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub model: Model,
}

impl ModelFile {
    pub fn new(model: Model) -> Self {
        Self { format: MODEL_FORMAT.into(), version: FORMAT_VERSION, model }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaModelFile {
    pub format: String,
    pub version: u32,
    pub meta_model: MetaModel,
}

impl MetaModelFile {
    pub fn new(meta_model: MetaModel) -> Self {
        Self { format: META_MODEL_FORMAT.into(), version: FORMAT_VERSION, meta_model }
    }
}

fn check_header(path: &Path, format: &str, version: u32, expected: &str) -> Result<()> {
    if format != expected {
        return Err(Error::parse(path, format!("expected a `{expected}` file, found `{format}`")));
    }
    if version != FORMAT_VERSION {
        return Err(Error::parse(path, format!("unsupported {format} version {version}")));
    }
    Ok(())
}

pub fn load_model(path: &Path) -> Result<Model> {
    let f: ModelFile = read_json(path)?;
    check_header(path, &f.format, f.version, MODEL_FORMAT)?;
    Ok(f.model)
}

pub fn load_meta_model(path: &Path) -> Result<MetaModel> {
    let f: MetaModelFile = read_json(path)?;
    check_header(path, &f.format, f.version, META_MODEL_FORMAT)?;
    Ok(f.meta_model)
}

pub fn to_ndjson<T: Serialize>(items: &[T]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, item).map_err(|e| Error::Internal(e.to_string()))?;
        out.push(b'\n');
    }
    Ok(out)
}

pub fn read_ndjson<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = io::read_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::parse(path, format!("line {}: {e}", i + 1))))
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

/// Hyperparameter columns of `algorithm` as they appear in flattened CSVs.
pub fn param_names(algorithm: Algorithm) -> &'static [&'static str] {
    match algorithm {
        Algorithm::Rf => &["mtry", "num_trees", "replace", "min_node_size_exponent", "sample_fraction"],
        Algorithm::Gbt => &[
            "nrounds",
            "eta",
            "subsample",
            "max_depth",
            "min_child_weight",
            "colsample_bytree",
            "alpha",
            "lambda",
        ],
    }
}

/// Values matching [`param_names`].
pub fn param_values(params: &HyperParams) -> Vec<String> {
    match params {
        HyperParams::Rf(r) => vec![
            r.mtry.to_string(),
            r.num_trees.to_string(),
            r.replace.to_string(),
            r.min_node_size_exponent.to_string(),
            r.sample_fraction.to_string(),
        ],
        HyperParams::Gbt(g) => vec![
            g.nrounds.to_string(),
            g.eta.to_string(),
            g.subsample.to_string(),
            g.max_depth.to_string(),
            g.min_child_weight.to_string(),
            g.colsample_bytree.to_string(),
            g.alpha.to_string(),
            g.lambda.to_string(),
        ],
    }
}

/// One row per trial, in list order. `rank` is the 1-based list position.
pub fn trials_csv(trials: &[TrialRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["rank", "algorithm", "strategy", "seed", "rejected", "cv_mean_nse", "cv_mean_kge", "failed_folds_nse", "failed_folds_kge"];
    for a in Algorithm::ALL {
        header.extend(param_names(a).iter().copied());
    }
    w.write_record(&header).map_err(|e| Error::Internal(e.to_string()))?;
    for (i, t) in trials.iter().enumerate() {
        let mut row = vec![
            (i + 1).to_string(),
            t.algorithm.to_string(),
            t.strategy.to_string(),
            t.seed.to_string(),
            t.rejected.to_string(),
            opt(t.cv_mean_nse),
            opt(t.cv_mean_kge),
            t.failed_folds(treetune_core::Metric::Nse).to_string(),
            t.failed_folds(treetune_core::Metric::Kge).to_string(),
        ];
        for a in Algorithm::ALL {
            if a == t.algorithm {
                row.extend(param_values(&t.params));
            } else {
                row.extend(param_names(a).iter().map(|_| String::new()));
            }
        }
        w.write_record(&row).map_err(|e| Error::Internal(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::Internal(e.to_string()))
}

/// One row per record with one column per encoded hyperparameter (prefixed
/// by algorithm) and per meta-feature.
pub fn metadb_csv(records: &[MetaRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ["dataset", "algorithm", "strategy", "trial", "seed"].iter().map(|s| s.to_string()).collect();
    for a in Algorithm::ALL {
        header.extend(HyperParams::encoded_names(a).iter().map(|n| format!("{a}_{n}")));
    }
    header.extend(MetaFeatures::NAMES.iter().map(|s| s.to_string()));
    header.extend(["raw_kge", "raw_nse", "std_kge", "std_nse"].iter().map(|s| s.to_string()));
    w.write_record(&header).map_err(|e| Error::Internal(e.to_string()))?;
    for r in records {
        let mut row = vec![r.dataset.clone(), r.algorithm.to_string(), r.strategy.to_string(), r.trial.to_string(), r.seed.to_string()];
        for a in Algorithm::ALL {
            if a == r.algorithm {
                row.extend(r.encoded.iter().map(f64::to_string));
            } else {
                row.extend(HyperParams::encoded_names(a).iter().map(|_| String::new()));
            }
        }
        row.extend(r.meta.to_vec().iter().map(f64::to_string));
        row.extend([opt(r.raw_kge), opt(r.raw_nse), r.std_kge.to_string(), r.std_nse.to_string()]);
        w.write_record(&row).map_err(|e| Error::Internal(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::Internal(e.to_string()))
}
