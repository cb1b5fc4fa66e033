//! Tabular regression datasets: cleaning, train/test splits and k-fold plans.
//!
//! A [`RawDataset`] is what a loader produces: one response column and
//! feature columns in which any cell may be missing. [`clean`] turns it into
//! a dense [`Dataset`] by dropping rows with a missing response, dropping
//! feature columns whose missingness exceeds a threshold, and filling the
//! remaining gaps with column medians.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::math;
use crate::matrix::Matrix;
use crate::rng::{self, streams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatasetError {
    #[error("cleaning removed every row of dataset `{0}`")]
    NoRows(String),
    #[error("cleaning removed every feature column of dataset `{0}`")]
    NoFeatures(String),
    #[error("dataset `{name}` has {n} rows; at least 2 are required")]
    TooFewRows { name: String, n: usize },
    #[error("column threshold {0} is outside (0, 1]")]
    BadThreshold(f64),
    #[error("test fraction {0} is outside (0, 1)")]
    BadTestFraction(f64),
    #[error("a test fraction of {fraction} on {n} rows leaves one side of the split empty")]
    EmptySplit { n: usize, fraction: f64 },
    #[error("fold count {k} is invalid for {n} rows (need 2 <= k <= n)")]
    BadFoldCount { k: usize, n: usize },
    #[error("ragged input: column `{column}` has {got} cells, expected {expected}")]
    Ragged { column: String, got: usize, expected: usize },
}

/// A loaded table whose cells may be missing. Columns are stored
/// column-major; `None` marks a missing cell.
#[derive(Clone, Debug, PartialEq)]
pub struct RawDataset {
    pub name: String,
    pub response_name: String,
    pub response: Vec<Option<f64>>,
    pub feature_names: Vec<String>,
    pub features: Vec<Vec<Option<f64>>>,
}

impl RawDataset {
    pub fn new(
        name: impl Into<String>,
        response_name: impl Into<String>,
        response: Vec<Option<f64>>,
        feature_names: Vec<String>,
        features: Vec<Vec<Option<f64>>>,
    ) -> Result<Self, DatasetError> {
        let n = response.len();
        for (col, name) in features.iter().zip(&feature_names) {
            if col.len() != n {
                return Err(DatasetError::Ragged { column: name.clone(), got: col.len(), expected: n });
            }
        }
        Ok(Self {
            name: name.into(),
            response_name: response_name.into(),
            response,
            feature_names,
            features,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.response.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    /// Rows whose response is missing.
    pub fn missing_response_rows(&self) -> Vec<usize> {
        self.response
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.is_none().then_some(i))
            .collect()
    }

    /// Missing fraction of each feature column over all rows.
    pub fn missing_fractions(&self) -> Vec<f64> {
        let n = self.n_rows().max(1) as f64;
        self.features
            .iter()
            .map(|c| c.iter().filter(|v| v.is_none()).count() as f64 / n)
            .collect()
    }

    /// Missing fraction of each feature column over the rows that have a
    /// response. This is the fraction the column thresholds apply to.
    pub fn missing_fractions_after_row_filter(&self) -> Vec<f64> {
        let kept: Vec<usize> = (0..self.n_rows()).filter(|&i| self.response[i].is_some()).collect();
        let n = kept.len().max(1) as f64;
        self.features
            .iter()
            .map(|c| kept.iter().filter(|&&i| c[i].is_none()).count() as f64 / n)
            .collect()
    }
}

impl From<&Dataset> for RawDataset {
    fn from(d: &Dataset) -> Self {
        Self {
            name: d.name.clone(),
            response_name: d.response_name.clone(),
            response: d.response.iter().map(|v| Some(*v)).collect(),
            feature_names: d.feature_names.clone(),
            features: (0..d.p())
                .map(|j| d.features.column(j).into_iter().map(Some).collect())
                .collect(),
        }
    }
}

/// Dense, cleaned regression problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub response_name: String,
    pub feature_names: Vec<String>,
    response: Vec<f64>,
    features: Matrix,
    /// Feature cells filled by imputation during cleaning.
    pub imputed_cells: usize,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        feature_names: Vec<String>,
        features: Matrix,
        response: Vec<f64>,
    ) -> Result<Self, DatasetError> {
        let name = name.into();
        if response.len() < 2 {
            return Err(DatasetError::TooFewRows { name, n: response.len() });
        }
        if features.cols() == 0 {
            return Err(DatasetError::NoFeatures(name));
        }
        if features.rows() != response.len() {
            return Err(DatasetError::Ragged {
                column: String::from("<features>"),
                got: features.rows(),
                expected: response.len(),
            });
        }
        if feature_names.len() != features.cols() {
            return Err(DatasetError::Ragged {
                column: String::from("<feature names>"),
                got: feature_names.len(),
                expected: features.cols(),
            });
        }
        Ok(Self {
            name,
            response_name: String::from("y"),
            feature_names,
            response,
            features,
            imputed_cells: 0,
        })
    }

    /// Convenience constructor naming features `x0, x1, ...`.
    pub fn from_parts(name: impl Into<String>, features: Matrix, response: Vec<f64>) -> Result<Self, DatasetError> {
        let names = (0..features.cols()).map(|j| format!("x{j}")).collect();
        Self::new(name, names, features, response)
    }

    pub fn n(&self) -> usize {
        self.response.len()
    }

    pub fn p(&self) -> usize {
        self.features.cols()
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    /// Rows `rows` in the given order.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            response_name: self.response_name.clone(),
            feature_names: self.feature_names.clone(),
            response: rows.iter().map(|&i| self.response[i]).collect(),
            features: self.features.select_rows(rows),
            imputed_cells: self.imputed_cells,
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// What [`clean`] did to a raw table.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CleanReport {
    pub column_threshold: f64,
    pub rows_in: usize,
    pub rows_dropped: Vec<usize>,
    pub columns_dropped: Vec<String>,
    /// `(column, cells imputed)` for every retained column with gaps.
    pub imputed: Vec<(String, usize)>,
    pub imputed_cells: usize,
}

/// Drops rows with a missing response, then feature columns whose missing
/// fraction (over the surviving rows) exceeds `column_threshold`, then fills
/// the remaining missing cells with the column median.
///
/// Columns with no observed value at all are always dropped.
pub fn clean(raw: &RawDataset, column_threshold: f64) -> Result<(Dataset, CleanReport), DatasetError> {
    if !(column_threshold > 0.0 && column_threshold <= 1.0) {
        return Err(DatasetError::BadThreshold(column_threshold));
    }
    let rows_dropped = raw.missing_response_rows();
    let kept: Vec<usize> = (0..raw.n_rows()).filter(|&i| raw.response[i].is_some()).collect();
    if kept.is_empty() {
        return Err(DatasetError::NoRows(raw.name.clone()));
    }
    let fractions = raw.missing_fractions_after_row_filter();

    let mut names = Vec::new();
    let mut columns = Vec::new();
    let mut columns_dropped = Vec::new();
    let mut imputed = Vec::new();
    let mut imputed_cells = 0;
    for (j, col) in raw.features.iter().enumerate() {
        let observed: Vec<f64> = kept.iter().filter_map(|&i| col[i]).collect();
        if fractions[j] > column_threshold || observed.is_empty() {
            columns_dropped.push(raw.feature_names[j].clone());
            continue;
        }
        let fill = math::median(&observed).expect("non-empty");
        let missing = kept.len() - observed.len();
        if missing > 0 {
            imputed.push((raw.feature_names[j].clone(), missing));
            imputed_cells += missing;
        }
        names.push(raw.feature_names[j].clone());
        columns.push(kept.iter().map(|&i| col[i].unwrap_or(fill)).collect::<Vec<f64>>());
    }
    if columns.is_empty() {
        return Err(DatasetError::NoFeatures(raw.name.clone()));
    }
    let response: Vec<f64> = kept.iter().map(|&i| raw.response[i].expect("kept rows have a response")).collect();
    let mut d = Dataset::new(raw.name.clone(), names, Matrix::from_columns(&columns), response)?;
    d.response_name = raw.response_name.clone();
    d.imputed_cells = imputed_cells;
    let report = CleanReport {
        column_threshold,
        rows_in: raw.n_rows(),
        rows_dropped,
        columns_dropped,
        imputed,
        imputed_cells,
    };
    Ok((d, report))
}

/// Threshold used for the single-variant case and the strict variant.
pub const STRICT_THRESHOLD: f64 = 0.1;
/// Threshold used for the lenient variant.
pub const LENIENT_THRESHOLD: f64 = 0.5;

/// One cleaned variant per applicable column threshold. When some column is
/// more than 10% missing two variants are produced (`<name>_lt50` at 0.5 and
/// `<name>_lt10` at 0.1); otherwise a single 0.1 variant keeping the name.
pub fn make_variants(raw: &RawDataset) -> Result<Vec<(Dataset, CleanReport)>, DatasetError> {
    let needs_two = raw
        .missing_fractions_after_row_filter()
        .iter()
        .any(|&f| f > STRICT_THRESHOLD);
    if !needs_two {
        return Ok(alloc::vec![clean(raw, STRICT_THRESHOLD)?]);
    }
    let (lenient, r1) = clean(raw, LENIENT_THRESHOLD)?;
    let (strict, r2) = clean(raw, STRICT_THRESHOLD)?;
    Ok(alloc::vec![
        (lenient.with_name(format!("{}_lt50", raw.name)), r1),
        (strict.with_name(format!("{}_lt10", raw.name)), r2),
    ])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(seed: u64) -> Self {
        Self { test_fraction: 0.2, seed }
    }
}

/// Number of test rows: `round_half_up(n * fraction)`.
pub fn test_size(n: usize, fraction: f64) -> usize {
    math::floor(n as f64 * fraction + 0.5) as usize
}

/// Row indices `(train, test)`, each ascending.
pub fn split_indices(n: usize, spec: SplitSpec) -> Result<(Vec<usize>, Vec<usize>), DatasetError> {
    if !(spec.test_fraction > 0.0 && spec.test_fraction < 1.0) {
        return Err(DatasetError::BadTestFraction(spec.test_fraction));
    }
    let n_test = test_size(n, spec.test_fraction);
    if n_test == 0 || n_test >= n {
        return Err(DatasetError::EmptySplit { n, fraction: spec.test_fraction });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    rng::shuffle(&mut rng::stream(spec.seed, streams::SPLIT), &mut perm);
    let mut test = perm[..n_test].to_vec();
    let mut train = perm[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((train, test))
}

/// Disjoint `(train, test)` datasets; row order within each follows `d`.
pub fn train_test_split(d: &Dataset, spec: SplitSpec) -> Result<(Dataset, Dataset), DatasetError> {
    let (train, test) = split_indices(d.n(), spec)?;
    Ok((d.subset(&train), d.subset(&test)))
}

/// Assignment of every training row to one of `k` folds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    pub fn n(&self) -> usize {
        self.assignments.len()
    }

    /// Rows in fold `f`, ascending.
    pub fn fold_rows(&self, f: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter_map(|(i, &a)| (a == f).then_some(i))
            .collect()
    }

    /// Rows outside fold `f`, ascending.
    pub fn out_of_fold_rows(&self, f: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter_map(|(i, &a)| (a != f).then_some(i))
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = alloc::vec![0; self.k];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }
}

/// Balanced k-fold plan over `n` rows: rows are permuted with `seed` and
/// dealt round-robin, so fold sizes differ by at most one.
pub fn kfold_plan(n: usize, k: usize, seed: u64) -> Result<FoldPlan, DatasetError> {
    if k < 2 || k > n {
        return Err(DatasetError::BadFoldCount { k, n });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    rng::shuffle(&mut rng::stream(seed, streams::FOLDS), &mut perm);
    let mut assignments = alloc::vec![0; n];
    for (pos, &row) in perm.iter().enumerate() {
        assignments[row] = pos % k;
    }
    Ok(FoldPlan { k, assignments, seed })
}

pub fn kfold_partition(d: &Dataset, k: usize, seed: u64) -> Result<FoldPlan, DatasetError> {
    kfold_plan(d.n(), k, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;
    use proptest::prelude::*;

    fn names(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn raw_with_missingness(fracs: &[usize]) -> RawDataset {
        // 10 rows; column j has fracs[j] missing cells at the top.
        let response = (0..10).map(|i| Some(i as f64)).collect();
        let features = fracs
            .iter()
            .map(|&m| (0..10).map(|i| if i < m { None } else { Some(i as f64 * 2.0) }).collect())
            .collect();
        let fnames = (0..fracs.len()).map(|j| format!("f{j}")).collect();
        RawDataset::new("t", "q", response, fnames, features).unwrap()
    }

    #[test]
    fn missing_fraction_counted() {
        let raw = raw_with_missingness(&[0, 6]);
        assert_eq!(raw.missing_fractions(), vec![0.0, 0.6]);
    }

    #[test]
    fn clean_drops_missing_response_rows() {
        let mut raw = raw_with_missingness(&[0]);
        raw.response[2] = None;
        raw.response[7] = None;
        let (d, rep) = clean(&raw, 0.5).unwrap();
        assert_eq!(d.n(), 8);
        assert_eq!(rep.rows_dropped, vec![2, 7]);
        assert!(!d.response().contains(&2.0));
    }

    #[test]
    fn column_thresholds() {
        let raw = raw_with_missingness(&[0, 2, 6]);
        let (d50, _) = clean(&raw, 0.5).unwrap();
        assert_eq!(d50.p(), 2);
        let (d10, rep) = clean(&raw, 0.1).unwrap();
        assert_eq!(d10.p(), 1);
        assert_eq!(rep.columns_dropped, names(&["f1", "f2"]));
    }

    #[test]
    fn median_imputation() {
        let raw = RawDataset::new(
            "m",
            "q",
            vec![Some(1.0), Some(2.0), Some(3.0), Some(4.0), None],
            names(&["a"]),
            vec![vec![Some(1.0), None, Some(3.0), Some(5.0), Some(100.0)]],
        )
        .unwrap();
        let (d, rep) = clean(&raw, 0.5).unwrap();
        assert_eq!(d.features().column(0), vec![1.0, 3.0, 3.0, 5.0]);
        assert_eq!(rep.imputed_cells, 1);
        assert_eq!(d.imputed_cells, 1);
    }

    #[test]
    fn clean_errors() {
        let raw = RawDataset::new("e", "q", vec![None, None], names(&["a"]), vec![vec![Some(1.0), Some(2.0)]]).unwrap();
        assert_eq!(clean(&raw, 0.5).unwrap_err(), DatasetError::NoRows("e".into()));
        let raw = raw_with_missingness(&[6]);
        assert_eq!(clean(&raw, 0.1).unwrap_err(), DatasetError::NoFeatures("t".into()));
        assert!(matches!(clean(&raw, 0.0), Err(DatasetError::BadThreshold(_))));
    }

    #[test]
    fn variants() {
        assert_eq!(make_variants(&raw_with_missingness(&[0, 1])).unwrap().len(), 1);
        let v = make_variants(&raw_with_missingness(&[0, 3])).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v[0].0.name, "t_lt50");
        assert_eq!(v[1].0.name, "t_lt10");
        assert_eq!(v[0].0.n(), v[1].0.n());
        assert_eq!(v[0].0.p(), 2);
        assert_eq!(v[1].0.p(), 1);
    }

    fn toy(n: usize) -> Dataset {
        let x = Matrix::new(n, 1, (0..n).map(|i| i as f64).collect());
        Dataset::from_parts("toy", x, (0..n).map(|i| i as f64 * 0.5).collect()).unwrap()
    }

    #[test]
    fn split_sizes() {
        let (tr, te) = train_test_split(&toy(100), SplitSpec::new(1)).unwrap();
        assert_eq!((tr.n(), te.n()), (80, 20));
        let (tr, te) = train_test_split(&toy(94), SplitSpec::new(1)).unwrap();
        assert_eq!((tr.n(), te.n()), (75, 19));
        assert!(matches!(
            split_indices(2, SplitSpec { test_fraction: 0.2, seed: 0 }),
            Err(DatasetError::EmptySplit { .. })
        ));
    }

    #[test]
    fn split_is_deterministic_and_ordered() {
        let a = split_indices(50, SplitSpec::new(9)).unwrap();
        let b = split_indices(50, SplitSpec::new(9)).unwrap();
        assert_eq!(a, b);
        assert!(a.0.windows(2).all(|w| w[0] < w[1]));
        assert_ne!(a, split_indices(50, SplitSpec::new(10)).unwrap());
    }

    #[test]
    fn fold_sizes() {
        let mut s = kfold_plan(100, 10, 3).unwrap().fold_sizes();
        assert!(s.iter().all(|&x| x == 10));
        s = kfold_plan(75, 10, 3).unwrap().fold_sizes();
        s.sort_unstable();
        assert_eq!(s, vec![7, 7, 7, 7, 7, 8, 8, 8, 8, 8]);
        assert!(kfold_plan(5, 5, 0).unwrap().fold_sizes().iter().all(|&x| x == 1));
        assert!(kfold_plan(5, 6, 0).is_err());
        assert!(kfold_plan(5, 1, 0).is_err());
    }

    proptest! {
        #[test]
        fn folds_partition_rows(n in 2usize..200, k in 2usize..12, seed in any::<u64>()) {
            prop_assume!(k <= n);
            let plan = kfold_plan(n, k, seed).unwrap();
            let sizes = plan.fold_sizes();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            let mut all: Vec<usize> = (0..k).flat_map(|f| plan.fold_rows(f)).collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        }

        #[test]
        fn clean_is_idempotent(
            cells in proptest::collection::vec(proptest::option::weighted(0.8, -5.0f64..5.0), 30),
            resp in proptest::collection::vec(proptest::option::weighted(0.9, -5.0f64..5.0), 10),
            t in prop_oneof![Just(0.1f64), Just(0.5), 0.05f64..1.0],
        ) {
            let features: Vec<Vec<Option<f64>>> = cells.chunks(10).map(<[_]>::to_vec).collect();
            let raw = RawDataset::new("p", "q", resp, names(&["a", "b", "c"]), features).unwrap();
            if let Ok((once, _)) = clean(&raw, t) {
                let (twice, rep) = clean(&RawDataset::from(&once), t).unwrap();
                prop_assert_eq!(twice.features(), once.features());
                prop_assert_eq!(twice.response(), once.response());
                prop_assert_eq!(rep.imputed_cells, 0);
            }
        }

        #[test]
        fn imputation_keeps_observed_cells(
            cells in proptest::collection::vec(proptest::option::weighted(0.7, -5.0f64..5.0), 12),
        ) {
            let resp = (0..12).map(|i| Some(i as f64)).collect();
            let raw = RawDataset::new("p", "q", resp, names(&["a"]), vec![cells.clone()]).unwrap();
            if let Ok((d, _)) = clean(&raw, 1.0) {
                for (i, c) in cells.iter().enumerate() {
                    if let Some(v) = c {
                        prop_assert_eq!(d.features().get(i, 0), *v);
                    }
                }
            }
        }
    }
}
