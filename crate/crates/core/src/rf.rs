//! Random forest regression: bagged CART trees with per-node feature
//! subsampling.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::math;
use crate::matrix::Matrix;
use crate::model::FitError;
use crate::par;
use crate::rng::{self, StreamRng};
use crate::tree::{Node, RegressionTree};

/// Features tried per split: the `sqrt(p)` package rule or a fraction of p.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "MtryRepr", try_from = "MtryRepr")]
pub enum Mtry {
    Sqrt,
    Fraction(f64),
}

impl Mtry {
    /// The rule as a fraction of `p`.
    pub fn fraction(self, p: usize) -> f64 {
        match self {
            Mtry::Sqrt => math::sqrt(p as f64) / p as f64,
            Mtry::Fraction(f) => f,
        }
    }
}

impl fmt::Display for Mtry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mtry::Sqrt => f.write_str("sqrt"),
            Mtry::Fraction(x) => write!(f, "{x}"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MtryRepr {
    Fraction(f64),
    Rule(String),
}

impl From<Mtry> for MtryRepr {
    fn from(m: Mtry) -> Self {
        match m {
            Mtry::Sqrt => MtryRepr::Rule("sqrt".into()),
            Mtry::Fraction(f) => MtryRepr::Fraction(f),
        }
    }
}

impl TryFrom<MtryRepr> for Mtry {
    type Error = String;
    fn try_from(r: MtryRepr) -> Result<Self, String> {
        match r {
            MtryRepr::Fraction(f) => Ok(Mtry::Fraction(f)),
            MtryRepr::Rule(s) if s == "sqrt" => Ok(Mtry::Sqrt),
            MtryRepr::Rule(s) => Err(alloc::format!("unknown mtry rule `{s}`")),
        }
    }
}

/// The five random forest hyperparameters.
///
/// `min_node_size_exponent` is `u` in `node size = max(1, round(n^u))`, so
/// 0 gives the deepest trees and 1 a single leaf.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RfHyperParams {
    pub mtry: Mtry,
    pub num_trees: usize,
    pub replace: bool,
    pub min_node_size_exponent: f64,
    pub sample_fraction: f64,
}

impl RfHyperParams {
    pub fn validate(&self) -> Result<(), FitError> {
        let bad = |what: &str| Err(FitError::InvalidParams(String::from(what)));
        if let Mtry::Fraction(f) = self.mtry {
            if !(f > 0.0 && f <= 1.0) {
                return bad("mtry fraction must lie in (0, 1]");
            }
        }
        if self.num_trees < 1 {
            return bad("num_trees must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.min_node_size_exponent) {
            return bad("min_node_size exponent must lie in [0, 1]");
        }
        if !(self.sample_fraction > 0.0 && self.sample_fraction <= 1.0) {
            return bad("sample_fraction must lie in (0, 1]");
        }
        Ok(())
    }

    /// `max(1, round(fraction * p))`, capped at `p`.
    pub fn effective_mtry(&self, p: usize) -> usize {
        let m = math::round(self.mtry.fraction(p) * p as f64) as usize;
        m.clamp(1, p.max(1))
    }

    /// `max(1, round(n^u))`, capped at `n`.
    pub fn min_node_size(&self, n: usize) -> usize {
        min_node_size(n, self.min_node_size_exponent)
    }

    /// Rows drawn per tree.
    pub fn bag_size(&self, n: usize) -> usize {
        math::round(self.sample_fraction * n as f64) as usize
    }
}

pub fn min_node_size(n: usize, exponent: f64) -> usize {
    let s = math::round(math::powf(n as f64, exponent)) as usize;
    s.clamp(1, n.max(1))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub params: RfHyperParams,
    pub seed: u64,
    pub n_features: usize,
    /// Whether some training rows were left out of each bag.
    pub oob_available: bool,
    pub trees: Vec<RegressionTree>,
}

impl Forest {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        mean_exact_if_equal(self.trees.iter().map(|t| t.predict_row(row)))
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>, FitError> {
        check_input(x, self.n_features)?;
        Ok((0..x.rows()).map(|r| self.predict_row(x.row(r))).collect())
    }
}

pub(crate) fn check_input(x: &Matrix, expected: usize) -> Result<(), FitError> {
    if x.cols() != expected {
        return Err(FitError::ColumnMismatch { expected, got: x.cols() });
    }
    if !x.all_finite() {
        return Err(FitError::NonFinite);
    }
    Ok(())
}

/// Mean as `v0 + sum(v - v0) / k`; exact when all values are equal.
fn mean_exact_if_equal(mut it: impl Iterator<Item = f64>) -> f64 {
    let Some(first) = it.next() else { return 0.0 };
    let mut k = 1usize;
    let mut shift = 0.0;
    for v in it {
        shift += v - first;
        k += 1;
    }
    first + shift / k as f64
}

/// Fits `params.num_trees` trees. Tree `i` draws its bag and node feature
/// subsets from its own stream of `seed`, so the forest does not depend on
/// how trees are scheduled and a longer forest extends a shorter one.
/// Bags index rows in lexicographic order of `(features, response)`, so the
/// fit does not depend on the order rows are given in.
pub fn fit_forest(train: &Dataset, params: &RfHyperParams, seed: u64) -> Result<Forest, FitError> {
    params.validate()?;
    let x = train.features();
    if !x.all_finite() || !train.response().iter().all(|v| v.is_finite()) {
        return Err(FitError::NonFinite);
    }
    let n = train.n();
    let p = train.p();
    let bag_size = params.bag_size(n);
    if bag_size < 1 {
        return Err(FitError::EmptySample);
    }
    let order = canonical_order(x, train.response());
    let x = &x.select_rows(&order);
    let y: Vec<f64> = order.iter().map(|&r| train.response()[r]).collect();
    let grower = TreeGrower {
        x,
        y: &y,
        mtry: params.effective_mtry(p),
        min_node: params.min_node_size(n),
    };
    let trees = par::map_indexed(params.num_trees, |i| {
        let mut rng = rng::stream(seed, i as u64);
        let rows = draw_bag(&mut rng, n, bag_size, params.replace);
        grower.grow(rows, &mut rng)
    });
    Ok(Forest {
        params: *params,
        seed,
        n_features: p,
        oob_available: params.replace || bag_size < n,
        trees,
    })
}

fn canonical_order(x: &Matrix, y: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x.rows()).collect();
    order.sort_by(|&a, &b| {
        x.row(a)
            .iter()
            .zip(x.row(b))
            .map(|(u, v)| u.total_cmp(v))
            .chain(core::iter::once(y[a].total_cmp(&y[b])))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    });
    order
}

/// Bag of row indices, ascending.
fn draw_bag(rng: &mut StreamRng, n: usize, size: usize, replace: bool) -> Vec<usize> {
    let mut rows = if replace {
        (0..size).map(|_| rng::below(rng, n)).collect()
    } else {
        rng::sample_without_replacement(rng, n, size)
    };
    rows.sort_unstable();
    rows
}

struct TreeGrower<'a> {
    x: &'a Matrix,
    y: &'a [f64],
    mtry: usize,
    min_node: usize,
}

impl TreeGrower<'_> {
    fn grow(&self, rows: Vec<usize>, rng: &mut StreamRng) -> RegressionTree {
        let p = self.x.cols();
        let mut nodes = alloc::vec![Node::Leaf { value: 0.0 }];
        let mut stack = alloc::vec![(0usize, rows)];
        let mut search = SplitSearch::default();
        while let Some((id, rows)) = stack.pop() {
            let value = mean_exact_if_equal(rows.iter().map(|&r| self.y[r]));
            let y0 = self.y[rows[0]];
            if rows.len() < 2 * self.min_node || rows.iter().all(|&r| self.y[r] == y0) {
                nodes[id] = Node::Leaf { value };
                continue;
            }
            let mut features = if self.mtry >= p {
                (0..p).collect()
            } else {
                rng::sample_without_replacement(rng, p, self.mtry)
            };
            features.sort_unstable();
            let Some(split) = search.run(self.x, self.y, &rows, &features, self.min_node) else {
                nodes[id] = Node::Leaf { value };
                continue;
            };
            let (left, right): (Vec<usize>, Vec<usize>) =
                rows.iter().partition(|&&r| self.x.get(r, split.feature) < split.threshold);
            let l = nodes.len();
            nodes.push(Node::Leaf { value: 0.0 });
            nodes.push(Node::Leaf { value: 0.0 });
            nodes[id] = Node::Split { feature: split.feature, threshold: split.threshold, left: l, right: l + 1 };
            stack.push((l + 1, right));
            stack.push((l, left));
        }
        RegressionTree::from_nodes(nodes)
    }
}

/// A candidate split and the drop in residual sum of squares it achieves.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub reduction: f64,
}

/// Best variance-reducing split of `rows` over `features`.
///
/// Thresholds are midpoints between consecutive distinct values; both
/// children must hold at least `min_node` rows. Ties go to the lowest
/// feature index, then the lowest threshold. Returns `None` when no legal
/// split reduces the sum of squares.
pub fn best_split(x: &Matrix, y: &[f64], rows: &[usize], features: &[usize], min_node: usize) -> Option<Split> {
    let mut sorted = features.to_vec();
    sorted.sort_unstable();
    SplitSearch::default().run(x, y, rows, &sorted, min_node)
}

/// Midpoint of `a < b` that still separates them.
pub(crate) fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m > a && m <= b {
        m
    } else {
        b
    }
}

#[derive(Default)]
struct SplitSearch {
    pairs: Vec<(f64, f64)>,
}

impl SplitSearch {
    /// `features` must be ascending.
    fn run(&mut self, x: &Matrix, y: &[f64], rows: &[usize], features: &[usize], min_node: usize) -> Option<Split> {
        let n = rows.len();
        if n < 2 || n < 2 * min_node.max(1) {
            return None;
        }
        let ybar = mean_exact_if_equal(rows.iter().map(|&r| y[r]));
        let total: f64 = rows.iter().map(|&r| y[r] - ybar).sum();
        let base = total * total / n as f64;
        let mut best: Option<Split> = None;
        for &f in features {
            self.pairs.clear();
            self.pairs.extend(rows.iter().map(|&r| (x.get(r, f), y[r] - ybar)));
            self.pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left = 0.0;
            for i in 0..n - 1 {
                left += self.pairs[i].1;
                let (xl, xr) = (self.pairs[i].0, self.pairs[i + 1].0);
                let nl = i + 1;
                let nr = n - nl;
                if xl == xr || nl < min_node || nr < min_node {
                    continue;
                }
                let right = total - left;
                let reduction = left * left / nl as f64 + right * right / nr as f64 - base;
                if reduction > 0.0 && best.is_none_or(|b| reduction > b.reduction) {
                    best = Some(Split { feature: f, threshold: midpoint(xl, xr), reduction });
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics;
    use alloc::vec;
    use proptest::prelude::*;
    use rand::Rng;

    fn fixture() -> (Matrix, Vec<f64>) {
        (Matrix::new(4, 1, vec![1.0, 2.0, 3.0, 4.0]), vec![0.0, 0.0, 10.0, 10.0])
    }

    #[test]
    fn four_row_split() {
        let (x, y) = fixture();
        let s = best_split(&x, &y, &[0, 1, 2, 3], &[0], 1).unwrap();
        assert_eq!(s.feature, 0);
        assert_eq!(s.threshold, 2.5);
        assert!((s.reduction - 100.0).abs() < 1e-12);
        // Children of size 3 are impossible with 4 rows.
        assert!(best_split(&x, &y, &[0, 1, 2, 3], &[0], 3).is_none());
    }

    #[test]
    fn constant_response_has_no_split() {
        let x = Matrix::new(4, 1, vec![1.0, 2.0, 3.0, 4.0]);
        assert!(best_split(&x, &[2.0; 4], &[0, 1, 2, 3], &[0], 1).is_none());
    }

    #[test]
    fn ties_prefer_lowest_feature() {
        let x = Matrix::new(4, 2, vec![1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 4.0, 4.0]);
        let (_, y) = fixture();
        assert_eq!(best_split(&x, &y, &[0, 1, 2, 3], &[1, 0], 1).unwrap().feature, 0);
    }

    #[test]
    fn midpoint_separates_adjacent_floats() {
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        let m = midpoint(a, b);
        assert!(a < m && m <= b);
    }

    fn random_data(seed: u64, n: usize, p: usize) -> Dataset {
        let mut rng = rng::stream(seed, 0);
        let x: Vec<f64> = (0..n * p).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y = (0..n).map(|i| x[i * p] * 3.0 + rng.gen_range(0.0..0.1)).collect();
        Dataset::from_parts("r", Matrix::new(n, p, x), y).unwrap()
    }

    fn params(u: f64, mtry: f64, sf: f64, replace: bool, trees: usize) -> RfHyperParams {
        RfHyperParams { mtry: Mtry::Fraction(mtry), num_trees: trees, replace, min_node_size_exponent: u, sample_fraction: sf }
    }

    #[test]
    fn effective_sizes() {
        let mut p = params(0.0, 1.0, 1.0, true, 1);
        p.mtry = Mtry::Sqrt;
        assert_eq!(p.effective_mtry(16), 4);
        assert_eq!(p.effective_mtry(1), 1);
        assert_eq!(params(0.0, 0.01, 1.0, true, 1).effective_mtry(10), 1);
        assert_eq!(p.min_node_size(571), 1);
        assert_eq!(params(1.0, 1.0, 1.0, true, 1).min_node_size(571), 571);
        assert_eq!(params(0.5, 1.0, 1.0, true, 1).min_node_size(100), 10);
    }

    #[test]
    fn full_node_size_gives_mean_predictor() {
        let d = random_data(1, 40, 3);
        let f = fit_forest(&d, &params(1.0, 1.0, 1.0, false, 5), 3).unwrap();
        assert!(f.trees.iter().all(|t| t.n_leaves() == 1));
        let pred = f.predict(d.features()).unwrap();
        let ybar = math::mean(d.response());
        assert!(pred.iter().all(|v| (v - ybar).abs() < 1e-12));
    }

    #[test]
    fn constant_response() {
        let mut d = random_data(2, 30, 2);
        d = Dataset::from_parts("c", d.features().clone(), vec![4.2; 30]).unwrap();
        let f = fit_forest(&d, &params(0.0, 1.0, 1.0, true, 10), 3).unwrap();
        let pred = f.predict(d.features()).unwrap();
        assert!(pred.iter().all(|&v| v == 4.2));
        assert!(metrics::nse(d.response(), &pred).is_err());
    }

    #[test]
    fn interpolates_training_data() {
        let d = random_data(3, 60, 4);
        let f = fit_forest(&d, &params(0.0, 1.0, 1.0, false, 7), 11).unwrap();
        let pred = f.predict(d.features()).unwrap();
        assert_eq!(metrics::nse(d.response(), &pred).unwrap(), 1.0);
    }

    #[test]
    fn deterministic_and_prefix_stable() {
        let d = random_data(4, 80, 5);
        let p = params(0.2, 0.5, 0.7, true, 12);
        let a = fit_forest(&d, &p, 5).unwrap();
        assert_eq!(a, fit_forest(&d, &p, 5).unwrap());
        let short = fit_forest(&d, &RfHyperParams { num_trees: 5, ..p }, 5).unwrap();
        assert_eq!(&a.trees[..5], &short.trees[..]);
        assert_ne!(a, fit_forest(&d, &p, 6).unwrap());
    }

    #[test]
    fn single_tree_and_identical_trees() {
        let d = random_data(5, 30, 2);
        let f = fit_forest(&d, &params(0.0, 1.0, 1.0, false, 1), 0).unwrap();
        let row = d.features().row(3);
        assert_eq!(f.predict_row(row), f.trees[0].predict_row(row));
        let stump = RegressionTree::leaf(2.75);
        let g = Forest { trees: vec![stump; 9], ..f };
        assert_eq!(g.predict_row(row), 2.75);
    }

    #[test]
    fn without_replacement_full_sample_sees_every_row() {
        let mut rng = rng::stream(0, 0);
        assert_eq!(draw_bag(&mut rng, 17, 17, false), (0..17).collect::<Vec<_>>());
    }

    #[test]
    fn invalid_params_and_inputs() {
        let d = random_data(6, 20, 2);
        assert!(matches!(fit_forest(&d, &params(0.0, 0.0, 1.0, true, 3), 0), Err(FitError::InvalidParams(_))));
        assert!(matches!(fit_forest(&d, &params(1.5, 1.0, 1.0, true, 3), 0), Err(FitError::InvalidParams(_))));
        assert!(matches!(fit_forest(&d, &params(0.0, 1.0, 0.01, true, 3), 0), Err(FitError::EmptySample)));
        let f = fit_forest(&d, &params(0.0, 1.0, 1.0, true, 3), 0).unwrap();
        assert!(matches!(f.predict(&Matrix::zeros(2, 3)), Err(FitError::ColumnMismatch { expected: 2, got: 3 })));
        assert!(matches!(f.predict(&Matrix::new(1, 2, vec![f64::NAN, 0.0])), Err(FitError::NonFinite)));
    }

    #[test]
    fn json_round_trip() {
        let d = random_data(7, 20, 2);
        let mut p = params(0.3, 1.0, 0.8, true, 3);
        p.mtry = Mtry::Sqrt;
        let f = fit_forest(&d, &p, 1).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains("\"mtry\":\"sqrt\""));
        assert_eq!(serde_json::from_str::<Forest>(&s).unwrap(), f);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn predictions_within_training_range(seed in any::<u64>(), u in 0.0f64..1.0, replace in any::<bool>()) {
            let d = random_data(seed, 40, 3);
            let f = fit_forest(&d, &params(u, 0.6, 0.8, replace, 8), seed).unwrap();
            let lo = d.response().iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = d.response().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let probe = random_data(seed ^ 1, 25, 3);
            for v in f.predict(probe.features()).unwrap() {
                prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
            }
        }
    }
}
