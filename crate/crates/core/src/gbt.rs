//! Second-order gradient tree boosting with L1/L2-regularized leaf weights
//! and squared-error loss.
//!
//! Trees are grown level by level with exact split search: every feature is
//! sorted once per fit, and each level scans those orders once, routing each
//! row's gradient to the frontier node that currently holds it.

use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::math;
use crate::matrix::Matrix;
use crate::model::FitError;
use crate::rf::{check_input, midpoint};
use crate::rng;
use crate::tree::{Node, RegressionTree};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GbtHyperParams {
    pub nrounds: usize,
    /// Shrinkage applied to every tree's leaf weights.
    pub eta: f64,
    pub subsample: f64,
    pub max_depth: usize,
    /// Minimum hessian sum (row count, for squared error) in each child.
    pub min_child_weight: f64,
    pub colsample_bytree: f64,
    /// L1 penalty on leaf weights.
    pub alpha: f64,
    /// L2 penalty on leaf weights.
    pub lambda: f64,
}

impl GbtHyperParams {
    pub fn validate(&self) -> Result<(), FitError> {
        let bad = |what: &str| Err(FitError::InvalidParams(String::from(what)));
        let unit = |v: f64| v > 0.0 && v <= 1.0;
        if self.nrounds < 1 {
            return bad("nrounds must be at least 1");
        }
        if !unit(self.eta) {
            return bad("eta must lie in (0, 1]");
        }
        if !unit(self.subsample) {
            return bad("subsample must lie in (0, 1]");
        }
        if self.max_depth < 1 {
            return bad("max_depth must be at least 1");
        }
        if !(self.min_child_weight > 0.0 && self.min_child_weight.is_finite()) {
            return bad("min_child_weight must be positive");
        }
        if !unit(self.colsample_bytree) {
            return bad("colsample_bytree must lie in (0, 1]");
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad("alpha must be non-negative");
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be non-negative");
        }
        Ok(())
    }
}

/// Minimizer of `G w + (H + lambda) w^2 / 2 + alpha |w|`:
/// `-sign(G) max(0, |G| - alpha) / (H + lambda)`.
pub fn leaf_weight(gradient_sum: f64, hessian_sum: f64, lambda: f64, alpha: f64) -> Result<f64, FitError> {
    let denom = hessian_sum + lambda;
    if denom <= 0.0 {
        return Err(FitError::InvalidParams(String::from("hessian sum plus lambda must be positive")));
    }
    Ok(leaf_weight_unchecked(gradient_sum, denom, alpha))
}

#[inline]
fn leaf_weight_unchecked(g: f64, denom: f64, alpha: f64) -> f64 {
    let shrunk = soft_threshold(g, alpha);
    -shrunk / denom
}

#[inline]
fn soft_threshold(g: f64, alpha: f64) -> f64 {
    if g > alpha {
        g - alpha
    } else if g < -alpha {
        g + alpha
    } else {
        0.0
    }
}

#[inline]
fn score(g: f64, denom: f64, alpha: f64) -> f64 {
    let t = soft_threshold(g, alpha);
    t * t / denom
}

/// Loss reduction of splitting a node into children with gradient/hessian
/// sums `(gl, hl)` and `(gr, hr)`:
/// `(S(gl)/(hl+lambda) + S(gr)/(hr+lambda) - S(gl+gr)/(hl+hr+lambda)) / 2`
/// with `S(g) = max(0, |g| - alpha)^2`. Callers accept a split only when
/// this is positive and both children meet `min_child_weight`.
pub fn split_gain(gl: f64, hl: f64, gr: f64, hr: f64, lambda: f64, alpha: f64) -> f64 {
    0.5 * (score(gl, hl + lambda, alpha) + score(gr, hr + lambda, alpha)
        - score(gl + gr, hl + hr + lambda, alpha))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoostedModel {
    pub base_score: f64,
    pub params: GbtHyperParams,
    pub seed: u64,
    pub n_features: usize,
    /// Leaf values already include the `eta` shrinkage.
    pub trees: Vec<RegressionTree>,
}

impl BoostedModel {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.base_score + self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>()
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>, FitError> {
        check_input(x, self.n_features)?;
        Ok((0..x.rows()).map(|r| self.predict_row(x.row(r))).collect())
    }

    /// The model after its first `rounds` trees.
    pub fn truncated(&self, rounds: usize) -> BoostedModel {
        BoostedModel { trees: self.trees[..rounds.min(self.trees.len())].to_vec(), ..self.clone() }
    }
}

/// Boosts `params.nrounds` trees from a base score of the training mean.
/// Round `m` draws its row and column subsamples from stream `m` of `seed`.
pub fn fit_gbt(train: &Dataset, params: &GbtHyperParams, seed: u64) -> Result<BoostedModel, FitError> {
    params.validate()?;
    let x = train.features();
    let y = train.response();
    if !x.all_finite() || !y.iter().all(|v| v.is_finite()) {
        return Err(FitError::NonFinite);
    }
    let n = train.n();
    let p = train.p();
    let n_rows = sample_count(params.subsample, n);
    let n_cols = sample_count(params.colsample_bytree, p);
    if n_rows == 0 || n_cols == 0 {
        return Err(FitError::EmptySample);
    }

    let columns: Vec<Vec<f64>> = (0..p).map(|j| x.column(j)).collect();
    let orders: Vec<Vec<u32>> = columns
        .iter()
        .map(|c| {
            let mut o: Vec<u32> = (0..n as u32).collect();
            o.sort_by(|&a, &b| c[a as usize].total_cmp(&c[b as usize]));
            o
        })
        .collect();

    let base_score = math::mean(y);
    let mut pred = alloc::vec![base_score; n];
    let mut builder = LevelBuilder::new(n, params);
    let mut trees = Vec::with_capacity(params.nrounds);
    for round in 0..params.nrounds {
        let mut rng = rng::stream(seed, round as u64);
        let rows: Vec<usize> = if n_rows == n {
            (0..n).collect()
        } else {
            let mut r = rng::sample_without_replacement(&mut rng, n, n_rows);
            r.sort_unstable();
            r
        };
        let cols: Vec<usize> = if n_cols == p {
            (0..p).collect()
        } else {
            let mut c = rng::sample_without_replacement(&mut rng, p, n_cols);
            c.sort_unstable();
            c
        };
        let grad: Vec<f64> = pred.iter().zip(y).map(|(f, t)| f - t).collect();
        let tree = builder.build(&columns, &orders, &grad, &rows, &cols);
        for (i, v) in pred.iter_mut().enumerate() {
            *v += tree.predict_row(x.row(i));
        }
        trees.push(tree);
    }
    Ok(BoostedModel { base_score, params: *params, seed, n_features: p, trees })
}

/// `max(1, round(fraction * count))`, capped at `count`.
fn sample_count(fraction: f64, count: usize) -> usize {
    if count == 0 {
        return 0;
    }
    (math::round(fraction * count as f64) as usize).clamp(1, count)
}

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy)]
struct Frontier {
    node: usize,
    g: f64,
    h: f64,
}

#[derive(Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

#[derive(Clone, Copy, Default)]
struct Running {
    g: f64,
    h: f64,
    last: f64,
}

struct LevelBuilder {
    lambda: f64,
    alpha: f64,
    eta: f64,
    min_child_weight: f64,
    max_depth: usize,
    /// Frontier slot of each row, or `NONE`.
    slot: Vec<u32>,
}

impl LevelBuilder {
    fn new(n: usize, p: &GbtHyperParams) -> Self {
        Self {
            lambda: p.lambda,
            alpha: p.alpha,
            eta: p.eta,
            min_child_weight: p.min_child_weight,
            max_depth: p.max_depth,
            slot: alloc::vec![NONE; n],
        }
    }

    fn leaf(&self, f: &Frontier) -> Node {
        Node::Leaf { value: self.eta * leaf_weight_unchecked(f.g, f.h + self.lambda, self.alpha) }
    }

    fn build(&mut self, columns: &[Vec<f64>], orders: &[Vec<u32>], grad: &[f64], rows: &[usize], cols: &[usize]) -> RegressionTree {
        self.slot.fill(NONE);
        let mut g = 0.0;
        for &r in rows {
            self.slot[r] = 0;
            g += grad[r];
        }
        let mut nodes = alloc::vec![Node::Leaf { value: 0.0 }];
        let mut frontier = alloc::vec![Frontier { node: 0, g, h: rows.len() as f64 }];
        let mut depth = 0;
        while !frontier.is_empty() {
            if depth == self.max_depth {
                for f in &frontier {
                    nodes[f.node] = self.leaf(f);
                }
                break;
            }
            let active: Vec<bool> = frontier.iter().map(|f| f.h >= 2.0 * self.min_child_weight && f.h >= 2.0).collect();
            let mut best: Vec<Option<Candidate>> = alloc::vec![None; frontier.len()];
            if active.iter().any(|&a| a) {
                let mut run = alloc::vec![Running::default(); frontier.len()];
                for &feature in cols {
                    let col = &columns[feature];
                    run.fill(Running::default());
                    for &r in &orders[feature] {
                        let s = self.slot[r as usize];
                        if s == NONE || !active[s as usize] {
                            continue;
                        }
                        let s = s as usize;
                        let v = col[r as usize];
                        let acc = &mut run[s];
                        if acc.h > 0.0 && v > acc.last {
                            let f = &frontier[s];
                            let hr = f.h - acc.h;
                            if acc.h >= self.min_child_weight && hr >= self.min_child_weight {
                                let gain = split_gain(acc.g, acc.h, f.g - acc.g, hr, self.lambda, self.alpha);
                                if gain > 0.0 && best[s].is_none_or(|b| gain > b.gain) {
                                    best[s] = Some(Candidate { gain, feature, threshold: midpoint(acc.last, v) });
                                }
                            }
                        }
                        acc.g += grad[r as usize];
                        acc.h += 1.0;
                        acc.last = v;
                    }
                }
            }

            // Children of frontier slot `s` occupy slots `child_slot[s]` and `+ 1`.
            let mut next = Vec::new();
            let mut child_slot = alloc::vec![NONE; frontier.len()];
            for (s, f) in frontier.iter().enumerate() {
                match best[s] {
                    Some(c) => {
                        let l = nodes.len();
                        nodes.push(Node::Leaf { value: 0.0 });
                        nodes.push(Node::Leaf { value: 0.0 });
                        nodes[f.node] = Node::Split { feature: c.feature, threshold: c.threshold, left: l, right: l + 1 };
                        child_slot[s] = next.len() as u32;
                        next.push(Frontier { node: l, g: 0.0, h: 0.0 });
                        next.push(Frontier { node: l + 1, g: 0.0, h: 0.0 });
                    }
                    None => nodes[f.node] = self.leaf(f),
                }
            }
            for &r in rows {
                let s = self.slot[r];
                if s == NONE {
                    continue;
                }
                let s = s as usize;
                match best[s] {
                    Some(c) => {
                        let mut cs = child_slot[s] as usize;
                        if columns[c.feature][r] >= c.threshold {
                            cs += 1;
                        }
                        next[cs].g += grad[r];
                        next[cs].h += 1.0;
                        self.slot[r] = cs as u32;
                    }
                    None => self.slot[r] = NONE,
                }
            }
            frontier = next;
            depth += 1;
        }
        RegressionTree::from_nodes(nodes)
    }
}
