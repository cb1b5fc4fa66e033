//! Algorithm tags, the published default configurations, and the random
//! search space for each algorithm.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::gbt::GbtHyperParams;
use crate::math;
use crate::model::FitError;
use crate::rf::{self, Mtry, RfHyperParams};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Rf,
    Gbt,
}

impl Algorithm {
    pub const ALL: [Algorithm; 2] = [Algorithm::Rf, Algorithm::Gbt];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Rf => "rf",
            Algorithm::Gbt => "gbt",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "rf" => Ok(Algorithm::Rf),
            "gbt" | "xgb" => Ok(Algorithm::Gbt),
            other => Err(alloc::format!("unknown algorithm `{other}` (expected rf or gbt)")),
        }
    }
}

/// How a configuration was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Default,
    OptDefault,
    Random,
    Meta,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Default => "default",
            Strategy::OptDefault => "opt_default",
            Strategy::Random => "random",
            Strategy::Meta => "meta",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "default" => Ok(Strategy::Default),
            "opt_default" | "optdefault" => Ok(Strategy::OptDefault),
            "random" => Ok(Strategy::Random),
            "meta" => Ok(Strategy::Meta),
            other => Err(alloc::format!("unknown strategy `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "lowercase")]
pub enum HyperParams {
    Rf(RfHyperParams),
    Gbt(GbtHyperParams),
}

impl HyperParams {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            HyperParams::Rf(_) => Algorithm::Rf,
            HyperParams::Gbt(_) => Algorithm::Gbt,
        }
    }

    pub fn validate(&self) -> Result<(), FitError> {
        match self {
            HyperParams::Rf(p) => p.validate(),
            HyperParams::Gbt(p) => p.validate(),
        }
    }

    /// Column names of [`HyperParams::encode`] for `algorithm`.
    pub fn encoded_names(algorithm: Algorithm) -> &'static [&'static str] {
        match algorithm {
            Algorithm::Rf => &["mtry", "num_trees", "replace", "min_node_size_exponent", "sample_fraction"],
            Algorithm::Gbt => &[
                "nrounds",
                "log2_eta",
                "subsample",
                "max_depth",
                "log2_min_child_weight",
                "colsample_bytree",
                "log2_alpha",
                "log2_lambda",
            ],
        }
    }

    /// Flattens the configuration onto its sampling scale: log2 for eta,
    /// min_child_weight, alpha and lambda, the exponent for min node size.
    /// `p` resolves the `sqrt(p)` mtry rule. Penalties below the search
    /// floor (including 0) encode as the floor.
    pub fn encode(&self, p: usize) -> Vec<f64> {
        match self {
            HyperParams::Rf(r) => alloc::vec![
                r.mtry.fraction(p),
                r.num_trees as f64,
                if r.replace { 1.0 } else { 0.0 },
                r.min_node_size_exponent,
                r.sample_fraction,
            ],
            HyperParams::Gbt(g) => {
                let floor = |v: f64| math::log2(v.max(PENALTY_FLOOR));
                alloc::vec![
                    g.nrounds as f64,
                    math::log2(g.eta),
                    g.subsample,
                    g.max_depth as f64,
                    math::log2(g.min_child_weight),
                    g.colsample_bytree,
                    floor(g.alpha),
                    floor(g.lambda),
                ]
            }
        }
    }
}

impl fmt::Display for HyperParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HyperParams::Rf(r) => write!(
                f,
                "rf(mtry={}, num_trees={}, replace={}, min_node_size_exponent={}, sample_fraction={})",
                r.mtry, r.num_trees, r.replace, r.min_node_size_exponent, r.sample_fraction
            ),
            HyperParams::Gbt(g) => write!(
                f,
                "gbt(nrounds={}, eta={}, subsample={}, max_depth={}, min_child_weight={}, colsample_bytree={}, alpha={}, lambda={})",
                g.nrounds, g.eta, g.subsample, g.max_depth, g.min_child_weight, g.colsample_bytree, g.alpha, g.lambda
            ),
        }
    }
}

/// Lower end of the `2^[-10, 10]` penalty range.
pub const PENALTY_FLOOR: f64 = 1.0 / 1024.0;

/// Package defaults.
pub fn default_params(algorithm: Algorithm) -> HyperParams {
    match algorithm {
        Algorithm::Rf => HyperParams::Rf(RfHyperParams {
            mtry: Mtry::Sqrt,
            num_trees: 500,
            replace: true,
            min_node_size_exponent: 0.0,
            sample_fraction: 1.0,
        }),
        Algorithm::Gbt => HyperParams::Gbt(GbtHyperParams {
            nrounds: 500,
            eta: 0.3,
            subsample: 1.0,
            max_depth: 6,
            min_child_weight: 1.0,
            colsample_bytree: 1.0,
            alpha: 0.0,
            lambda: 1.0,
        }),
    }
}

/// Optimal defaults tuned across many datasets. The forest's node size of 1
/// is exponent 0.
pub fn optimal_default_params(algorithm: Algorithm) -> HyperParams {
    match algorithm {
        Algorithm::Rf => HyperParams::Rf(RfHyperParams {
            mtry: Mtry::Fraction(0.257),
            num_trees: 983,
            replace: false,
            min_node_size_exponent: 0.0,
            sample_fraction: 0.703,
        }),
        Algorithm::Gbt => HyperParams::Gbt(GbtHyperParams {
            nrounds: 4168,
            eta: 0.018,
            subsample: 0.839,
            max_depth: 13,
            min_child_weight: 2.06,
            colsample_bytree: 0.752,
            alpha: 1.113,
            lambda: 0.982,
        }),
    }
}

/// Scale on which one hyperparameter is drawn.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scale", rename_all = "snake_case")]
pub enum Scale {
    /// Uniform real in `[lo, hi]`.
    Linear { lo: f64, hi: f64 },
    /// Uniform real in `(0, hi]`.
    OpenLow { hi: f64 },
    /// Uniform integer in `[lo, hi]`.
    Integer { lo: usize, hi: usize },
    /// `2^u` with `u` uniform in `[lo, hi]`.
    Log2 { lo: f64, hi: f64 },
    /// `n^u` with `u` uniform in `[0, 1]`; the exponent is what is stored.
    ExponentOfN,
    Boolean,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dimension {
    pub name: &'static str,
    #[serde(flatten)]
    pub scale: Scale,
}

/// Per-hyperparameter random search domain.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchSpace {
    pub algorithm: Algorithm,
    pub dimensions: Vec<Dimension>,
}

impl SearchSpace {
    pub fn for_algorithm(algorithm: Algorithm) -> Self {
        let d = |name, scale| Dimension { name, scale };
        let dimensions = match algorithm {
            Algorithm::Rf => alloc::vec![
                d("mtry", Scale::Linear { lo: 0.1, hi: 1.0 }),
                d("num_trees", Scale::Integer { lo: 10, hi: 2000 }),
                d("replace", Scale::Boolean),
                d("min_node_size", Scale::ExponentOfN),
                d("sample_fraction", Scale::Linear { lo: 0.1, hi: 1.0 }),
            ],
            Algorithm::Gbt => alloc::vec![
                d("nrounds", Scale::Integer { lo: 1, hi: 5000 }),
                d("eta", Scale::Log2 { lo: -10.0, hi: 0.0 }),
                d("subsample", Scale::Linear { lo: 0.1, hi: 1.0 }),
                d("max_depth", Scale::Integer { lo: 1, hi: 15 }),
                d("min_child_weight", Scale::Log2 { lo: 0.0, hi: 7.0 }),
                d("colsample_bytree", Scale::OpenLow { hi: 1.0 }),
                d("alpha", Scale::Log2 { lo: -10.0, hi: 10.0 }),
                d("lambda", Scale::Log2 { lo: -10.0, hi: 10.0 }),
            ],
        };
        Self { algorithm, dimensions }
    }

    fn draw<R: Rng>(scale: Scale, rng: &mut R) -> f64 {
        match scale {
            Scale::Linear { lo, hi } => rng::uniform(rng, lo, hi),
            Scale::OpenLow { hi } => rng::uniform_open_low(rng, hi),
            Scale::Integer { lo, hi } => (lo + rng::below(rng, hi - lo + 1)) as f64,
            Scale::Log2 { lo, hi } => math::exp2(rng::uniform(rng, lo, hi)),
            Scale::ExponentOfN => rng::unit(rng),
            Scale::Boolean => (rng::below(rng, 2)) as f64,
        }
    }

    /// One configuration, every field drawn in declaration order from `rng`.
    pub fn sample_with<R: Rng>(&self, rng: &mut R) -> HyperParams {
        let v: Vec<f64> = self.dimensions.iter().map(|d| Self::draw(d.scale, rng)).collect();
        match self.algorithm {
            Algorithm::Rf => HyperParams::Rf(RfHyperParams {
                mtry: Mtry::Fraction(v[0]),
                num_trees: v[1] as usize,
                replace: v[2] != 0.0,
                min_node_size_exponent: v[3],
                sample_fraction: v[4],
            }),
            Algorithm::Gbt => HyperParams::Gbt(GbtHyperParams {
                nrounds: v[0] as usize,
                eta: v[1].min(1.0),
                subsample: v[2],
                max_depth: v[3] as usize,
                min_child_weight: v[4],
                colsample_bytree: v[5],
                alpha: v[6],
                lambda: v[7],
            }),
        }
    }

    /// Whether `params` lies inside this space for a dataset of `n` rows.
    pub fn contains(&self, params: &HyperParams, n: usize) -> bool {
        let within = |v: f64, lo: f64, hi: f64| v >= lo && v <= hi;
        let pow2 = |e: f64| math::exp2(e);
        match (self.algorithm, params) {
            (Algorithm::Rf, HyperParams::Rf(r)) => {
                let mtry_ok = match r.mtry {
                    Mtry::Fraction(f) => within(f, 0.1, 1.0),
                    Mtry::Sqrt => true,
                };
                let node = rf::min_node_size(n, r.min_node_size_exponent);
                mtry_ok
                    && within(r.num_trees as f64, 10.0, 2000.0)
                    && within(r.min_node_size_exponent, 0.0, 1.0)
                    && node >= 1
                    && node <= n
                    && within(r.sample_fraction, 0.1, 1.0)
            }
            (Algorithm::Gbt, HyperParams::Gbt(g)) => {
                within(g.nrounds as f64, 1.0, 5000.0)
                    && within(g.eta, pow2(-10.0), 1.0)
                    && within(g.subsample, 0.1, 1.0)
                    && within(g.max_depth as f64, 1.0, 15.0)
                    && within(g.min_child_weight, 1.0, 128.0)
                    && g.colsample_bytree > 0.0
                    && g.colsample_bytree <= 1.0
                    && within(g.alpha, pow2(-10.0), pow2(10.0))
                    && within(g.lambda, pow2(-10.0), pow2(10.0))
            }
            _ => false,
        }
    }
}

/// Random configuration for `space` from stream `(seed, 0)`.
///
/// `n_dataset_rows` is accepted for symmetry with the `n^[0,1]` node-size
/// scale; the stored exponent does not depend on it.
pub fn sample_random(space: &SearchSpace, n_dataset_rows: usize, seed: u64) -> HyperParams {
    let _ = n_dataset_rows;
    space.sample_with(&mut rng::stream(seed, rng::streams::SAMPLE))
}
