//! Nash-Sutcliffe efficiency, modified Kling-Gupta efficiency and score
//! standardization.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("observed and predicted lengths differ ({observed} vs {predicted})")]
    LengthMismatch { observed: usize, predicted: usize },
    #[error("at least 2 values are required, got {0}")]
    TooShort(usize),
    #[error("non-finite value in {0}")]
    NonFinite(Side),
    #[error("{0} values have zero variance")]
    ZeroVariance(Side),
    #[error("{0} values have zero mean")]
    ZeroMean(Side),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Observed,
    Predicted,
    Scores,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Observed => "observed",
            Side::Predicted => "predicted",
            Side::Scores => "score",
        })
    }
}

/// Skill metric used to score and rank configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Nse,
    Kge,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Nse => "nse",
            Metric::Kge => "kge",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = &'static str;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "nse" => Ok(Metric::Nse),
            "kge" => Ok(Metric::Kge),
            _ => Err("metric must be `nse` or `kge`"),
        }
    }
}

/// NSE, KGE and the three KGE components for one prediction vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub nse: f64,
    pub kge: f64,
    /// Pearson correlation between predictions and observations.
    pub r: f64,
    /// Mean of predictions over mean of observations.
    pub alpha: f64,
    /// Coefficient of variation of predictions over that of observations.
    pub beta: f64,
}

fn check(observed: &[f64], predicted: &[f64]) -> Result<(), MetricError> {
    if observed.len() != predicted.len() {
        return Err(MetricError::LengthMismatch { observed: observed.len(), predicted: predicted.len() });
    }
    if observed.len() < 2 {
        return Err(MetricError::TooShort(observed.len()));
    }
    if !observed.iter().all(|v| v.is_finite()) {
        return Err(MetricError::NonFinite(Side::Observed));
    }
    if !predicted.iter().all(|v| v.is_finite()) {
        return Err(MetricError::NonFinite(Side::Predicted));
    }
    Ok(())
}

/// `1 - sum((y - yhat)^2) / sum((y - ybar)^2)`.
pub fn nse(observed: &[f64], predicted: &[f64]) -> Result<f64, MetricError> {
    check(observed, predicted)?;
    let ybar = math::mean(observed);
    let mut sse = 0.0;
    let mut sst = 0.0;
    for (y, yhat) in observed.iter().zip(predicted) {
        sse += (y - yhat) * (y - yhat);
        sst += (y - ybar) * (y - ybar);
    }
    if sst == 0.0 {
        return Err(MetricError::ZeroVariance(Side::Observed));
    }
    Ok(1.0 - sse / sst)
}

/// Modified KGE, `1 - sqrt((r-1)^2 + (alpha-1)^2 + (beta-1)^2)`, with the
/// NSE of the same pair included in the report.
pub fn kge(observed: &[f64], predicted: &[f64]) -> Result<ScoreReport, MetricError> {
    check(observed, predicted)?;
    let mo = math::mean(observed);
    let mp = math::mean(predicted);
    let (mut soo, mut spp, mut sop, mut sse) = (0.0, 0.0, 0.0, 0.0);
    for (y, yhat) in observed.iter().zip(predicted) {
        let dy = y - mo;
        let dp = yhat - mp;
        soo += dy * dy;
        spp += dp * dp;
        sop += dy * dp;
        sse += (y - yhat) * (y - yhat);
    }
    if soo == 0.0 {
        return Err(MetricError::ZeroVariance(Side::Observed));
    }
    if spp == 0.0 {
        return Err(MetricError::ZeroVariance(Side::Predicted));
    }
    if mo == 0.0 {
        return Err(MetricError::ZeroMean(Side::Observed));
    }
    if mp == 0.0 {
        return Err(MetricError::ZeroMean(Side::Predicted));
    }
    let dof = (observed.len() - 1) as f64;
    let r = (sop / math::sqrt(soo * spp)).clamp(-1.0, 1.0);
    let alpha = mp / mo;
    let cv_o = math::sqrt(soo / dof) / mo;
    let cv_p = math::sqrt(spp / dof) / mp;
    let beta = cv_p / cv_o;
    let kge = 1.0 - math::sqrt((r - 1.0) * (r - 1.0) + (alpha - 1.0) * (alpha - 1.0) + (beta - 1.0) * (beta - 1.0));
    Ok(ScoreReport { nse: 1.0 - sse / soo, kge, r, alpha, beta })
}

/// `(s - mean) / sd` with the sample sd; all zeros when `sd == 0`.
pub fn standardize_scores(scores: &[f64]) -> Result<Vec<f64>, MetricError> {
    if scores.len() < 2 {
        return Err(MetricError::TooShort(scores.len()));
    }
    if !scores.iter().all(|v| v.is_finite()) {
        return Err(MetricError::NonFinite(Side::Scores));
    }
    let m = math::mean(scores);
    let sd = math::sample_sd(scores);
    if sd == 0.0 {
        return Ok(alloc::vec![0.0; scores.len()]);
    }
    Ok(scores.iter().map(|s| (s - m) / sd).collect())
}

/// Scores of one prediction vector where KGE may be undefined (constant or
/// zero-mean predictions) while NSE is not.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub nse: f64,
    pub kge: Option<f64>,
    pub r: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
}

impl Score {
    /// Fails only when NSE itself is undefined.
    pub fn compute(observed: &[f64], predicted: &[f64]) -> Result<Score, MetricError> {
        let nse = nse(observed, predicted)?;
        Ok(match kge(observed, predicted) {
            Ok(rep) => rep.into(),
            Err(_) => Score { nse, kge: None, r: None, alpha: None, beta: None },
        })
    }

    pub fn get(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Nse => Some(self.nse),
            Metric::Kge => self.kge,
        }
    }
}

impl From<ScoreReport> for Score {
    fn from(r: ScoreReport) -> Self {
        Score { nse: r.nse, kge: Some(r.kge), r: Some(r.r), alpha: Some(r.alpha), beta: Some(r.beta) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn nse_examples() {
        assert_eq!(nse(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(nse(&[1.0, 2.0, 3.0, 4.0], &[2.5; 4]).unwrap(), 0.0);
        assert!((nse(&[1.0, 2.0, 3.0, 4.0], &[2.0; 4]).unwrap() + 0.2).abs() < 1e-12);
    }

    #[test]
    fn nse_errors() {
        assert_eq!(nse(&[1.0, 1.0], &[1.0, 2.0]), Err(MetricError::ZeroVariance(Side::Observed)));
        assert!(matches!(nse(&[1.0, 2.0], &[1.0]), Err(MetricError::LengthMismatch { .. })));
        assert_eq!(nse(&[1.0, 2.0], &[f64::NAN, 1.0]), Err(MetricError::NonFinite(Side::Predicted)));
        assert_eq!(nse(&[1.0], &[1.0]), Err(MetricError::TooShort(1)));
    }

    #[test]
    fn kge_identity() {
        let y = [0.3, 1.7, 2.2, 9.1, 4.4];
        let rep = kge(&y, &y).unwrap();
        assert_eq!((rep.kge, rep.r, rep.alpha, rep.beta, rep.nse), (1.0, 1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn kge_scaled_and_shifted() {
        let y = [1.0, 2.0, 3.0];
        let rep = kge(&y, &[2.0, 4.0, 6.0]).unwrap();
        assert!((rep.r - 1.0).abs() < 1e-12);
        assert!((rep.alpha - 2.0).abs() < 1e-12);
        assert!((rep.beta - 1.0).abs() < 1e-12);
        assert!(rep.kge.abs() < 1e-12);

        let rep = kge(&y, &[4.0, 5.0, 6.0]).unwrap();
        assert!((rep.alpha - 2.5).abs() < 1e-12);
        assert!((rep.beta - 0.4).abs() < 1e-12);
        assert!((rep.kge - (1.0 - libm::sqrt(2.61))).abs() < 1e-12);
        assert!((rep.kge + 0.6155).abs() < 1e-4);
    }

    #[test]
    fn kge_errors() {
        assert_eq!(kge(&[1.0, 2.0], &[3.0, 3.0]).unwrap_err(), MetricError::ZeroVariance(Side::Predicted));
        assert_eq!(kge(&[-1.0, 1.0], &[1.0, 2.0]).unwrap_err(), MetricError::ZeroMean(Side::Observed));
        assert_eq!(kge(&[1.0, 2.0], &[-1.0, 1.0]).unwrap_err(), MetricError::ZeroMean(Side::Predicted));
    }

    #[test]
    fn score_keeps_nse_when_kge_undefined() {
        let s = Score::compute(&[1.0, 2.0, 3.0, 4.0], &[2.5; 4]).unwrap();
        assert_eq!(s.nse, 0.0);
        assert_eq!(s.get(Metric::Kge), None);
    }

    #[test]
    fn standardize_examples() {
        assert_eq!(standardize_scores(&[3.0, 4.0, 5.0]).unwrap(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(standardize_scores(&[0.7, 0.7, 0.7]).unwrap(), vec![0.0; 3]);
        assert!(standardize_scores(&[1.0]).is_err());
        assert!(standardize_scores(&[1.0, f64::INFINITY]).is_err());
    }

    fn vecs() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (3usize..40).prop_flat_map(|n| {
            (
                proptest::collection::vec(0.5f64..50.0, n),
                proptest::collection::vec(0.5f64..50.0, n),
            )
        })
    }

    proptest! {
        #[test]
        fn nse_at_most_one((y, p) in vecs()) {
            prop_assume!(math::sample_variance(&y) > 1e-9);
            prop_assert!(nse(&y, &p).unwrap() <= 1.0);
        }

        #[test]
        fn nse_affine_invariant((y, p) in vecs(), a in 0.1f64..10.0, b in -5.0f64..5.0, neg in any::<bool>()) {
            prop_assume!(math::sample_variance(&y) > 1e-6);
            let a = if neg { -a } else { a };
            let ty: Vec<f64> = y.iter().map(|v| a * v + b).collect();
            let tp: Vec<f64> = p.iter().map(|v| a * v + b).collect();
            let d = (nse(&y, &p).unwrap() - nse(&ty, &tp).unwrap()).abs();
            prop_assert!(d < 1e-8 * (1.0 + nse(&y, &p).unwrap().abs()));
        }

        #[test]
        fn nse_of_mean_is_zero((y, _p) in vecs()) {
            prop_assume!(math::sample_variance(&y) > 1e-9);
            let m = math::mean(&y);
            prop_assert_eq!(nse(&y, &vec![m; y.len()]).unwrap(), 0.0);
        }

        #[test]
        fn kge_components_consistent((y, p) in vecs()) {
            let rep = kge(&y, &p).unwrap();
            let k = 1.0 - libm::sqrt((rep.r - 1.0).powi(2) + (rep.alpha - 1.0).powi(2) + (rep.beta - 1.0).powi(2));
            prop_assert!((k - rep.kge).abs() < 1e-12);
            prop_assert!(rep.kge <= 1.0);
        }

        #[test]
        fn kge_component_invariances((y, p) in vecs(), c in 0.1f64..10.0, b in 0.0f64..5.0) {
            let base = kge(&y, &p).unwrap();
            let shifted: Vec<f64> = p.iter().map(|v| c * v + b).collect();
            prop_assert!((kge(&y, &shifted).unwrap().r - base.r).abs() < 1e-9);
            let sy: Vec<f64> = y.iter().map(|v| c * v).collect();
            let sp: Vec<f64> = p.iter().map(|v| c * v).collect();
            let scaled = kge(&sy, &sp).unwrap();
            prop_assert!((scaled.alpha - base.alpha).abs() < 1e-9 * base.alpha.abs().max(1.0));
            prop_assert!((scaled.beta - base.beta).abs() < 1e-9 * base.beta.abs().max(1.0));
        }

        #[test]
        fn standardize_mean_zero_and_argmax(s in proptest::collection::vec(-100.0f64..100.0, 2..50)) {
            let z = standardize_scores(&s).unwrap();
            if math::sample_sd(&s) > 0.0 {
                prop_assert!(math::mean(&z).abs() < 1e-12);
                let am = |v: &[f64]| v.iter().enumerate().fold(0, |b, (i, x)| if *x > v[b] { i } else { b });
                prop_assert_eq!(am(&s), am(&z));
            }
        }
    }
}
