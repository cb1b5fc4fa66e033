use proptest::prelude::*;
use treetune_core::dataset::{self, SplitSpec};
use treetune_core::hpo::{self, TrialRecord};
use treetune_core::metalearn::{self, Candidates, MetaRecord};
use treetune_core::metrics;
use treetune_core::params::{default_params, sample_random, SearchSpace};
use treetune_core::rf::{self, Mtry, RfHyperParams};
use treetune_core::{rng, Algorithm, Dataset, HyperParams, Matrix, Metric, Strategy};

fn random_dataset(n: usize, p: usize, seed: u64) -> Dataset {
    use rand::Rng;
    let mut r = rng::stream(seed, 0);
    let x: Vec<f64> = (0..n * p).map(|_| r.gen_range(0.0..1.0)).collect();
    let y = (0..n).map(|i| 3.0 * x[i * p] + x[i * p + p - 1] * x[i * p] + r.gen_range(-0.2..0.2)).collect();
    Dataset::from_parts("r", Matrix::new(n, p, x), y).unwrap()
}

fn small_rf(num_trees: usize) -> RfHyperParams {
    RfHyperParams { mtry: Mtry::Fraction(0.5), num_trees, replace: true, min_node_size_exponent: 0.3, sample_fraction: 0.8 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn split_subsets_keep_row_order(n in 5usize..300, seed in any::<u64>()) {
        let (train, test) = dataset::split_indices(n, SplitSpec::new(seed)).unwrap();
        prop_assert!(train.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(test.windows(2).all(|w| w[0] < w[1]));
        let plan = dataset::kfold_plan(train.len(), 5.min(train.len()), seed).unwrap();
        for f in 0..plan.k {
            prop_assert!(plan.fold_rows(f).windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn forest_ignores_row_order(n in 8usize..60, seed in any::<u64>(), shuffle in any::<u64>()) {
        let d = random_dataset(n, 3, seed);
        let mut order: Vec<usize> = (0..n).collect();
        rng::shuffle(&mut rng::stream(shuffle, 0), &mut order);
        let permuted = d.subset(&order);
        let a = rf::fit_forest(&d, &small_rf(20), seed).unwrap();
        let b = rf::fit_forest(&permuted, &small_rf(20), seed).unwrap();
        prop_assert_eq!(a.trees, b.trees);
    }

    #[test]
    fn longer_forest_extends_shorter(n in 8usize..60, seed in any::<u64>(), k in 1usize..15, extra in 1usize..15) {
        let d = random_dataset(n, 4, seed);
        let short = rf::fit_forest(&d, &small_rf(k), seed).unwrap();
        let long = rf::fit_forest(&d, &small_rf(k + extra), seed).unwrap();
        prop_assert_eq!(&short.trees[..], &long.trees[..k]);
    }

    #[test]
    fn sampled_params_round_trip(seed in any::<u64>(), n in 2usize..5000, gbt in any::<bool>()) {
        let algorithm = if gbt { Algorithm::Gbt } else { Algorithm::Rf };
        let p = sample_random(&SearchSpace::for_algorithm(algorithm), n, seed);
        prop_assert!(p.validate().is_ok());
        prop_assert!(SearchSpace::for_algorithm(algorithm).contains(&p, n));
        let back: HyperParams = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn standardization_keeps_argmax_under_affine_maps(s in proptest::collection::vec(-10.0f64..10.0, 2..40), a in 0.1f64..5.0, b in -3.0f64..3.0) {
        let z = metrics::standardize_scores(&s).unwrap();
        let moved: Vec<f64> = s.iter().map(|v| a * v + b).collect();
        let z2 = metrics::standardize_scores(&moved).unwrap();
        for (u, v) in z.iter().zip(&z2) {
            prop_assert!((u - v).abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn default_rf_cv_means_are_finite(n in 30usize..60, seed in any::<u64>()) {
        let d = random_dataset(n, 3, seed);
        let folds = hpo::search_folds(&d, hpo::DEFAULT_FOLDS, seed).unwrap();
        let rec = hpo::evaluate_config(&d, &default_params(Algorithm::Rf), Strategy::Default, &folds, Metric::Kge, seed, None).unwrap();
        prop_assert!(rec.cv_mean_nse.is_some_and(f64::is_finite));
        prop_assert!(rec.cv_mean_kge.is_some_and(f64::is_finite));
        let back: TrialRecord = serde_json::from_str(&serde_json::to_string(&rec).unwrap()).unwrap();
        prop_assert_eq!(back, rec);
    }
}

/// Column permutation only relabels features, so the spread of forest
/// predictions over seeds should agree in distribution.
#[test]
fn column_permutation_keeps_prediction_distribution() {
    let d = random_dataset(120, 4, 11);
    let perm = [2usize, 0, 3, 1];
    let permuted = Dataset::from_parts("p", d.features().select_columns(&perm), d.response().to_vec()).unwrap();
    let probe = random_dataset(40, 4, 12);
    let probe_perm = probe.features().select_columns(&perm);
    let params = RfHyperParams { num_trees: 50, ..small_rf(50) };
    let summary = |data: &Dataset, x: &Matrix| -> Vec<f64> {
        (0..10u64)
            .map(|s| {
                let f = rf::fit_forest(data, &params, 100 + s).unwrap();
                let p = f.predict(x).unwrap();
                p.iter().sum::<f64>() / p.len() as f64
            })
            .collect()
    };
    let a = summary(&d, probe.features());
    let b = summary(&permuted, &probe_perm);
    let stats = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
        (m, (var / v.len() as f64).sqrt())
    };
    let ((ma, sa), (mb, sb)) = (stats(&a), stats(&b));
    let se = (sa * sa + sb * sb).sqrt().max(1e-12);
    assert!((ma - mb).abs() <= 3.0 * se, "{ma} vs {mb}, se {se}");
}

fn planted_records(datasets: usize, seed: u64) -> Vec<MetaRecord> {
    use rand::Rng;
    let mut r = rng::stream(seed, 1);
    let mut out = Vec::new();
    for k in 0..datasets {
        let d = random_dataset(30 + 10 * k, 3 + k, seed + k as u64).with_name(format!("d{k}"));
        let meta = metalearn::extract_meta_features(&d).unwrap();
        let configs = metalearn::trial_configs(Algorithm::Rf, 30, d.n(), seed + k as u64);
        let raw: Vec<f64> = configs
            .iter()
            .map(|(_, c)| match c {
                HyperParams::Rf(p) => p.sample_fraction + 0.1 * r.gen_range(-1.0..1.0),
                HyperParams::Gbt(_) => unreachable!(),
            })
            .collect();
        let z = metrics::standardize_scores(&raw).unwrap();
        for (t, (strategy, params)) in configs.into_iter().enumerate() {
            out.push(MetaRecord {
                dataset: d.name.clone(),
                algorithm: Algorithm::Rf,
                strategy,
                trial: t,
                params,
                encoded: params.encode(d.p()),
                meta,
                raw_kge: Some(raw[t]),
                raw_nse: Some(raw[t]),
                std_kge: z[t],
                std_nse: z[t],
                seed,
            });
        }
    }
    out
}

#[test]
fn meta_predictions_are_finite_over_the_space() {
    let db = planted_records(3, 5);
    for uses_metadata in [true, false] {
        let model = metalearn::train_meta_model(&db, Metric::Nse, Algorithm::Rf, uses_metadata, 5).unwrap();
        let target = random_dataset(50, 4, 77);
        let d_new = uses_metadata.then_some(&target);
        let pool = model.pool(d_new, &Candidates::Generate { size: 2000, seed: 9 });
        let scores = model.score_candidates(d_new, &pool).unwrap();
        assert_eq!(scores.len(), pool.len());
        assert!(scores.iter().all(|s| s.is_finite()));
        let rec = metalearn::recommend(&model, d_new, &Candidates::List(pool)).unwrap();
        assert!(SearchSpace::for_algorithm(Algorithm::Rf).contains(&rec.params, target.n()));
    }
}
