//! Fitted models and search results must not depend on the worker count.

use treetune::synth;
use treetune_core::hpo::{self, SearchOptions};
use treetune_core::params::{default_params, sample_random, SearchSpace};
use treetune_core::{Algorithm, Metric, Model};

fn with_threads<T: Send>(n: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap().install(f)
}

#[test]
fn models_identical_across_pool_sizes() {
    let d = synth::friedman1(120, 6, 1.0, 1);
    for a in Algorithm::ALL {
        for params in [default_params(a), sample_random(&SearchSpace::for_algorithm(a), d.n(), 3)] {
            let params = match params {
                treetune_core::HyperParams::Gbt(mut g) => {
                    g.nrounds = g.nrounds.min(300);
                    treetune_core::HyperParams::Gbt(g)
                }
                p => p,
            };
            let one = with_threads(1, || Model::fit(&d, &params, 9).unwrap());
            let four = with_threads(4, || Model::fit(&d, &params, 9).unwrap());
            assert_eq!(one, four, "{params}");
        }
    }
}

#[test]
fn search_identical_across_pool_sizes() {
    let d = synth::friedman1(60, 5, 1.0, 2);
    let opts = SearchOptions::new(4, Metric::Nse, 5);
    let one = with_threads(1, || hpo::run_random_search(&d, Algorithm::Rf, &opts).unwrap());
    let three = with_threads(3, || hpo::run_random_search(&d, Algorithm::Rf, &opts).unwrap());
    assert_eq!(one, three);
}
