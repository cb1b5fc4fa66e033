//! The `treetune` command line.
//!
//! Every subcommand writes its outputs plus a `<command>.manifest.json` into
//! the output directory and prints a short summary. Outputs depend only on
//! the inputs, flags and seed; the thread count changes speed, not results.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use treetune_core::dataset::{self, Dataset, SplitSpec};
use treetune_core::hpo::{self, SearchOptions, TrialRecord};
use treetune_core::metalearn::{self, Candidates, MetaDbOptions, MetaModel, MetaRecord, Recommendation};
use treetune_core::params::{default_params, optimal_default_params};
use treetune_core::rng::{self, streams};
use treetune_core::{Algorithm, HyperParams, Metric, Model, Score, Strategy};

use crate::bench::{self, InRepoEngine, RankTable, RunManifest, TimedEngine, TimingOptions, TimingRecord};
use crate::error::{Error, Result};
use crate::formats::{self, MetaModelFile, ModelFile};
use crate::io::{self, DatasetDigest, ResponseColumn};
use crate::synth;

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Parser)]
#[command(name = "treetune", version, about = "Tree-ensemble regression with tuned hyperparameters")]
pub struct Cli {
    /// Base seed for every random stream.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Directory outputs are written to.
    #[arg(long, global = true, env = "TREETUNE_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, global = true, env = "TREETUNE_THREADS", default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Response column: 1-based number or header name.
    #[arg(long, default_value = "1", value_parser = parse_response)]
    pub response_col: ResponseColumn,
    /// Drop feature columns missing more than this fraction, then impute.
    #[arg(long, default_value_t = dataset::STRICT_THRESHOLD)]
    pub threshold: f64,
}

fn parse_response(s: &str) -> std::result::Result<ResponseColumn, String> {
    s.parse()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EngineChoice {
    Rf,
    Gbt,
    All,
}

impl EngineChoice {
    fn algorithms(self) -> Vec<Algorithm> {
        match self {
            EngineChoice::Rf => vec![Algorithm::Rf],
            EngineChoice::Gbt => vec![Algorithm::Gbt],
            EngineChoice::All => Algorithm::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepChoice {
    Trees,
    Samples,
    Both,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Remove rows without a response, drop sparse columns, impute the rest.
    Clean {
        input: PathBuf,
        #[arg(long, default_value = "1", value_parser = parse_response)]
        response_col: ResponseColumn,
        /// Single threshold; without it the 10%/50% variant rule applies.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Cross-validate one configuration and score it on the test split.
    Evaluate {
        input: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "rf")]
        algo: Algorithm,
        /// default or opt_default; ignored with --params.
        #[arg(long, default_value = "default")]
        strategy: Strategy,
        /// JSON file with a full configuration.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value = "kge")]
        metric: Metric,
        #[arg(long, default_value_t = hpo::DEFAULT_FOLDS)]
        folds: usize,
        #[arg(long, default_value_t = 0.2)]
        test_fraction: f64,
    },
    /// Random search scored by k-fold CV on the training split.
    Search {
        input: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "rf")]
        algo: Algorithm,
        #[arg(long, default_value_t = 100)]
        iters: usize,
        #[arg(long, default_value = "kge")]
        metric: Metric,
        #[arg(long, default_value_t = hpo::DEFAULT_FOLDS)]
        folds: usize,
        #[arg(long, default_value_t = 0.2)]
        test_fraction: f64,
    },
    /// Default, optimal default and random trials on every dataset.
    BuildMetadb {
        #[arg(required = true, num_args = 2..)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 100)]
        iters: usize,
        #[arg(long, default_value_t = 0.2)]
        test_fraction: f64,
    },
    /// Fit a meta-model on a meta-database.
    TrainMeta {
        #[arg(long)]
        metadb: PathBuf,
        #[arg(long, default_value = "rf")]
        algo: Algorithm,
        #[arg(long, default_value = "kge")]
        metric: Metric,
        /// Use hyperparameters only.
        #[arg(long)]
        no_metadata: bool,
        #[arg(long, default_value = "meta_model.json")]
        output: String,
    },
    /// Pick the best-scoring configuration for a dataset.
    Recommend {
        #[arg(long)]
        meta: PathBuf,
        /// Dataset; optional for meta-models trained without meta-features.
        input: Option<PathBuf>,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = metalearn::DEFAULT_POOL)]
        pool: usize,
    },
    /// Configuration predicted best for a generic dataset.
    OptimalDefaults {
        #[arg(long)]
        meta: PathBuf,
        #[arg(long, default_value_t = metalearn::DEFAULT_POOL)]
        pool: usize,
    },
    /// Fit time against tree count and sample size.
    BenchTime {
        /// Dataset; a Friedman #1 problem is generated without it.
        input: Option<PathBuf>,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 1000)]
        synthetic_n: usize,
        #[arg(long, default_value_t = 10)]
        synthetic_p: usize,
        #[arg(long, value_enum, default_value_t = EngineChoice::All)]
        engine: EngineChoice,
        #[arg(long, value_enum, default_value_t = SweepChoice::Both)]
        sweep: SweepChoice,
        #[arg(long, default_value_t = 50)]
        start: usize,
        #[arg(long, default_value_t = 5000)]
        max_trees: usize,
        #[arg(long, default_value_t = 100)]
        step: usize,
        /// Trees used in the sample-size sweep.
        #[arg(long, default_value_t = 500)]
        sample_trees: usize,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        /// Threads an engine may use during a timed fit.
        #[arg(long, default_value_t = 1)]
        engine_threads: usize,
    },
    /// Rank the six methods on each dataset, meta-models leaving it out.
    BenchPower {
        #[arg(long)]
        metadb: PathBuf,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "kge")]
        metric: Metric,
        #[arg(long, default_value_t = metalearn::DEFAULT_POOL)]
        pool: usize,
        #[arg(long)]
        no_metadata: bool,
        #[arg(long, default_value_t = 0.2)]
        test_fraction: f64,
    },
    /// Bundle rank and timing results into the report files.
    Report {
        #[arg(long)]
        ranks: PathBuf,
        #[arg(long)]
        timings: PathBuf,
    },
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 3;
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(summary) => {
            print!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load(path: &Path, data: &DataArgs) -> Result<Dataset> {
    let raw = io::load_csv(path, &data.response_col)?;
    let (d, report) = dataset::clean(&raw, data.threshold)?;
    if !report.columns_dropped.is_empty() || !report.rows_dropped.is_empty() {
        log::info!(
            "{}: dropped {} rows and columns {:?}",
            path.display(),
            report.rows_dropped.len(),
            report.columns_dropped
        );
    }
    Ok(d)
}

fn manifest(cli: &Cli, command: &str) -> RunManifest {
    RunManifest::new(command, cli.seed)
}

fn finish(cli: &Cli, m: &RunManifest) -> Result<()> {
    formats::write_json(&cli.out_dir.join(format!("{}.manifest.json", m.command)), m)
}

fn data_settings(m: &mut RunManifest, data: &DataArgs) {
    m.set("response_col", format!("{:?}", data.response_col));
    m.set("threshold", data.threshold);
}

fn dispatch(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Clean { input, response_col, threshold } => clean(cli, input, response_col, *threshold),
        Command::Evaluate { input, data, algo, strategy, params, metric, folds, test_fraction } => {
            evaluate(cli, input, data, *algo, *strategy, params.as_deref(), *metric, *folds, *test_fraction)
        }
        Command::Search { input, data, algo, iters, metric, folds, test_fraction } => {
            search(cli, input, data, *algo, *iters, *metric, *folds, *test_fraction)
        }
        Command::BuildMetadb { inputs, data, iters, test_fraction } => build_metadb(cli, inputs, data, *iters, *test_fraction),
        Command::TrainMeta { metadb, algo, metric, no_metadata, output } => train_meta(cli, metadb, *algo, *metric, *no_metadata, output),
        Command::Recommend { meta, input, data, pool } => recommend(cli, meta, input.as_deref(), data, *pool),
        Command::OptimalDefaults { meta, pool } => optimal_defaults(cli, meta, *pool),
        Command::BenchTime { .. } => bench_time(cli),
        Command::BenchPower { metadb, inputs, data, metric, pool, no_metadata, test_fraction } => {
            bench_power(cli, metadb, inputs, data, *metric, *pool, *no_metadata, *test_fraction)
        }
        Command::Report { ranks, timings } => report(cli, ranks, timings),
    }
}

fn clean(cli: &Cli, input: &Path, response_col: &ResponseColumn, threshold: Option<f64>) -> Result<String> {
    let raw = io::load_csv(input, response_col)?;
    let variants = match threshold {
        Some(t) => vec![dataset::clean(&raw, t)?],
        None => dataset::make_variants(&raw)?,
    };
    let mut m = manifest(cli, "clean");
    m.add_input(input)?;
    m.set("response_col", format!("{response_col:?}"));
    m.set("threshold", threshold);
    let mut out = String::new();
    for (d, report) in &variants {
        let (csv_path, _) = io::write_cleaned(&cli.out_dir, &input.display().to_string(), d, report)?;
        m.datasets.push(DatasetDigest::of(d));
        out += &format!(
            "{}: {} rows ({} dropped), {} features ({} dropped), {} cells imputed -> {}\n",
            d.name,
            d.n(),
            report.rows_dropped.len(),
            d.p(),
            report.columns_dropped.len(),
            report.imputed_cells,
            csv_path.display()
        );
    }
    finish(cli, &m)?;
    Ok(out)
}

#[derive(Serialize)]
struct Evaluation<'a> {
    dataset: &'a str,
    train_rows: usize,
    test_rows: usize,
    folds: usize,
    trial: &'a TrialRecord,
}

fn split(d: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    Ok(dataset::train_test_split(d, SplitSpec { test_fraction, seed: rng::derive_seed(seed, streams::SPLIT) })?)
}

fn test_score(train: &Dataset, test: &Dataset, params: &HyperParams, seed: u64) -> Result<(Model, Option<Score>)> {
    let model = Model::fit(train, params, rng::derive_seed(seed, streams::FIT))?;
    let pred = model.predict(test.features())?;
    Ok((model, Score::compute(test.response(), &pred).ok()))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".into(), |v| format!("{v:.4}"))
}

#[allow(clippy::too_many_arguments)]
fn evaluate(
    cli: &Cli,
    input: &Path,
    data: &DataArgs,
    algo: Algorithm,
    strategy: Strategy,
    params_file: Option<&Path>,
    metric: Metric,
    k: usize,
    test_fraction: f64,
) -> Result<String> {
    let d = load(input, data)?;
    let (params, strategy) = match params_file {
        Some(p) => (formats::read_json::<HyperParams>(p)?, Strategy::Random),
        None => match strategy {
            Strategy::Default => (default_params(algo), strategy),
            Strategy::OptDefault => (optimal_default_params(algo), strategy),
            s => return Err(Error::Usage(format!("strategy `{s}` needs --params; use search or recommend to produce one"))),
        },
    };
    let (train, test) = split(&d, test_fraction, cli.seed)?;
    let folds = hpo::search_folds(&train, k, cli.seed)?;
    let mut trial = hpo::evaluate_config(&train, &params, strategy, &folds, metric, cli.seed, None)?;
    let (model, score) = test_score(&train, &test, &params, cli.seed)?;
    trial.test_score = score;

    formats::write_json(
        &cli.out_dir.join("evaluation.json"),
        &Evaluation { dataset: &d.name, train_rows: train.n(), test_rows: test.n(), folds: k, trial: &trial },
    )?;
    formats::write_json(&cli.out_dir.join("model.json"), &ModelFile::new(model))?;
    let mut m = manifest(cli, "evaluate");
    m.add_input(input)?;
    if let Some(p) = params_file {
        m.add_input(p)?;
    }
    data_settings(&mut m, data);
    m.set("params", params);
    m.set("metric", metric);
    m.set("folds", k);
    m.set("test_fraction", test_fraction);
    m.datasets.push(DatasetDigest::of(&d));
    finish(cli, &m)?;
    Ok(format!(
        "{params}\ncv nse {} kge {}{}\ntest nse {} kge {}\n",
        fmt_opt(trial.cv_mean_nse),
        fmt_opt(trial.cv_mean_kge),
        if trial.rejected { " (rejected)" } else { "" },
        fmt_opt(score.map(|s| s.nse)),
        fmt_opt(score.and_then(|s| s.kge)),
    ))
}

#[derive(Serialize)]
struct Best<'a> {
    dataset: &'a str,
    metric: Metric,
    params: HyperParams,
    cv_mean: Option<f64>,
    test_score: Option<Score>,
}

#[allow(clippy::too_many_arguments)]
fn search(cli: &Cli, input: &Path, data: &DataArgs, algo: Algorithm, iters: usize, metric: Metric, k: usize, test_fraction: f64) -> Result<String> {
    let d = load(input, data)?;
    let (train, test) = split(&d, test_fraction, cli.seed)?;
    let opts = SearchOptions { folds: k, ..SearchOptions::new(iters, metric, cli.seed) };
    let mut trials = hpo::run_random_search(&train, algo, &opts)?;
    let best = hpo::best_trial(&trials).cloned().ok_or(treetune_core::hpo::HpoError::AllRejected)?;
    let (_, score) = test_score(&train, &test, &best.params, cli.seed)?;
    trials[0].test_score = score;

    io::write_file(&cli.out_dir.join("trials.ndjson"), &formats::to_ndjson(&trials)?)?;
    io::write_file(&cli.out_dir.join("trials.csv"), &formats::trials_csv(&trials)?)?;
    formats::write_json(
        &cli.out_dir.join("best.json"),
        &Best { dataset: &d.name, metric, params: best.params, cv_mean: best.cv_mean(metric), test_score: score },
    )?;
    let mut m = manifest(cli, "search");
    m.add_input(input)?;
    data_settings(&mut m, data);
    m.set("algorithm", algo);
    m.set("iterations", iters);
    m.set("metric", metric);
    m.set("folds", k);
    m.set("test_fraction", test_fraction);
    m.datasets.push(DatasetDigest::of(&d));
    finish(cli, &m)?;
    let rejected = trials.iter().filter(|t| t.rejected).count();
    Ok(format!(
        "{iters} trials ({rejected} rejected)\nbest {}\ncv {metric} {}\ntest nse {} kge {}\n",
        best.params,
        fmt_opt(best.cv_mean(metric)),
        fmt_opt(score.map(|s| s.nse)),
        fmt_opt(score.and_then(|s| s.kge)),
    ))
}

fn build_metadb(cli: &Cli, inputs: &[PathBuf], data: &DataArgs, iters: usize, test_fraction: f64) -> Result<String> {
    let datasets = inputs.iter().map(|p| load(p, data)).collect::<Result<Vec<_>>>()?;
    let mut names: Vec<&str> = datasets.iter().map(|d| d.name.as_str()).collect();
    names.sort_unstable();
    if names.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Usage("dataset names (file stems) must be distinct".into()));
    }
    let opts = MetaDbOptions { iterations: iters, test_fraction, seed: cli.seed };
    let db = metalearn::build_meta_database(&datasets, &opts)?;
    io::write_file(&cli.out_dir.join("metadb.ndjson"), &formats::to_ndjson(&db)?)?;
    io::write_file(&cli.out_dir.join("metadb.csv"), &formats::metadb_csv(&db)?)?;
    let mut m = manifest(cli, "build-metadb");
    for p in inputs {
        m.add_input(p)?;
    }
    data_settings(&mut m, data);
    m.set("iterations", iters);
    m.set("test_fraction", test_fraction);
    m.set("records", db.len());
    m.datasets = datasets.iter().map(DatasetDigest::of).collect();
    finish(cli, &m)?;
    let groups = db.len() / (iters + 2);
    Ok(format!("{} records from {} datasets ({groups} dataset x algorithm groups)\n", db.len(), datasets.len()))
}

fn train_meta(cli: &Cli, metadb: &Path, algo: Algorithm, metric: Metric, no_metadata: bool, output: &str) -> Result<String> {
    let db: Vec<MetaRecord> = formats::read_ndjson(metadb)?;
    let model = metalearn::train_meta_model(&db, metric, algo, !no_metadata, rng::derive_seed(cli.seed, streams::FIT))?;
    formats::write_json(&cli.out_dir.join(output), &MetaModelFile::new(model.clone()))?;
    let mut m = manifest(cli, "train-meta");
    m.add_input(metadb)?;
    m.set("algorithm", algo);
    m.set("metric", metric);
    m.set("uses_metadata", !no_metadata);
    m.set("output", output);
    finish(cli, &m)?;
    Ok(format!(
        "{algo} meta-model on {} records from {} datasets, target standardized {metric}, {} inputs\n",
        model.manifest.records,
        model.manifest.datasets.len(),
        model.columns.len()
    ))
}

#[derive(Serialize)]
struct RecommendationFile<'a> {
    dataset: Option<&'a str>,
    algorithm: Algorithm,
    target: Metric,
    uses_metadata: bool,
    recommendation: &'a Recommendation,
}

fn write_recommendation(cli: &Cli, name: &str, model: &MetaModel, dataset: Option<&str>, rec: &Recommendation) -> Result<()> {
    formats::write_json(
        &cli.out_dir.join(name),
        &RecommendationFile { dataset, algorithm: model.algorithm, target: model.target, uses_metadata: model.uses_metadata, recommendation: rec },
    )?;
    formats::write_json(&cli.out_dir.join(name.replace(".json", "_params.json")), &rec.params)
}

fn recommend(cli: &Cli, meta: &Path, input: Option<&Path>, data: &DataArgs, pool: usize) -> Result<String> {
    let model = formats::load_meta_model(meta)?;
    let d = input.map(|p| load(p, data)).transpose()?;
    let candidates = Candidates::Generate { size: pool, seed: rng::derive_seed(cli.seed, streams::SAMPLE) };
    let rec = metalearn::recommend(&model, d.as_ref(), &candidates)?;
    write_recommendation(cli, "recommendation.json", &model, d.as_ref().map(|d| d.name.as_str()), &rec)?;
    let mut m = manifest(cli, "recommend");
    m.add_input(meta)?;
    if let Some(p) = input {
        m.add_input(p)?;
    }
    data_settings(&mut m, data);
    m.set("pool", pool);
    m.datasets.extend(d.as_ref().map(DatasetDigest::of));
    finish(cli, &m)?;
    Ok(format!("{}\npredicted standardized {} {:.4} (candidate {} of {})\n", rec.params, model.target, rec.predicted, rec.index + 1, rec.pool_size))
}

fn optimal_defaults(cli: &Cli, meta: &Path, pool: usize) -> Result<String> {
    let model = formats::load_meta_model(meta)?;
    let rec = metalearn::compute_new_optimal_defaults(&model, pool, rng::derive_seed(cli.seed, streams::SAMPLE))?;
    write_recommendation(cli, "optimal_defaults.json", &model, None, &rec)?;
    let mut m = manifest(cli, "optimal-defaults");
    m.add_input(meta)?;
    m.set("pool", pool);
    finish(cli, &m)?;
    Ok(format!("{}\npredicted standardized {} {:.4}\n", rec.params, model.target, rec.predicted))
}

fn bench_time(cli: &Cli) -> Result<String> {
    let Command::BenchTime {
        input,
        data,
        synthetic_n,
        synthetic_p,
        engine,
        sweep,
        start,
        max_trees,
        step,
        sample_trees,
        reps,
        engine_threads,
    } = &cli.command
    else {
        unreachable!()
    };
    let d = match input {
        Some(p) => load(p, data)?,
        None => {
            if *synthetic_p < 5 {
                return Err(Error::Usage("--synthetic-p must be at least 5".into()));
            }
            synth::friedman1(*synthetic_n, *synthetic_p, 1.0, cli.seed)
        }
    };
    let engines: Vec<InRepoEngine> = engine.algorithms().into_iter().map(InRepoEngine).collect();
    let dyn_engines: Vec<&dyn TimedEngine> = engines.iter().map(|e| e as &dyn TimedEngine).collect();
    let opts = TimingOptions { reps: *reps, seed: cli.seed, engine_threads: *engine_threads };
    let mut records = Vec::new();
    let tree_points = bench::sweep_points(*start, *max_trees, *step)?;
    let sample_points = if *sweep != SweepChoice::Trees { bench::sweep_points(*start, d.n(), *step)? } else { Vec::new() };
    if *sweep != SweepChoice::Samples {
        records.extend(bench::time_vs_trees(&d, &dyn_engines, &tree_points, &opts)?);
    }
    if *sweep != SweepChoice::Trees {
        records.extend(bench::time_vs_samples(&d, &dyn_engines, &sample_points, *sample_trees, &opts)?);
    }
    io::write_file(&cli.out_dir.join("timings.csv"), &bench::timings_csv(&records)?)?;
    formats::write_json(&cli.out_dir.join("timings.json"), &records)?;

    let mut m = manifest(cli, "bench-time");
    if let Some(p) = input {
        m.add_input(p)?;
        data_settings(&mut m, data);
    } else {
        m.set("synthetic", serde_json::json!({ "generator": "friedman1", "n": synthetic_n, "p": synthetic_p, "noise_sd": 1.0 }));
    }
    m.set("engines", engine.algorithms());
    m.set("tree_points", &tree_points);
    m.set("sample_points", &sample_points);
    m.set("sample_trees", sample_trees);
    m.set("reps", reps);
    m.set("engine_threads", engine_threads);
    m.datasets.push(DatasetDigest::of(&d));
    finish(cli, &m)?;

    let mut out = String::new();
    for e in &engines {
        for s in [bench::Sweep::Trees, bench::Sweep::Samples] {
            let rs: Vec<&TimingRecord> = records.iter().filter(|r| r.engine == e.tag() && r.sweep == s).collect();
            if rs.is_empty() {
                continue;
            }
            let x: Vec<f64> = rs.iter().filter(|r| r.error.is_none()).map(|r| r.value as f64).collect();
            let y: Vec<f64> = rs.iter().filter(|r| r.error.is_none()).map(|r| r.mean_seconds).collect();
            let fit = bench::linear_fit(&x, &y).map_or_else(String::new, |f| format!(", slope {:.3e} s per unit, R^2 {:.3}", f.slope, f.r_squared));
            let failed = rs.iter().find_map(|r| r.error.as_deref()).map_or_else(String::new, |e| format!(" (stopped: {e})"));
            out += &format!("{} vs {}: {} points{fit}{failed}\n", e.tag(), s.as_str(), rs.len());
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn bench_power(
    cli: &Cli,
    metadb: &Path,
    inputs: &[PathBuf],
    data: &DataArgs,
    metric: Metric,
    pool: usize,
    no_metadata: bool,
    test_fraction: f64,
) -> Result<String> {
    let db: Vec<MetaRecord> = formats::read_ndjson(metadb)?;
    let datasets = inputs.iter().map(|p| load(p, data)).collect::<Result<Vec<_>>>()?;
    let provider = bench::LeaveOneOut { db: &db, target: metric, uses_metadata: !no_metadata, seed: rng::derive_seed(cli.seed, streams::FIT) };
    let opts = bench::CompareOptions { test_fraction, pool_size: pool, ..bench::CompareOptions::new(metric, cli.seed) };
    let table = bench::compare_methods(&datasets, &provider, &opts)?;
    formats::write_json(&cli.out_dir.join("ranks.json"), &table)?;
    bench::write_rank_reports(&table, &cli.out_dir)?;
    let mut m = manifest(cli, "bench-power");
    m.add_input(metadb)?;
    for p in inputs {
        m.add_input(p)?;
    }
    data_settings(&mut m, data);
    m.set("metric", metric);
    m.set("pool", pool);
    m.set("uses_metadata", !no_metadata);
    m.set("test_fraction", test_fraction);
    m.datasets = datasets.iter().map(DatasetDigest::of).collect();
    finish(cli, &m)?;
    let mut out = format!("{} of {} datasets ranked by test {metric}\n", table.datasets.len(), datasets.len());
    for t in bench::tallies(&table) {
        out += &format!("{:<15} best {:>3}  worst {:>3}\n", t.method, t.best, t.worst);
    }
    Ok(out)
}

fn report(cli: &Cli, ranks: &Path, timings: &Path) -> Result<String> {
    let table: RankTable = formats::read_json(ranks)?;
    let records: Vec<TimingRecord> = formats::read_json(timings)?;
    let mut m = manifest(cli, "report");
    m.add_input(ranks)?;
    m.add_input(timings)?;
    for upstream in [sibling(ranks, "bench-power"), sibling(timings, "bench-time")] {
        if upstream.exists() {
            let up: RunManifest = formats::read_json(&upstream)?;
            m.add_input(&upstream)?;
            for d in &up.datasets {
                if !m.datasets.contains(d) {
                    m.datasets.push(d.clone());
                }
            }
            m.set(&up.command, serde_json::json!({ "seed": up.seed, "settings": up.settings }));
        }
    }
    let files = bench::export_reports(&table, &records, &m, &cli.out_dir)?;
    Ok(files.iter().map(|f| format!("wrote {}\n", f.display())).collect())
}

fn sibling(path: &Path, command: &str) -> PathBuf {
    path.with_file_name(format!("{command}.manifest.json"))
}
