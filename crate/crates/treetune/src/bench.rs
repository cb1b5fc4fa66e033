//! Timing sweeps, the six-method comparison and report export.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use treetune_core::dataset::{self, SplitSpec};
use treetune_core::metalearn::{self, Candidates, MetaError, MetaModel, MetaRecord};
use treetune_core::params::{default_params, optimal_default_params};
use treetune_core::rng::{self, streams};
use treetune_core::{par, Algorithm, Dataset, HyperParams, Metric, Model, Score, Strategy};

use crate::error::{Error, Result};
use crate::formats;
use crate::io::{self, DatasetDigest};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sweep {
    Trees,
    Samples,
}

impl Sweep {
    pub fn as_str(self) -> &'static str {
        match self {
            Sweep::Trees => "trees",
            Sweep::Samples => "samples",
        }
    }
}

/// Wall-clock fits of one engine at one sweep point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub engine: String,
    pub sweep: Sweep,
    pub value: usize,
    pub reps: usize,
    pub mean_seconds: f64,
    pub seconds: Vec<f64>,
    /// Set when a fit failed; the engine's sweep stops here.
    pub error: Option<String>,
}

/// `start, start + step, ...` up to and including `end` when it is hit
/// exactly; never past it.
pub fn sweep_points(start: usize, end: usize, step: usize) -> Result<Vec<usize>> {
    if step == 0 || start == 0 || start > end {
        return Err(Error::Usage(format!("bad sweep {start}..{end} step {step}")));
    }
    Ok((start..=end).step_by(step).collect())
}

/// Something that can be fit at a given ensemble size.
pub trait TimedEngine: Sync {
    fn tag(&self) -> String;
    fn fit(&self, d: &Dataset, size: usize, seed: u64) -> Result<(), String>;
}

/// An in-repo engine at its default hyperparameters, with the tree or round
/// count replaced by the sweep value.
#[derive(Clone, Copy, Debug)]
pub struct InRepoEngine(pub Algorithm);

impl InRepoEngine {
    pub fn params(&self, size: usize) -> HyperParams {
        match default_params(self.0) {
            HyperParams::Rf(mut p) => {
                p.num_trees = size;
                HyperParams::Rf(p)
            }
            HyperParams::Gbt(mut p) => {
                p.nrounds = size;
                HyperParams::Gbt(p)
            }
        }
    }
}

impl TimedEngine for InRepoEngine {
    fn tag(&self) -> String {
        self.0.to_string()
    }

    fn fit(&self, d: &Dataset, size: usize, seed: u64) -> Result<(), String> {
        Model::fit(d, &self.params(size), seed).map(|_| ()).map_err(|e| e.to_string())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TimingOptions {
    pub reps: usize,
    pub seed: u64,
    /// Worker threads available to an engine during a fit.
    pub engine_threads: usize,
}

impl Default for TimingOptions {
    fn default() -> Self {
        Self { reps: 10, seed: crate::cli::DEFAULT_SEED, engine_threads: 1 }
    }
}

fn time_point(engine: &dyn TimedEngine, d: &Dataset, sweep: Sweep, value: usize, size: usize, opts: &TimingOptions) -> TimingRecord {
    let mut seconds = Vec::with_capacity(opts.reps);
    let mut error = None;
    for _ in 0..opts.reps {
        let start = Instant::now();
        let r = engine.fit(d, size, opts.seed);
        let elapsed = start.elapsed().as_secs_f64();
        if let Err(e) = r {
            error = Some(e);
            break;
        }
        seconds.push(elapsed);
    }
    let mean_seconds = if seconds.is_empty() { 0.0 } else { seconds.iter().sum::<f64>() / seconds.len() as f64 };
    TimingRecord { engine: engine.tag(), sweep, value, reps: seconds.len(), mean_seconds, seconds, error }
}

fn with_engine_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Internal(e.to_string()))?;
    Ok(pool.install(f))
}

/// Fits each engine on all of `d` once per rep at every tree count.
pub fn time_vs_trees(d: &Dataset, engines: &[&dyn TimedEngine], points: &[usize], opts: &TimingOptions) -> Result<Vec<TimingRecord>> {
    with_engine_threads(opts.engine_threads, || {
        let mut out = Vec::new();
        for engine in engines {
            for &trees in points {
                let rec = time_point(*engine, d, Sweep::Trees, trees, trees, opts);
                let failed = rec.error.is_some();
                out.push(rec);
                if failed {
                    break;
                }
            }
        }
        out
    })
}

/// Rows used at sample size `m`: a seeded subset in original order, shared
/// by every rep and engine at that point.
pub fn sample_rows(n: usize, m: usize, seed: u64) -> Vec<usize> {
    let mut r = rng::stream(seed, m as u64);
    let mut rows = rng::sample_without_replacement(&mut r, n, m);
    rows.sort_unstable();
    rows
}

/// Fits each engine with `trees` trees on seeded row subsets of each size.
pub fn time_vs_samples(
    d: &Dataset,
    engines: &[&dyn TimedEngine],
    points: &[usize],
    trees: usize,
    opts: &TimingOptions,
) -> Result<Vec<TimingRecord>> {
    if let Some(&m) = points.iter().find(|&&m| m > d.n() || m < 2) {
        return Err(Error::Usage(format!("sample size {m} is outside 2..={}", d.n())));
    }
    let subsets: Vec<Dataset> = points.iter().map(|&m| d.subset(&sample_rows(d.n(), m, opts.seed))).collect();
    with_engine_threads(opts.engine_threads, || {
        let mut out = Vec::new();
        for engine in engines {
            for (sub, &m) in subsets.iter().zip(points) {
                let rec = time_point(*engine, sub, Sweep::Samples, m, trees, opts);
                let failed = rec.error.is_some();
                out.push(rec);
                if failed {
                    break;
                }
            }
        }
        out
    })
}

/// Least-squares line through `(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `slope / se(slope)`; infinite for a perfect fit.
    pub slope_t: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len();
    if n < 3 || y.len() != n {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let sse = (syy - slope * sxy).max(0.0);
    let se = (sse / (n - 2) as f64 / sxx).sqrt();
    Some(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared: 1.0 - sse / syy,
        slope_t: if se > 0.0 { slope / se } else { f64::INFINITY },
    })
}

/// One of the six compared methods.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Method {
    pub algorithm: Algorithm,
    pub strategy: Strategy,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method { algorithm: Algorithm::Rf, strategy: Strategy::Default },
        Method { algorithm: Algorithm::Rf, strategy: Strategy::OptDefault },
        Method { algorithm: Algorithm::Rf, strategy: Strategy::Meta },
        Method { algorithm: Algorithm::Gbt, strategy: Strategy::Default },
        Method { algorithm: Algorithm::Gbt, strategy: Strategy::OptDefault },
        Method { algorithm: Algorithm::Gbt, strategy: Strategy::Meta },
    ];

    pub fn tag(self) -> String {
        let s = match self.strategy {
            Strategy::Default => "default",
            Strategy::OptDefault => "optdefault",
            Strategy::Meta => "meta",
            Strategy::Random => "random",
        };
        format!("{}-{s}", self.algorithm)
    }
}

/// Test scores and ranks of the six methods on each dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub metric: Metric,
    pub methods: Vec<String>,
    pub datasets: Vec<String>,
    /// `scores[d][m]`.
    pub scores: Vec<Vec<f64>>,
    /// 1 = best; ties share the mean of their positions.
    pub ranks: Vec<Vec<f64>>,
    /// Configuration each method used on each dataset.
    pub params: Vec<Vec<HyperParams>>,
}

/// Descending ranks starting at 1; tied scores share the mean of the
/// positions they occupy.
pub fn rank_descending(scores: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // positions i+1 ..= j
        let r = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = r;
        }
        i = j;
    }
    ranks
}

/// Supplies the meta-model used to score `algorithm` configurations on a
/// dataset; `exclude` names the dataset being evaluated.
pub trait MetaModelProvider: Sync {
    fn meta_model(&self, algorithm: Algorithm, exclude: &str) -> Result<MetaModel, MetaError>;
}

/// Trains a fresh meta-model on the records of every other dataset.
pub struct LeaveOneOut<'a> {
    pub db: &'a [MetaRecord],
    pub target: Metric,
    pub uses_metadata: bool,
    pub seed: u64,
}

impl MetaModelProvider for LeaveOneOut<'_> {
    fn meta_model(&self, algorithm: Algorithm, exclude: &str) -> Result<MetaModel, MetaError> {
        let kept: Vec<MetaRecord> = self.db.iter().filter(|r| r.dataset != exclude).cloned().collect();
        metalearn::train_meta_model(&kept, self.target, algorithm, self.uses_metadata, self.seed)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CompareOptions {
    pub metric: Metric,
    pub seed: u64,
    pub test_fraction: f64,
    pub pool_size: usize,
}

impl CompareOptions {
    pub fn new(metric: Metric, seed: u64) -> Self {
        Self { metric, seed, test_fraction: 0.2, pool_size: metalearn::DEFAULT_POOL }
    }
}

fn evaluate_methods(d: &Dataset, index: usize, provider: &dyn MetaModelProvider, opts: &CompareOptions) -> Result<(Vec<f64>, Vec<HyperParams>)> {
    let ds_seed = rng::derive_seed(opts.seed, index as u64);
    let (train, test) = dataset::train_test_split(d, SplitSpec { test_fraction: opts.test_fraction, seed: rng::derive_seed(ds_seed, streams::SPLIT) })?;
    let mut scores = Vec::with_capacity(6);
    let mut chosen = Vec::with_capacity(6);
    for (m, method) in Method::ALL.iter().enumerate() {
        let params = match method.strategy {
            Strategy::Meta => {
                let model = provider.meta_model(method.algorithm, &d.name)?;
                if model.manifest.datasets.iter().any(|n| n == &d.name) {
                    return Err(Error::Internal(format!("meta-model for `{}` was trained on it", d.name)));
                }
                let pool = Candidates::Generate { size: opts.pool_size, seed: rng::derive_seed(ds_seed, streams::SAMPLE + m as u64) };
                metalearn::recommend(&model, Some(&train), &pool)?.params
            }
            Strategy::OptDefault => optimal_default_params(method.algorithm),
            _ => default_params(method.algorithm),
        };
        let model = Model::fit(&train, &params, rng::derive_seed(ds_seed, m as u64))?;
        let pred = model.predict(test.features())?;
        let score = Score::compute(test.response(), &pred)?
            .get(opts.metric)
            .ok_or_else(|| Error::Data(format!("{} is undefined for {} on `{}`", opts.metric, method.tag(), d.name)))?;
        scores.push(score);
        chosen.push(params);
    }
    Ok((scores, chosen))
}

/// Scores the six methods on each dataset's test split and ranks them.
/// A dataset where any method fails is skipped with a warning.
pub fn compare_methods(datasets: &[Dataset], provider: &dyn MetaModelProvider, opts: &CompareOptions) -> Result<RankTable> {
    let results = par::map_indexed(datasets.len(), |i| evaluate_methods(&datasets[i], i, provider, opts));
    let mut table = RankTable {
        metric: opts.metric,
        methods: Method::ALL.iter().map(|m| m.tag()).collect(),
        datasets: Vec::new(),
        scores: Vec::new(),
        ranks: Vec::new(),
        params: Vec::new(),
    };
    for (d, r) in datasets.iter().zip(results) {
        match r {
            Ok((scores, params)) => {
                table.datasets.push(d.name.clone());
                table.ranks.push(rank_descending(&scores));
                table.scores.push(scores);
                table.params.push(params);
            }
            Err(Error::Internal(msg)) => return Err(Error::Internal(msg)),
            Err(e) => log::warn!("skipping `{}`: {e}", d.name),
        }
    }
    if table.datasets.is_empty() {
        return Err(Error::Usage("every dataset was skipped".into()));
    }
    Ok(table)
}

/// How often each method ranked best and worst.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub method: String,
    pub best: usize,
    pub worst: usize,
}

/// Tied methods all count.
pub fn tallies(table: &RankTable) -> Vec<Tally> {
    let mut out: Vec<Tally> = table.methods.iter().map(|m| Tally { method: m.clone(), best: 0, worst: 0 }).collect();
    for ranks in &table.ranks {
        let lo = ranks.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ranks.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for (m, &r) in ranks.iter().enumerate() {
            out[m].best += usize::from(r == lo);
            out[m].worst += usize::from(r == hi);
        }
    }
    out
}

/// `(dataset, method, score - rf-default score)` for every other method.
pub fn deltas(table: &RankTable) -> Vec<(String, String, f64)> {
    let base = table.methods.iter().position(|m| m == "rf-default").unwrap_or(0);
    let mut out = Vec::new();
    for (d, scores) in table.datasets.iter().zip(&table.scores) {
        for (m, s) in scores.iter().enumerate() {
            if m != base {
                out.push((d.clone(), table.methods[m].clone(), s - scores[base]));
            }
        }
    }
    out
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| Error::Internal(e.to_string()))?;
    for row in rows {
        w.write_record(&row).map_err(|e| Error::Internal(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::Internal(e.to_string()))
}

/// Methods as rows, datasets as columns, ranks as cells.
pub fn heatmap_csv(table: &RankTable) -> Result<Vec<u8>> {
    let mut header = vec!["method"];
    header.extend(table.datasets.iter().map(String::as_str));
    let rows = table.methods.iter().enumerate().map(|(m, name)| {
        let mut row = vec![name.clone()];
        row.extend(table.ranks.iter().map(|r| r[m].to_string()));
        row
    });
    csv_bytes(&header, rows)
}

pub fn ranks_csv(table: &RankTable) -> Result<Vec<u8>> {
    let mut rows = Vec::new();
    for (d, name) in table.datasets.iter().enumerate() {
        for (m, method) in table.methods.iter().enumerate() {
            rows.push(vec![name.clone(), method.clone(), table.scores[d][m].to_string(), table.ranks[d][m].to_string()]);
        }
    }
    csv_bytes(&["dataset", "method", "score", "rank"], rows)
}

pub fn deltas_csv(table: &RankTable) -> Result<Vec<u8>> {
    let rows = deltas(table).into_iter().map(|(d, m, v)| vec![d, m, v.to_string()]);
    csv_bytes(&["dataset", "method", "delta"], rows)
}

pub fn tallies_csv(table: &RankTable) -> Result<Vec<u8>> {
    let rows = tallies(table).into_iter().map(|t| vec![t.method, t.best.to_string(), t.worst.to_string()]);
    csv_bytes(&["method", "best", "worst"], rows)
}

/// One row per repetition.
pub fn timings_csv(timings: &[TimingRecord]) -> Result<Vec<u8>> {
    let mut rows = Vec::new();
    for t in timings {
        for (k, s) in t.seconds.iter().enumerate() {
            rows.push(vec![t.engine.clone(), t.sweep.as_str().to_string(), t.value.to_string(), (k + 1).to_string(), s.to_string()]);
        }
    }
    csv_bytes(&["engine", "sweep", "value", "rep", "seconds"], rows)
}

/// Everything needed to rerun a command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub settings: serde_json::Map<String, serde_json::Value>,
    pub inputs: Vec<InputDigest>,
    pub datasets: Vec<DatasetDigest>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            settings: serde_json::Map::new(),
            inputs: Vec::new(),
            datasets: Vec::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        self.settings.insert(key.into(), serde_json::to_value(value).expect("plain data"));
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        let bytes = io::read_file(path)?;
        self.inputs.push(InputDigest { path: path.display().to_string(), sha256: io::sha256_hex(&bytes) });
        Ok(())
    }
}

/// Writes the rank heatmap, tallies, deltas and long-form ranks.
pub fn write_rank_reports(table: &RankTable, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let files = [
        ("heatmap.csv", heatmap_csv(table)?),
        ("tallies.csv", tallies_csv(table)?),
        ("deltas.csv", deltas_csv(table)?),
        ("ranks.csv", ranks_csv(table)?),
    ];
    let mut out = Vec::new();
    for (name, bytes) in files {
        let path = out_dir.join(name);
        io::write_file(&path, &bytes)?;
        out.push(path);
    }
    Ok(out)
}

/// Full report bundle: rank files, `timings.csv` and `manifest.json`.
pub fn export_reports(ranks: &RankTable, timings: &[TimingRecord], manifest: &RunManifest, out_dir: &Path) -> Result<Vec<PathBuf>> {
    if ranks.datasets.is_empty() || timings.is_empty() {
        return Err(Error::Usage("reports need at least one ranked dataset and one timing record".into()));
    }
    let mut out = write_rank_reports(ranks, out_dir)?;
    let t = out_dir.join("timings.csv");
    io::write_file(&t, &timings_csv(timings)?)?;
    out.push(t);
    let m = out_dir.join("manifest.json");
    formats::write_json(&m, manifest)?;
    out.push(m);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_tree_sweep_has_fifty_points() {
        let p = sweep_points(50, 5000, 100).unwrap();
        assert_eq!(p.len(), 50);
        assert_eq!((p[0], p[49]), (50, 4950));
        assert_eq!(sweep_points(50, 250, 100).unwrap(), [50, 150, 250]);
        assert!(sweep_points(50, 10, 100).is_err());
        assert!(sweep_points(50, 100, 0).is_err());
    }

    #[test]
    fn tied_best_share_rank() {
        assert_eq!(rank_descending(&[0.9, 0.9, 0.5, 0.7, 0.1, 0.2]), [1.5, 1.5, 4.0, 3.0, 6.0, 5.0]);
        assert_eq!(rank_descending(&[1.0; 3]), [2.0; 3]);
    }

    #[test]
    fn linear_fit_on_a_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let f = linear_fit(&x, &[3.0, 5.0, 7.0, 9.0]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert!(linear_fit(&x, &[1.0; 4]).is_none());
    }

    struct Fails;
    impl TimedEngine for Fails {
        fn tag(&self) -> String {
            "fails".into()
        }
        fn fit(&self, _: &Dataset, size: usize, _: u64) -> Result<(), String> {
            if size > 100 {
                Err("too big".into())
            } else {
                Ok(())
            }
        }
    }

    #[test]
    fn failure_stops_engine_sweep() {
        let d = crate::synth::friedman1(60, 5, 1.0, 1);
        let recs = time_vs_trees(&d, &[&Fails], &[50, 150, 250], &TimingOptions { reps: 3, ..Default::default() }).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].seconds.len(), 3);
        assert!(recs[1].error.is_some() && recs[1].seconds.is_empty());
    }

    #[test]
    fn timing_records_hold_means() {
        let d = crate::synth::friedman1(120, 5, 1.0, 1);
        let opts = TimingOptions { reps: 2, ..Default::default() };
        let rf = InRepoEngine(Algorithm::Rf);
        let recs = time_vs_samples(&d, &[&rf], &[50, 100], 5, &opts).unwrap();
        assert_eq!(recs.iter().map(|r| r.value).collect::<Vec<_>>(), [50, 100]);
        for r in &recs {
            let m = r.seconds.iter().sum::<f64>() / r.seconds.len() as f64;
            assert!((r.mean_seconds - m).abs() <= 1e-12);
            assert!(r.mean_seconds > 0.0);
        }
        assert!(time_vs_samples(&d, &[&rf], &[500], 5, &opts).is_err());
        assert_eq!(sample_rows(120, 50, 3), sample_rows(120, 50, 3));
    }

    fn table(scores: Vec<Vec<f64>>) -> RankTable {
        RankTable {
            metric: Metric::Kge,
            methods: Method::ALL.iter().map(|m| m.tag()).collect(),
            datasets: (0..scores.len()).map(|i| format!("d{i}")).collect(),
            ranks: scores.iter().map(|s| rank_descending(s)).collect(),
            params: scores.iter().map(|_| Method::ALL.iter().map(|m| default_params(m.algorithm)).collect()).collect(),
            scores,
        }
    }

    #[test]
    fn report_shapes() {
        let t = table(vec![vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6], vec![0.6, 0.5, 0.4, 0.3, 0.2, 0.1], vec![0.5, 0.5, 0.1, 0.2, 0.3, 0.0]]);
        let tal = tallies(&t);
        assert_eq!(tal.iter().map(|t| t.best).sum::<usize>(), 4);
        assert_eq!(tal[5].best, 1);
        let heat = String::from_utf8(heatmap_csv(&t).unwrap()).unwrap();
        let lines: Vec<&str> = heat.lines().collect();
        assert_eq!(lines.len(), 7);
        assert_eq!(lines[0], "method,d0,d1,d2");
        assert_eq!(lines[1], "rf-default,6,1,1.5");
        let d = deltas(&t);
        assert_eq!(d.len(), 15);
        assert_eq!(d[0], ("d0".into(), "rf-optdefault".into(), 0.2 - 0.1));
        assert!(String::from_utf8(ranks_csv(&t).unwrap()).unwrap().starts_with("dataset,method,score,rank\n"));
        let dir = tempfile::tempdir().unwrap();
        assert!(export_reports(&t, &[], &RunManifest::new("report", 1), dir.path()).is_err());
    }

    #[test]
    fn method_tags() {
        let tags: Vec<String> = Method::ALL.iter().map(|m| m.tag()).collect();
        assert_eq!(tags, ["rf-default", "rf-optdefault", "rf-meta", "gbt-default", "gbt-optdefault", "gbt-meta"]);
    }
}
