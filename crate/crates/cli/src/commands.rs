//! The four subcommands. Each writes its tables, the resolved configuration
//! and a manifest into `<out_dir>/<command>/`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use nodeclass::neural::ModelSpec;
use nodeclass::stats::{
    class_correlation, kruskal_wallis, mann_whitney, ClassCorrelation, EdgeView, EvalReport,
    KruskalWallis,
};
use nodeclass::topo::FeatureTable;
use nodeclass::{make_splits, SplitMask};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, ModelChoice, SweepConfig};
use crate::data::{feature_cache_key, load_dataset, raw_features, DatasetSummary, PreparedData};
use crate::error::{CliError, Result};
use crate::models::Workbench;

/// Files written by a command.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub files: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'static str,
    code_version: String,
    seed: u64,
    /// Rerun with `nodeclass <command> --config config.toml`.
    config: &'a ExperimentConfig,
    dataset: &'a DatasetSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    feature_cache_key: Option<String>,
    model_specs: BTreeMap<&'static str, ModelSpec>,
    outputs: &'a [String],
}

/// `git describe` of the source tree this binary was built from.
fn code_version() -> String {
    std::process::Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".into())
}

struct OutputDir {
    dir: PathBuf,
    files: Vec<String>,
}

impl OutputDir {
    fn create(config: &ExperimentConfig, command: &str) -> Result<Self> {
        let dir = config.out_dir.join(command);
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(OutputDir {
            dir,
            files: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    fn csv(&mut self, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<()> {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
        w.write_record(header).map_err(|e| csv_error(&path, e))?;
        for r in rows {
            w.write_record(r).map_err(|e| csv_error(&path, e))?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value).expect("serializable");
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }

    fn finish(
        mut self,
        command: &str,
        config: &ExperimentConfig,
        data: &PreparedData,
        models: &[ModelChoice],
    ) -> Result<RunOutput> {
        let cfg_path = self.path("config.toml");
        let text = toml::to_string(config).map_err(|e| CliError::config(e.to_string()))?;
        fs::write(&cfg_path, text).map_err(|e| CliError::io(&cfg_path, e))?;
        let uses_features = command == "features"
            || command == "stats"
            || models.iter().any(|m| m.needs_topology());
        let mut outputs = self.files.clone();
        outputs.push("manifest.json".into());
        let manifest = Manifest {
            command,
            version: env!("CARGO_PKG_VERSION"),
            code_version: code_version(),
            seed: config.seed,
            config,
            dataset: &data.summary,
            feature_cache_key: uses_features.then(|| feature_cache_key(data, &config.features)),
            model_specs: models
                .iter()
                .map(|&m| (m.name(), config.spec_for(m)))
                .collect(),
            outputs: &outputs,
        };
        self.json("manifest.json", &manifest)?;
        Ok(RunOutput {
            dir: self.dir,
            files: self.files,
        })
    }
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::io(path, source),
        other => CliError::Data(format!("{}: {other:?}", path.display())),
    }
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

fn prepare(config: &ExperimentConfig) -> Result<PreparedData> {
    config.validate()?;
    load_dataset(&config.dataset)
}

fn features_for(config: &ExperimentConfig, data: &PreparedData) -> Result<FeatureTable> {
    raw_features(data, &config.features, &config.cache_dir())
}

/// Writes the z-scored topological measures of every node.
pub fn cmd_features(config: &ExperimentConfig) -> Result<RunOutput> {
    let data = prepare(config)?;
    let table = features_for(config, &data)?.normalized();
    let mut out = OutputDir::create(config, "features")?;
    let path = out.path("features.csv");
    let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
    table.write_csv(std::io::BufWriter::new(file), &data.dataset.node_ids)?;
    out.finish("features", config, &data, &[])
}

/// Per-feature class association, per-class feature profiles and the
/// neighbor class correlation.
#[derive(Clone, Debug, Serialize)]
pub struct StatsReport {
    pub class_names: Vec<String>,
    pub kruskal: Vec<(String, KruskalWallis)>,
    /// Per feature: class means of the min-max scaled values, scaled to sum to 1.
    pub class_means: Vec<(String, Vec<f64>)>,
    pub correlation: ClassCorrelation,
}

impl StatsReport {
    /// Share of features with `p < alpha`.
    pub fn significant_fraction(&self, alpha: f64) -> f64 {
        let hits = self
            .kruskal
            .iter()
            .filter(|(_, k)| k.p_value < alpha)
            .count();
        hits as f64 / self.kruskal.len().max(1) as f64
    }
}

#[derive(Serialize)]
struct StatsSummary {
    n_features: usize,
    significant_p001: usize,
    significant_fraction_p001: f64,
    diagonal_mass: f64,
    frequency_baseline: f64,
    uniform_baseline: f64,
    closer_baseline: &'static str,
}

/// Computes the statistics tables without writing anything.
pub fn stats(config: &ExperimentConfig, data: &PreparedData) -> Result<StatsReport> {
    let ds = &data.dataset;
    let nonempty = ds.class_counts().iter().filter(|&&c| c > 0).count();
    if nonempty < 2 {
        return Err(CliError::Data(format!(
            "need ≥2 classes, the dataset has {nonempty}"
        )));
    }
    let table = features_for(config, data)?;
    let mut kruskal = Vec::new();
    let mut class_means = Vec::new();
    for (name, col) in table.columns() {
        kruskal.push((name.to_string(), kruskal_wallis(col, &ds.labels)?));
        class_means.push((
            name.to_string(),
            stacked_class_means(col, &ds.labels, ds.n_classes),
        ));
    }
    Ok(StatsReport {
        class_names: ds.class_names.clone(),
        kruskal,
        class_means,
        correlation: class_correlation(ds, EdgeView::Undirected),
    })
}

/// Min-max scales `values`, averages them per class and rescales the
/// class means to sum to one. A feature that is zero everywhere after
/// scaling is spread uniformly.
fn stacked_class_means(values: &[f64], labels: &[usize], n_classes: usize) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let mut sums = vec![0.0; n_classes];
    let mut counts = vec![0usize; n_classes];
    for (&v, &l) in values.iter().zip(labels) {
        sums[l] += if span > 0.0 { (v - lo) / span } else { 0.0 };
        counts[l] += 1;
    }
    let means: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect();
    let total: f64 = means.iter().sum();
    if total > 0.0 {
        means.iter().map(|m| m / total).collect()
    } else {
        vec![1.0 / n_classes as f64; n_classes]
    }
}

pub fn cmd_stats(config: &ExperimentConfig) -> Result<RunOutput> {
    let data = prepare(config)?;
    let report = stats(config, &data)?;
    let mut out = OutputDir::create(config, "stats")?;
    let header = |first: &[&str], rest: &[String]| -> Vec<String> {
        first
            .iter()
            .map(|s| s.to_string())
            .chain(rest.iter().cloned())
            .collect()
    };

    let rows: Vec<Vec<String>> = report
        .kruskal
        .iter()
        .enumerate()
        .map(|(i, (name, k))| {
            vec![
                i.to_string(),
                name.clone(),
                fmt(k.h),
                fmt(k.p_value),
                fmt(k.log10_p),
            ]
        })
        .collect();
    out.csv(
        "fig1a_kruskal.csv",
        &header(&["index", "feature", "h", "p_value", "log10_p"], &[]),
        &rows,
    )?;

    let rows: Vec<Vec<String>> = report
        .class_means
        .iter()
        .map(|(name, means)| {
            std::iter::once(name.clone())
                .chain(means.iter().map(|&m| fmt(m)))
                .collect()
        })
        .collect();
    out.csv(
        "fig1b_class_means.csv",
        &header(&["feature"], &report.class_names),
        &rows,
    )?;

    let corr = &report.correlation;
    let rows: Vec<Vec<String>> = corr
        .matrix
        .iter()
        .zip(&report.class_names)
        .map(|(row, name)| {
            std::iter::once(name.clone())
                .chain(row.iter().map(|&x| fmt(x)))
                .collect()
        })
        .collect();
    out.csv(
        "fig1c_class_correlation.csv",
        &header(&["class"], &report.class_names),
        &rows,
    )?;

    let significant = report
        .kruskal
        .iter()
        .filter(|(_, k)| k.p_value < 0.01)
        .count();
    let freq_gap = (corr.diagonal_mass - corr.frequency_baseline).abs();
    let unif_gap = (corr.diagonal_mass - corr.uniform_baseline).abs();
    out.json(
        "stats_summary.json",
        &StatsSummary {
            n_features: report.kruskal.len(),
            significant_p001: significant,
            significant_fraction_p001: report.significant_fraction(0.01),
            diagonal_mass: corr.diagonal_mass,
            frequency_baseline: corr.frequency_baseline,
            uniform_baseline: corr.uniform_baseline,
            closer_baseline: if freq_gap <= unif_gap {
                "frequency"
            } else {
                "uniform"
            },
        },
    )?;
    out.finish("stats", config, &data, &[])
}

/// Outcome of one training run.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitResult {
    pub split: usize,
    pub seed: u64,
    /// Test accuracy, or the reason training failed numerically.
    pub outcome: std::result::Result<f64, String>,
}

/// All splits of one model at one train fraction.
#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    pub fraction: f64,
    pub model: ModelChoice,
    pub splits: Vec<SplitResult>,
}

impl CellResult {
    /// Accuracies of the splits that trained successfully.
    pub fn accuracies(&self) -> Vec<f64> {
        self.splits
            .iter()
            .filter_map(|s| s.outcome.clone().ok())
            .collect()
    }

    pub fn report(&self) -> Option<EvalReport> {
        let ok: Vec<&SplitResult> = self.splits.iter().filter(|s| s.outcome.is_ok()).collect();
        let seeds = ok.iter().map(|s| s.seed).collect();
        EvalReport::new(self.model.name(), self.fraction, seeds, self.accuracies()).ok()
    }
}

/// Mann-Whitney comparison of two models at one fraction.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub fraction: f64,
    pub first: ModelChoice,
    pub second: ModelChoice,
    pub mean_first: f64,
    pub mean_second: f64,
    pub u: f64,
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    /// Ordered by fraction, then by model in configuration order.
    pub cells: Vec<CellResult>,
    pub comparisons: Vec<Comparison>,
}

impl Sweep {
    pub fn cell(&self, fraction: f64, model: ModelChoice) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.fraction == fraction && c.model == model)
    }

    pub fn n_succeeded(&self) -> usize {
        self.cells.iter().map(|c| c.accuracies().len()).sum()
    }
}

/// Seed of the first split at the `index`-th fraction; splits of one
/// fraction are shared by every model.
pub fn fraction_seed(base: u64, index: usize, n_splits: usize) -> u64 {
    base.wrapping_add((index * n_splits) as u64)
}

/// Trains every model on every split of every fraction. Splits run in
/// parallel; results come back in (fraction, model, split) order.
pub fn run_sweep(bench: &Workbench, sweep: &SweepConfig, seed: u64) -> Result<Sweep> {
    for &m in &sweep.models {
        bench.check(m)?;
    }
    let n = bench.dataset.n_nodes();
    let masks: Vec<Vec<SplitMask>> = sweep
        .fractions
        .iter()
        .enumerate()
        .map(|(i, &f)| make_splits(n, f, sweep.n_splits, fraction_seed(seed, i, sweep.n_splits)))
        .collect::<nodeclass::Result<_>>()
        .map_err(CliError::from)?;
    let jobs: Vec<(usize, ModelChoice, usize)> = (0..sweep.fractions.len())
        .flat_map(|fi| {
            sweep
                .models
                .iter()
                .flat_map(move |&m| (0..sweep.n_splits).map(move |s| (fi, m, s)))
        })
        .collect();
    let results: Vec<SplitResult> = jobs
        .par_iter()
        .map(|&(fi, model, s)| {
            let mask = &masks[fi][s];
            let outcome = match bench.fit(model, mask) {
                Ok(fit) => Ok(fit.accuracy),
                Err(CliError::Numerical(msg)) => Err(msg),
                Err(e) => return Err(e),
            };
            Ok(SplitResult {
                split: s,
                seed: mask.seed,
                outcome,
            })
        })
        .collect::<Result<_>>()?;

    let mut cells = Vec::new();
    let mut results = results.into_iter();
    for &fraction in &sweep.fractions {
        for &model in &sweep.models {
            cells.push(CellResult {
                fraction,
                model,
                splits: results.by_ref().take(sweep.n_splits).collect(),
            });
        }
    }
    let mut sweep_result = Sweep {
        cells,
        comparisons: Vec::new(),
    };
    for &fraction in &sweep.fractions {
        for &[a, b] in &sweep.comparisons {
            let xa = sweep_result
                .cell(fraction, a)
                .expect("model run")
                .accuracies();
            let xb = sweep_result
                .cell(fraction, b)
                .expect("model run")
                .accuracies();
            if xa.is_empty() || xb.is_empty() {
                continue;
            }
            let mw = mann_whitney(&xa, &xb)?;
            sweep_result.comparisons.push(Comparison {
                fraction,
                first: a,
                second: b,
                mean_first: xa.iter().sum::<f64>() / xa.len() as f64,
                mean_second: xb.iter().sum::<f64>() / xb.len() as f64,
                u: mw.u,
                p_value: mw.p_value,
            });
        }
    }
    Ok(sweep_result)
}

/// Loads the data and runs the configured sweep without writing anything.
pub fn experiment(config: &ExperimentConfig) -> Result<(PreparedData, Sweep)> {
    let data = prepare(config)?;
    let sweep = experiment_on(config, &data, &config.experiment)?;
    Ok((data, sweep))
}

fn experiment_on(
    config: &ExperimentConfig,
    data: &PreparedData,
    sweep: &SweepConfig,
) -> Result<Sweep> {
    let features = if sweep.models.iter().any(|m| m.needs_topology()) {
        Some(features_for(config, data)?)
    } else {
        None
    };
    let bench = Workbench::new(&data.dataset, config, features.as_ref())?;
    run_sweep(&bench, sweep, config.seed)
}

fn split_rows(cells: &[CellResult]) -> Vec<Vec<String>> {
    cells
        .iter()
        .flat_map(|c| {
            c.splits.iter().map(move |s| {
                let (status, acc, msg) = match &s.outcome {
                    Ok(a) => ("ok", fmt(*a), String::new()),
                    Err(m) => ("diverged", String::new(), m.clone()),
                };
                vec![
                    fmt(c.fraction),
                    c.model.to_string(),
                    s.split.to_string(),
                    s.seed.to_string(),
                    status.into(),
                    acc,
                    msg,
                ]
            })
        })
        .collect()
}

const SPLIT_HEADER: [&str; 7] = [
    "fraction", "model", "split", "seed", "status", "accuracy", "message",
];

fn fail_if_nothing_trained(sweep: &Sweep) -> Result<()> {
    if sweep.n_succeeded() == 0 {
        return Err(CliError::Numerical(
            "training diverged on every split".into(),
        ));
    }
    Ok(())
}

/// Accuracy per (fraction, model) with per-split values, split statuses and
/// the configured pairwise comparisons.
pub fn cmd_experiment(config: &ExperimentConfig) -> Result<RunOutput> {
    let (data, sweep) = experiment(config)?;
    let n_splits = config.experiment.n_splits;
    let mut out = OutputDir::create(config, "experiment")?;

    let mut header: Vec<String> = ["fraction", "model", "mean", "std", "n_ok"]
        .map(String::from)
        .to_vec();
    header.extend((0..n_splits).map(|i| format!("split_{i}")));
    let rows: Vec<Vec<String>> = sweep
        .cells
        .iter()
        .map(|c| {
            let (mean, std) = c.report().map_or((String::new(), String::new()), |r| {
                (fmt(r.mean), fmt(r.std))
            });
            let mut row = vec![
                fmt(c.fraction),
                c.model.to_string(),
                mean,
                std,
                c.accuracies().len().to_string(),
            ];
            row.extend(
                c.splits
                    .iter()
                    .map(|s| s.outcome.as_ref().map_or(String::new(), |&a| fmt(a))),
            );
            row
        })
        .collect();
    out.csv("accuracy.csv", &header, &rows)?;
    out.csv(
        "splits.csv",
        &SPLIT_HEADER.map(String::from),
        &split_rows(&sweep.cells),
    )?;

    let header = [
        "fraction",
        "first",
        "second",
        "mean_first",
        "mean_second",
        "u",
        "p_value",
    ]
    .map(String::from);
    let rows: Vec<Vec<String>> = sweep
        .comparisons
        .iter()
        .map(|c| {
            vec![
                fmt(c.fraction),
                c.first.to_string(),
                c.second.to_string(),
                fmt(c.mean_first),
                fmt(c.mean_second),
                fmt(c.u),
                fmt(c.p_value),
            ]
        })
        .collect();
    out.csv("comparisons.csv", &header, &rows)?;
    let result = out.finish("experiment", config, &data, &config.experiment.models);
    fail_if_nothing_trained(&sweep)?;
    result
}

/// One model at one fraction: the accuracy report over all splits, plus
/// the trained model and posteriors of the first split.
pub fn cmd_evaluate(config: &ExperimentConfig) -> Result<RunOutput> {
    let data = prepare(config)?;
    let ev = &config.evaluate;
    let sweep_cfg = SweepConfig {
        fractions: vec![ev.fraction],
        n_splits: ev.n_splits,
        models: vec![ev.model],
        comparisons: Vec::new(),
    };
    let features = if ev.model.needs_topology() {
        Some(features_for(config, &data)?)
    } else {
        None
    };
    let bench = Workbench::new(&data.dataset, config, features.as_ref())?;
    let sweep = run_sweep(&bench, &sweep_cfg, config.seed)?;
    let mut out = OutputDir::create(config, "evaluate")?;
    out.csv(
        "splits.csv",
        &SPLIT_HEADER.map(String::from),
        &split_rows(&sweep.cells),
    )?;
    if let Some(report) = sweep.cells[0].report() {
        out.json("report.json", &report)?;
    }

    let ds = &data.dataset;
    let mask = &make_splits(
        ds.n_nodes(),
        ev.fraction,
        1,
        fraction_seed(config.seed, 0, ev.n_splits),
    )?[0];
    match bench.fit(ev.model, mask) {
        Ok(fit) => {
            let path = out.path("model.json");
            let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
            fit.model.write_json(std::io::BufWriter::new(file))?;
            let mut header: Vec<String> = vec![
                "node_id".into(),
                "label".into(),
                "predicted".into(),
                "train".into(),
            ];
            header.extend(ds.class_names.iter().take(fit.posteriors.cols()).cloned());
            let pred = fit.posteriors.argmax_rows();
            let rows: Vec<Vec<String>> = (0..ds.n_nodes())
                .map(|i| {
                    let mut row = vec![
                        ds.node_ids[i].clone(),
                        ds.class_names[ds.labels[i]].clone(),
                        ds.class_names[pred[i]].clone(),
                        mask.is_train(i).to_string(),
                    ];
                    row.extend(fit.posteriors.row(i).iter().map(|&p| fmt(p)));
                    row
                })
                .collect();
            out.csv("posteriors.csv", &header, &rows)?;
        }
        Err(CliError::Numerical(msg)) => eprintln!("warning: first split diverged: {msg}"),
        Err(e) => return Err(e),
    }
    let result = out.finish("evaluate", config, &data, &[ev.model]);
    fail_if_nothing_trained(&sweep)?;
    result
}
