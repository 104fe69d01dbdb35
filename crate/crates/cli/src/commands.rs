use std::path::{Path, PathBuf};

use rayon::prelude::*;

use dci_core::active::{
    aggregate, curves_csv, model_seed, split_rows, summary_csv, ExperimentConfig, LearningCurve, Metric, Strategy, Task,
};
use dci_core::dataset::{load_csv_with, load_idx, read_column_specs, CsvOptions, Dataset, Pipeline, PipelineOptions};
use dci_core::dci::{dci_at, dci_batch, dci_field, field_csv, DciParams, GridSpec};
use dci_core::format::sig9;
use dci_core::metrics::{decile_analysis, DecileReport};
use dci_core::models::{EnsembleConfig, Model, ModelConfig, UncertaintyKind};

use crate::config::Config;
use crate::manifest::{write_output, Fingerprint, RunManifest};
use crate::{CliError, Result};

/// A dataset loaded and encoded as the config describes.
pub struct LoadedData {
    pub pipeline: Pipeline,
    pub data: Dataset,
    pub csv_options: CsvOptions,
    pub fingerprint: Fingerprint,
}

pub fn load_data(cfg: &Config) -> Result<LoadedData> {
    let path = PathBuf::from(cfg.required("dataset.path")?);
    let csv_options = match cfg.list::<String>("dataset.missing")? {
        Some(tokens) => CsvOptions { missing_tokens: tokens },
        None => CsvOptions::default(),
    };
    let (raw, inputs) = match cfg.str("dataset.format").unwrap_or("csv") {
        "csv" => {
            let columns = PathBuf::from(cfg.required("dataset.columns")?);
            let specs = read_column_specs(&columns)?;
            (load_csv_with(&path, &specs, &csv_options)?, vec![path, columns])
        }
        "idx" => {
            let labels = PathBuf::from(cfg.required("dataset.labels")?);
            (load_idx(&path, &labels)?, vec![path, labels])
        }
        other => return Err(CliError::Config(format!("unknown dataset.format `{other}`"))),
    };
    let options = PipelineOptions {
        one_hot: cfg.bool_or("dataset.one_hot", true)?,
        standardize: cfg.bool_or("dataset.standardize", true)?,
        ..PipelineOptions::default()
    };
    let (pipeline, data) = Pipeline::fit(&raw, options)?;
    let inputs: Vec<&Path> = inputs.iter().map(PathBuf::as_path).collect();
    let fingerprint = Fingerprint::of_files(&inputs, data.n_rows(), data.n_features())?;
    Ok(LoadedData {
        pipeline,
        data,
        csv_options,
        fingerprint,
    })
}

pub fn dci_params(cfg: &Config) -> Result<DciParams> {
    let d = DciParams::default();
    Ok(DciParams::new(
        cfg.parsed_or("dci.k", d.k)?,
        cfg.parsed_or("dci.alpha", d.alpha)?,
        cfg.parsed_or("dci.beta", d.beta)?,
        cfg.parsed_or("dci.epsilon", d.epsilon)?,
    )?)
}

fn seed(cfg: &Config) -> Result<u64> {
    cfg.parsed_or("seed", 0)
}

fn task(cfg: &Config, ds: &Dataset) -> Result<Task> {
    let inferred = if ds.is_classification() {
        Task::Classification
    } else {
        Task::Regression
    };
    match cfg.str("task") {
        None => Ok(inferred),
        Some("classification") => Ok(Task::Classification),
        Some("regression") => Ok(Task::Regression),
        Some(other) => Err(CliError::Config(format!("unknown task `{other}`"))),
    }
}

fn n_classes(ds: &Dataset) -> usize {
    ds.class_names().map_or(0, <[String]>::len)
}

pub fn model_config(cfg: &Config, task: Task) -> Result<ModelConfig> {
    match cfg.str("model.kind").unwrap_or("forest") {
        "forest" => {
            let default_trees = if task == Task::Regression { 100 } else { 10 };
            let max_depth = match cfg.str("model.max_depth") {
                None | Some("none") => None,
                Some(_) => cfg.parsed("model.max_depth")?,
            };
            Ok(ModelConfig::Forest(EnsembleConfig {
                n_trees: cfg.parsed_or("model.n_trees", default_trees)?,
                max_depth,
                min_leaf: cfg.parsed_or("model.min_leaf", 1)?,
                seed: 0,
                bootstrap: cfg.bool_or("model.bootstrap", true)?,
            }))
        }
        "knn" => Ok(ModelConfig::Knn {
            k: cfg.parsed_or("model.k", 5)?,
        }),
        other => Err(CliError::Config(format!("unknown model.kind `{other}`"))),
    }
}

fn test_size(cfg: &Config, ds: &Dataset) -> Result<usize> {
    cfg.parsed_or("split.test_size", ds.n_rows() / 4)
}

/// Experiment settings for one strategy.
pub fn experiment_config(cfg: &Config, ds: &Dataset, strategy: Strategy) -> Result<ExperimentConfig> {
    let task = task(cfg, ds)?;
    let metric = match cfg.str("metric") {
        Some(m) => m.parse::<Metric>()?,
        None if task == Task::Regression => Metric::Rmse,
        None if n_classes(ds) == 2 => Metric::Auroc,
        None => Metric::Accuracy,
    };
    let config = ExperimentConfig {
        task,
        test_size: test_size(cfg, ds)?,
        pool_size: cfg.parsed("split.pool_size")?,
        initial_train_size: cfg
            .parsed("schedule.initial_train_size")?
            .ok_or_else(|| CliError::Config("missing config key `schedule.initial_train_size`".into()))?,
        candidate_batch_size: cfg.parsed_or("schedule.candidate_batch_size", 5)?,
        additions_per_update: cfg.parsed_or("schedule.additions_per_update", 0)?,
        n_updates: cfg.parsed_or("schedule.n_updates", 0)?,
        n_seeds: cfg.parsed_or("n_seeds", 1)?,
        strategy,
        model: model_config(cfg, task)?,
        metric,
    };
    config.validate(ds)?;
    Ok(config)
}

pub fn strategies(cfg: &Config) -> Result<Vec<Strategy>> {
    let params = dci_params(cfg)?;
    let names = cfg
        .list::<String>("strategies")?
        .unwrap_or_else(|| ["random", "dci_high", "dci_low"].map(String::from).to_vec());
    if names.is_empty() {
        return Err(CliError::Config("`strategies` is empty".into()));
    }
    let list = names
        .iter()
        .map(|s| Strategy::parse(s, params))
        .collect::<dci_core::Result<Vec<_>>>()?;
    Ok(list)
}

/// File-name form of a strategy label.
pub fn strategy_tag(strategy: &Strategy) -> String {
    strategy.to_string().replace(':', "_")
}

/// DCI of each row of the query file against the dataset; writes `scores.csv`.
pub fn cmd_score(cfg: &Config, out: &Path) -> Result<RunManifest> {
    let loaded = load_data(cfg)?;
    let params = dci_params(cfg)?;
    let queries = PathBuf::from(cfg.required("score.queries")?);
    let is_blank = std::fs::read(&queries)
        .map_err(|source| dci_core::Error::Io {
            path: queries.clone(),
            source,
        })?
        .iter()
        .all(u8::is_ascii_whitespace);
    let scores = if is_blank {
        Vec::new()
    } else {
        let q = loaded.pipeline.read_queries(&queries, &loaded.csv_options)?;
        dci_batch(&loaded.data, &q, &params)?
    };
    let mut csv = String::from("row,dci\n");
    for (i, s) in scores.iter().enumerate() {
        csv.push_str(&format!("{i},{}\n", sig9(*s)));
    }
    write_output(out, "scores.csv", &csv)?;
    let mut manifest = RunManifest::new("score", cfg, seed(cfg)?, loaded.fingerprint);
    manifest.outputs.push(("scores".into(), "scores.csv".into()));
    Ok(manifest)
}

/// Grid from `grid.*` keys; missing ranges default to the data's bounding box.
pub fn grid_spec(cfg: &Config, ds: &Dataset) -> Result<GridSpec> {
    let bounds = |j: usize| {
        let col = ds.features().column(j);
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    };
    let (x0, x1) = bounds(0);
    let (y0, y1) = bounds(1);
    Ok(GridSpec::new(
        (cfg.parsed_or("grid.x_min", x0)?, cfg.parsed_or("grid.x_max", x1)?),
        (cfg.parsed_or("grid.y_min", y0)?, cfg.parsed_or("grid.y_max", y1)?),
        cfg.parsed_or("grid.resolution", 100)?,
    )?)
}

/// DCI field over a 2D dataset; writes `field.csv`.
pub fn cmd_grid(cfg: &Config, out: &Path) -> Result<RunManifest> {
    let loaded = load_data(cfg)?;
    let ds = &loaded.data;
    if ds.n_features() != 2 {
        return Err(dci_core::Error::DimensionMismatch {
            expected: 2,
            found: ds.n_features(),
        }
        .into());
    }
    let params = dci_params(cfg)?;
    let grid = grid_spec(cfg, ds)?;
    let field = dci_field(ds, &grid, &params)?;
    write_output(out, "field.csv", &field_csv(&grid, &field))?;
    let mut manifest = RunManifest::new("grid", cfg, seed(cfg)?, loaded.fingerprint);
    manifest.outputs.push(("field".into(), "field.csv".into()));
    Ok(manifest)
}

/// Runs every configured strategy for `n_seeds` seeds (`seed`, `seed + 1`,
/// ...). Writes `curves_<strategy>.csv` per strategy and `summary.csv`.
pub fn cmd_simulate(cfg: &Config, out: &Path) -> Result<RunManifest> {
    let loaded = load_data(cfg)?;
    let ds = &loaded.data;
    let master = seed(cfg)?;
    let configs = strategies(cfg)?
        .into_iter()
        .map(|s| experiment_config(cfg, ds, s))
        .collect::<Result<Vec<_>>>()?;
    let n_seeds = configs[0].n_seeds;
    if n_seeds == 0 {
        return Err(CliError::Config("n_seeds must be at least 1".into()));
    }
    let jobs: Vec<(usize, u64)> = (0..configs.len())
        .flat_map(|c| (0..n_seeds as u64).map(move |s| (c, master.wrapping_add(s))))
        .collect();
    let curves: Vec<LearningCurve> = jobs
        .par_iter()
        .map(|&(c, s)| dci_core::active::run_experiment(ds, &configs[c], s))
        .collect::<dci_core::Result<_>>()?;

    let mut manifest = RunManifest::new("simulate", cfg, master, loaded.fingerprint);
    let mut summaries = Vec::new();
    for (c, config) in configs.iter().enumerate() {
        let mine = &curves[c * n_seeds..(c + 1) * n_seeds];
        let label = config.strategy.to_string();
        let file = format!("curves_{}.csv", strategy_tag(&config.strategy));
        write_output(out, &file, &curves_csv(mine))?;
        manifest.outputs.push((label.clone(), file));
        summaries.push((label, aggregate(mine)?));
    }
    write_output(out, "summary.csv", &summary_csv(&summaries))?;
    manifest.outputs.push(("summary".into(), "summary.csv".into()));
    Ok(manifest)
}

/// One uncertainty measure evaluated in the decile study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measure {
    Model(UncertaintyKind),
    Dci(DciParams),
}

impl Measure {
    pub fn file_name(&self, train_size: usize) -> String {
        match self {
            Measure::Model(kind) => format!("deciles_n{train_size}_model_{kind}.csv"),
            Measure::Dci(p) => format!("deciles_n{train_size}_dci_a{}_b{}.csv", sig9(p.alpha), sig9(p.beta)),
        }
    }
}

/// The measures of the decile study: the model uncertainty, then DCI over
/// the alpha sweep (at the configured beta) and the beta sweep (at the
/// configured alpha), without repeats.
pub fn analysis_measures(cfg: &Config, ds: &Dataset) -> Result<Vec<Measure>> {
    let base = dci_params(cfg)?;
    let kind = match cfg.str("analyze.uncertainty") {
        Some(k) => k.parse()?,
        None if n_classes(ds) == 2 => UncertaintyKind::Eq3Binary,
        None => UncertaintyKind::MaxProb,
    };
    let mut measures = vec![Measure::Model(kind)];
    let alphas = cfg.list::<f64>("analyze.alphas")?.unwrap_or_else(|| vec![base.alpha]);
    let betas = cfg.list::<f64>("analyze.betas")?.unwrap_or_else(|| vec![base.beta]);
    let sweep = alphas
        .iter()
        .map(|&a| (a, base.beta))
        .chain(betas.iter().map(|&b| (base.alpha, b)));
    for (alpha, beta) in sweep {
        let m = Measure::Dci(DciParams::new(base.k, alpha, beta, base.epsilon)?);
        if !measures.contains(&m) {
            measures.push(m);
        }
    }
    Ok(measures)
}

/// Decile reports of every measure for one seeded split with `train_size`
/// labelled points.
pub fn analyze_split(
    ds: &Dataset,
    model: &ModelConfig,
    measures: &[Measure],
    test_size: usize,
    pool_size: Option<usize>,
    train_size: usize,
    seed: u64,
) -> Result<Vec<DecileReport>> {
    let split = split_rows(ds.n_rows(), test_size, pool_size, train_size, seed)?;
    let trained = Model::fit(&ds.select(&split.labelled), model, model_seed(seed, 0))?;
    let (class_ids, class_count) = ds.class_ids();
    let x = ds.features();
    let preds = split
        .test
        .iter()
        .map(|&i| trained.predict_row(x.row(i)))
        .collect::<dci_core::Result<Vec<_>>>()?;
    let correct: Vec<bool> = split
        .test
        .iter()
        .zip(&preds)
        .map(|(&i, p)| p.predicted_class() == Some(class_ids[i]))
        .collect();
    let points = x.select_rows(&split.labelled);
    let labels: Vec<usize> = split.labelled.iter().map(|&i| class_ids[i]).collect();
    measures
        .iter()
        .map(|m| {
            let uncertainty = match m {
                Measure::Model(kind) => preds
                    .iter()
                    .map(|p| kind.evaluate(p))
                    .collect::<dci_core::Result<Vec<_>>>()?,
                Measure::Dci(params) => split
                    .test
                    .iter()
                    .map(|&i| dci_at(&points, &labels, &split.labelled, class_count, x.row(i), params))
                    .collect::<dci_core::Result<Vec<_>>>()?,
            };
            Ok(decile_analysis(&uncertainty, &correct)?)
        })
        .collect()
}

/// Uncertainty-vs-accuracy decile study. For each training size and measure,
/// averages decile reports over `analyze.n_splits` seeded splits and writes
/// one CSV.
pub fn cmd_analyze(cfg: &Config, out: &Path) -> Result<RunManifest> {
    let loaded = load_data(cfg)?;
    let ds = &loaded.data;
    if !ds.is_classification() {
        return Err(dci_core::Error::WrongTask("the decile study needs class labels".into()).into());
    }
    let master = seed(cfg)?;
    let sizes: Vec<usize> = cfg
        .list("analyze.train_sizes")?
        .ok_or_else(|| CliError::Config("missing config key `analyze.train_sizes`".into()))?;
    let n_splits: usize = cfg.parsed_or("analyze.n_splits", 1)?;
    if sizes.is_empty() || n_splits == 0 {
        return Err(CliError::Config("need at least one training size and one split".into()));
    }
    let model = model_config(cfg, Task::Classification)?;
    let measures = analysis_measures(cfg, ds)?;
    let test_size = test_size(cfg, ds)?;
    let pool_size = cfg.parsed("split.pool_size")?;

    let jobs: Vec<(usize, u64)> = sizes
        .iter()
        .flat_map(|&n| (0..n_splits as u64).map(move |s| (n, master.wrapping_add(s))))
        .collect();
    let reports: Vec<Vec<DecileReport>> = jobs
        .par_iter()
        .map(|&(n, s)| analyze_split(ds, &model, &measures, test_size, pool_size, n, s))
        .collect::<Result<_>>()?;

    let mut manifest = RunManifest::new("analyze", cfg, master, loaded.fingerprint);
    for (i, &n) in sizes.iter().enumerate() {
        let per_split = &reports[i * n_splits..(i + 1) * n_splits];
        for (m, measure) in measures.iter().enumerate() {
            let cell: Vec<DecileReport> = per_split.iter().map(|r| r[m].clone()).collect();
            let file = measure.file_name(n);
            write_output(out, &file, &DecileReport::average(&cell)?.to_csv())?;
            manifest.outputs.push((file.trim_end_matches(".csv").to_string(), file));
        }
    }
    Ok(manifest)
}
