//! Pool-based active-learning simulation.
//!
//! One experiment: split the data into a held-out test set and a pool, label
//! a random initial subset of the pool, then alternate between acquiring
//! points (each acquisition scores a small random batch of unlabelled
//! candidates and keeps the best one) and retraining the model, recording the
//! test metric after every retrain.

use std::fmt;

use rand::seq::{index, SliceRandom};
use rayon::prelude::*;

use crate::dataset::{pca_fit, pca_project, Dataset, Labels, PcaModel};
use crate::dci::{dci_at, DciParams};
use crate::format::sig9;
use crate::metrics::{accuracy, auroc, quantile_sorted, rmse};
use crate::models::{Model, ModelConfig, UncertaintyKind};
use crate::rng::{self, Rng};
use crate::{Error, Matrix, Result};

/// Feature space in which DCI distances are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureSpace {
    Raw,
    /// First `n` principal components of the current labelled set, each
    /// weighted by its explained variance ratio; refit at every model update.
    Pca(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    Random,
    DciHigh { params: DciParams, space: FeatureSpace },
    DciLow { params: DciParams, space: FeatureSpace },
    ModelUncertainty(UncertaintyKind),
}

impl Strategy {
    /// Parses `random`, `dci_high`, `dci_low` (optionally `:raw` / `:pcaN`)
    /// and `model:<kind>`; DCI strategies take `params`.
    pub fn parse(s: &str, params: DciParams) -> Result<Strategy> {
        let s = s.trim();
        let (head, tail) = match s.split_once(':') {
            Some((h, t)) => (h, Some(t)),
            None => (s, None),
        };
        let space = |tail: Option<&str>| -> Result<FeatureSpace> {
            match tail {
                None | Some("raw") => Ok(FeatureSpace::Raw),
                Some(t) => t
                    .strip_prefix("pca")
                    .and_then(|n| n.parse().ok())
                    .filter(|&n: &usize| n > 0)
                    .map(FeatureSpace::Pca)
                    .ok_or_else(|| Error::InvalidParameter(format!("unknown feature space `{t}`"))),
            }
        };
        match head {
            "random" if tail.is_none() => Ok(Strategy::Random),
            "dci_high" => Ok(Strategy::DciHigh {
                params,
                space: space(tail)?,
            }),
            "dci_low" => Ok(Strategy::DciLow {
                params,
                space: space(tail)?,
            }),
            "model" => Ok(Strategy::ModelUncertainty(
                tail.ok_or_else(|| Error::InvalidParameter("`model` needs an uncertainty kind".into()))?
                    .parse()?,
            )),
            _ => Err(Error::InvalidParameter(format!("unknown strategy `{s}`"))),
        }
    }

    fn dci(&self) -> Option<(&DciParams, FeatureSpace)> {
        match self {
            Strategy::DciHigh { params, space } | Strategy::DciLow { params, space } => Some((params, *space)),
            _ => None,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let space = |s: &FeatureSpace| match s {
            FeatureSpace::Raw => String::new(),
            FeatureSpace::Pca(n) => format!(":pca{n}"),
        };
        match self {
            Strategy::Random => f.write_str("random"),
            Strategy::DciHigh { space: s, .. } => write!(f, "dci_high{}", space(s)),
            Strategy::DciLow { space: s, .. } => write!(f, "dci_low{}", space(s)),
            Strategy::ModelUncertainty(kind) => write!(f, "model:{kind}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Classification,
    Regression,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Auroc,
    Accuracy,
    Rmse,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Auroc => "auroc",
            Metric::Accuracy => "accuracy",
            Metric::Rmse => "rmse",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auroc" => Ok(Metric::Auroc),
            "accuracy" => Ok(Metric::Accuracy),
            "rmse" => Ok(Metric::Rmse),
            other => Err(Error::InvalidParameter(format!("unknown metric `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub task: Task,
    /// Rows held out for evaluation.
    pub test_size: usize,
    /// Rows available for labelling; `None` uses everything not held out.
    pub pool_size: Option<usize>,
    pub initial_train_size: usize,
    pub candidate_batch_size: usize,
    pub additions_per_update: usize,
    pub n_updates: usize,
    pub n_seeds: usize,
    pub strategy: Strategy,
    pub model: ModelConfig,
    pub metric: Metric,
}

impl ExperimentConfig {
    pub fn validate(&self, ds: &Dataset) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.initial_train_size == 0 {
            return bad("initial_train_size must be at least 1");
        }
        if self.candidate_batch_size == 0 {
            return bad("candidate_batch_size must be at least 1");
        }
        if self.test_size == 0 {
            return bad("test_size must be at least 1");
        }
        match (self.task, ds.labels()) {
            (Task::Classification, Labels::Class(_)) | (Task::Regression, Labels::Numeric(_)) => {}
            _ => return bad("task does not match the dataset's label column"),
        }
        match (self.metric, self.task) {
            (Metric::Rmse, Task::Regression) | (Metric::Auroc | Metric::Accuracy, Task::Classification) => {}
            _ => return bad("metric does not match the task"),
        }
        if self.metric == Metric::Auroc && ds.class_names().map_or(0, <[String]>::len) != 2 {
            return bad("AUROC needs exactly two classes");
        }
        if let Some((params, _)) = self.strategy.dci() {
            params.validate()?;
        }
        if self.test_size >= ds.n_rows() {
            return Err(Error::PoolExhausted {
                needed: self.test_size + 1,
                available: ds.n_rows(),
            });
        }
        let pool = self.pool_size.unwrap_or(ds.n_rows() - self.test_size);
        let needed = self.final_train_size();
        if pool > ds.n_rows() - self.test_size || needed > pool {
            return Err(Error::PoolExhausted {
                needed: needed.max(pool) + self.test_size,
                available: ds.n_rows(),
            });
        }
        Ok(())
    }

    pub fn final_train_size(&self) -> usize {
        self.initial_train_size + self.n_updates * self.additions_per_update
    }

    /// Train sizes at which the curve is recorded.
    pub fn schedule(&self) -> Vec<usize> {
        (0..=self.n_updates)
            .map(|u| self.initial_train_size + u * self.additions_per_update)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub train_size: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearningCurve {
    pub strategy: String,
    pub seed: u64,
    pub metric: Metric,
    pub points: Vec<CurvePoint>,
}

impl LearningCurve {
    pub fn final_value(&self) -> f64 {
        self.points.last().map_or(f64::NAN, |p| p.value)
    }
}

/// Scores an unlabelled pool row; higher means more uncertain.
pub trait CandidateScorer {
    fn score(&self, pool_index: usize) -> Result<f64>;
}

/// Scorer for strategies that do not look at scores.
pub struct Unscored;

impl CandidateScorer for Unscored {
    fn score(&self, _: usize) -> Result<f64> {
        Ok(0.0)
    }
}

/// DCI of pool rows against the current labelled set, in a fixed embedding.
pub struct DciScorer<'a> {
    pub features: &'a Matrix,
    pub embedding: &'a Embedding,
    pub labelled: &'a LabelledSet,
    pub class_count: usize,
    pub params: DciParams,
}

impl CandidateScorer for DciScorer<'_> {
    fn score(&self, pool_index: usize) -> Result<f64> {
        let q = self.embedding.embed(self.features.row(pool_index))?;
        dci_at(
            &self.labelled.points,
            &self.labelled.classes,
            &self.labelled.ids,
            self.class_count,
            &q,
            &self.params,
        )
    }
}

/// Committee uncertainty of pool rows under a trained model.
pub struct ModelScorer<'a> {
    pub model: &'a Model,
    pub features: &'a Matrix,
    pub kind: UncertaintyKind,
}

impl CandidateScorer for ModelScorer<'_> {
    fn score(&self, pool_index: usize) -> Result<f64> {
        self.kind
            .evaluate(&self.model.predict_row(self.features.row(pool_index))?)
    }
}

/// Map from raw feature rows into the space where DCI distances are taken.
#[derive(Debug, Clone)]
pub enum Embedding {
    Identity,
    Pca(PcaModel),
}

impl Embedding {
    pub fn embed(&self, row: &[f64]) -> Result<Vec<f64>> {
        match self {
            Embedding::Identity => Ok(row.to_vec()),
            Embedding::Pca(model) => {
                let m = pca_project(model, &Matrix::from_rows(&[row])?)?;
                Ok(m.row(0).to_vec())
            }
        }
    }
}

/// Labelled points in the DCI embedding, with class ids and pool indices.
#[derive(Debug, Clone)]
pub struct LabelledSet {
    pub points: Matrix,
    pub classes: Vec<usize>,
    pub ids: Vec<usize>,
}

impl LabelledSet {
    fn build(features: &Matrix, classes: &[usize], labelled: &[usize], embedding: &Embedding) -> Result<Self> {
        let points = match embedding {
            Embedding::Identity => features.select_rows(labelled),
            Embedding::Pca(model) => pca_project(model, &features.select_rows(labelled))?,
        };
        Ok(LabelledSet {
            points,
            classes: labelled.iter().map(|&i| classes[i]).collect(),
            ids: labelled.to_vec(),
        })
    }

    fn push(&mut self, features: &Matrix, classes: &[usize], index: usize, embedding: &Embedding) -> Result<()> {
        self.points.push_row(&embedding.embed(features.row(index))?)?;
        self.classes.push(classes[index]);
        self.ids.push(index);
        Ok(())
    }
}

/// Picks the next point to label. Draws `min(batch_size, remaining)` distinct
/// candidates uniformly, then returns the first draw (`Random`), the lowest
/// score (`DciLow`) or the highest score (everything else); score ties go to
/// the lowest pool index.
pub fn select_next(
    unlabelled: &[usize],
    strategy: &Strategy,
    batch_size: usize,
    scorer: &dyn CandidateScorer,
    rng: &mut Rng,
) -> Result<usize> {
    select_position(unlabelled, strategy, batch_size, scorer, rng).map(|p| unlabelled[p])
}

fn select_position(
    unlabelled: &[usize],
    strategy: &Strategy,
    batch_size: usize,
    scorer: &dyn CandidateScorer,
    rng: &mut Rng,
) -> Result<usize> {
    if unlabelled.is_empty() {
        return Err(Error::Empty("no unlabelled points left".into()));
    }
    let m = batch_size.max(1).min(unlabelled.len());
    let draws = index::sample(rng, unlabelled.len(), m).into_vec();
    if let Strategy::Random = strategy {
        return Ok(draws[0]);
    }
    let lowest = matches!(strategy, Strategy::DciLow { .. });
    let mut best: Option<(usize, f64)> = None;
    for pos in draws {
        let s = scorer.score(unlabelled[pos])?;
        let better = match best {
            None => true,
            Some((bp, bs)) => {
                let ord = if lowest { bs.total_cmp(&s) } else { s.total_cmp(&bs) };
                ord.is_gt() || (ord.is_eq() && unlabelled[pos] < unlabelled[bp])
            }
        };
        if better {
            best = Some((pos, s));
        }
    }
    Ok(best.expect("at least one candidate").0)
}

/// Held-out test rows, the labelling pool, and the initial labelled subset.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub test: Vec<usize>,
    pub labelled: Vec<usize>,
    pub unlabelled: Vec<usize>,
}

/// Seeded split; depends only on the row count, sizes and seed, so every
/// strategy run with the same seed starts from the same state.
pub fn split_rows(
    n_rows: usize,
    test_size: usize,
    pool_size: Option<usize>,
    initial: usize,
    seed: u64,
) -> Result<Split> {
    let pool_size = pool_size.unwrap_or(n_rows.saturating_sub(test_size));
    if test_size + pool_size > n_rows || initial > pool_size {
        return Err(Error::PoolExhausted {
            needed: test_size + pool_size.max(initial),
            available: n_rows,
        });
    }
    let mut perm: Vec<usize> = (0..n_rows).collect();
    perm.shuffle(&mut rng::stream(seed, rng::STREAM_SPLIT));
    let test = perm[..test_size].to_vec();
    let pool = &perm[test_size..test_size + pool_size];
    let mut chosen = vec![false; pool.len()];
    let labelled: Vec<usize> = index::sample(&mut rng::stream(seed, rng::STREAM_INITIAL), pool.len(), initial)
        .into_iter()
        .map(|p| {
            chosen[p] = true;
            pool[p]
        })
        .collect();
    let unlabelled = pool.iter().zip(&chosen).filter(|(_, &c)| !c).map(|(&i, _)| i).collect();
    Ok(Split {
        test,
        labelled,
        unlabelled,
    })
}

/// Seed for the model trained at `update`; trees inside add their own index.
pub fn model_seed(seed: u64, update: usize) -> u64 {
    rng::mix(seed ^ (rng::STREAM_MODEL << 56)).wrapping_add((update as u64) << 32)
}

/// Evaluates `model` on the rows `test` of `ds`.
pub fn evaluate(model: &Model, ds: &Dataset, test: &[usize], metric: Metric) -> Result<f64> {
    let x = ds.features();
    let preds = test
        .iter()
        .map(|&i| model.predict_row(x.row(i)))
        .collect::<Result<Vec<_>>>()?;
    match (metric, ds.labels()) {
        (Metric::Auroc, Labels::Class(ids)) => {
            let scores: Vec<f64> = preds.iter().map(|p| p.score(1)).collect();
            let truth: Vec<usize> = test.iter().map(|&i| ids[i]).collect();
            auroc(&scores, &truth)
        }
        (Metric::Accuracy, Labels::Class(ids)) => {
            let predicted: Vec<usize> = preds
                .iter()
                .map(|p| p.predicted_class().unwrap_or(usize::MAX))
                .collect();
            let truth: Vec<usize> = test.iter().map(|&i| ids[i]).collect();
            accuracy(&predicted, &truth)
        }
        (Metric::Rmse, Labels::Numeric(values)) => {
            let predicted: Vec<f64> = preds.iter().map(|p| p.score(0)).collect();
            let truth: Vec<f64> = test.iter().map(|&i| values[i]).collect();
            rmse(&predicted, &truth)
        }
        _ => Err(Error::WrongTask(format!(
            "metric {} does not fit the labels",
            metric.name()
        ))),
    }
}

fn fit_embedding(space: FeatureSpace, features: &Matrix, labelled: &[usize]) -> Result<Embedding> {
    match space {
        FeatureSpace::Raw => Ok(Embedding::Identity),
        FeatureSpace::Pca(n) => Ok(Embedding::Pca(pca_fit(&features.select_rows(labelled), n)?)),
    }
}

/// Runs one seeded experiment and returns its learning curve.
pub fn run_experiment(ds: &Dataset, config: &ExperimentConfig, seed: u64) -> Result<LearningCurve> {
    config.validate(ds)?;
    let Split {
        test,
        mut labelled,
        mut unlabelled,
    } = split_rows(
        ds.n_rows(),
        config.test_size,
        config.pool_size,
        config.initial_train_size,
        seed,
    )?;
    let features = ds.features();
    let (class_ids, class_count) = ds.class_ids();
    let strategy = &config.strategy;
    let mut candidates_rng = rng::stream(seed, rng::STREAM_CANDIDATES);

    let mut points = Vec::with_capacity(config.n_updates + 1);
    let mut model = Model::fit(&ds.select(&labelled), &config.model, model_seed(seed, 0))?;
    points.push(CurvePoint {
        train_size: labelled.len(),
        value: evaluate(&model, ds, &test, config.metric)?,
    });

    for update in 1..=config.n_updates {
        let mut dci_state = match strategy.dci() {
            Some((_, space)) => {
                let embedding = fit_embedding(space, features, &labelled)?;
                let set = LabelledSet::build(features, &class_ids, &labelled, &embedding)?;
                Some((embedding, set))
            }
            None => None,
        };
        for _ in 0..config.additions_per_update {
            let pos = match (strategy, &dci_state) {
                (Strategy::ModelUncertainty(kind), _) => {
                    let scorer = ModelScorer {
                        model: &model,
                        features,
                        kind: *kind,
                    };
                    select_position(
                        &unlabelled,
                        strategy,
                        config.candidate_batch_size,
                        &scorer,
                        &mut candidates_rng,
                    )?
                }
                (Strategy::DciHigh { params, .. } | Strategy::DciLow { params, .. }, Some((embedding, set))) => {
                    let scorer = DciScorer {
                        features,
                        embedding,
                        labelled: set,
                        class_count,
                        params: *params,
                    };
                    select_position(
                        &unlabelled,
                        strategy,
                        config.candidate_batch_size,
                        &scorer,
                        &mut candidates_rng,
                    )?
                }
                _ => select_position(
                    &unlabelled,
                    strategy,
                    config.candidate_batch_size,
                    &Unscored,
                    &mut candidates_rng,
                )?,
            };
            let chosen = unlabelled.swap_remove(pos);
            labelled.push(chosen);
            if let Some((embedding, set)) = dci_state.as_mut() {
                set.push(features, &class_ids, chosen, embedding)?;
            }
        }
        model = Model::fit(&ds.select(&labelled), &config.model, model_seed(seed, update))?;
        points.push(CurvePoint {
            train_size: labelled.len(),
            value: evaluate(&model, ds, &test, config.metric)?,
        });
    }

    Ok(LearningCurve {
        strategy: strategy.to_string(),
        seed,
        metric: config.metric,
        points,
    })
}

/// Runs one experiment per seed, concurrently; results come back in seed order.
pub fn run_seeds(ds: &Dataset, config: &ExperimentConfig, seeds: &[u64]) -> Result<Vec<LearningCurve>> {
    seeds.par_iter().map(|&s| run_experiment(ds, config, s)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryRow {
    pub train_size: usize,
    pub mean: f64,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
}

/// Per-train-size mean, median and quartiles across curves.
pub fn aggregate(curves: &[LearningCurve]) -> Result<Vec<SummaryRow>> {
    let first = curves
        .first()
        .ok_or_else(|| Error::Empty("no learning curves to aggregate".into()))?;
    let schedule: Vec<usize> = first.points.iter().map(|p| p.train_size).collect();
    if curves
        .iter()
        .any(|c| c.points.iter().map(|p| p.train_size).ne(schedule.iter().copied()))
    {
        return Err(Error::MismatchedSchedules);
    }
    Ok(schedule
        .iter()
        .enumerate()
        .map(|(i, &train_size)| {
            let mut values: Vec<f64> = curves.iter().map(|c| c.points[i].value).collect();
            values.sort_by(f64::total_cmp);
            SummaryRow {
                train_size,
                mean: values.iter().sum::<f64>() / values.len() as f64,
                median: quantile_sorted(&values, 0.5),
                q25: quantile_sorted(&values, 0.25),
                q75: quantile_sorted(&values, 0.75),
            }
        })
        .collect())
}

/// `strategy,seed,train_size,metric,value`
pub fn curves_csv(curves: &[LearningCurve]) -> String {
    let mut out = String::from("strategy,seed,train_size,metric,value\n");
    for c in curves {
        for p in &c.points {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                c.strategy,
                c.seed,
                p.train_size,
                c.metric.name(),
                sig9(p.value)
            ));
        }
    }
    out
}

/// `strategy,train_size,mean,median,q25,q75`
pub fn summary_csv(summaries: &[(String, Vec<SummaryRow>)]) -> String {
    let mut out = String::from("strategy,train_size,mean,median,q25,q75\n");
    for (strategy, rows) in summaries {
        for r in rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                strategy,
                r.train_size,
                sig9(r.mean),
                sig9(r.median),
                sig9(r.q25),
                sig9(r.q75)
            ));
        }
    }
    out
}
