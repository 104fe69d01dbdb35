//! Baseline predictors and the committee-based uncertainty measures that DCI
//! is compared against.

mod forest;
mod knn;
mod tree;
mod uncertainty;

pub use forest::{fit_ensemble, EnsembleConfig, TreeEnsemble};
pub use knn::{knn_predict, Prediction};
pub use tree::DecisionTree;
pub use uncertainty::{
    ensemble_binary_uncertainty, max_prob_uncertainty, mean_std_uncertainty, regression_std_uncertainty,
    UncertaintyKind,
};

use crate::dataset::Dataset;
use crate::{Error, Result};

/// Per-member outputs of a committee for one input, plus their mean.
#[derive(Debug, Clone, PartialEq)]
pub enum EnsemblePrediction {
    Classification {
        /// `per_member[m][c]`: probability of class `c` from member `m`.
        per_member: Vec<Vec<f64>>,
        aggregate: Vec<f64>,
    },
    Regression {
        per_member: Vec<f64>,
        aggregate: f64,
    },
}

impl EnsemblePrediction {
    /// Builds a classification prediction, averaging members class by class.
    pub fn from_probabilities(per_member: Vec<Vec<f64>>) -> Result<Self> {
        let first = per_member
            .first()
            .ok_or_else(|| Error::Empty("prediction needs at least one member".into()))?;
        let n_classes = first.len();
        if let Some(bad) = per_member.iter().find(|m| m.len() != n_classes) {
            return Err(Error::DimensionMismatch {
                expected: n_classes,
                found: bad.len(),
            });
        }
        let m = per_member.len() as f64;
        let aggregate = (0..n_classes)
            .map(|c| per_member.iter().map(|p| p[c]).sum::<f64>() / m)
            .collect();
        Ok(EnsemblePrediction::Classification { per_member, aggregate })
    }

    pub fn from_values(per_member: Vec<f64>) -> Result<Self> {
        if per_member.is_empty() {
            return Err(Error::Empty("prediction needs at least one member".into()));
        }
        let aggregate = per_member.iter().sum::<f64>() / per_member.len() as f64;
        Ok(EnsemblePrediction::Regression { per_member, aggregate })
    }

    pub fn n_members(&self) -> usize {
        match self {
            EnsemblePrediction::Classification { per_member, .. } => per_member.len(),
            EnsemblePrediction::Regression { per_member, .. } => per_member.len(),
        }
    }

    /// Most probable class (lowest id on ties); `None` for regression.
    pub fn predicted_class(&self) -> Option<usize> {
        match self {
            EnsemblePrediction::Classification { aggregate, .. } => Some(argmax(aggregate)),
            EnsemblePrediction::Regression { .. } => None,
        }
    }

    /// Aggregate probability of `class`, or the aggregate value for regression.
    pub fn score(&self, class: usize) -> f64 {
        match self {
            EnsemblePrediction::Classification { aggregate, .. } => aggregate[class],
            EnsemblePrediction::Regression { aggregate, .. } => *aggregate,
        }
    }
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Which predictor the simulator trains at each update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelConfig {
    Forest(EnsembleConfig),
    Knn { k: usize },
}

/// A trained predictor of either kind.
#[derive(Debug, Clone)]
pub enum Model {
    Forest(TreeEnsemble),
    Knn { train: Dataset, k: usize },
}

impl Model {
    /// Trains on `train`. For forests, `seed` replaces the configured seed.
    pub fn fit(train: &Dataset, config: &ModelConfig, seed: u64) -> Result<Model> {
        match config {
            ModelConfig::Forest(c) => {
                let c = EnsembleConfig { seed, ..*c };
                Ok(Model::Forest(fit_ensemble(train, &c)?))
            }
            ModelConfig::Knn { k } => {
                if train.n_rows() == 0 {
                    return Err(Error::Empty("kNN model needs training rows".into()));
                }
                Ok(Model::Knn {
                    train: train.clone(),
                    k: *k,
                })
            }
        }
    }

    /// Committee prediction for one row; a kNN model is a committee of one.
    pub fn predict_row(&self, row: &[f64]) -> Result<EnsemblePrediction> {
        match self {
            Model::Forest(e) => e.predict_row(row),
            Model::Knn { train, k } => match knn_predict(train, row, *k)? {
                Prediction::Probabilities(p) => EnsemblePrediction::from_probabilities(vec![p]),
                Prediction::Value(v) => EnsemblePrediction::from_values(vec![v]),
            },
        }
    }
}
