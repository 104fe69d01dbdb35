use rand::Rng as _;

use super::tree::{DecisionTree, Targets, TreeParams};
use super::EnsemblePrediction;
use crate::dataset::{Dataset, Labels};
use crate::{rng, Error, Matrix, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleConfig {
    pub n_trees: usize,
    /// `None` grows trees until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub seed: u64,
    /// Train each tree on a bootstrap resample (`n` draws with replacement).
    /// When off, every tree sees the training set as is.
    pub bootstrap: bool,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            n_trees: 10,
            max_depth: None,
            min_leaf: 1,
            seed: 0,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum TaskShape {
    Classification { n_classes: usize },
    Regression,
}

/// Bagged decision trees.
#[derive(Debug, Clone)]
pub struct TreeEnsemble {
    trees: Vec<DecisionTree>,
    shape: TaskShape,
    n_features: usize,
    seed: u64,
}

/// Trains `config.n_trees` trees. Tree `t` draws its bootstrap sample from a
/// generator seeded with `seed + t`, so the result does not depend on the
/// order in which trees are built.
pub fn fit_ensemble(train: &Dataset, config: &EnsembleConfig) -> Result<TreeEnsemble> {
    if train.n_rows() == 0 {
        return Err(Error::Empty("cannot fit an ensemble on zero rows".into()));
    }
    if config.n_trees == 0 {
        return Err(Error::InvalidParameter("ensemble needs at least one tree".into()));
    }
    let x = train.features();
    let n = train.n_rows();
    let (targets, shape) = match train.labels() {
        Labels::Class(ids) => {
            let n_classes = train.class_names().map_or(0, |c| c.len());
            (
                Targets::Classes { labels: ids, n_classes },
                TaskShape::Classification { n_classes },
            )
        }
        Labels::Numeric(values) => (Targets::Values(values), TaskShape::Regression),
    };
    let params = TreeParams {
        max_depth: config.max_depth,
        min_leaf: config.min_leaf,
    };
    let identity: Vec<usize> = (0..n).collect();
    let mut sample = vec![0usize; n];
    let mut trees = Vec::with_capacity(config.n_trees);
    for t in 0..config.n_trees {
        let rows: &[usize] = if config.bootstrap {
            let mut r = rng::seeded(config.seed.wrapping_add(t as u64));
            for s in sample.iter_mut() {
                *s = r.random_range(0..n);
            }
            &sample
        } else {
            &identity
        };
        trees.push(DecisionTree::fit(x, targets, rows, params)?);
    }
    Ok(TreeEnsemble {
        trees,
        shape,
        n_features: x.cols(),
        seed: config.seed,
    })
}

impl TreeEnsemble {
    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_classes(&self) -> Option<usize> {
        match self.shape {
            TaskShape::Classification { n_classes } => Some(n_classes),
            TaskShape::Regression => None,
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> Result<EnsemblePrediction> {
        if row.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                found: row.len(),
            });
        }
        match self.shape {
            TaskShape::Classification { .. } => {
                EnsemblePrediction::from_probabilities(self.trees.iter().map(|t| t.leaf_for(row).to_vec()).collect())
            }
            TaskShape::Regression => {
                EnsemblePrediction::from_values(self.trees.iter().map(|t| t.leaf_for(row)[0]).collect())
            }
        }
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<EnsemblePrediction>> {
        x.iter_rows().map(|r| self.predict_row(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Dataset {
        // separable along x0 at 0.5
        let rows: Vec<[f64; 2]> = (0..40)
            .map(|i| {
                let u = (i as f64 * 0.618_033_988_7).fract();
                let v = (i as f64 * 0.414_213_562_3).fract();
                [u, v]
            })
            .collect();
        let labels = rows.iter().map(|r| usize::from(r[0] > 0.5)).collect();
        Dataset::from_classes(Matrix::from_rows(&rows).unwrap(), labels, 2).unwrap()
    }

    #[test]
    fn single_depth_zero_tree_predicts_training_distribution() {
        let ds = toy();
        let cfg = EnsembleConfig {
            n_trees: 1,
            max_depth: Some(0),
            bootstrap: false,
            ..Default::default()
        };
        let e = fit_ensemble(&ds, &cfg).unwrap();
        let Labels::Class(ids) = ds.labels() else {
            unreachable!()
        };
        let pos = ids.iter().filter(|&&c| c == 1).count() as f64 / ids.len() as f64;
        for p in e.predict(ds.features()).unwrap() {
            let EnsemblePrediction::Classification { aggregate, .. } = p else {
                panic!()
            };
            assert!((aggregate[1] - pos).abs() < 1e-12);
        }
    }

    #[test]
    fn depth_zero_regression_predicts_mean() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [2.0]]).unwrap();
        let ds = Dataset::from_values(x, vec![1.0, 2.0, 6.0]).unwrap();
        let cfg = EnsembleConfig {
            n_trees: 1,
            max_depth: Some(0),
            bootstrap: false,
            ..Default::default()
        };
        let e = fit_ensemble(&ds, &cfg).unwrap();
        assert_eq!(e.predict_row(&[5.0]).unwrap().score(0), 3.0);
    }

    #[test]
    fn separable_toy_is_fit_exactly() {
        let ds = toy();
        let e = fit_ensemble(&ds, &EnsembleConfig::default()).unwrap();
        let Labels::Class(ids) = ds.labels() else {
            unreachable!()
        };
        let preds = e.predict(ds.features()).unwrap();
        let correct = preds
            .iter()
            .zip(ids)
            .filter(|(p, &y)| p.predicted_class() == Some(y))
            .count();
        assert_eq!(correct, ids.len());
    }

    #[test]
    fn same_seed_same_predictions() {
        let ds = toy();
        let cfg = EnsembleConfig {
            seed: 42,
            ..Default::default()
        };
        let a = fit_ensemble(&ds, &cfg).unwrap().predict(ds.features()).unwrap();
        let b = fit_ensemble(&ds, &cfg).unwrap().predict(ds.features()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn identical_trees_without_bootstrap() {
        let ds = toy();
        let cfg = EnsembleConfig {
            n_trees: 3,
            bootstrap: false,
            ..Default::default()
        };
        let e = fit_ensemble(&ds, &cfg).unwrap();
        let EnsemblePrediction::Classification { per_member, .. } = e.predict_row(&[0.3, 0.3]).unwrap() else {
            panic!()
        };
        assert!(per_member.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn errors() {
        let ds = toy();
        let empty = ds.select(&[]);
        assert!(matches!(
            fit_ensemble(&empty, &EnsembleConfig::default()),
            Err(Error::Empty(_))
        ));
        let e = fit_ensemble(&ds, &EnsembleConfig::default()).unwrap();
        assert!(e.predict_row(&[0.0]).is_err());
    }
}
