//! Named experiment presets. Dataset paths are relative to the working
//! directory (the repository root ships `data/`).

use crate::config::Config;
use crate::{CliError, Result};

pub const PRESET_NAMES: &[&str] = &["adult", "wine-red", "wine-white", "mnist-small", "mnist-pca"];

const ADULT: &str = "
dataset.path = data/adult.csv.gz
dataset.columns = data/adult.columns
task = classification
metric = auroc
n_seeds = 20
strategies = random, dci_high, model:eq3_binary, dci_low
split.test_size = 15060
schedule.initial_train_size = 1162
schedule.candidate_batch_size = 5
schedule.additions_per_update = 200
schedule.n_updates = 29
dci.k = 20
dci.alpha = 1.5
dci.beta = 1.2
model.kind = forest
model.n_trees = 10
model.max_depth = 6
analyze.train_sizes = 10, 15, 20, 50
analyze.alphas = 1.0, 1.5, 2.0
analyze.betas = 0.9, 1.1, 1.3
analyze.n_splits = 20
analyze.uncertainty = eq3_binary
";

const WINE_RED: &str = "
dataset.path = data/winequality-red.csv.gz
dataset.columns = data/winequality-red.columns
task = regression
metric = rmse
n_seeds = 30
strategies = random, dci_high, model:regression_std, dci_low
split.test_size = 599
schedule.initial_train_size = 200
schedule.candidate_batch_size = 5
schedule.additions_per_update = 10
schedule.n_updates = 18
dci.k = 20
dci.alpha = 1.5
dci.beta = 1.2
model.kind = forest
model.n_trees = 100
";

const WINE_WHITE: &str = "
dataset.path = data/winequality-white.csv
dataset.columns = data/winequality-red.columns
task = regression
metric = rmse
n_seeds = 30
strategies = random, dci_high, model:regression_std, dci_low
split.test_size = 1398
schedule.initial_train_size = 500
schedule.candidate_batch_size = 5
schedule.additions_per_update = 25
schedule.n_updates = 24
dci.k = 20
dci.alpha = 1.5
dci.beta = 1.2
model.kind = forest
model.n_trees = 100
";

const MNIST_SMALL: &str = "
dataset.format = idx
dataset.path = data/mnist/train-images-idx3-ubyte
dataset.labels = data/mnist/train-labels-idx1-ubyte
dataset.standardize = false
task = classification
metric = accuracy
n_seeds = 30
strategies = random, dci_high, dci_low, model:max_prob, dci_high:pca10, dci_low:pca10
split.test_size = 10000
schedule.initial_train_size = 10
schedule.candidate_batch_size = 5
schedule.additions_per_update = 5
schedule.n_updates = 18
dci.k = 10
dci.alpha = 1.5
dci.beta = 1.2
model.kind = forest
model.n_trees = 10
";

const MNIST_PCA: &str = "
dataset.format = idx
dataset.path = data/mnist/train-images-idx3-ubyte
dataset.labels = data/mnist/train-labels-idx1-ubyte
dataset.standardize = false
task = classification
metric = accuracy
n_seeds = 20
strategies = random, dci_high, model:mean_std, dci_high:pca20
split.test_size = 10000
schedule.initial_train_size = 500
schedule.candidate_batch_size = 5
schedule.additions_per_update = 200
schedule.n_updates = 10
dci.k = 20
dci.alpha = 1.5
dci.beta = 1.2
model.kind = forest
model.n_trees = 10
";

pub fn preset(name: &str) -> Result<Config> {
    let text = match name {
        "adult" => ADULT,
        "wine-red" => WINE_RED,
        "wine-white" => WINE_WHITE,
        "mnist-small" => MNIST_SMALL,
        "mnist-pca" => MNIST_PCA,
        other => {
            return Err(CliError::Config(format!(
                "unknown preset `{other}` (available: {})",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    Config::parse(text, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses() {
        for name in PRESET_NAMES {
            let cfg = preset(name).unwrap();
            assert!(cfg.str("dataset.path").is_some(), "{name}");
        }
        assert!(preset("cifar").is_err());
    }
}
