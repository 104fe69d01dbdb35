//! Flat `key = value` configuration with dotted keys.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use crate::{CliError, Result};

/// Every key the tool understands; anything else is rejected.
pub const KNOWN_KEYS: &[&str] = &[
    "dataset.path",
    "dataset.format",
    "dataset.columns",
    "dataset.labels",
    "dataset.one_hot",
    "dataset.standardize",
    "dataset.missing",
    "task",
    "metric",
    "seed",
    "n_seeds",
    "strategies",
    "split.test_size",
    "split.pool_size",
    "schedule.initial_train_size",
    "schedule.candidate_batch_size",
    "schedule.additions_per_update",
    "schedule.n_updates",
    "dci.k",
    "dci.alpha",
    "dci.beta",
    "dci.epsilon",
    "model.kind",
    "model.n_trees",
    "model.max_depth",
    "model.min_leaf",
    "model.bootstrap",
    "model.k",
    "grid.x_min",
    "grid.x_max",
    "grid.y_min",
    "grid.y_max",
    "grid.resolution",
    "score.queries",
    "analyze.train_sizes",
    "analyze.alphas",
    "analyze.betas",
    "analyze.n_splits",
    "analyze.uncertainty",
];

/// Keys holding file paths; relative values in a config file are taken
/// relative to that file's directory.
const PATH_KEYS: &[&str] = &["dataset.path", "dataset.columns", "dataset.labels", "score.queries"];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    /// Parses config text. `base` is the directory relative paths resolve
    /// against (`None` leaves them as written).
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Config> {
        let mut cfg = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", i + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if cfg.entries.contains_key(key) {
                return Err(CliError::Config(format!("line {}: `{key}` given twice", i + 1)));
            }
            cfg.set(key, value)?;
            if let (Some(base), true) = (base, PATH_KEYS.contains(&key)) {
                let p = Path::new(value);
                if p.is_relative() {
                    cfg.entries.insert(key.into(), base.join(p).display().to_string());
                }
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Config::parse(&text, Some(path.parent().unwrap_or(Path::new(""))))
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(CliError::Config(format!("unknown config key `{key}`")));
        }
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Parses a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("expected KEY=VALUE, got `{pair}`")))?;
        self.set(k.trim(), v.trim())
    }

    /// Entries of `other` replace entries of `self`.
    pub fn merge(&mut self, other: &Config) {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        debug_assert!(KNOWN_KEYS.contains(&key), "{key}");
        self.entries.get(key).map(String::as_str)
    }

    pub fn required(&self, key: &str) -> Result<&str> {
        self.str(key)
            .ok_or_else(|| CliError::Config(format!("missing config key `{key}`")))
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.str(key).map(PathBuf::from)
    }

    pub fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        self.str(key)
            .map(|v| v.parse::<T>().map_err(|e| invalid(key, v, e)))
            .transpose()
    }

    pub fn parsed_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.str(key) {
            None => Ok(default),
            Some("true" | "yes" | "1") => Ok(true),
            Some("false" | "no" | "0") => Ok(false),
            Some(v) => Err(invalid(key, v, "expected true or false")),
        }
    }

    /// Comma-separated list.
    pub fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: fmt::Display,
    {
        let Some(v) = self.str(key) else { return Ok(None) };
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<T>().map_err(|e| invalid(key, s, e)))
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

fn invalid(key: &str, value: &str, why: impl fmt::Display) -> CliError {
    CliError::Config(format!("invalid value `{value}` for `{key}`: {why}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blanks() {
        let cfg = Config::parse("# header\n\ndci.alpha = 1.5  # trailing\nseed=7\n", None).unwrap();
        assert_eq!(cfg.str("dci.alpha"), Some("1.5"));
        assert_eq!(cfg.parsed::<u64>("seed").unwrap(), Some(7));
        assert_eq!(cfg.parsed::<usize>("dci.k").unwrap(), None);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(Config::parse("dci.alpha 1.5", None).is_err());
        assert!(Config::parse("dci.gamma = 1", None).is_err());
        assert!(Config::parse("seed = 1\nseed = 2", None).is_err());
        let cfg = Config::parse("dci.k = many", None).unwrap();
        assert!(cfg.parsed::<usize>("dci.k").is_err());
    }

    #[test]
    fn relative_paths_follow_the_file() {
        let cfg = Config::parse(
            "dataset.path = d.csv\ndataset.columns = /abs/c",
            Some(Path::new("/cfg")),
        )
        .unwrap();
        assert_eq!(cfg.path("dataset.path").unwrap(), PathBuf::from("/cfg/d.csv"));
        assert_eq!(cfg.path("dataset.columns").unwrap(), PathBuf::from("/abs/c"));
    }

    #[test]
    fn merge_overrides() {
        let mut a = Config::parse("seed = 1\nn_seeds = 3", None).unwrap();
        a.merge(&Config::parse("seed = 2", None).unwrap());
        assert_eq!(a.str("seed"), Some("2"));
        assert_eq!(a.str("n_seeds"), Some("3"));
        a.set_pair("dci.beta=1.3").unwrap();
        assert_eq!(a.list::<f64>("dci.beta").unwrap(), Some(vec![1.3]));
        assert!(a.set_pair("nonsense").is_err());
    }

    #[test]
    fn lists_and_bools() {
        let cfg = Config::parse("analyze.train_sizes = 10, 15,20\nmodel.bootstrap = no", None).unwrap();
        assert_eq!(
            cfg.list::<usize>("analyze.train_sizes").unwrap(),
            Some(vec![10, 15, 20])
        );
        assert!(!cfg.bool_or("model.bootstrap", true).unwrap());
        assert!(cfg.bool_or("dataset.one_hot", true).unwrap());
    }
}
