use std::path::Path;

use super::csv::read_feature_rows;
use super::{CsvOptions, Dataset, FeatureColumn, FeatureEncoding};
use crate::{Error, Matrix, Result};

/// Columns whose population standard deviation is below this map to zero.
const CONSTANT_STD: f64 = 1e-12;

/// Replaces every categorical column with one 0/1 indicator column per category.
pub fn one_hot(ds: &Dataset) -> Result<Dataset> {
    let (columns, features) = one_hot_matrix(ds.columns(), ds.features())?;
    Ok(ds.with_features(features, columns))
}

fn one_hot_matrix(columns: &[FeatureColumn], x: &Matrix) -> Result<(Vec<FeatureColumn>, Matrix)> {
    if !columns
        .iter()
        .any(|c| matches!(c.encoding, FeatureEncoding::Categorical { .. }))
    {
        return Ok((columns.to_vec(), x.clone()));
    }
    let mut out_columns = Vec::new();
    for c in columns {
        match &c.encoding {
            FeatureEncoding::Categorical { categories } => {
                out_columns.extend(categories.iter().map(|cat| FeatureColumn {
                    name: format!("{}={}", c.name, cat),
                    encoding: FeatureEncoding::Indicator {
                        source: c.name.clone(),
                        category: cat.clone(),
                    },
                }));
            }
            _ => out_columns.push(c.clone()),
        }
    }
    let mut out = Matrix::zeros(x.rows(), out_columns.len());
    for (i, row) in x.iter_rows().enumerate() {
        let dst = out.row_mut(i);
        let mut k = 0;
        for (c, &v) in columns.iter().zip(row) {
            match &c.encoding {
                FeatureEncoding::Categorical { categories } => {
                    let id = v as usize;
                    if v < 0.0 || v.fract() != 0.0 || id >= categories.len() {
                        return Err(Error::InvalidParameter(format!(
                            "value {v} is not a category id of `{}`",
                            c.name
                        )));
                    }
                    dst[k + id] = 1.0;
                    k += categories.len();
                }
                _ => {
                    dst[k] = v;
                    k += 1;
                }
            }
        }
    }
    Ok((out_columns, out))
}

/// Per-column shift and scale fitted on a subset of rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    /// `(mean, population std)` for standardised columns, `None` for untouched ones.
    params: Vec<Option<(f64, f64)>>,
}

impl Standardizer {
    /// Fits over `stats_from`. Numeric columns are always included, one-hot
    /// indicators only when `include_one_hot`; categorical id columns never.
    pub fn fit(ds: &Dataset, stats_from: &[usize], include_one_hot: bool) -> Result<Self> {
        if stats_from.is_empty() {
            return Err(Error::Empty("standardization needs at least one row".into()));
        }
        let x = ds.features();
        let n = stats_from.len() as f64;
        let params = ds
            .columns()
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let include = match c.encoding {
                    FeatureEncoding::Numeric => true,
                    FeatureEncoding::Indicator { .. } => include_one_hot,
                    FeatureEncoding::Categorical { .. } => false,
                };
                include.then(|| {
                    let mean = stats_from.iter().map(|&i| x.get(i, j)).sum::<f64>() / n;
                    let var = stats_from
                        .iter()
                        .map(|&i| {
                            let d = x.get(i, j) - mean;
                            d * d
                        })
                        .sum::<f64>()
                        / n;
                    (mean, var.sqrt())
                })
            })
            .collect();
        Ok(Standardizer { params })
    }

    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.params.len() {
            return Err(Error::DimensionMismatch {
                expected: self.params.len(),
                found: x.cols(),
            });
        }
        let mut out = x.clone();
        for i in 0..out.rows() {
            for (v, p) in out.row_mut(i).iter_mut().zip(&self.params) {
                if let Some((mean, std)) = *p {
                    *v = if std < CONSTANT_STD { 0.0 } else { (*v - mean) / std };
                }
            }
        }
        Ok(out)
    }
}

/// Z-scores numeric columns with mean and population std taken over `stats_from`.
/// One-hot indicator columns are left as 0/1.
pub fn standardize(ds: &Dataset, stats_from: &[usize]) -> Result<Dataset> {
    let s = Standardizer::fit(ds, stats_from, false)?;
    Ok(ds.with_features(s.apply(ds.features())?, ds.columns().to_vec()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineOptions {
    pub one_hot: bool,
    pub standardize: bool,
    pub standardize_one_hot: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            one_hot: true,
            standardize: true,
            standardize_one_hot: false,
        }
    }
}

/// The encode-then-standardise chain fitted on a loaded dataset, reusable on
/// query rows read later.
#[derive(Debug, Clone)]
pub struct Pipeline {
    raw_columns: Vec<FeatureColumn>,
    label_name: String,
    options: PipelineOptions,
    standardizer: Option<Standardizer>,
}

impl Pipeline {
    /// Fits on every row of `raw` (statistics come from the whole pool) and
    /// returns the pipeline together with the transformed dataset.
    pub fn fit(raw: &Dataset, options: PipelineOptions) -> Result<(Pipeline, Dataset)> {
        let encoded = if options.one_hot { one_hot(raw)? } else { raw.clone() };
        let (standardizer, out) = if options.standardize {
            let rows: Vec<usize> = (0..encoded.n_rows()).collect();
            let s = Standardizer::fit(&encoded, &rows, options.standardize_one_hot)?;
            let x = s.apply(encoded.features())?;
            let out = encoded.with_features(x, encoded.columns().to_vec());
            (Some(s), out)
        } else {
            (None, encoded)
        };
        let pipeline = Pipeline {
            raw_columns: raw.columns().to_vec(),
            label_name: raw.label_name().to_string(),
            options,
            standardizer,
        };
        Ok((pipeline, out))
    }

    /// Applies the fitted chain to raw feature rows laid out like the source dataset.
    pub fn transform(&self, raw: &Matrix) -> Result<Matrix> {
        if raw.cols() != self.raw_columns.len() {
            return Err(Error::DimensionMismatch {
                expected: self.raw_columns.len(),
                found: raw.cols(),
            });
        }
        let x = if self.options.one_hot {
            one_hot_matrix(&self.raw_columns, raw)?.1
        } else {
            raw.clone()
        };
        match &self.standardizer {
            Some(s) => s.apply(&x),
            None => Ok(x),
        }
    }

    /// Reads a query CSV whose header names the source feature columns
    /// (the label column may be present and is ignored) and transforms it.
    pub fn read_queries(&self, path: impl AsRef<Path>, options: &CsvOptions) -> Result<Matrix> {
        let raw = read_feature_rows(path.as_ref(), &self.raw_columns, &self.label_name, options)?;
        self.transform(&raw)
    }
}
