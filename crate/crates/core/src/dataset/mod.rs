//! Datasets and the transforms that put them into the normalised feature
//! space where distances are measured.

mod csv;
mod encode;
mod idx;
mod pca;

use std::borrow::Cow;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;
use std::str::FromStr;

use flate2::read::GzDecoder;

use crate::{Error, Matrix, Result};

pub use self::csv::{load_csv, load_csv_with, parse_column_specs, read_column_specs, CsvOptions};
pub use self::encode::{one_hot, standardize, Pipeline, PipelineOptions, Standardizer};
pub use self::idx::{load_idx, write_idx};
pub use self::pca::{pca_fit, pca_project, PcaModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Numeric,
    Categorical,
    LabelClass,
    LabelNumeric,
}

impl ColumnKind {
    pub fn is_label(self) -> bool {
        matches!(self, ColumnKind::LabelClass | ColumnKind::LabelNumeric)
    }
}

impl FromStr for ColumnKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "numeric" => Ok(ColumnKind::Numeric),
            "categorical" => Ok(ColumnKind::Categorical),
            "label_class" => Ok(ColumnKind::LabelClass),
            "label_numeric" => Ok(ColumnKind::LabelNumeric),
            other => Err(Error::InvalidSpec(format!("unknown column kind `{other}`"))),
        }
    }
}

impl fmt::Display for ColumnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ColumnKind::Numeric => "numeric",
            ColumnKind::Categorical => "categorical",
            ColumnKind::LabelClass => "label_class",
            ColumnKind::LabelNumeric => "label_numeric",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
}

impl ColumnSpec {
    pub fn new(name: impl Into<String>, kind: ColumnKind) -> Self {
        ColumnSpec {
            name: name.into(),
            kind,
        }
    }
}

/// Checks that names are unique and exactly one column is a label.
pub fn validate_specs(specs: &[ColumnSpec]) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for spec in specs {
        if !seen.insert(spec.name.as_str()) {
            return Err(Error::InvalidSpec(format!("duplicate column `{}`", spec.name)));
        }
    }
    match specs.iter().filter(|s| s.kind.is_label()).count() {
        1 => Ok(()),
        0 => Err(Error::InvalidSpec("no label column".into())),
        n => Err(Error::InvalidSpec(format!("{n} label columns, expected exactly one"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Labels {
    Class(Vec<usize>),
    Numeric(Vec<f64>),
}

impl Labels {
    pub fn len(&self) -> usize {
        match self {
            Labels::Class(v) => v.len(),
            Labels::Numeric(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn select(&self, indices: &[usize]) -> Labels {
        match self {
            Labels::Class(v) => Labels::Class(indices.iter().map(|&i| v[i]).collect()),
            Labels::Numeric(v) => Labels::Numeric(indices.iter().map(|&i| v[i]).collect()),
        }
    }
}

/// How one encoded feature column came about.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureEncoding {
    Numeric,
    /// Category ids indexing `categories` (first-seen order).
    Categorical {
        categories: Vec<String>,
    },
    /// 0/1 indicator produced by one-hot encoding `source`.
    Indicator {
        source: String,
        category: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureColumn {
    pub name: String,
    pub encoding: FeatureEncoding,
}

impl FeatureColumn {
    pub fn numeric(name: impl Into<String>) -> Self {
        FeatureColumn {
            name: name.into(),
            encoding: FeatureEncoding::Numeric,
        }
    }
}

/// Feature matrix, labels and per-column metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Matrix,
    labels: Labels,
    columns: Vec<FeatureColumn>,
    label_name: String,
    class_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(
        features: Matrix,
        labels: Labels,
        columns: Vec<FeatureColumn>,
        label_name: impl Into<String>,
        class_names: Option<Vec<String>>,
    ) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.rows(),
                found: labels.len(),
            });
        }
        if features.cols() != columns.len() {
            return Err(Error::DimensionMismatch {
                expected: features.cols(),
                found: columns.len(),
            });
        }
        match (&labels, &class_names) {
            (Labels::Class(ids), Some(names)) => {
                if let Some(&bad) = ids.iter().find(|&&id| id >= names.len()) {
                    return Err(Error::InvalidParameter(format!(
                        "class id {bad} has no name ({} classes)",
                        names.len()
                    )));
                }
            }
            (Labels::Numeric(_), None) => {}
            _ => {
                return Err(Error::InvalidParameter(
                    "class names must be given exactly when labels are class ids".into(),
                ))
            }
        }
        Ok(Dataset {
            features,
            labels,
            columns,
            label_name: label_name.into(),
            class_names,
        })
    }

    /// Classification dataset with numeric columns `x0, x1, ...` and classes named `0..n_classes`.
    pub fn from_classes(features: Matrix, labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        let columns = (0..features.cols())
            .map(|j| FeatureColumn::numeric(format!("x{j}")))
            .collect();
        let names = (0..n_classes).map(|c| c.to_string()).collect();
        Dataset::new(features, Labels::Class(labels), columns, "class", Some(names))
    }

    /// Regression dataset with numeric columns `x0, x1, ...`.
    pub fn from_values(features: Matrix, values: Vec<f64>) -> Result<Self> {
        let columns = (0..features.cols())
            .map(|j| FeatureColumn::numeric(format!("x{j}")))
            .collect();
        Dataset::new(features, Labels::Numeric(values), columns, "value", None)
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &Labels {
        &self.labels
    }

    pub fn columns(&self) -> &[FeatureColumn] {
        &self.columns
    }

    pub fn label_name(&self) -> &str {
        &self.label_name
    }

    pub fn class_names(&self) -> Option<&[String]> {
        self.class_names.as_deref()
    }

    pub fn n_rows(&self) -> usize {
        self.features.rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    pub fn is_classification(&self) -> bool {
        matches!(self.labels, Labels::Class(_))
    }

    /// Column specs describing the current encoding; one-hot indicators
    /// are reported as numeric columns named `source=category`.
    pub fn column_specs(&self) -> Vec<ColumnSpec> {
        let mut specs: Vec<ColumnSpec> = self
            .columns
            .iter()
            .map(|c| {
                let kind = match c.encoding {
                    FeatureEncoding::Categorical { .. } => ColumnKind::Categorical,
                    _ => ColumnKind::Numeric,
                };
                ColumnSpec::new(c.name.clone(), kind)
            })
            .collect();
        let label_kind = if self.is_classification() {
            ColumnKind::LabelClass
        } else {
            ColumnKind::LabelNumeric
        };
        specs.push(ColumnSpec::new(self.label_name.clone(), label_kind));
        specs
    }

    /// Labels as class ids plus the class count. Numeric labels are
    /// discretised: each distinct value becomes a class, in ascending order.
    pub fn class_ids(&self) -> (Cow<'_, [usize]>, usize) {
        match &self.labels {
            Labels::Class(ids) => {
                let n = self.class_names.as_ref().map_or(0, Vec::len);
                (Cow::Borrowed(ids.as_slice()), n)
            }
            Labels::Numeric(values) => {
                let mut levels: Vec<f64> = values.clone();
                levels.sort_by(f64::total_cmp);
                levels.dedup();
                let ids = values
                    .iter()
                    .map(|v| levels.binary_search_by(|l| l.total_cmp(v)).expect("level present"))
                    .collect();
                (Cow::Owned(ids), levels.len())
            }
        }
    }

    /// New dataset made of the given rows (metadata is shared).
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(indices),
            labels: self.labels.select(indices),
            columns: self.columns.clone(),
            label_name: self.label_name.clone(),
            class_names: self.class_names.clone(),
        }
    }

    pub(crate) fn with_features(&self, features: Matrix, columns: Vec<FeatureColumn>) -> Dataset {
        Dataset {
            features,
            labels: self.labels.clone(),
            columns,
            label_name: self.label_name.clone(),
            class_names: self.class_names.clone(),
        }
    }
}

/// Opens a file for reading, transparently decompressing `.gz`.
pub(crate) fn open_input(path: &Path) -> Result<Box<dyn Read>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    if path.extension().is_some_and(|e| e == "gz") {
        Ok(Box::new(GzDecoder::new(reader)))
    } else {
        Ok(Box::new(reader))
    }
}
