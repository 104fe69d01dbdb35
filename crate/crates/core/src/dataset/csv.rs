use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Trim};

use super::{open_input, validate_specs, ColumnKind, ColumnSpec, Dataset, FeatureColumn, FeatureEncoding, Labels};
use crate::{Error, Matrix, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsvOptions {
    /// Rows containing any of these (whitespace-trimmed) tokens are dropped.
    pub missing_tokens: Vec<String>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            missing_tokens: vec!["?".to_string(), String::new()],
        }
    }
}

impl CsvOptions {
    pub(crate) fn is_missing(&self, field: &str) -> bool {
        self.missing_tokens.iter().any(|t| t == field)
    }
}

/// Reads a column specification file: one `name = kind` line per column,
/// `#` starts a comment.
pub fn read_column_specs(path: impl AsRef<Path>) -> Result<Vec<ColumnSpec>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_column_specs(&text).map_err(|(line, message)| Error::parse(path, line, message))
}

/// Parses column-spec text; errors carry the 1-based line number.
pub fn parse_column_specs(text: &str) -> std::result::Result<Vec<ColumnSpec>, (usize, String)> {
    let mut specs = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (name, kind) = line
            .rsplit_once('=')
            .ok_or_else(|| (n + 1, format!("expected `name = kind`, got `{line}`")))?;
        let kind: ColumnKind = kind.trim().parse().map_err(|e: Error| (n + 1, e.to_string()))?;
        specs.push(ColumnSpec::new(name.trim(), kind));
    }
    validate_specs(&specs).map_err(|e| (0, e.to_string()))?;
    Ok(specs)
}

pub fn load_csv(path: impl AsRef<Path>, specs: &[ColumnSpec]) -> Result<Dataset> {
    load_csv_with(path, specs, &CsvOptions::default())
}

/// Loads a headed CSV file. Rows with a missing-value token in any column are
/// dropped; categorical values and class labels become ids in first-seen order.
pub fn load_csv_with(path: impl AsRef<Path>, specs: &[ColumnSpec], options: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    validate_specs(specs)?;
    let mut reader = csv_reader(open_input(path)?);
    let header = reader
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?
        .clone();
    let layout = resolve_header(&header, specs)?;

    let n_features = layout.features.len();
    let mut vocab: Vec<Vocabulary> = vec![Vocabulary::default(); n_features];
    let mut label_vocab = Vocabulary::default();
    let mut data = Vec::new();
    let mut class_labels = Vec::new();
    let mut numeric_labels = Vec::new();
    let (label_pos, label_kind) = layout.label.expect("label column resolved");

    let mut record = StringRecord::new();
    loop {
        match reader.read_record(&mut record) {
            Ok(true) => {}
            Ok(false) => break,
            Err(e) => return Err(Error::parse(path, line_of(&e), e.to_string())),
        }
        if record.iter().any(|f| options.is_missing(f)) {
            continue;
        }
        let line = record.position().map_or(0, |p| p.line() as usize);
        for (j, &(pos, kind)) in layout.features.iter().enumerate() {
            let field = &record[pos];
            let value = match kind {
                ColumnKind::Numeric => parse_number(field).map_err(|m| Error::parse(path, line, m))?,
                _ => vocab[j].id(field) as f64,
            };
            data.push(value);
        }
        let field = &record[label_pos];
        match label_kind {
            ColumnKind::LabelClass => class_labels.push(label_vocab.id(field)),
            _ => numeric_labels.push(parse_number(field).map_err(|m| Error::parse(path, line, m))?),
        }
    }

    let rows = data
        .len()
        .checked_div(n_features)
        .unwrap_or(class_labels.len().max(numeric_labels.len()));
    if rows == 0 {
        return Err(Error::Empty(format!("{} has no complete rows", path.display())));
    }
    let features = Matrix::from_vec(rows, n_features, data)?;
    let columns = layout
        .features
        .iter()
        .zip(vocab)
        .map(|(&(pos, kind), v)| FeatureColumn {
            name: header[pos].to_string(),
            encoding: match kind {
                ColumnKind::Categorical => FeatureEncoding::Categorical { categories: v.names },
                _ => FeatureEncoding::Numeric,
            },
        })
        .collect();
    let label_name = header[label_pos].to_string();
    match label_kind {
        ColumnKind::LabelClass => Dataset::new(
            features,
            Labels::Class(class_labels),
            columns,
            label_name,
            Some(label_vocab.names),
        ),
        _ => Dataset::new(features, Labels::Numeric(numeric_labels), columns, label_name, None),
    }
}

/// Reads raw (unencoded) feature rows laid out as `columns`, by header name.
/// A label column may be present and is ignored; missing values are an error
/// so that output rows stay aligned with input rows.
pub(crate) fn read_feature_rows(
    path: &Path,
    columns: &[FeatureColumn],
    label_name: &str,
    options: &CsvOptions,
) -> Result<Matrix> {
    let mut reader = csv_reader(open_input(path)?);
    let header = reader
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?
        .clone();
    let mut positions = Vec::with_capacity(columns.len());
    for column in columns {
        let pos = header
            .iter()
            .position(|h| h == column.name)
            .ok_or_else(|| Error::MissingColumn(column.name.clone()))?;
        positions.push(pos);
    }
    if let Some(extra) = header
        .iter()
        .find(|h| *h != label_name && !columns.iter().any(|c| c.name == *h))
    {
        return Err(Error::UnknownColumn(extra.to_string()));
    }

    let lookups: Vec<Option<HashMap<&str, usize>>> = columns
        .iter()
        .map(|c| match &c.encoding {
            FeatureEncoding::Categorical { categories } => {
                Some(categories.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect())
            }
            _ => None,
        })
        .collect();

    let mut out = Matrix::with_cols(columns.len());
    let mut row = vec![0.0; columns.len()];
    let mut record = StringRecord::new();
    loop {
        match reader.read_record(&mut record) {
            Ok(true) => {}
            Ok(false) => break,
            Err(e) => return Err(Error::parse(path, line_of(&e), e.to_string())),
        }
        let line = record.position().map_or(0, |p| p.line() as usize);
        for (j, &pos) in positions.iter().enumerate() {
            let field = &record[pos];
            if options.is_missing(field) {
                return Err(Error::parse(
                    path,
                    line,
                    format!("missing value in `{}`", columns[j].name),
                ));
            }
            row[j] = match &lookups[j] {
                Some(map) => *map.get(field).ok_or_else(|| {
                    Error::parse(
                        path,
                        line,
                        format!("unknown category `{field}` in `{}`", columns[j].name),
                    )
                })? as f64,
                None => parse_number(field).map_err(|m| Error::parse(path, line, m))?,
            };
        }
        out.push_row(&row)?;
    }
    Ok(out)
}

struct HeaderLayout {
    /// (header position, kind) of each feature column, in header order.
    features: Vec<(usize, ColumnKind)>,
    label: Option<(usize, ColumnKind)>,
}

fn resolve_header(header: &StringRecord, specs: &[ColumnSpec]) -> Result<HeaderLayout> {
    let mut layout = HeaderLayout {
        features: Vec::new(),
        label: None,
    };
    for (pos, name) in header.iter().enumerate() {
        let spec = specs
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))?;
        if header.iter().take(pos).any(|h| h == name) {
            return Err(Error::InvalidSpec(format!("header repeats column `{name}`")));
        }
        if spec.kind.is_label() {
            layout.label = Some((pos, spec.kind));
        } else {
            layout.features.push((pos, spec.kind));
        }
    }
    for spec in specs {
        if !header.iter().any(|h| h == spec.name) {
            return Err(Error::MissingColumn(spec.name.clone()));
        }
    }
    Ok(layout)
}

#[derive(Debug, Clone, Default)]
struct Vocabulary {
    names: Vec<String>,
    ids: HashMap<String, usize>,
}

impl Vocabulary {
    fn id(&mut self, token: &str) -> usize {
        if let Some(&id) = self.ids.get(token) {
            return id;
        }
        let id = self.names.len();
        self.names.push(token.to_string());
        self.ids.insert(token.to_string(), id);
        id
    }
}

fn csv_reader(input: Box<dyn Read>) -> csv::Reader<Box<dyn Read>> {
    ReaderBuilder::new()
        .has_headers(true)
        .trim(Trim::All)
        .from_reader(input)
}

fn parse_number(field: &str) -> std::result::Result<f64, String> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("`{field}` is not a finite number")),
    }
}

fn line_of(e: &csv::Error) -> usize {
    e.position().map_or(0, |p| p.line() as usize)
}
