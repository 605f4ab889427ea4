//! CSV ingestion, configuration documents and the dataset interchange format.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{MelodicError, Result};
use crate::model::{Dataset, DatasetMeta, DimensionAssignment, Preprocessing};
use crate::solver::{FitConfig, LocationRule};

/// Which columns to read and how to preprocess them.
#[derive(Debug, Clone, PartialEq)]
pub struct IngestConfig {
    pub predictor_columns: Vec<String>,
    pub response_columns: Vec<String>,
    pub standardize: bool,
    pub sd_ddof: usize,
    /// Per-response threshold: values `>= threshold` become 1, others 0.
    pub binarize_rule: BTreeMap<String, f64>,
    /// Responses whose prevalence falls outside `[low, high]` are dropped.
    pub prevalence_bounds: Option<(f64, f64)>,
}

impl IngestConfig {
    pub fn new(predictors: Vec<String>, responses: Vec<String>) -> Self {
        IngestConfig {
            predictor_columns: predictors,
            response_columns: responses,
            standardize: true,
            sd_ddof: 1,
            binarize_rule: BTreeMap::new(),
            prevalence_bounds: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.predictor_columns.is_empty() {
            return Err(MelodicError::config("predictors", "must not be empty"));
        }
        if self.response_columns.is_empty() {
            return Err(MelodicError::config("responses", "must not be empty"));
        }
        if let Some(c) = self
            .predictor_columns
            .iter()
            .find(|c| self.response_columns.contains(c))
        {
            return Err(MelodicError::config(
                "responses",
                format!("column {c} is also listed as a predictor"),
            ));
        }
        if let Some((low, high)) = self.prevalence_bounds {
            if !(0.0 <= low && low < high && high <= 1.0) {
                return Err(MelodicError::config(
                    "prevalence_bounds",
                    "need 0 <= low < high <= 1",
                ));
            }
        }
        if let Some(name) = self
            .binarize_rule
            .keys()
            .find(|k| !self.response_columns.contains(k))
        {
            return Err(MelodicError::config(
                format!("binarize.{name}"),
                "not a response column",
            ));
        }
        Ok(())
    }
}

/// The on-disk configuration document (TOML).
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub dimensions: usize,
    #[serde(default)]
    pub constraints: Option<Vec<Vec<u8>>>,
    #[serde(default = "default_true")]
    pub standardize: bool,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub restarts: usize,
    #[serde(default)]
    pub prevalence_bounds: Option<(f64, f64)>,
    pub predictors: Vec<String>,
    pub responses: Vec<String>,
    #[serde(default = "default_ddof")]
    pub sd_ddof: usize,
    #[serde(default)]
    pub binarize: BTreeMap<String, f64>,
    #[serde(default)]
    pub location_rule: Option<String>,
}

fn default_true() -> bool {
    true
}
fn default_tol() -> f64 {
    1e-8
}
fn default_max_iter() -> usize {
    65536
}
fn default_ddof() -> usize {
    1
}

/// A parsed configuration; `assignment_rows` still refer to every listed
/// response, before any prevalence filtering.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub fit: FitConfig,
    pub ingest: IngestConfig,
}

impl RunConfig {
    /// Restrict the constraint pattern to the responses that survived ingestion.
    pub fn align_to(&mut self, dataset: &Dataset) -> Result<()> {
        let Some(d) = &self.fit.assignment else {
            return Ok(());
        };
        if dataset.n_responses() == d.n_responses() {
            return Ok(());
        }
        let rows: Vec<Vec<u8>> = dataset
            .meta()
            .response_names
            .iter()
            .map(|name| {
                let idx = self
                    .ingest
                    .response_columns
                    .iter()
                    .position(|c| c == name)
                    .ok_or_else(|| MelodicError::config("constraints", format!("no row for {name}")))?;
                Ok(d.pattern().row(idx).iter().copied().collect())
            })
            .collect::<Result<_>>()?;
        self.fit.assignment = Some(
            DimensionAssignment::from_rows(&rows)
                .map_err(|e| MelodicError::config("constraints", e.to_string()))?,
        );
        Ok(())
    }
}

pub fn parse_fit_config_str(text: &str) -> Result<RunConfig> {
    let doc: ConfigDocument = toml::from_str(text)
        .map_err(|e| MelodicError::config("<document>", e.to_string().replace('\n', " ")))?;
    config_from_document(doc)
}

pub fn parse_fit_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|source| MelodicError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_fit_config_str(&text)
}

pub fn config_from_document(doc: ConfigDocument) -> Result<RunConfig> {
    let mut fit = FitConfig::new(doc.dimensions);
    fit.tol = doc.tol;
    fit.max_iter = doc.max_iter;
    fit.restarts = doc.restarts;
    fit.location_rule = match doc.location_rule.as_deref() {
        None | Some("minimal-norm") => LocationRule::MinimalNorm,
        Some("sum-normalized") => LocationRule::SumNormalized,
        Some(other) => {
            return Err(MelodicError::config(
                "location_rule",
                format!("unknown rule {other:?}"),
            ))
        }
    };
    if !(fit.tol > 0.0) {
        return Err(MelodicError::config("tol", "must be positive"));
    }
    if fit.max_iter < 1 {
        return Err(MelodicError::config("max_iter", "must be at least 1"));
    }
    if fit.dimensions < 1 {
        return Err(MelodicError::config("dimensions", "must be at least 1"));
    }
    fit.assignment = match doc.constraints {
        None => None,
        Some(rows) if rows.is_empty() => None,
        Some(rows) => {
            if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != doc.dimensions) {
                return Err(MelodicError::config(
                    format!("constraints[{i}]"),
                    format!("has {} entries but dimensions = {}", row.len(), doc.dimensions),
                ));
            }
            if rows.len() != doc.responses.len() {
                return Err(MelodicError::config(
                    "constraints",
                    format!("has {} rows for {} responses", rows.len(), doc.responses.len()),
                ));
            }
            if let Some(i) = rows.iter().position(|r| r.iter().all(|&v| v == 0)) {
                return Err(MelodicError::config(
                    format!("constraints[{i}]"),
                    "row of all zeros",
                ));
            }
            Some(
                DimensionAssignment::from_rows(&rows)
                    .map_err(|e| MelodicError::config("constraints", e.to_string()))?,
            )
        }
    };
    let ingest = IngestConfig {
        predictor_columns: doc.predictors,
        response_columns: doc.responses,
        standardize: doc.standardize,
        sd_ddof: doc.sd_ddof,
        binarize_rule: doc.binarize,
        prevalence_bounds: doc.prevalence_bounds,
    };
    ingest.validate()?;
    Ok(RunConfig { fit, ingest })
}

fn parse_cell(path: &Path, row: usize, column: &str, raw: &str) -> Result<f64> {
    let cell = raw.trim();
    let err = |message: &str| MelodicError::Cell {
        path: path.to_path_buf(),
        row,
        column: column.to_string(),
        message: message.to_string(),
    };
    if cell.is_empty() || ["na", "nan", "null"].contains(&cell.to_ascii_lowercase().as_str()) {
        return Err(err("missing value"));
    }
    let v: f64 = cell
        .parse()
        .map_err(|_| err(&format!("non-numeric value {cell:?}")))?;
    if !v.is_finite() {
        return Err(err("non-finite value"));
    }
    Ok(v)
}

/// A numeric table read from CSV, restricted to the requested columns.
pub fn read_columns(path: &Path, columns: &[String]) -> Result<DMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => MelodicError::Io {
                path: path.to_path_buf(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, e.to_string()),
            },
            _ => MelodicError::Csv(e),
        })?;
    let headers = reader.headers()?.clone();
    let idx: Vec<usize> = columns
        .iter()
        .map(|c| {
            headers
                .iter()
                .position(|h| h == c)
                .ok_or_else(|| MelodicError::MissingColumn {
                    path: path.to_path_buf(),
                    column: c.clone(),
                })
        })
        .collect::<Result<_>>()?;
    let mut values = Vec::new();
    let mut n = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        for (&j, name) in idx.iter().zip(columns) {
            let raw = record.get(j).unwrap_or("");
            values.push(parse_cell(path, i + 1, name, raw)?);
        }
        n += 1;
    }
    Ok(DMatrix::from_row_slice(n, columns.len(), &values))
}

/// Load predictors and binary responses, filter responses by prevalence, then
/// center and (optionally) standardize the predictors.
pub fn load_csv(path: &Path, ingest: &IngestConfig) -> Result<Dataset> {
    ingest.validate()?;
    let x = read_columns(path, &ingest.predictor_columns)?;
    let raw_y = read_columns(path, &ingest.response_columns)?;
    if x.nrows() == 0 {
        return Err(MelodicError::Structure(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    let n = raw_y.nrows();
    let mut keep = Vec::new();
    let mut columns: Vec<Vec<u8>> = Vec::new();
    for (r, name) in ingest.response_columns.iter().enumerate() {
        let mut col = Vec::with_capacity(n);
        for i in 0..n {
            let v = raw_y[(i, r)];
            let y = match ingest.binarize_rule.get(name) {
                Some(&t) => u8::from(v >= t),
                None if v == 0.0 || v == 1.0 => v as u8,
                None => {
                    return Err(MelodicError::Cell {
                        path: path.to_path_buf(),
                        row: i + 1,
                        column: name.clone(),
                        message: format!("response value {v} is not 0 or 1"),
                    })
                }
            };
            col.push(y);
        }
        let prevalence = col.iter().filter(|&&v| v == 1).count() as f64 / n as f64;
        if let Some((low, high)) = ingest.prevalence_bounds {
            if prevalence < low || prevalence > high {
                log::info!("dropping response {name}: prevalence {prevalence:.4} outside [{low}, {high}]");
                continue;
            }
        }
        if prevalence == 0.0 || prevalence == 1.0 {
            return Err(MelodicError::SingleClassResponse { name: name.clone() });
        }
        keep.push(name.clone());
        columns.push(col);
    }
    if keep.is_empty() {
        return Err(MelodicError::Structure(
            "no responses left after prevalence filtering".into(),
        ));
    }
    let y = DMatrix::from_fn(n, columns.len(), |i, r| columns[r][i]);
    Dataset::with_names(
        x,
        y,
        ingest.predictor_columns.clone(),
        keep,
        Preprocessing {
            standardize: ingest.standardize,
            sd_ddof: ingest.sd_ddof,
        },
    )
    .map_err(|e| match e {
        MelodicError::SingularDesign { column, .. } => MelodicError::SingularDesign {
            column,
            name: ingest.predictor_columns[column].clone(),
        },
        other => other,
    })
}

pub const DATASET_FORMAT: &str = "melodic-dataset/1";

/// Self-describing dataset document; reals round-trip exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetDocument {
    pub format: String,
    pub predictor_names: Vec<String>,
    pub response_names: Vec<String>,
    pub centering_offsets: Vec<f64>,
    pub scaling_factors: Vec<f64>,
    pub preprocessing: Option<Preprocessing>,
    /// Model-scale predictors, one row per subject.
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<u8>>,
}

impl DatasetDocument {
    pub fn from_dataset(ds: &Dataset) -> Self {
        let meta = ds.meta();
        DatasetDocument {
            format: DATASET_FORMAT.into(),
            predictor_names: meta.predictor_names.clone(),
            response_names: meta.response_names.clone(),
            centering_offsets: meta.centering_offsets.clone(),
            scaling_factors: meta.scaling_factors.clone(),
            preprocessing: ds.preprocessing(),
            x: ds.x().row_iter().map(|r| r.iter().copied().collect()).collect(),
            y: ds.y().row_iter().map(|r| r.iter().copied().collect()).collect(),
        }
    }

    pub fn into_dataset(self) -> Result<Dataset> {
        if self.format != DATASET_FORMAT {
            return Err(MelodicError::config(
                "format",
                format!("expected {DATASET_FORMAT}"),
            ));
        }
        let n = self.x.len();
        let p = self.predictor_names.len();
        let r = self.response_names.len();
        if self.y.len() != n
            || self.x.iter().any(|row| row.len() != p)
            || self.y.iter().any(|row| row.len() != r)
        {
            return Err(MelodicError::DimensionMismatch("ragged dataset document".into()));
        }
        let x = DMatrix::from_fn(n, p, |i, j| self.x[i][j]);
        let y = DMatrix::from_fn(n, r, |i, j| self.y[i][j]);
        let meta = DatasetMeta {
            predictor_names: self.predictor_names,
            response_names: self.response_names,
            centering_offsets: self.centering_offsets,
            scaling_factors: self.scaling_factors,
        };
        Dataset::from_model_scale(x, y, meta).map(|ds| ds.with_preprocessing(self.preprocessing))
    }
}

pub fn save_dataset(ds: &Dataset, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(&DatasetDocument::from_dataset(ds))?;
    fs::write(path, text + "\n").map_err(|source| MelodicError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|source| MelodicError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str::<DatasetDocument>(&text)?.into_dataset()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn centers_and_standardizes() {
        let f = write_csv("a,y\n1,0\n2,1\n3,1\n");
        let mut ingest = IngestConfig::new(names(&["a"]), names(&["y"]));
        ingest.standardize = false;
        let ds = load_csv(f.path(), &ingest).unwrap();
        assert_eq!(ds.x().as_slice(), &[-1.0, 0.0, 1.0]);
        ingest.standardize = true;
        ingest.sd_ddof = 0;
        let ds = load_csv(f.path(), &ingest).unwrap();
        let sd = (2.0f64 / 3.0).sqrt();
        assert!((ds.x()[(0, 0)] + 1.0 / sd).abs() < 1e-15);
        assert_eq!(ds.meta().scaling_factors, vec![sd]);
        ds.check_invariants().unwrap();
    }

    #[test]
    fn constant_response_is_rejected() {
        let f = write_csv("a,y\n1,1\n2,1\n3,1\n");
        let ingest = IngestConfig::new(names(&["a"]), names(&["y"]));
        assert!(matches!(
            load_csv(f.path(), &ingest),
            Err(MelodicError::SingleClassResponse { .. })
        ));
    }

    #[test]
    fn prevalence_filter_drops_rare_and_common() {
        let mut rows = String::from("a,common,balanced\n");
        for i in 0..20 {
            rows.push_str(&format!("{},{},{}\n", i, u8::from(i != 0), i % 2));
        }
        let f = write_csv(&rows);
        let mut ingest = IngestConfig::new(names(&["a"]), names(&["common", "balanced"]));
        ingest.prevalence_bounds = Some((0.1, 0.9));
        let ds = load_csv(f.path(), &ingest).unwrap();
        assert_eq!(ds.n_responses(), 1);
        assert_eq!(ds.meta().response_names, names(&["balanced"]));
    }

    #[test]
    fn cell_errors_name_row_and_column() {
        let f = write_csv("a,y\n1,0\nfoo,1\n");
        let ingest = IngestConfig::new(names(&["a"]), names(&["y"]));
        match load_csv(f.path(), &ingest) {
            Err(MelodicError::Cell { row, column, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "a");
            }
            other => panic!("{other:?}"),
        }
        let f = write_csv("a,y\n1,0\n,1\n");
        assert!(matches!(
            load_csv(f.path(), &ingest),
            Err(MelodicError::Cell { .. })
        ));
        let f = write_csv("a,z\n1,0\n");
        assert!(matches!(
            load_csv(f.path(), &ingest),
            Err(MelodicError::MissingColumn { .. })
        ));
        assert!(load_csv(Path::new("/nonexistent/file.csv"), &ingest).is_err());
    }

    #[test]
    fn binarize_threshold() {
        let f = write_csv("a,use\n1,0\n2,3\n3,6\n4,2\n");
        let mut ingest = IngestConfig::new(names(&["a"]), names(&["use"]));
        ingest.binarize_rule.insert("use".into(), 3.0);
        let ds = load_csv(f.path(), &ingest).unwrap();
        assert_eq!(ds.y().as_slice(), &[0, 1, 1, 0]);
        ingest.binarize_rule.clear();
        assert!(load_csv(f.path(), &ingest).is_err());
    }

    const BASE: &str = r#"
dimensions = 2
predictors = ["a", "b", "c"]
responses = ["D", "MDD", "GAD", "SP", "PD"]
"#;

    #[test]
    fn parses_constraint_pattern() {
        let text = format!("{BASE}constraints = [[1,0],[1,0],[1,0],[0,1],[0,1]]\n");
        let cfg = parse_fit_config_str(&text).unwrap();
        let d = cfg.fit.assignment.unwrap();
        assert_eq!(d.responses_on(0), vec![0, 1, 2]);
        assert_eq!(d.responses_on(1), vec![3, 4]);
        assert_eq!(cfg.fit.max_iter, 65536);
        assert_eq!(cfg.fit.tol, 1e-8);
        assert!(cfg.ingest.standardize);
    }

    #[test]
    fn empty_constraints_select_unconstrained() {
        let cfg = parse_fit_config_str(&format!("{BASE}constraints = []\n")).unwrap();
        assert!(cfg.fit.assignment.is_none());
        let cfg = parse_fit_config_str(BASE).unwrap();
        assert!(cfg.fit.assignment.is_none());
    }

    #[test]
    fn config_validation_errors() {
        let wide = format!("{BASE}constraints = [[1,0,0],[1,0,0],[1,0,0],[0,1,0],[0,1,1]]\n");
        match parse_fit_config_str(&wide) {
            Err(MelodicError::Config { field, .. }) => assert_eq!(field, "constraints[0]"),
            other => panic!("{other:?}"),
        }
        let zero_row = format!("{BASE}constraints = [[1,0],[0,0],[1,0],[0,1],[0,1]]\n");
        match parse_fit_config_str(&zero_row) {
            Err(MelodicError::Config { field, .. }) => assert_eq!(field, "constraints[1]"),
            other => panic!("{other:?}"),
        }
        assert!(parse_fit_config_str(&format!("{BASE}bogus = 1\n")).is_err());
        assert!(parse_fit_config_str(&format!("{BASE}tol = -1.0\n")).is_err());
        assert!(parse_fit_config_str(&format!("{BASE}prevalence_bounds = [0.9, 0.1]\n")).is_err());
    }

    #[test]
    fn dataset_document_round_trip_is_exact() {
        let f = write_csv("a,b,y\n0.1,7,0\n0.2,3,1\n0.7,1e-3,1\n1.3,-2.5,0\n");
        let ingest = IngestConfig::new(names(&["a", "b"]), names(&["y"]));
        let ds = load_csv(f.path(), &ingest).unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        save_dataset(&ds, out.path()).unwrap();
        let back = load_dataset(out.path()).unwrap();
        assert_eq!(back.x(), ds.x());
        assert_eq!(back.g(), ds.g());
        assert_eq!(back.meta(), ds.meta());
        assert_eq!(back.preprocessing(), ds.preprocessing());
    }
}
