//! JSON documents written by the command-line tool. Every document carries a
//! `format` tag and rejects unknown fields, so parsing one back is the schema check.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{MelodicError, Result};
use crate::model::{
    category_coordinates, implied_coefficients, Dataset, DatasetMeta, ModelParams, Prediction, Preprocessing,
};
use crate::selection::{ModelSummary, QualityEntry, ScanTable};
use crate::solver::{FitConfig, FitResult, LocationRule};

pub const FIT_FORMAT: &str = "melodic-fit/1";
pub const SCAN_FORMAT: &str = "melodic-scan/1";
pub const PREDICTION_FORMAT: &str = "melodic-predictions/1";

pub(crate) fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub(crate) fn matrix_from_rows(rows: &[Vec<f64>], ncols: usize, what: &str) -> Result<DMatrix<f64>> {
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(MelodicError::DimensionMismatch(format!(
            "{what}: every row needs {ncols} entries"
        )));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

/// Per-response intercepts and predictor coefficients of the equivalent logistic regressions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpliedTable {
    /// `a*_r`, indexed like `response_names`.
    pub intercepts: Vec<f64>,
    /// `B*`, one row per predictor, one column per response.
    pub coefficients: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
    pub location_rule: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitDocument {
    pub format: String,
    pub predictor_names: Vec<String>,
    pub response_names: Vec<String>,
    pub centering_offsets: Vec<f64>,
    pub scaling_factors: Vec<f64>,
    pub preprocessing: Option<Preprocessing>,
    /// Standard deviation of each predictor on model scale.
    pub predictor_sd: Vec<f64>,
    pub n: usize,
    pub dimensions: usize,
    /// `R × M` 0/1 rows for a constrained fit.
    pub assignment: Option<Vec<Vec<u8>>>,
    pub solver: SolverSettings,
    pub b: Vec<Vec<f64>>,
    pub k: Vec<Vec<f64>>,
    pub l: Vec<Vec<f64>>,
    /// Category points, rows `2r` (category 0) and `2r + 1` (category 1).
    pub v: Vec<Vec<f64>>,
    pub deviance: f64,
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub quasi_separation: bool,
    pub degenerate_responses: Vec<String>,
    pub summary: ModelSummary,
    pub implied: ImpliedTable,
    pub quality: Vec<QualityEntry>,
}

fn rule_name(rule: LocationRule) -> &'static str {
    match rule {
        LocationRule::MinimalNorm => "minimal-norm",
        LocationRule::SumNormalized => "sum-normalized",
    }
}

impl FitDocument {
    pub fn new(
        dataset: &Dataset,
        config: &FitConfig,
        result: &FitResult,
        summary: ModelSummary,
        quality: Vec<QualityEntry>,
    ) -> Self {
        let meta = dataset.meta();
        let params = &result.params;
        let implied = implied_coefficients(params);
        FitDocument {
            format: FIT_FORMAT.into(),
            predictor_names: meta.predictor_names.clone(),
            response_names: meta.response_names.clone(),
            centering_offsets: meta.centering_offsets.clone(),
            scaling_factors: meta.scaling_factors.clone(),
            preprocessing: dataset.preprocessing(),
            predictor_sd: dataset.predictor_sd(),
            n: dataset.n(),
            dimensions: params.dimensions(),
            assignment: config.assignment.as_ref().map(|d| d.to_rows()),
            solver: SolverSettings {
                tol: config.tol,
                max_iter: config.max_iter,
                restarts: config.restarts,
                seed: config.seed,
                location_rule: rule_name(config.location_rule).into(),
            },
            b: rows_of(&params.b),
            k: rows_of(&params.k),
            l: rows_of(&params.l),
            v: rows_of(&category_coordinates(params)),
            deviance: result.deviance,
            trace: result.trace.clone(),
            iterations: result.iterations,
            converged: result.converged,
            quasi_separation: result.quasi_separation,
            degenerate_responses: result
                .degenerate_responses
                .iter()
                .map(|&r| meta.response_names[r].clone())
                .collect(),
            summary,
            implied: ImpliedTable {
                intercepts: implied.intercepts.iter().copied().collect(),
                coefficients: rows_of(&implied.coefficients),
            },
            quality,
        }
    }

    pub fn params(&self) -> Result<ModelParams> {
        let m = self.dimensions;
        ModelParams::new(
            matrix_from_rows(&self.b, m, "b")?,
            matrix_from_rows(&self.k, m, "k")?,
            matrix_from_rows(&self.l, m, "l")?,
        )
    }

    pub fn meta(&self) -> DatasetMeta {
        DatasetMeta {
            predictor_names: self.predictor_names.clone(),
            response_names: self.response_names.clone(),
            centering_offsets: self.centering_offsets.clone(),
            scaling_factors: self.scaling_factors.clone(),
        }
    }

    /// Structural checks beyond what the field types enforce.
    pub fn validate(&self) -> Result<()> {
        check_format(&self.format, FIT_FORMAT)?;
        let (p, r, m) = (
            self.predictor_names.len(),
            self.response_names.len(),
            self.dimensions,
        );
        let params = self.params()?;
        if params.n_predictors() != p || params.n_responses() != r {
            return Err(MelodicError::DimensionMismatch(
                "parameter shapes disagree with the variable names".into(),
            ));
        }
        if self.centering_offsets.len() != p
            || self.scaling_factors.len() != p
            || self.predictor_sd.len() != p
        {
            return Err(MelodicError::DimensionMismatch(
                "predictor metadata length".into(),
            ));
        }
        let v = matrix_from_rows(&self.v, m, "v")?;
        if v.nrows() != 2 * r || (v - category_coordinates(&params)).amax() > 1e-12 {
            return Err(MelodicError::Structure("v is inconsistent with k and l".into()));
        }
        if self.implied.intercepts.len() != r
            || matrix_from_rows(&self.implied.coefficients, r, "implied.coefficients")?.nrows() != p
        {
            return Err(MelodicError::DimensionMismatch(
                "implied coefficient table".into(),
            ));
        }
        if let Some(rows) = &self.assignment {
            if rows.len() != r
                || rows
                    .iter()
                    .any(|row| row.len() != m || row.iter().any(|&v| v > 1))
            {
                return Err(MelodicError::Structure("assignment must be R × M of 0/1".into()));
            }
        }
        if self.quality.len() != r {
            return Err(MelodicError::DimensionMismatch("quality report length".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanDocument {
    pub format: String,
    /// `dimensions` or `drop-predictors`.
    pub kind: String,
    pub n: usize,
    pub table: ScanTable,
}

impl ScanDocument {
    pub fn validate(&self) -> Result<()> {
        check_format(&self.format, SCAN_FORMAT)?;
        if !matches!(self.kind.as_str(), "dimensions" | "drop-predictors") {
            return Err(MelodicError::config("kind", "unknown scan kind"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionDocument {
    pub format: String,
    pub response_names: Vec<String>,
    pub rows: Vec<Prediction>,
}

impl PredictionDocument {
    pub fn validate(&self) -> Result<()> {
        check_format(&self.format, PREDICTION_FORMAT)?;
        let r = self.response_names.len();
        if self
            .rows
            .iter()
            .any(|p| p.probabilities.len() != r || p.classes.len() != r)
        {
            return Err(MelodicError::DimensionMismatch("prediction row width".into()));
        }
        Ok(())
    }
}

pub(crate) fn check_format(found: &str, expected: &str) -> Result<()> {
    if found != expected {
        return Err(MelodicError::config(
            "format",
            format!("expected {expected:?}, found {found:?}"),
        ));
    }
    Ok(())
}

pub fn to_json<T: Serialize>(doc: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(doc)? + "\n")
}

pub fn write_json<T: Serialize>(doc: &T, path: &Path) -> Result<()> {
    fs::write(path, to_json(doc)?).map_err(|source| MelodicError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| MelodicError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{generate_synthetic, SyntheticSpec};
    use crate::selection::quality_of_representation;
    use crate::solver::fit;

    fn fitted() -> FitDocument {
        let (ds, _) = generate_synthetic(&SyntheticSpec::new(80, 3, 4, 2, 1.0, 2)).unwrap();
        let cfg = FitConfig::new(2);
        let res = fit(&ds, &cfg).unwrap();
        let summary = ModelSummary::from_fit("M = 2", &ds, &cfg, &res);
        let quality = quality_of_representation(&ds, &res).unwrap().entries;
        FitDocument::new(&ds, &cfg, &res, summary, quality)
    }

    #[test]
    fn fit_document_round_trips() {
        let doc = fitted();
        doc.validate().unwrap();
        let text = to_json(&doc).unwrap();
        let back: FitDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(to_json(&back).unwrap(), text);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = to_json(&fitted()).unwrap();
        let tampered = text.replacen("{", "{\n  \"extra\": 1,", 1);
        assert!(serde_json::from_str::<FitDocument>(&tampered).is_err());
    }

    #[test]
    fn inconsistent_v_is_rejected() {
        let mut doc = fitted();
        doc.v[0][0] += 1.0;
        assert!(doc.validate().is_err());
        let mut doc = fitted();
        doc.format = "other".into();
        assert!(doc.validate().is_err());
    }
}
