//! Parameter counting, information criteria, quality of representation and
//! model-selection scans.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MelodicError, Result};
use crate::model::{linear_predictors, response_deviances_from_theta, Dataset, DimensionAssignment};
use crate::solver::{fit, FitConfig, FitResult};

/// Number of free parameters. Unconstrained: `(P + R)M + R − M(M + 1)/2`;
/// constrained: `(P − 1)M + ones(D) + R`.
pub fn count_parameters(p: usize, r: usize, m: usize, assignment: Option<&DimensionAssignment>) -> usize {
    match assignment {
        None => (p + r) * m + r - m * (m + 1) / 2,
        Some(d) => (p - 1) * m + d.ones() + r,
    }
}

/// `(AIC, BIC)` for a deviance with `n_params` parameters on `n` observations.
pub fn information_criteria(deviance: f64, n_params: usize, n: usize) -> (f64, f64) {
    let k = n_params as f64;
    (deviance + 2.0 * k, deviance + (n as f64).ln() * k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSummary {
    pub label: String,
    pub deviance: f64,
    pub n_params: usize,
    pub aic: f64,
    pub bic: f64,
    pub n: usize,
}

impl ModelSummary {
    pub fn new(label: impl Into<String>, deviance: f64, n_params: usize, n: usize) -> Self {
        let (aic, bic) = information_criteria(deviance, n_params, n);
        ModelSummary {
            label: label.into(),
            deviance,
            n_params,
            aic,
            bic,
            n,
        }
    }

    pub fn from_fit(
        label: impl Into<String>,
        dataset: &Dataset,
        config: &FitConfig,
        fit: &FitResult,
    ) -> Self {
        let k = count_parameters(
            dataset.n_predictors(),
            dataset.n_responses(),
            config.dimensions,
            config.assignment.as_ref(),
        );
        ModelSummary::new(label, fit.deviance, k, dataset.n())
    }
}

/// A single-response logistic regression fit.
#[derive(Debug, Clone)]
pub struct UnivariateFit {
    pub coefficients: DVector<f64>,
    pub deviance: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the iterations hit the cap or the weights collapse, the usual
    /// symptoms of (quasi-)separation.
    pub separated: bool,
}

const IRLS_MAX_ITER: usize = 200;

fn binomial_deviance(eta: &DVector<f64>, y: &[u8]) -> f64 {
    eta.iter()
        .zip(y)
        .map(|(&e, &yi)| {
            // −log p(y | η)
            let t = if yi == 1 { -e } else { e };
            2.0 * if t > 0.0 {
                t + (-t).exp().ln_1p()
            } else {
                t.exp().ln_1p()
            }
        })
        .sum()
}

/// Maximum-likelihood logistic regression by iteratively reweighted least
/// squares. `design` must already contain the intercept column.
pub fn fit_univariate_logistic(design: &DMatrix<f64>, y: &[u8]) -> Result<UnivariateFit> {
    let (n, q) = design.shape();
    if y.len() != n {
        return Err(MelodicError::DimensionMismatch(format!(
            "design has {n} rows but y has {}",
            y.len()
        )));
    }
    let ones = y.iter().filter(|&&v| v == 1).count();
    if ones == 0 || ones == n {
        return Err(MelodicError::SingleClassResponse {
            name: "univariate response".into(),
        });
    }
    let mut beta = DVector::zeros(q);
    let mut eta = design * &beta;
    let mut dev = binomial_deviance(&eta, y);
    let mut converged = false;
    let mut separated = false;
    let mut iterations = 0;
    while iterations < IRLS_MAX_ITER {
        iterations += 1;
        let mut xtwx = DMatrix::zeros(q, q);
        let mut xtwz = DVector::zeros(q);
        for i in 0..n {
            let p = 1.0 / (1.0 + (-eta[i]).exp());
            let w = (p * (1.0 - p)).max(1e-300);
            let z = eta[i] + (f64::from(y[i]) - p) / w;
            let row = design.row(i);
            for a in 0..q {
                xtwz[a] += w * row[a] * z;
                for b in 0..=a {
                    xtwx[(a, b)] += w * row[a] * row[b];
                }
            }
        }
        for a in 0..q {
            for b in 0..a {
                xtwx[(b, a)] = xtwx[(a, b)];
            }
        }
        let Some(chol) = xtwx.cholesky() else {
            separated = true;
            break;
        };
        let next = chol.solve(&xtwz);
        let next_eta = design * &next;
        let next_dev = binomial_deviance(&next_eta, y);
        let rel = (dev - next_dev).abs() / next_dev.max(1e-300);
        beta = next;
        eta = next_eta;
        dev = next_dev;
        if rel <= 1e-10 || dev < 1e-300 {
            converged = rel <= 1e-10;
            break;
        }
    }
    if !converged || beta.amax() > 1e3 {
        separated = true;
    }
    Ok(UnivariateFit {
        coefficients: beta,
        deviance: dev,
        iterations,
        converged,
        separated,
    })
}

/// Deviance of the intercept-only model.
pub fn null_deviance(y: &[u8]) -> f64 {
    let n = y.len() as f64;
    let ones = y.iter().filter(|&&v| v == 1).count() as f64;
    let term = |count: f64| {
        if count > 0.0 {
            count * (count / n).ln()
        } else {
            0.0
        }
    };
    -2.0 * (term(ones) + term(n - ones))
}

/// `[1 | X]`
pub fn with_intercept(x: &DMatrix<f64>) -> DMatrix<f64> {
    x.clone().insert_column(0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QualityEntry {
    pub response: String,
    /// Intercept-only deviance `L0_r`.
    pub null_deviance: f64,
    /// Deviance `Llr_r` of a separate logistic regression on all predictors.
    pub logistic_deviance: f64,
    /// The fitted model's deviance for this response, `L_r`.
    pub model_deviance: f64,
    /// `(L0_r − L_r)/(L0_r − Llr_r)`; `None` when the predictors carry no information.
    pub quality: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QualityReport {
    pub entries: Vec<QualityEntry>,
}

/// Per-response share of the achievable deviance reduction retained by the fit.
pub fn quality_of_representation(dataset: &Dataset, fit: &FitResult) -> Result<QualityReport> {
    if fit.params.n_predictors() != dataset.n_predictors()
        || fit.params.n_responses() != dataset.n_responses()
    {
        return Err(MelodicError::DimensionMismatch(
            "fit does not belong to this dataset".into(),
        ));
    }
    let theta = linear_predictors(dataset.x(), &fit.params);
    let model = response_deviances_from_theta(dataset.g(), &theta);
    let design = with_intercept(dataset.x());
    let entries = (0..dataset.n_responses())
        .into_par_iter()
        .map(|r| {
            let y: Vec<u8> = dataset.y().column(r).iter().copied().collect();
            let l0 = null_deviance(&y);
            let llr = fit_univariate_logistic(&design, &y)?.deviance;
            let denom = l0 - llr;
            let quality = (denom >= 1e-8).then(|| (l0 - model[r]) / denom);
            Ok(QualityEntry {
                response: dataset.meta().response_names[r].clone(),
                null_deviance: l0,
                logistic_deviance: llr,
                model_deviance: model[r],
                quality,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QualityReport { entries })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanRow {
    pub label: String,
    pub summary: Option<ModelSummary>,
    pub converged: Option<bool>,
    pub iterations: Option<usize>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanTable {
    pub rows: Vec<ScanRow>,
    /// Index of the AIC-minimizing row.
    pub best_aic: Option<usize>,
    pub best_bic: Option<usize>,
}

impl ScanTable {
    fn from_rows(rows: Vec<ScanRow>) -> Self {
        let argmin = |key: fn(&ModelSummary) -> f64| {
            rows.iter()
                .enumerate()
                .filter_map(|(i, r)| r.summary.as_ref().map(|s| (i, key(s))))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(i, _)| i)
        };
        let best_aic = argmin(|s| s.aic);
        let best_bic = argmin(|s| s.bic);
        ScanTable {
            rows,
            best_aic,
            best_bic,
        }
    }

    pub fn summaries(&self) -> impl Iterator<Item = &ModelSummary> {
        self.rows.iter().filter_map(|r| r.summary.as_ref())
    }

    /// Aligned text with `*` after the minimizing AIC and BIC values.
    pub fn render(&self) -> String {
        let label_w = self.rows.iter().map(|r| r.label.len()).max().unwrap_or(0).max(5);
        let mut out = format!(
            "{:<label_w$}  {:>12}  {:>7}  {:>13}  {:>13}\n",
            "model", "deviance", "#param", "AIC", "BIC"
        );
        for (i, row) in self.rows.iter().enumerate() {
            match &row.summary {
                Some(s) => {
                    let mark = |best: Option<usize>| if best == Some(i) { "*" } else { " " };
                    out.push_str(&format!(
                        "{:<label_w$}  {:>12.2}  {:>7}  {:>12.2}{}  {:>12.2}{}\n",
                        row.label,
                        s.deviance,
                        s.n_params,
                        s.aic,
                        mark(self.best_aic),
                        s.bic,
                        mark(self.best_bic)
                    ));
                }
                None => out.push_str(&format!(
                    "{:<label_w$}  error: {}\n",
                    row.label,
                    row.error.as_deref().unwrap_or("unknown")
                )),
            }
        }
        out
    }
}

fn scan_row(label: String, dataset: &Dataset, config: &FitConfig) -> ScanRow {
    match fit(dataset, config) {
        Ok(res) => ScanRow {
            summary: Some(ModelSummary::from_fit(label.clone(), dataset, config, &res)),
            converged: Some(res.converged),
            iterations: Some(res.iterations),
            label,
            error: None,
        },
        Err(e) => ScanRow {
            label,
            summary: None,
            converged: None,
            iterations: None,
            error: Some(e.to_string()),
        },
    }
}

/// One unconstrained fit per dimensionality in `dims`.
pub fn dimension_scan(
    dataset: &Dataset,
    dims: std::ops::RangeInclusive<usize>,
    config: &FitConfig,
) -> Result<ScanTable> {
    let max = dataset.n_predictors().min(dataset.n_responses());
    if *dims.start() < 1 || *dims.end() > max || dims.is_empty() {
        return Err(MelodicError::config(
            "dims",
            format!("range must lie within 1..={max}"),
        ));
    }
    let rows = dims
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|m| {
            let mut cfg = config.clone();
            cfg.dimensions = m;
            cfg.assignment = None;
            scan_row(m.to_string(), dataset, &cfg)
        })
        .collect();
    Ok(ScanTable::from_rows(rows))
}

/// Refit with each predictor left out in turn.
pub fn predictor_drop_scan(dataset: &Dataset, config: &FitConfig) -> Result<ScanTable> {
    if dataset.n_predictors() < 2 {
        return Err(MelodicError::Unsupported(
            "leaving out predictors needs at least two".into(),
        ));
    }
    let rows = (0..dataset.n_predictors())
        .into_par_iter()
        .map(|p| {
            let label = dataset.meta().predictor_names[p].clone();
            match dataset.without_predictor(p) {
                Ok(reduced) => scan_row(label, &reduced, config),
                Err(e) => ScanRow {
                    label,
                    summary: None,
                    converged: None,
                    iterations: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(ScanTable::from_rows(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelParams, Preprocessing};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn theory(rows: &[[u8; 2]]) -> DimensionAssignment {
        DimensionAssignment::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn parameter_counts() {
        assert_eq!(count_parameters(9, 11, 2, None), 48);
        assert_eq!(count_parameters(9, 11, 7, None), 123);
        assert_eq!(count_parameters(8, 5, 2, None), 28);
        let d2 = theory(&[[1, 0], [1, 0], [1, 0], [0, 1], [0, 1]]);
        let d4 = theory(&[[1, 0], [1, 0], [1, 1], [0, 1], [0, 1]]);
        assert_eq!(count_parameters(8, 5, 2, Some(&d2)), 24);
        assert_eq!(count_parameters(8, 5, 2, Some(&d4)), 25);
        let d1 = DimensionAssignment::from_rows(&vec![vec![1]; 5]).unwrap();
        assert_eq!(count_parameters(8, 5, 1, Some(&d1)), 17);
    }

    #[test]
    fn criteria_arithmetic() {
        let (aic, bic) = information_criteria(18311.0, 30, 1885);
        assert_eq!(aic, 18371.0);
        assert!((bic - 18537.25).abs() < 0.05);
        assert_eq!(information_criteria(0.0, 0, 17), (0.0, 0.0));
        let (aic, bic) = information_criteria(4553.34, 17, 786);
        assert_abs_diff_eq!(aic, 4587.34, epsilon = 1e-9);
        assert!((bic - 4666.7).abs() < 0.05);
    }

    #[test]
    fn intercept_only_deviances() {
        let design = DMatrix::from_element(10, 1, 1.0);
        let y5: Vec<u8> = (0..10).map(|i| u8::from(i < 5)).collect();
        let fit = fit_univariate_logistic(&design, &y5).unwrap();
        assert_abs_diff_eq!(fit.deviance, 20.0 * std::f64::consts::LN_2, epsilon = 1e-10);
        assert_abs_diff_eq!(null_deviance(&y5), 13.862943611198906, epsilon = 1e-12);
        let y8: Vec<u8> = (0..10).map(|i| u8::from(i < 8)).collect();
        let expected = -2.0 * (8.0 * 0.8f64.ln() + 2.0 * 0.2f64.ln());
        assert_abs_diff_eq!(
            fit_univariate_logistic(&design, &y8).unwrap().deviance,
            expected,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(expected, 10.008048470763757, epsilon = 1e-12);
    }

    #[test]
    fn separation_is_flagged() {
        let design = with_intercept(&DMatrix::from_row_slice(4, 1, &[-2.0, -1.0, 1.0, 2.0]));
        let fit = fit_univariate_logistic(&design, &[0, 0, 1, 1]).unwrap();
        assert!(fit.separated);
        assert!(fit.deviance < 1e-3);
    }

    #[test]
    fn quality_is_undefined_without_information() {
        // each x value appears once with each outcome, so the slope MLE is zero
        let x = DMatrix::from_row_slice(6, 1, &[-1.0, -1.0, 0.0, 0.0, 1.0, 1.0]);
        let y = DMatrix::from_row_slice(6, 1, &[0, 1, 0, 1, 1, 0]);
        let ds = Dataset::new(x, y, Preprocessing::default()).unwrap();
        let fit = crate::solver::FitResult {
            params: ModelParams::zeros(1, 1, 1),
            deviance: 0.0,
            trace: vec![],
            iterations: 0,
            converged: true,
            degenerate_responses: vec![0],
            quasi_separation: false,
        };
        let q = quality_of_representation(&ds, &fit).unwrap();
        assert_eq!(q.entries[0].quality, None);
        assert_abs_diff_eq!(
            q.entries[0].model_deviance,
            12.0 * std::f64::consts::LN_2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn coincident_categories_score_nonpositive_quality() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = DMatrix::from_fn(80, 2, |_, _| rng.random::<f64>() - 0.5);
        let y = DMatrix::from_fn(80, 1, |i, _| {
            u8::from(x[(i, 0)] + 0.3 * (rng.random::<f64>() - 0.5) > 0.1)
        });
        let ds = Dataset::new(x, y, Preprocessing::default()).unwrap();
        let fit = crate::solver::FitResult {
            params: ModelParams::zeros(2, 1, 1),
            deviance: 0.0,
            trace: vec![],
            iterations: 0,
            converged: true,
            degenerate_responses: vec![0],
            quasi_separation: false,
        };
        let q = quality_of_representation(&ds, &fit).unwrap();
        let e = &q.entries[0];
        assert_abs_diff_eq!(e.model_deviance, 160.0 * std::f64::consts::LN_2, epsilon = 1e-10);
        assert!(e.model_deviance >= e.null_deviance);
        assert!(e.quality.unwrap() <= 0.0);
    }

    #[test]
    fn render_marks_minima() {
        let table = ScanTable::from_rows(vec![
            ScanRow {
                label: "1".into(),
                summary: Some(ModelSummary::new("1", 100.0, 3, 50)),
                converged: Some(true),
                iterations: Some(3),
                error: None,
            },
            ScanRow {
                label: "2".into(),
                summary: Some(ModelSummary::new("2", 90.0, 5, 50)),
                converged: Some(true),
                iterations: Some(3),
                error: None,
            },
        ]);
        assert_eq!(table.best_aic, Some(1));
        assert_eq!(table.best_bic, Some(1));
        let text = table.render();
        assert!(text.lines().nth(2).unwrap().contains('*'));
        assert!(!text.lines().nth(1).unwrap().contains('*'));
    }
}
