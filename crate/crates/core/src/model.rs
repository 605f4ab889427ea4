//! Model data types and closed-form quantities.
//!
//! A subject `i` sits at `u_i = x_iᵀB` in an `M`-dimensional Euclidean space.
//! Every binary response `r` owns two category points `v_r0` and `v_r1`, and
//! the probability of each category is a two-term softmax of the negative half
//! squared distances between the subject and the category points.
//!
//! Category points are stored through their midpoint (location, `L`) and half
//! difference (discrimination, `K`): `v_r0 = l_r + k_r`, `v_r1 = l_r − k_r`.
//! Column `2r` of the indicator matrix marks `y_ir = 0` and column `2r + 1`
//! marks `y_ir = 1` (zero-based).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{MelodicError, Result};

/// Squared column norms of `K` below this are treated as coincident categories.
pub const DEGENERATE_DISCRIMINATION: f64 = 1e-14;

/// Names and the affine map from raw predictor values to model scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub predictor_names: Vec<String>,
    pub response_names: Vec<String>,
    pub centering_offsets: Vec<f64>,
    pub scaling_factors: Vec<f64>,
}

impl DatasetMeta {
    /// Identity transform with generated names.
    pub fn identity(p: usize, r: usize) -> Self {
        DatasetMeta {
            predictor_names: (1..=p).map(|j| format!("X{j}")).collect(),
            response_names: (1..=r).map(|j| format!("Y{j}")).collect(),
            centering_offsets: vec![0.0; p],
            scaling_factors: vec![1.0; p],
        }
    }

    pub fn n_predictors(&self) -> usize {
        self.predictor_names.len()
    }

    pub fn n_responses(&self) -> usize {
        self.response_names.len()
    }

    /// Map a raw predictor row onto the centered (and possibly scaled) model scale.
    pub fn to_model_scale(&self, raw: &[f64]) -> Result<Vec<f64>> {
        if raw.len() != self.n_predictors() {
            return Err(MelodicError::DimensionMismatch(format!(
                "expected {} predictor values, got {}",
                self.n_predictors(),
                raw.len()
            )));
        }
        Ok(raw
            .iter()
            .zip(&self.centering_offsets)
            .zip(&self.scaling_factors)
            .map(|((x, o), s)| (x - o) / s)
            .collect())
    }
}

/// How raw predictors were brought onto model scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Preprocessing {
    pub standardize: bool,
    /// Delta degrees of freedom of the standard deviation (1 gives the `n − 1` denominator).
    pub sd_ddof: usize,
}

impl Default for Preprocessing {
    fn default() -> Self {
        Preprocessing {
            standardize: true,
            sd_ddof: 1,
        }
    }
}

/// Predictors on model scale, binary responses and their indicator expansion.
#[derive(Debug, Clone)]
pub struct Dataset {
    x: DMatrix<f64>,
    y: DMatrix<u8>,
    g: DMatrix<f64>,
    meta: DatasetMeta,
    preprocessing: Option<Preprocessing>,
}

fn indicator_matrix(y: &DMatrix<u8>) -> DMatrix<f64> {
    let (n, r) = y.shape();
    DMatrix::from_fn(n, 2 * r, |i, c| {
        let observed = y[(i, c / 2)] as usize;
        if observed == c % 2 {
            1.0
        } else {
            0.0
        }
    })
}

fn sample_sd(col: impl Iterator<Item = f64> + Clone, n: usize, ddof: usize) -> f64 {
    let mean = col.clone().sum::<f64>() / n as f64;
    let ss: f64 = col.map(|v| (v - mean) * (v - mean)).sum();
    (ss / (n.saturating_sub(ddof)).max(1) as f64).sqrt()
}

impl Dataset {
    /// Center (and optionally standardize) raw predictors and expand the responses.
    pub fn new(x_raw: DMatrix<f64>, y: DMatrix<u8>, preprocessing: Preprocessing) -> Result<Self> {
        let meta = DatasetMeta::identity(x_raw.ncols(), y.ncols());
        Self::with_names(x_raw, y, meta.predictor_names, meta.response_names, preprocessing)
    }

    pub fn with_names(
        x_raw: DMatrix<f64>,
        y: DMatrix<u8>,
        predictor_names: Vec<String>,
        response_names: Vec<String>,
        preprocessing: Preprocessing,
    ) -> Result<Self> {
        let (n, p) = x_raw.shape();
        if n == 0 {
            return Err(MelodicError::DimensionMismatch("dataset has no rows".into()));
        }
        let mut x = x_raw;
        let mut offsets = Vec::with_capacity(p);
        let mut factors = Vec::with_capacity(p);
        for j in 0..p {
            let mean = x.column(j).sum() / n as f64;
            let factor = if preprocessing.standardize {
                let sd = sample_sd(x.column(j).iter().copied(), n, preprocessing.sd_ddof);
                if sd <= 0.0 || !sd.is_finite() {
                    return Err(MelodicError::SingularDesign {
                        column: j,
                        name: predictor_names.get(j).cloned().unwrap_or_default(),
                    });
                }
                sd
            } else {
                1.0
            };
            x.column_mut(j).iter_mut().for_each(|v| *v = (*v - mean) / factor);
            offsets.push(mean);
            factors.push(factor);
        }
        let meta = DatasetMeta {
            predictor_names,
            response_names,
            centering_offsets: offsets,
            scaling_factors: factors,
        };
        let mut ds = Self::from_model_scale(x, y, meta)?;
        ds.preprocessing = Some(preprocessing);
        Ok(ds)
    }

    /// Wrap predictors that are already on model scale. Centering is not enforced,
    /// which lets fixtures use designs such as the identity matrix.
    pub fn from_model_scale(x: DMatrix<f64>, y: DMatrix<u8>, meta: DatasetMeta) -> Result<Self> {
        if x.nrows() != y.nrows() {
            return Err(MelodicError::DimensionMismatch(format!(
                "X has {} rows but Y has {}",
                x.nrows(),
                y.nrows()
            )));
        }
        if meta.n_predictors() != x.ncols()
            || meta.centering_offsets.len() != x.ncols()
            || meta.scaling_factors.len() != x.ncols()
        {
            return Err(MelodicError::DimensionMismatch(
                "predictor metadata does not match the columns of X".into(),
            ));
        }
        if meta.n_responses() != y.ncols() {
            return Err(MelodicError::DimensionMismatch(
                "response names do not match the columns of Y".into(),
            ));
        }
        if y.iter().any(|&v| v > 1) {
            return Err(MelodicError::Structure("responses must be 0 or 1".into()));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(MelodicError::Structure("predictors must be finite".into()));
        }
        let g = indicator_matrix(&y);
        Ok(Dataset {
            x,
            y,
            g,
            meta,
            preprocessing: None,
        })
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DMatrix<u8> {
        &self.y
    }

    /// Indicator expansion, `n × 2R`.
    pub fn g(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn meta(&self) -> &DatasetMeta {
        &self.meta
    }

    pub fn preprocessing(&self) -> Option<Preprocessing> {
        self.preprocessing
    }

    /// Record how the predictors were preprocessed (used when reloading a saved dataset).
    pub fn with_preprocessing(mut self, preprocessing: Option<Preprocessing>) -> Self {
        self.preprocessing = preprocessing;
        self
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_predictors(&self) -> usize {
        self.x.ncols()
    }

    pub fn n_responses(&self) -> usize {
        self.y.ncols()
    }

    /// Predictor values mapped back to their original scale.
    pub fn raw_predictors(&self) -> DMatrix<f64> {
        let m = &self.meta;
        DMatrix::from_fn(self.n(), self.n_predictors(), |i, j| {
            self.x[(i, j)] * m.scaling_factors[j] + m.centering_offsets[j]
        })
    }

    /// Standard deviation of each model-scale predictor column.
    pub fn predictor_sd(&self) -> Vec<f64> {
        let ddof = self.preprocessing.map(|p| p.sd_ddof).unwrap_or(1);
        (0..self.n_predictors())
            .map(|j| sample_sd(self.x.column(j).iter().copied(), self.n(), ddof))
            .collect()
    }

    /// Same data without predictor `column`, re-centered (and re-scaled when the
    /// original was standardized).
    pub fn without_predictor(&self, column: usize) -> Result<Dataset> {
        let p = self.n_predictors();
        if column >= p {
            return Err(MelodicError::DimensionMismatch(format!(
                "predictor {column} out of range for P = {p}"
            )));
        }
        if p < 2 {
            return Err(MelodicError::Unsupported("cannot drop the only predictor".into()));
        }
        let raw = self.raw_predictors().remove_column(column);
        let mut names = self.meta.predictor_names.clone();
        names.remove(column);
        match self.preprocessing {
            Some(pre) => {
                Dataset::with_names(raw, self.y.clone(), names, self.meta.response_names.clone(), pre)
            }
            None => {
                let mut meta = self.meta.clone();
                meta.predictor_names = names;
                meta.centering_offsets.remove(column);
                meta.scaling_factors.remove(column);
                Dataset::from_model_scale(self.x.clone().remove_column(column), self.y.clone(), meta)
            }
        }
    }

    /// Same predictors with a subset of the responses.
    pub fn with_responses(&self, keep: &[usize]) -> Result<Dataset> {
        if keep.iter().any(|&r| r >= self.n_responses()) {
            return Err(MelodicError::DimensionMismatch(
                "response index out of range".into(),
            ));
        }
        let y = self.y.select_columns(keep);
        let mut meta = self.meta.clone();
        meta.response_names = keep
            .iter()
            .map(|&r| self.meta.response_names[r].clone())
            .collect();
        let mut ds = Dataset::from_model_scale(self.x.clone(), y, meta)?;
        ds.preprocessing = self.preprocessing;
        Ok(ds)
    }

    /// Check centering and indicator invariants.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.n() as f64;
        for j in 0..self.n_predictors() {
            let s = self.x.column(j).sum();
            if s.abs() > 1e-10 * n {
                return Err(MelodicError::Structure(format!(
                    "predictor column {j} is not centered (sum {s:e})"
                )));
            }
        }
        for i in 0..self.n() {
            for r in 0..self.n_responses() {
                if self.g[(i, 2 * r)] + self.g[(i, 2 * r + 1)] != 1.0
                    || self.g[(i, 2 * r + 1)] != f64::from(self.y[(i, r)])
                {
                    return Err(MelodicError::Structure(format!(
                        "indicator pair ({i}, {r}) is inconsistent"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Responses whose observed values are all equal.
    pub fn single_class_responses(&self) -> Vec<usize> {
        (0..self.n_responses())
            .filter(|&r| {
                let ones = self.y.column(r).iter().filter(|&&v| v == 1).count();
                ones == 0 || ones == self.n()
            })
            .collect()
    }
}

/// Binary `R × M` pattern of which responses load on which dimensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionAssignment {
    pattern: DMatrix<u8>,
}

impl DimensionAssignment {
    pub fn new(pattern: DMatrix<u8>) -> Result<Self> {
        let (r, m) = pattern.shape();
        if r == 0 || m == 0 {
            return Err(MelodicError::InvalidAssignment("empty pattern".into()));
        }
        if pattern.iter().any(|&v| v > 1) {
            return Err(MelodicError::InvalidAssignment("entries must be 0 or 1".into()));
        }
        for i in 0..r {
            if pattern.row(i).iter().all(|&v| v == 0) {
                return Err(MelodicError::InvalidAssignment(format!(
                    "response {} pertains to no dimension",
                    i + 1
                )));
            }
        }
        for j in 0..m {
            if pattern.column(j).iter().all(|&v| v == 0) {
                return Err(MelodicError::InvalidAssignment(format!(
                    "dimension {} has no responses",
                    j + 1
                )));
            }
        }
        Ok(DimensionAssignment { pattern })
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let r = rows.len();
        let m = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|row| row.len() != m) {
            return Err(MelodicError::InvalidAssignment("ragged rows".into()));
        }
        Self::new(DMatrix::from_fn(r, m, |i, j| rows[i][j]))
    }

    /// Each response on its own dimension.
    pub fn identity(r: usize) -> Self {
        DimensionAssignment {
            pattern: DMatrix::identity(r, r),
        }
    }

    pub fn pattern(&self) -> &DMatrix<u8> {
        &self.pattern
    }

    pub fn n_responses(&self) -> usize {
        self.pattern.nrows()
    }

    pub fn n_dimensions(&self) -> usize {
        self.pattern.ncols()
    }

    pub fn pertains(&self, r: usize, m: usize) -> bool {
        self.pattern[(r, m)] == 1
    }

    /// Dimensions to which response `r` pertains.
    pub fn dimensions_of(&self, r: usize) -> Vec<usize> {
        (0..self.n_dimensions())
            .filter(|&m| self.pertains(r, m))
            .collect()
    }

    /// Responses that pertain to dimension `m`.
    pub fn responses_on(&self, m: usize) -> Vec<usize> {
        (0..self.n_responses()).filter(|&r| self.pertains(r, m)).collect()
    }

    pub fn ones(&self) -> usize {
        self.pattern.iter().filter(|&&v| v == 1).count()
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        self.pattern
            .row_iter()
            .map(|row| row.iter().copied().collect())
            .collect()
    }
}

/// Regression weights `B` (`P × M`), discriminations `K` and locations `L` (`R × M`).
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub b: DMatrix<f64>,
    pub k: DMatrix<f64>,
    pub l: DMatrix<f64>,
}

impl ModelParams {
    pub fn new(b: DMatrix<f64>, k: DMatrix<f64>, l: DMatrix<f64>) -> Result<Self> {
        if b.ncols() != k.ncols() || k.shape() != l.shape() {
            return Err(MelodicError::DimensionMismatch(format!(
                "B is {:?}, K is {:?}, L is {:?}",
                b.shape(),
                k.shape(),
                l.shape()
            )));
        }
        Ok(ModelParams { b, k, l })
    }

    pub fn zeros(p: usize, r: usize, m: usize) -> Self {
        ModelParams {
            b: DMatrix::zeros(p, m),
            k: DMatrix::zeros(r, m),
            l: DMatrix::zeros(r, m),
        }
    }

    pub fn dimensions(&self) -> usize {
        self.b.ncols()
    }

    pub fn n_predictors(&self) -> usize {
        self.b.nrows()
    }

    pub fn n_responses(&self) -> usize {
        self.k.nrows()
    }

    /// Flip every dimension whose sign-determining weight is negative. The
    /// determining weight is the first predictor's, or the first one with
    /// magnitude at least `1e-10`.
    pub fn canonicalize_signs(&mut self) {
        for m in 0..self.dimensions() {
            let pivot = self
                .b
                .column(m)
                .iter()
                .copied()
                .find(|v| v.abs() >= 1e-10)
                .unwrap_or(0.0);
            if pivot < 0.0 {
                self.b.column_mut(m).neg_mut();
                self.k.column_mut(m).neg_mut();
                self.l.column_mut(m).neg_mut();
            }
        }
    }

    /// Apply an `M × M` transform to every parameter matrix.
    pub fn transformed(&self, t: &DMatrix<f64>) -> ModelParams {
        ModelParams {
            b: &self.b * t,
            k: &self.k * t,
            l: &self.l * t,
        }
    }
}

/// Category coordinates `V` (`2R × M`): row `2r` is `l_r + k_r`, row `2r + 1` is `l_r − k_r`.
pub fn category_coordinates(params: &ModelParams) -> DMatrix<f64> {
    let (r, m) = params.k.shape();
    DMatrix::from_fn(2 * r, m, |row, j| {
        let (resp, cat) = (row / 2, row % 2);
        if cat == 0 {
            params.l[(resp, j)] + params.k[(resp, j)]
        } else {
            params.l[(resp, j)] - params.k[(resp, j)]
        }
    })
}

/// Split category coordinates into `(K, L)`.
pub fn decompose_category_coordinates(v: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if !v.nrows().is_multiple_of(2) {
        return Err(MelodicError::Structure(format!(
            "category coordinates need an even number of rows, got {}",
            v.nrows()
        )));
    }
    let (r, m) = (v.nrows() / 2, v.ncols());
    let k = DMatrix::from_fn(r, m, |i, j| 0.5 * (v[(2 * i, j)] - v[(2 * i + 1, j)]));
    let l = DMatrix::from_fn(r, m, |i, j| 0.5 * (v[(2 * i, j)] + v[(2 * i + 1, j)]));
    Ok((k, l))
}

fn check_design(x: &DMatrix<f64>, params: &ModelParams) -> Result<()> {
    if x.ncols() != params.n_predictors() {
        return Err(MelodicError::DimensionMismatch(format!(
            "X has {} columns but B has {} rows",
            x.ncols(),
            params.n_predictors()
        )));
    }
    Ok(())
}

/// Subject coordinates `U = XB`.
pub fn subject_scores(dataset: &Dataset, params: &ModelParams) -> Result<DMatrix<f64>> {
    check_design(dataset.x(), params)?;
    Ok(dataset.x() * &params.b)
}

/// Half the squared Euclidean distance.
pub fn half_sq_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(MelodicError::DimensionMismatch(format!(
            "vectors of length {} and {}",
            u.len(),
            v.len()
        )));
    }
    Ok(0.5 * u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
}

/// Linear predictors `θ_irc = u_iᵀv_rc − ½‖v_rc‖²`: negative half squared
/// distances with the subject-only term dropped.
pub fn linear_predictors(x: &DMatrix<f64>, params: &ModelParams) -> DMatrix<f64> {
    let v = category_coordinates(params);
    let u = x * &params.b;
    let mut theta = u * v.transpose();
    for (c, mut col) in theta.column_iter_mut().enumerate() {
        let half_norm = 0.5 * v.row(c).norm_squared();
        col.add_scalar_mut(-half_norm);
    }
    theta
}

/// Two-term softmax over each consecutive column pair.
pub fn pair_probabilities(theta: &DMatrix<f64>) -> DMatrix<f64> {
    let mut pi = DMatrix::zeros(theta.nrows(), theta.ncols());
    for i in 0..theta.nrows() {
        for r in 0..theta.ncols() / 2 {
            let (p0, p1) = softmax_pair(theta[(i, 2 * r)], theta[(i, 2 * r + 1)]);
            pi[(i, 2 * r)] = p0;
            pi[(i, 2 * r + 1)] = p1;
        }
    }
    pi
}

#[inline]
pub(crate) fn softmax_pair(t0: f64, t1: f64) -> (f64, f64) {
    let mx = t0.max(t1);
    let e0 = (t0 - mx).exp();
    let e1 = (t1 - mx).exp();
    let s = e0 + e1;
    (e0 / s, e1 / s)
}

/// `ln(1 + e^x)` without overflow.
#[inline]
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Per-response deviance contributions for linear predictors `theta`.
pub fn response_deviances_from_theta(g: &DMatrix<f64>, theta: &DMatrix<f64>) -> Vec<f64> {
    let r = g.ncols() / 2;
    let mut out = vec![0.0; r];
    for i in 0..g.nrows() {
        for (resp, acc) in out.iter_mut().enumerate() {
            let (t0, t1) = (theta[(i, 2 * resp)], theta[(i, 2 * resp + 1)]);
            // −log π_c = softplus(θ_other − θ_c)
            let nll = if g[(i, 2 * resp + 1)] == 1.0 {
                softplus(t0 - t1)
            } else {
                softplus(t1 - t0)
            };
            *acc += 2.0 * nll;
        }
    }
    out
}

pub fn deviance_from_theta(g: &DMatrix<f64>, theta: &DMatrix<f64>) -> f64 {
    response_deviances_from_theta(g, theta).iter().sum()
}

/// Probabilities `Π` (`n × 2R`) of every category for every subject.
pub fn class_probabilities(dataset: &Dataset, params: &ModelParams) -> Result<DMatrix<f64>> {
    check_design(dataset.x(), params)?;
    Ok(pair_probabilities(&linear_predictors(dataset.x(), params)))
}

/// Log odds of category 1 against category 0, `δ(u_i, v_r0) − δ(u_i, v_r1)`.
pub fn log_odds(dataset: &Dataset, params: &ModelParams) -> Result<DMatrix<f64>> {
    let u = subject_scores(dataset, params)?;
    let v = category_coordinates(params);
    let (n, r) = (dataset.n(), params.n_responses());
    let mut out = DMatrix::zeros(n, r);
    let mut ui = vec![0.0; params.dimensions()];
    for i in 0..n {
        ui.iter_mut().zip(u.row(i).iter()).for_each(|(a, b)| *a = *b);
        for resp in 0..r {
            let v0: Vec<f64> = v.row(2 * resp).iter().copied().collect();
            let v1: Vec<f64> = v.row(2 * resp + 1).iter().copied().collect();
            out[(i, resp)] = half_sq_distance(&ui, &v0)? - half_sq_distance(&ui, &v1)?;
        }
    }
    Ok(out)
}

/// The model restated as `R` ordinary logistic regressions.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpliedCoefficients {
    /// `a*_r`, one per response.
    pub intercepts: DVector<f64>,
    /// `b*_r` as columns, `P × R`.
    pub coefficients: DMatrix<f64>,
}

pub fn implied_coefficients(params: &ModelParams) -> ImpliedCoefficients {
    let v = category_coordinates(params);
    let r = params.n_responses();
    let intercepts = DVector::from_fn(r, |resp, _| {
        0.5 * (v.row(2 * resp).norm_squared() - v.row(2 * resp + 1).norm_squared())
    });
    // v_r1 − v_r0 = −2 k_r
    let coefficients = &params.b * params.k.transpose() * -2.0;
    ImpliedCoefficients {
        intercepts,
        coefficients,
    }
}

/// Binomial deviance `−2 Σ g log π` of the model on `dataset`.
pub fn deviance(dataset: &Dataset, params: &ModelParams) -> Result<f64> {
    check_design(dataset.x(), params)?;
    Ok(deviance_from_theta(
        dataset.g(),
        &linear_predictors(dataset.x(), params),
    ))
}

/// Category probabilities and closest-category classes for one subject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    /// `[π_r0, π_r1]` per response.
    pub probabilities: Vec<[f64; 2]>,
    /// 1 when the log odds are strictly positive, otherwise 0.
    pub classes: Vec<u8>,
}

pub fn predict(new_x: &[f64], params: &ModelParams, meta: &DatasetMeta) -> Result<Prediction> {
    if new_x.iter().any(|v| !v.is_finite()) {
        return Err(MelodicError::Structure("prediction input must be finite".into()));
    }
    let x = meta.to_model_scale(new_x)?;
    if x.len() != params.n_predictors() {
        return Err(MelodicError::DimensionMismatch(format!(
            "model has {} predictors, metadata has {}",
            params.n_predictors(),
            x.len()
        )));
    }
    let row = DMatrix::from_row_slice(1, x.len(), &x);
    let theta = linear_predictors(&row, params);
    let mut probabilities = Vec::with_capacity(params.n_responses());
    let mut classes = Vec::with_capacity(params.n_responses());
    for r in 0..params.n_responses() {
        let (t0, t1) = (theta[(0, 2 * r)], theta[(0, 2 * r + 1)]);
        probabilities.push(<[f64; 2]>::from(softmax_pair(t0, t1)));
        classes.push(u8::from(t1 - t0 > 0.0));
    }
    Ok(Prediction {
        probabilities,
        classes,
    })
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Number of response profiles that own a region of the `M`-dimensional space.
pub fn count_representable_profiles(
    r: usize,
    m: usize,
    assignment: Option<&DimensionAssignment>,
) -> Result<u128> {
    if r == 0 || m == 0 {
        return Err(MelodicError::DimensionMismatch("R and M must be positive".into()));
    }
    match assignment {
        None => Ok((0..=m.min(r)).map(|j| binomial(r, j)).sum()),
        Some(d) => {
            if d.n_responses() != r || d.n_dimensions() != m {
                return Err(MelodicError::DimensionMismatch(format!(
                    "assignment is {}×{}, expected {r}×{m}",
                    d.n_responses(),
                    d.n_dimensions()
                )));
            }
            if (0..r).any(|i| d.dimensions_of(i).len() > 1) {
                return Err(MelodicError::Unsupported(
                    "profile count with a response on several dimensions".into(),
                ));
            }
            Ok((0..m).map(|j| d.responses_on(j).len() as u128 + 1).product())
        }
    }
}
