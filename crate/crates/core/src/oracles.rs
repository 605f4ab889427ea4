//! Slow, independent reference computations used by the test suite and `validate`.
//!
//! Nothing here shares numerical kernels with the solver: the brute-force fit
//! runs a Nelder–Mead search on the logistic form of the one-dimensional model,
//! and the reference logistic regression uses the fixed-curvature (Böhning)
//! bound with a Gauss–Jordan inverse instead of IRLS.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{MelodicError, Result};
use crate::model::{Dataset, DatasetMeta, DimensionAssignment, ModelParams};

/// Recipe for a dataset drawn from the distance model.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub p: usize,
    pub r: usize,
    pub m_true: usize,
    /// Typical magnitude of the discrimination parameters.
    pub scale: f64,
    /// Prevalence of category 1 at the predictor mean, per response. Empty means ½.
    pub prevalence: Vec<f64>,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(n: usize, p: usize, r: usize, m_true: usize, scale: f64, seed: u64) -> Self {
        SyntheticSpec {
            n,
            p,
            r,
            m_true,
            scale,
            prevalence: Vec::new(),
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 || self.p == 0 || self.r == 0 {
            return Err(MelodicError::Structure("synthetic sizes must be positive".into()));
        }
        if self.m_true == 0 || self.m_true > self.p.min(self.r) {
            return Err(MelodicError::Structure(format!(
                "m_true = {} outside 1..={}",
                self.m_true,
                self.p.min(self.r)
            )));
        }
        if !self.prevalence.is_empty() && self.prevalence.len() != self.r {
            return Err(MelodicError::Structure("one prevalence per response".into()));
        }
        if self.prevalence.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
            return Err(MelodicError::Structure("prevalences must lie in (0, 1)".into()));
        }
        if !(self.scale >= 0.0) {
            return Err(MelodicError::Structure("scale must be non-negative".into()));
        }
        Ok(())
    }
}

fn normal_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

fn center_columns(x: &mut DMatrix<f64>) {
    for mut col in x.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
}

/// Draw a dataset from the model together with the true parameters.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(Dataset, ModelParams)> {
    spec.validate()?;
    let (n, p, r, m) = (spec.n, spec.p, spec.r, spec.m_true);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut x = normal_matrix(&mut rng, n, p);
    center_columns(&mut x);

    // Scale B so that (1/n)BᵀXᵀXB = I.
    let b0 = normal_matrix(&mut rng, p, m);
    let s = (b0.transpose() * x.transpose() * &x * &b0) / n as f64;
    let chol = s
        .cholesky()
        .ok_or_else(|| MelodicError::Numerical("synthetic weights are rank deficient".into()))?;
    // B = B₀L⁻ᵀ with S = LLᵀ
    let b = chol
        .l()
        .solve_lower_triangular(&b0.transpose())
        .ok_or_else(|| MelodicError::Numerical("synthetic weight scaling failed".into()))?
        .transpose();

    let q = normal_matrix(&mut rng, r, m).qr().q();
    let k = q * (spec.scale * (r as f64).sqrt());
    let mut l = DMatrix::zeros(r, m);
    for resp in 0..r {
        let target = spec.prevalence.get(resp).copied().unwrap_or(0.5);
        let kr = k.row(resp);
        let norm2 = kr.norm_squared();
        if norm2 > 1e-14 {
            let a = (target / (1.0 - target)).ln();
            l.set_row(resp, &(kr * (a / (2.0 * norm2))));
        }
    }
    let mut params = ModelParams::new(b, k, l)?;
    params.canonicalize_signs();

    // log odds of category 1: 2 k_rᵀl_r − 2 x_iᵀB k_r
    let u = &x * &params.b;
    let eta = DMatrix::from_fn(n, r, |i, resp| {
        let kr = params.k.row(resp);
        2.0 * kr.dot(&params.l.row(resp)) - 2.0 * u.row(i).dot(&kr)
    });
    for _ in 0..100 {
        let y = DMatrix::from_fn(n, r, |i, resp| {
            let p1 = 1.0 / (1.0 + (-eta[(i, resp)]).exp());
            u8::from(rng.random::<f64>() < p1)
        });
        let both = (0..r).all(|resp| {
            let ones = y.column(resp).iter().filter(|&&v| v == 1).count();
            ones > 0 && ones < n
        });
        if both {
            let ds = Dataset::from_model_scale(x, y, DatasetMeta::identity(p, r))?;
            return Ok((ds, params));
        }
    }
    Err(MelodicError::Structure(
        "synthetic responses kept a single class after 100 draws".into(),
    ))
}

/// A random assignment in which every response and every dimension is used.
pub fn random_assignment(r: usize, m: usize, rng: &mut impl Rng) -> Result<DimensionAssignment> {
    if m > r {
        return Err(MelodicError::InvalidAssignment(format!(
            "cannot cover {m} dimensions with {r} responses"
        )));
    }
    let mut pattern = DMatrix::zeros(r, m);
    let mut order: Vec<usize> = (0..r).collect();
    for i in (1..r).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    for (slot, &resp) in order.iter().enumerate() {
        let home = if slot < m { slot } else { rng.random_range(0..m) };
        pattern[(resp, home)] = 1;
        for j in 0..m {
            if j != home && rng.random::<f64>() < 0.2 {
                pattern[(resp, j)] = 1;
            }
        }
    }
    DimensionAssignment::new(pattern)
}

#[derive(Debug, Clone)]
pub struct BruteForceFit {
    pub deviance: f64,
    /// Logistic intercepts per response.
    pub intercepts: Vec<f64>,
    /// Direction in predictor space (unnormalized).
    pub weights: Vec<f64>,
    /// Per-response loading on the single score `xᵀw`.
    pub loadings: Vec<f64>,
}

/// `2 log(1 + e^t)` computed without overflow.
fn two_log1pexp(t: f64) -> f64 {
    2.0 * (t.max(0.0) + (-t.abs()).exp().ln_1p())
}

/// Deviance of `logit P(y_ir = 1) = α_r + (x_iᵀw) γ_r`.
fn one_dimensional_deviance(x: &DMatrix<f64>, y: &DMatrix<u8>, theta: &[f64]) -> f64 {
    let (n, p) = x.shape();
    let r = y.ncols();
    let (alpha, rest) = theta.split_at(r);
    let (w, gamma) = rest.split_at(p);
    let mut dev = 0.0;
    for i in 0..n {
        let mut s = 0.0;
        for j in 0..p {
            s += x[(i, j)] * w[j];
        }
        for resp in 0..r {
            let eta = alpha[resp] + s * gamma[resp];
            dev += if y[(i, resp)] == 1 {
                two_log1pexp(-eta)
            } else {
                two_log1pexp(eta)
            };
        }
    }
    dev
}

/// Plain Nelder–Mead; returns the best vertex and its value.
fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, start: &[f64], step: f64, max_evals: usize) -> (Vec<f64>, f64) {
    let d = start.len();
    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for j in 0..d {
        let mut v = start.to_vec();
        v[j] += step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut evals = d + 1;
    while evals < max_evals {
        let mut idx: Vec<usize> = (0..=d).collect();
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
        values = idx.iter().map(|&i| values[i]).collect();
        let spread = values[d] - values[0];
        let size = simplex[1..]
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[0])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread <= 1e-13 * (1.0 + values[0].abs()) && size < 1e-9 {
            break;
        }
        let centroid: Vec<f64> = (0..d)
            .map(|j| simplex[..d].iter().map(|v| v[j]).sum::<f64>() / d as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[d])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let xr = along(-1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                simplex[d] = xe;
                values[d] = fe;
            } else {
                simplex[d] = xr;
                values[d] = fr;
            }
        } else if fr < values[d - 1] {
            simplex[d] = xr;
            values[d] = fr;
        } else {
            let (xc, fc) = if fr < values[d] {
                let xc = along(-0.5);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = f(&xc);
                (xc, fc)
            };
            evals += 1;
            if fc < values[d].min(fr) {
                simplex[d] = xc;
                values[d] = fc;
            } else {
                for i in 1..=d {
                    let shrunk: Vec<f64> = simplex[i]
                        .iter()
                        .zip(&simplex[0])
                        .map(|(v, b)| b + 0.5 * (v - b))
                        .collect();
                    values[i] = f(&shrunk);
                    simplex[i] = shrunk;
                }
                evals += d;
            }
        }
    }
    let best = (0..=d)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    (simplex[best].clone(), values[best])
}

/// Best deviance of the one-dimensional model found by a derivative-free
/// search with 50 jittered starts.
pub fn brute_force_fit(dataset: &Dataset, m: usize, seed: u64) -> Result<BruteForceFit> {
    let (n, p, r) = (dataset.n(), dataset.n_predictors(), dataset.n_responses());
    if m != 1 || n > 50 || p > 3 || r > 3 {
        return Err(MelodicError::Unsupported(format!(
            "brute force needs n ≤ 50, P ≤ 3, R ≤ 3, M = 1 (got n = {n}, P = {p}, R = {r}, M = {m})"
        )));
    }
    let x = dataset.x();
    let y = dataset.y();
    let f = |theta: &[f64]| one_dimensional_deviance(x, y, theta);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let logits: Vec<f64> = (0..r)
        .map(|resp| {
            let prev = y.column(resp).iter().map(|&v| f64::from(v)).sum::<f64>() / n as f64;
            (prev / (1.0 - prev)).ln()
        })
        .collect();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for _ in 0..50 {
        let mut start: Vec<f64> = logits
            .iter()
            .map(|a| a + 0.5 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        start.extend((0..p + r).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let (mut point, mut value) = nelder_mead(&f, &start, 0.5, 40_000);
        // Restart from the optimum until it stops moving; a collapsed simplex
        // is the usual failure mode of the method.
        for _ in 0..20 {
            let (next, next_value) = nelder_mead(&f, &point, 0.05, 40_000);
            let gained = value - next_value;
            point = next;
            value = next_value;
            if gained < 1e-10 {
                break;
            }
        }
        if best.as_ref().is_none_or(|(_, v)| value < *v) {
            best = Some((point, value));
        }
    }
    let (theta, deviance) = best.expect("at least one start");
    Ok(BruteForceFit {
        deviance,
        intercepts: theta[..r].to_vec(),
        weights: theta[r..r + p].to_vec(),
        loadings: theta[r + p..].to_vec(),
    })
}

#[derive(Debug, Clone)]
pub struct ReferenceLogistic {
    pub coefficients: Vec<f64>,
    pub deviance: f64,
    pub iterations: usize,
    pub separated: bool,
}

/// Inverse by Gauss–Jordan elimination with partial pivoting.
fn gauss_jordan_inverse(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let d = a.nrows();
    let mut work: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let mut row: Vec<f64> = a.row(i).iter().copied().collect();
            row.extend((0..d).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for col in 0..d {
        let pivot = (col..d).max_by(|&i, &j| work[i][col].abs().total_cmp(&work[j][col].abs()))?;
        if work[pivot][col].abs() < 1e-12 * scale {
            return None;
        }
        work.swap(col, pivot);
        let inv = 1.0 / work[col][col];
        work[col].iter_mut().for_each(|v| *v *= inv);
        for i in 0..d {
            if i != col {
                let factor = work[i][col];
                if factor != 0.0 {
                    let pivot_row = work[col].clone();
                    work[i]
                        .iter_mut()
                        .zip(&pivot_row)
                        .for_each(|(v, pv)| *v -= factor * pv);
                }
            }
        }
    }
    Some(DMatrix::from_fn(d, d, |i, j| work[i][d + j]))
}

/// Logistic regression by the fixed-curvature bound
/// `β ← β + 4(XᵀX)⁻¹Xᵀ(y − p)`. `design` must contain the intercept column.
pub fn reference_logistic(design: &DMatrix<f64>, y: &[u8]) -> Result<ReferenceLogistic> {
    let (n, d) = design.shape();
    if y.len() != n {
        return Err(MelodicError::DimensionMismatch(format!(
            "{n} design rows but {} responses",
            y.len()
        )));
    }
    let ones = y.iter().filter(|&&v| v == 1).count();
    if ones == 0 || ones == n {
        return Err(MelodicError::SingleClassResponse { name: "y".into() });
    }
    let inv = gauss_jordan_inverse(&(design.transpose() * design))
        .ok_or_else(|| MelodicError::Numerical("design is singular".into()))?;
    let step_matrix = inv * design.transpose() * 4.0;
    let yv = DVector::from_iterator(n, y.iter().map(|&v| f64::from(v)));
    let mut beta = DVector::zeros(d);
    let cap = 200_000;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cap {
        iterations += 1;
        let eta = design * &beta;
        let resid = DVector::from_fn(n, |i, _| yv[i] - 1.0 / (1.0 + (-eta[i]).exp()));
        let delta = &step_matrix * resid;
        beta += &delta;
        if delta.amax() <= 1e-12 * (1.0 + beta.amax()) {
            converged = true;
            break;
        }
    }
    let eta = design * &beta;
    let deviance = (0..n)
        .map(|i| {
            if y[i] == 1 {
                two_log1pexp(-eta[i])
            } else {
                two_log1pexp(eta[i])
            }
        })
        .sum();
    Ok(ReferenceLogistic {
        coefficients: beta.iter().copied().collect(),
        deviance,
        iterations,
        separated: !converged || beta.amax() > 1e3,
    })
}

/// True when some response is (quasi-)separated by the predictors, so that
/// its maximum-likelihood estimate does not exist.
pub fn has_separated_response(dataset: &Dataset) -> Result<bool> {
    let design = crate::selection::with_intercept(dataset.x());
    for r in 0..dataset.n_responses() {
        let y: Vec<u8> = dataset.y().column(r).iter().copied().collect();
        if reference_logistic(&design, &y)?.separated {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selection::{fit_univariate_logistic, null_deviance, with_intercept};
    use approx::assert_abs_diff_eq;

    #[test]
    fn synthetic_is_seed_deterministic() {
        let spec = SyntheticSpec::new(60, 3, 4, 2, 1.0, 11);
        let (a, pa) = generate_synthetic(&spec).unwrap();
        let (b, pb) = generate_synthetic(&spec).unwrap();
        assert_eq!(a.x(), b.x());
        assert_eq!(a.y(), b.y());
        assert_eq!(pa, pb);
        let (c, _) = generate_synthetic(&SyntheticSpec { seed: 12, ..spec }).unwrap();
        assert_ne!(a.y(), c.y());
    }

    #[test]
    fn synthetic_weights_are_identified() {
        let spec = SyntheticSpec::new(200, 5, 4, 2, 1.0, 3);
        let (ds, params) = generate_synthetic(&spec).unwrap();
        let u = ds.x() * &params.b;
        let gram = u.transpose() * &u / ds.n() as f64;
        assert!((gram - DMatrix::identity(2, 2)).amax() < 1e-10);
        ds.check_invariants().unwrap();
    }

    #[test]
    fn null_synthetic_is_balanced() {
        let spec = SyntheticSpec::new(4000, 2, 3, 1, 0.0, 5);
        let (ds, _) = generate_synthetic(&spec).unwrap();
        let sigma = (0.25f64 / 4000.0).sqrt();
        for r in 0..3 {
            let freq = ds.y().column(r).iter().map(|&v| f64::from(v)).sum::<f64>() / 4000.0;
            assert!((freq - 0.5).abs() < 3.0 * sigma, "response {r}: {freq}");
        }
    }

    #[test]
    fn prevalence_targets_are_reached() {
        let mut spec = SyntheticSpec::new(4000, 2, 2, 1, 0.3, 9);
        spec.prevalence = vec![0.2, 0.7];
        let (ds, _) = generate_synthetic(&spec).unwrap();
        let f0 = ds.y().column(0).iter().map(|&v| f64::from(v)).sum::<f64>() / 4000.0;
        let f1 = ds.y().column(1).iter().map(|&v| f64::from(v)).sum::<f64>() / 4000.0;
        assert!((f0 - 0.2).abs() < 0.05, "{f0}");
        assert!((f1 - 0.7).abs() < 0.05, "{f1}");
    }

    #[test]
    fn bad_specs_are_rejected() {
        assert!(generate_synthetic(&SyntheticSpec::new(10, 2, 2, 3, 1.0, 0)).is_err());
        let mut spec = SyntheticSpec::new(10, 2, 2, 1, 1.0, 0);
        spec.prevalence = vec![0.5];
        assert!(generate_synthetic(&spec).is_err());
    }

    #[test]
    fn random_assignment_covers_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let d = random_assignment(5, 3, &mut rng).unwrap();
            for m in 0..3 {
                assert!(!d.responses_on(m).is_empty());
            }
            for r in 0..5 {
                assert!(!d.dimensions_of(r).is_empty());
            }
        }
    }

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let f = |v: &[f64]| (v[0] - 1.0).powi(2) + 10.0 * (v[1] + 2.0).powi(2);
        let (x, fx) = nelder_mead(&f, &[0.0, 0.0], 0.5, 10_000);
        assert!(fx < 1e-12);
        assert_abs_diff_eq!(x[0], 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(x[1], -2.0, epsilon = 1e-6);
    }

    fn uninformative() -> Dataset {
        // Each predictor value appears once with each outcome.
        let xs = [-2.0, -1.0, 0.0, 1.0, 2.0, -1.5, 1.5, 0.5, -0.5, 0.25];
        let n = 2 * xs.len();
        let x = DMatrix::from_fn(n, 1, |i, _| xs[i / 2]);
        let y = DMatrix::from_fn(n, 2, |i, r| u8::from((i + r / 2) % 2 == 0));
        Dataset::from_model_scale(x, y, DatasetMeta::identity(1, 2)).unwrap()
    }

    #[test]
    fn brute_force_on_uninformative_data_gives_null_deviance() {
        let ds = uninformative();
        let null: f64 = (0..2)
            .map(|r| null_deviance(&ds.y().column(r).iter().copied().collect::<Vec<_>>()))
            .sum();
        let bf = brute_force_fit(&ds, 1, 0).unwrap();
        assert!((bf.deviance - null).abs() < 1e-2, "{} vs {null}", bf.deviance);
    }

    #[test]
    fn brute_force_rejects_large_instances() {
        let (ds, _) = generate_synthetic(&SyntheticSpec::new(60, 2, 2, 1, 1.0, 0)).unwrap();
        assert!(matches!(
            brute_force_fit(&ds, 1, 0),
            Err(MelodicError::Unsupported(_))
        ));
        let (ds, _) = generate_synthetic(&SyntheticSpec::new(30, 2, 2, 1, 1.0, 0)).unwrap();
        assert!(brute_force_fit(&ds, 2, 0).is_err());
    }

    #[test]
    fn brute_force_is_stable_across_seeds() {
        let (ds, _) = generate_synthetic(&SyntheticSpec::new(40, 2, 3, 1, 0.8, 4)).unwrap();
        let a = brute_force_fit(&ds, 1, 1).unwrap().deviance;
        let b = brute_force_fit(&ds, 1, 2).unwrap().deviance;
        assert!((a - b).abs() < 1e-3, "{a} vs {b}");
    }

    #[test]
    fn reference_logistic_intercept_only() {
        let design = DMatrix::from_element(10, 1, 1.0);
        let y: Vec<u8> = (0..10).map(|i| u8::from(i < 5)).collect();
        let fit = reference_logistic(&design, &y).unwrap();
        assert_abs_diff_eq!(fit.deviance, 20.0 * std::f64::consts::LN_2, epsilon = 1e-10);
        let y: Vec<u8> = (0..10).map(|i| u8::from(i < 8)).collect();
        let fit = reference_logistic(&design, &y).unwrap();
        assert_abs_diff_eq!(fit.deviance, 10.008048470763757, epsilon = 1e-9);
        assert!(!fit.separated);
    }

    #[test]
    fn reference_logistic_flags_separation() {
        let design = with_intercept(&DMatrix::from_row_slice(2, 1, &[-1.0, 1.0]));
        let fit = reference_logistic(&design, &[0, 1]).unwrap();
        assert!(fit.separated);
        assert!(fit.deviance < 1e-3, "{}", fit.deviance);
    }

    #[test]
    fn separated_datasets_are_detected() {
        let x = DMatrix::from_row_slice(6, 1, &[-3.0, -2.0, -1.0, 1.0, 2.0, 3.0]);
        let y = DMatrix::from_row_slice(6, 1, &[0u8, 0, 0, 1, 1, 1]);
        let ds = Dataset::from_model_scale(x, y, DatasetMeta::identity(1, 1)).unwrap();
        assert!(has_separated_response(&ds).unwrap());
        assert!(!has_separated_response(&uninformative()).unwrap());
    }

    #[test]
    fn reference_logistic_agrees_with_irls() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..50 {
            let n = rng.random_range(40..120);
            let p = rng.random_range(1..4);
            let x = normal_matrix(&mut rng, n, p);
            let beta: Vec<f64> = (0..=p)
                .map(|_| 0.7 * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let design = with_intercept(&x);
            let y: Vec<u8> = (0..n)
                .map(|i| {
                    let eta: f64 = (0..=p).map(|j| design[(i, j)] * beta[j]).sum();
                    u8::from(rng.random::<f64>() < 1.0 / (1.0 + (-eta).exp()))
                })
                .collect();
            let ones = y.iter().filter(|&&v| v == 1).count();
            if ones == 0 || ones == n {
                continue;
            }
            let a = reference_logistic(&design, &y).unwrap();
            let b = fit_univariate_logistic(&design, &y).unwrap();
            if a.separated || b.separated {
                continue;
            }
            assert!(
                (a.deviance - b.deviance).abs() < 1e-6,
                "{} vs {}",
                a.deviance,
                b.deviance
            );
        }
    }
}
