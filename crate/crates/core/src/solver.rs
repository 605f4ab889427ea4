//! Majorization-minimization fitting of unconstrained and dimension-constrained models.
//!
//! Each iteration replaces the deviance by a least-squares majorizer around the
//! current linear predictors `Θ̃`,
//!
//! ```text
//! Z = Θ̃ + (G − Π̃) / (2c),    c = 1/4
//! ```
//!
//! centres every response pair, and solves the resulting reduced-rank
//! least-squares problem in closed form: the intercept vector `a` from column
//! means, `(B, K)` from a truncated SVD of `R_x⁻¹XᵀZ₂` where `XᵀX = R_xR_xᵀ`,
//! and `L` as the minimal-norm point with `k_rᵀl_r = a_r`.
//!
//! The constrained variant updates one dimension at a time, restricting each
//! rank-one update to the responses that pertain to that dimension.

use nalgebra::{DMatrix, DVector, SVD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{MelodicError, Result};
use crate::model::{
    deviance_from_theta, linear_predictors, pair_probabilities, softmax_pair, softplus, Dataset,
    DimensionAssignment, ModelParams, DEGENERATE_DISCRIMINATION,
};

/// Curvature bound of the per-observation negative log-likelihood.
pub const MAJORIZATION_CURVATURE: f64 = 0.25;

/// Deviances below this count as a perfect fit and stop the iterations.
const DEVIANCE_FLOOR: f64 = 1e-12;

/// `‖K‖_∞` above this marks the fit as possibly quasi-separated.
pub const SEPARATION_THRESHOLD: f64 = 1e3;

/// How locations are recovered from `a_r = k_rᵀl_r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LocationRule {
    /// `l_r = a_r k_r / ‖k_r‖²`, the point of the even-odds hyperplane closest to the origin.
    #[default]
    MinimalNorm,
    /// `l_rm = a_r / Σ_{m∈S_r} k_rm` on every dimension of `S_r`.
    SumNormalized,
}

#[derive(Debug, Clone)]
pub struct FitConfig {
    pub dimensions: usize,
    /// Relative deviance decrease at which iterations stop.
    pub tol: f64,
    pub max_iter: usize,
    /// Selects the constrained algorithm when present.
    pub assignment: Option<DimensionAssignment>,
    /// Only used to jitter restarts; a single fit is deterministic.
    pub seed: u64,
    pub record_trace: bool,
    /// Additional jittered starts; the lowest deviance wins.
    pub restarts: usize,
    /// Curvature constant of the majorizer. Anything other than
    /// [`MAJORIZATION_CURVATURE`] exists to exercise the validation harness.
    pub curvature: f64,
    pub location_rule: LocationRule,
}

impl FitConfig {
    pub fn new(dimensions: usize) -> Self {
        FitConfig {
            dimensions,
            tol: 1e-8,
            max_iter: 65536,
            assignment: None,
            seed: 0,
            record_trace: true,
            restarts: 0,
            curvature: MAJORIZATION_CURVATURE,
            location_rule: LocationRule::MinimalNorm,
        }
    }

    pub fn constrained(assignment: DimensionAssignment) -> Self {
        let mut cfg = FitConfig::new(assignment.n_dimensions());
        cfg.assignment = Some(assignment);
        cfg
    }

    pub fn validate(&self, p: usize, r: usize) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(MelodicError::config("tol", "must be positive"));
        }
        if self.max_iter < 1 {
            return Err(MelodicError::config("max_iter", "must be at least 1"));
        }
        if self.dimensions < 1 || self.dimensions > p.min(r) {
            return Err(MelodicError::config(
                "dimensions",
                format!("must lie in 1..={} (P = {p}, R = {r})", p.min(r)),
            ));
        }
        if !(self.curvature > 0.0) {
            return Err(MelodicError::config("curvature", "must be positive"));
        }
        if let Some(d) = &self.assignment {
            if d.n_responses() != r || d.n_dimensions() != self.dimensions {
                return Err(MelodicError::config(
                    "constraints",
                    format!(
                        "pattern is {}×{}, expected {r}×{}",
                        d.n_responses(),
                        d.n_dimensions(),
                        self.dimensions
                    ),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub params: ModelParams,
    pub deviance: f64,
    /// Deviance of the starting values followed by one entry per iteration.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Responses whose category points coincide at the solution.
    pub degenerate_responses: Vec<usize>,
    pub quasi_separation: bool,
}

/// Lower-triangular `R_x` with `R_x R_xᵀ = XᵀX`.
///
/// Fails on the first column whose pivot drops below `1e-12 · trace(XᵀX)`.
pub fn cholesky_factor(xtx: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let p = xtx.nrows();
    if xtx.ncols() != p {
        return Err(MelodicError::DimensionMismatch("XᵀX must be square".into()));
    }
    let floor = 1e-12 * xtx.trace().abs();
    let mut l = DMatrix::<f64>::zeros(p, p);
    for j in 0..p {
        let mut d = xtx[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > floor) {
            return Err(MelodicError::SingularDesign {
                column: j,
                name: String::new(),
            });
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..p {
            let mut s = xtx[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// The design matrix together with its whitening factor.
#[derive(Debug, Clone)]
pub struct WhitenedDesign {
    rx: DMatrix<f64>,
    /// `R_x⁻¹Xᵀ`, `P × n`.
    whitener: DMatrix<f64>,
    n: usize,
}

impl WhitenedDesign {
    pub fn new(x: &DMatrix<f64>) -> Result<Self> {
        let rx = cholesky_factor(&(x.transpose() * x))?;
        let whitener = rx
            .solve_lower_triangular(&x.transpose())
            .ok_or_else(|| MelodicError::Numerical("triangular solve failed".into()))?;
        Ok(WhitenedDesign {
            rx,
            whitener,
            n: x.nrows(),
        })
    }

    pub fn factor(&self) -> &DMatrix<f64> {
        &self.rx
    }

    /// `R_x⁻¹XᵀY`
    pub fn whiten(&self, y: &DMatrix<f64>) -> DMatrix<f64> {
        &self.whitener * y
    }

    /// `√n R_x⁻ᵀ P`, which makes `(1/n) BᵀXᵀXB = PᵀP`.
    fn weights(&self, left: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let b = self
            .rx
            .tr_solve_lower_triangular(left)
            .ok_or_else(|| MelodicError::Numerical("triangular solve failed".into()))?;
        Ok(b * (self.n as f64).sqrt())
    }
}

fn truncated_svd(a: DMatrix<f64>, rank: usize) -> Result<(DMatrix<f64>, DVector<f64>, DMatrix<f64>)> {
    let svd = SVD::try_new(a, true, true, f64::EPSILON, 0)
        .ok_or_else(|| MelodicError::Numerical("SVD did not converge".into()))?;
    let u = svd
        .u
        .ok_or_else(|| MelodicError::Numerical("SVD without U".into()))?;
    let vt = svd
        .v_t
        .ok_or_else(|| MelodicError::Numerical("SVD without Vᵀ".into()))?;
    if rank > svd.singular_values.len() {
        return Err(MelodicError::Numerical(format!(
            "requested rank {rank} exceeds the {} available singular values",
            svd.singular_values.len()
        )));
    }
    Ok((
        u.columns(0, rank).into_owned(),
        svd.singular_values.rows(0, rank).into_owned(),
        vt.rows(0, rank).transpose(),
    ))
}

/// Quantities of one majorization step.
#[derive(Debug, Clone)]
pub struct MajorizationState {
    pub theta: DMatrix<f64>,
    pub pi: DMatrix<f64>,
    /// `Θ̃ + (G − Π̃)/(2c)`
    pub z: DMatrix<f64>,
    pub a: DVector<f64>,
}

impl MajorizationState {
    pub fn at(g: &DMatrix<f64>, theta: DMatrix<f64>, curvature: f64) -> Self {
        let pi = pair_probabilities(&theta);
        let z = build_working_matrix(&theta, &pi, g, curvature);
        let a = update_a(&contract_pairs(&z));
        MajorizationState { theta, pi, z, a }
    }

    /// `Z₂ = ½ZJA_k + 1aᵀ`
    pub fn target(&self) -> DMatrix<f64> {
        let mut z2 = contract_pairs(&self.z);
        for (mut col, a) in z2.column_iter_mut().zip(self.a.iter()) {
            col.add_scalar_mut(*a);
        }
        z2
    }
}

/// `Z = Θ̃ + (G − Π̃)/(2c)`.
pub fn build_working_matrix(
    theta: &DMatrix<f64>,
    pi: &DMatrix<f64>,
    g: &DMatrix<f64>,
    curvature: f64,
) -> DMatrix<f64> {
    theta + (g - pi) / (2.0 * curvature)
}

/// `½ZJA_k`: entry `(i, r)` is `½(z_{i,2r} − z_{i,2r+1})`.
pub fn contract_pairs(z: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(z.nrows(), z.ncols() / 2, |i, r| {
        0.5 * (z[(i, 2 * r)] - z[(i, 2 * r + 1)])
    })
}

/// `a = −Z₁ᵀ1/n`.
pub fn update_a(z1: &DMatrix<f64>) -> DVector<f64> {
    let n = z1.nrows() as f64;
    DVector::from_iterator(z1.ncols(), z1.column_iter().map(|c| -c.sum() / n))
}

/// Rank-`m` update of `(B, K)` minimizing `‖Z₂ − XBKᵀ‖²` under `(1/n)BᵀXᵀXB = I`.
pub fn gsvd_update(
    design: &WhitenedDesign,
    z2: &DMatrix<f64>,
    m: usize,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (p_m, phi, q_m) = truncated_svd(design.whiten(z2), m)?;
    let b = design.weights(&p_m)?;
    let scale = 1.0 / (design.n as f64).sqrt();
    let k = DMatrix::from_fn(q_m.nrows(), m, |r, j| q_m[(r, j)] * phi[j] * scale);
    Ok((b, k))
}

/// Locations satisfying `k_rᵀl_r = a_r`, restricted to the dimensions in the
/// assignment. Also returns the responses whose discrimination vanished; their
/// locations are set to zero.
pub fn update_locations(
    a: &DVector<f64>,
    k: &DMatrix<f64>,
    assignment: Option<&DimensionAssignment>,
    rule: LocationRule,
) -> (DMatrix<f64>, Vec<usize>) {
    let (r, m) = k.shape();
    let mut l = DMatrix::zeros(r, m);
    let mut degenerate = Vec::new();
    for resp in 0..r {
        let allowed = |j: usize| assignment.is_none_or(|d| d.pertains(resp, j));
        let norm2: f64 = (0..m).filter(|&j| allowed(j)).map(|j| k[(resp, j)].powi(2)).sum();
        if norm2 < DEGENERATE_DISCRIMINATION {
            degenerate.push(resp);
            continue;
        }
        match rule {
            LocationRule::MinimalNorm => {
                for j in (0..m).filter(|&j| allowed(j)) {
                    l[(resp, j)] = a[resp] * k[(resp, j)] / norm2;
                }
            }
            LocationRule::SumNormalized => {
                let sum: f64 = (0..m).filter(|&j| allowed(j)).map(|j| k[(resp, j)]).sum();
                if sum.abs() < DEGENERATE_DISCRIMINATION.sqrt() {
                    degenerate.push(resp);
                    continue;
                }
                for j in (0..m).filter(|&j| allowed(j)) {
                    l[(resp, j)] = a[resp] / sum;
                }
            }
        }
    }
    (l, degenerate)
}

/// Exact per-observation deviance `f(θ) = −2 Σ_c g_c log π_c(θ)` and its
/// quadratic majorizer around `θ̃`.
pub fn majorization_gap(theta: [f64; 2], theta_tilde: [f64; 2], g: [f64; 2]) -> (f64, f64) {
    majorization_gap_with(MAJORIZATION_CURVATURE, theta, theta_tilde, g)
}

/// As [`majorization_gap`] with an explicit curvature constant `c` for the
/// negative log-likelihood; on the deviance scale the majorizer is
/// `f(θ̃) − 2(θ − θ̃)ᵀ(g − π̃) + 2c‖θ − θ̃‖²`.
pub fn majorization_gap_with(
    curvature: f64,
    theta: [f64; 2],
    theta_tilde: [f64; 2],
    g: [f64; 2],
) -> (f64, f64) {
    let nll = |t: [f64; 2]| g[0] * softplus(t[1] - t[0]) + g[1] * softplus(t[0] - t[1]);
    let f = 2.0 * nll(theta);
    let (p0, p1) = softmax_pair(theta_tilde[0], theta_tilde[1]);
    let d = [theta[0] - theta_tilde[0], theta[1] - theta_tilde[1]];
    let linear = -(d[0] * (g[0] - p0) + d[1] * (g[1] - p1));
    let quad = curvature * (d[0] * d[0] + d[1] * d[1]);
    (f, 2.0 * (nll(theta_tilde) + linear + quad))
}

fn prepare(dataset: &Dataset, config: &FitConfig) -> Result<WhitenedDesign> {
    config.validate(dataset.n_predictors(), dataset.n_responses())?;
    if let Some(&r) = dataset.single_class_responses().first() {
        return Err(MelodicError::SingleClassResponse {
            name: dataset.meta().response_names[r].clone(),
        });
    }
    WhitenedDesign::new(dataset.x()).map_err(|e| match e {
        MelodicError::SingularDesign { column, .. } => MelodicError::SingularDesign {
            column,
            name: dataset.meta().predictor_names[column].clone(),
        },
        other => other,
    })
}

/// Starting values from the SVD of `R_x⁻¹XᵀG`.
pub fn initial_params(
    dataset: &Dataset,
    design: &WhitenedDesign,
    m: usize,
    assignment: Option<&DimensionAssignment>,
) -> Result<ModelParams> {
    let (p_m, phi, q_m) = truncated_svd(design.whiten(dataset.g()), m)?;
    let b = design.weights(&p_m)?;
    let scale = 1.0 / (dataset.n() as f64).sqrt();
    let v = DMatrix::from_fn(q_m.nrows(), m, |c, j| q_m[(c, j)] * phi[j] * scale);
    let (mut k, mut l) = crate::model::decompose_category_coordinates(&v)?;
    if let Some(d) = assignment {
        for r in 0..k.nrows() {
            for j in 0..m {
                if !d.pertains(r, j) {
                    k[(r, j)] = 0.0;
                    l[(r, j)] = 0.0;
                }
            }
        }
    }
    ModelParams::new(b, k, l)
}

fn constrained_step(
    dataset: &Dataset,
    design: &WhitenedDesign,
    assignment: &DimensionAssignment,
    z2: &DMatrix<f64>,
    params: &ModelParams,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let m = params.dimensions();
    let n = dataset.n();
    let mut b = params.b.clone();
    let mut k = params.k.clone();
    let mut xb = dataset.x() * &b;
    for s in 0..m {
        let cols = assignment.responses_on(s);
        let zs = DMatrix::from_fn(n, cols.len(), |i, c| {
            let r = cols[c];
            let others: f64 = (0..m).filter(|&j| j != s).map(|j| xb[(i, j)] * k[(r, j)]).sum();
            z2[(i, r)] - others
        });
        let (p1, phi, q1) = truncated_svd(design.whiten(&zs), 1)?;
        let bs = design.weights(&p1)?;
        b.set_column(s, &bs.column(0));
        let scale = phi[0] / (n as f64).sqrt();
        for (c, &r) in cols.iter().enumerate() {
            k[(r, s)] = q1[(c, 0)] * scale;
        }
        xb.set_column(s, &(dataset.x() * bs).column(0));
    }
    Ok((b, k))
}

/// Run the MM iterations from `start`.
pub fn fit_from(
    dataset: &Dataset,
    design: &WhitenedDesign,
    config: &FitConfig,
    start: ModelParams,
) -> Result<FitResult> {
    let assignment = config.assignment.as_ref();
    let m = config.dimensions;
    let mut params = start;
    let mut theta = linear_predictors(dataset.x(), &params);
    let mut dev = deviance_from_theta(dataset.g(), &theta);
    let mut trace = vec![dev];
    let mut converged = dev < DEVIANCE_FLOOR;
    let mut iterations = 0;
    let mut degenerate = Vec::new();

    while !converged && iterations < config.max_iter {
        iterations += 1;
        let state = MajorizationState::at(dataset.g(), theta, config.curvature);
        let z2 = state.target();
        let (b, k) = match assignment {
            None => gsvd_update(design, &z2, m)?,
            Some(d) => constrained_step(dataset, design, d, &z2, &params)?,
        };
        let (l, degen) = update_locations(&state.a, &k, assignment, config.location_rule);
        degenerate = degen;
        params = ModelParams::new(b, k, l)?;
        theta = linear_predictors(dataset.x(), &params);
        let next = deviance_from_theta(dataset.g(), &theta);
        if !next.is_finite() {
            return Err(MelodicError::Numerical(format!(
                "deviance became {next} at iteration {iterations}"
            )));
        }
        trace.push(next);
        let rel = (dev - next) / next;
        dev = next;
        if next < DEVIANCE_FLOOR || rel <= config.tol {
            converged = true;
        }
    }

    params.canonicalize_signs();
    if iterations == 0 {
        let (_, degen) = update_locations(
            &DVector::zeros(params.n_responses()),
            &params.k,
            assignment,
            config.location_rule,
        );
        degenerate = degen;
    }
    let quasi_separation = params.k.amax() > SEPARATION_THRESHOLD;
    if !config.record_trace {
        trace = vec![dev];
    }
    Ok(FitResult {
        params,
        deviance: dev,
        trace,
        iterations,
        converged,
        degenerate_responses: degenerate,
        quasi_separation,
    })
}

/// Algorithm for the unconstrained model.
pub fn fit_unconstrained(dataset: &Dataset, config: &FitConfig) -> Result<FitResult> {
    if config.assignment.is_some() {
        return Err(MelodicError::config(
            "constraints",
            "unconstrained fit requested with a dimension assignment",
        ));
    }
    fit_with_restarts(dataset, config)
}

/// Algorithm for the dimension-constrained model.
pub fn fit_constrained(dataset: &Dataset, config: &FitConfig) -> Result<FitResult> {
    if config.assignment.is_none() {
        return Err(MelodicError::config(
            "constraints",
            "constrained fit requested without a dimension assignment",
        ));
    }
    fit_with_restarts(dataset, config)
}

/// Fit with the algorithm selected by the presence of an assignment.
pub fn fit(dataset: &Dataset, config: &FitConfig) -> Result<FitResult> {
    fit_with_restarts(dataset, config)
}

fn random_rotation(m: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(m, m, |_, _| rng.sample::<f64, _>(StandardNormal));
    a.qr().q()
}

fn fit_with_restarts(dataset: &Dataset, config: &FitConfig) -> Result<FitResult> {
    let design = prepare(dataset, config)?;
    let assignment = config.assignment.as_ref();
    let start = initial_params(dataset, &design, config.dimensions, assignment)?;
    let mut best = fit_from(dataset, &design, config, start.clone())?;
    if config.restarts == 0 {
        return Ok(best);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let spread = (start.k.norm() + start.l.norm()) / ((start.k.len() * 2) as f64).sqrt() + 0.1;
    for _ in 0..config.restarts {
        let m = config.dimensions;
        let b = if assignment.is_some() {
            start.b.clone()
        } else {
            &start.b * random_rotation(m, &mut rng)
        };
        let mut jitter = |x: &DMatrix<f64>| x.map(|v| v + spread * rng.sample::<f64, _>(StandardNormal));
        let mut k = jitter(&start.k);
        let mut l = jitter(&start.l);
        if let Some(d) = assignment {
            for r in 0..k.nrows() {
                for j in 0..m {
                    if !d.pertains(r, j) {
                        k[(r, j)] = 0.0;
                        l[(r, j)] = 0.0;
                    }
                }
            }
        }
        let candidate = fit_from(dataset, &design, config, ModelParams::new(b, k, l)?)?;
        if candidate.deviance < best.deviance {
            best = candidate;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{deviance, DatasetMeta, Preprocessing};
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
        DMatrix::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal))
    }

    fn random_dataset(seed: u64, n: usize, p: usize, r: usize) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_matrix(&mut rng, n, p);
        let w = random_matrix(&mut rng, p, r);
        let eta = &x * w;
        let y = DMatrix::from_fn(n, r, |i, j| {
            let pr = 1.0 / (1.0 + (-eta[(i, j)]).exp());
            u8::from(rng.random::<f64>() < pr)
        });
        Dataset::new(x, y, Preprocessing::default()).unwrap()
    }

    #[test]
    fn cholesky_examples() {
        assert_eq!(
            cholesky_factor(&DMatrix::identity(3, 3)).unwrap(),
            DMatrix::identity(3, 3)
        );
        let four = DMatrix::identity(2, 2) * 4.0;
        assert_eq!(cholesky_factor(&four).unwrap(), DMatrix::identity(2, 2) * 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_matrix(&mut rng, 40, 5);
        let xtx = x.transpose() * &x;
        let rx = cholesky_factor(&xtx).unwrap();
        assert!((&rx * rx.transpose() - &xtx).norm() / xtx.norm() < 1e-10);
        assert!(rx.upper_triangle().iter().enumerate().all(|(idx, v)| {
            let (i, j) = (idx % 5, idx / 5);
            i >= j || *v == 0.0
        }));
    }

    #[test]
    fn cholesky_names_dependent_column() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut x = random_matrix(&mut rng, 20, 3);
        let dup = x.column(0) * 2.0 - x.column(1);
        x.set_column(2, &dup);
        match cholesky_factor(&(x.transpose() * &x)) {
            Err(MelodicError::SingularDesign { column, .. }) => assert_eq!(column, 2),
            other => panic!("expected singular design, got {other:?}"),
        }
    }

    #[test]
    fn working_matrix_contraction() {
        // equal paired columns vanish
        let z = DMatrix::from_row_slice(2, 4, &[1.0, 1.0, -3.0, -3.0, 0.5, 0.5, 2.0, 2.0]);
        assert!(contract_pairs(&z).iter().all(|&v| v == 0.0));
        // Π̃ = ½, Θ̃ = 0 with c = ¼ gives Z = 2(G − ½) and Z₁ = ±1
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let theta = DMatrix::zeros(2, 2);
        let pi = DMatrix::from_element(2, 2, 0.5);
        let zz = build_working_matrix(&theta, &pi, &g, MAJORIZATION_CURVATURE);
        let z1 = contract_pairs(&zz);
        assert_eq!(z1[(0, 0)], 1.0);
        assert_eq!(z1[(1, 0)], -1.0);
        // with Z = G − ½ directly
        let z1 = contract_pairs(&g.map(|v| v - 0.5));
        assert_eq!(z1[(0, 0)], 0.5);
        assert_eq!(z1[(1, 0)], -0.5);
    }

    #[test]
    fn contraction_matches_block_algebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (n, r) = (7, 3);
        let z = random_matrix(&mut rng, n, 2 * r);
        // J: blocks I₂ − ½11ᵀ; A_k = I_R ⊗ [1, −1]ᵀ
        let mut j = DMatrix::zeros(2 * r, 2 * r);
        let mut ak = DMatrix::zeros(2 * r, r);
        for b in 0..r {
            j[(2 * b, 2 * b)] = 0.5;
            j[(2 * b + 1, 2 * b + 1)] = 0.5;
            j[(2 * b, 2 * b + 1)] = -0.5;
            j[(2 * b + 1, 2 * b)] = -0.5;
            ak[(2 * b, b)] = 1.0;
            ak[(2 * b + 1, b)] = -1.0;
        }
        let expected = &z * j * ak * 0.5;
        assert!((contract_pairs(&z) - expected).amax() < 1e-14);
    }

    #[test]
    fn update_a_examples() {
        assert!(update_a(&DMatrix::zeros(4, 2)).iter().all(|&v| v == 0.0));
        assert_eq!(update_a(&DMatrix::from_element(9, 1, 1.0))[0], -1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let z1 = random_matrix(&mut rng, 13, 4);
        let a = update_a(&z1);
        for r in 0..4 {
            let mean: f64 = (0..13).map(|i| z1[(i, r)]).sum::<f64>() / 13.0;
            assert!((a[r] + mean).abs() < 1e-14);
        }
    }

    #[test]
    fn gsvd_recovers_exact_low_rank_target() {
        let ds = random_dataset(21, 60, 4, 3);
        let design = WhitenedDesign::new(ds.x()).unwrap();
        // B̃ with (1/n) B̃ᵀXᵀXB̃ = I from the whitening factor
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let q = random_matrix(&mut rng, 4, 2).qr().q();
        let b_true = design.weights(&q).unwrap();
        let k_true = DMatrix::from_row_slice(3, 2, &[2.0, 0.1, -1.0, 0.7, 0.5, -0.3]);
        let z2 = ds.x() * &b_true * k_true.transpose();
        let (b, k) = gsvd_update(&design, &z2, 2).unwrap();
        let n = ds.n() as f64;
        let ident = b.transpose() * ds.x().transpose() * ds.x() * &b / n;
        assert!((ident - DMatrix::identity(2, 2)).amax() < 1e-10);
        assert!((&b * k.transpose() - &b_true * k_true.transpose()).amax() < 1e-8);

        let (_, k0) = gsvd_update(&design, &DMatrix::zeros(60, 3), 2).unwrap();
        assert!(k0.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gsvd_full_rank_matches_projection() {
        let ds = random_dataset(8, 50, 3, 4);
        let design = WhitenedDesign::new(ds.x()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let z2 = random_matrix(&mut rng, 50, 4);
        let (b, k) = gsvd_update(&design, &z2, 3).unwrap();
        let x = ds.x();
        let xtx = x.transpose() * x;
        let proj = x * xtx.try_inverse().unwrap() * x.transpose() * &z2;
        assert!((proj - x * b * k.transpose()).norm() < 1e-8);
    }

    #[test]
    fn location_update_examples() {
        let k = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 1.0, 0.5, -0.2]);
        let a = DVector::from_vec(vec![3.0, 2.0, 0.0]);
        let (l, degenerate) = update_locations(&a, &k, None, LocationRule::MinimalNorm);
        assert!(degenerate.is_empty());
        assert_eq!(l.row(0).iter().copied().collect::<Vec<_>>(), vec![3.0, 0.0]);
        assert_eq!(l.row(1).iter().copied().collect::<Vec<_>>(), vec![1.0, 1.0]);
        assert!(l.row(2).iter().all(|&v| v == 0.0));
        // minimal norm among l with kᵀl = a: scan the solution line l(t) = l* + t·(1, −1)
        let base = l.row(1).transpose();
        let along = DVector::from_vec(vec![1.0, -1.0]);
        let best = (-2000..=2000)
            .map(|i| {
                let cand = &base + &along * (i as f64 * 1e-3);
                assert!((k.row(1) * &cand)[0] - 2.0 < 1e-12);
                (cand.norm(), i)
            })
            .min_by(|x, y| x.0.partial_cmp(&y.0).unwrap())
            .unwrap();
        assert_eq!(best.1, 0);

        let zero_k = DMatrix::zeros(1, 2);
        let (l, degenerate) = update_locations(
            &DVector::from_vec(vec![1.0]),
            &zero_k,
            None,
            LocationRule::MinimalNorm,
        );
        assert_eq!(degenerate, vec![0]);
        assert!(l.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn location_rules_agree_on_single_dimension_responses() {
        let d = DimensionAssignment::from_rows(&[vec![1, 0], vec![0, 1], vec![1, 1]]).unwrap();
        let k = DMatrix::from_row_slice(3, 2, &[0.8, 0.0, 0.0, -1.5, 0.6, 0.9]);
        let a = DVector::from_vec(vec![0.4, -1.0, 2.0]);
        let (l1, _) = update_locations(&a, &k, Some(&d), LocationRule::MinimalNorm);
        let (l2, _) = update_locations(&a, &k, Some(&d), LocationRule::SumNormalized);
        assert_eq!(l1.row(0), l2.row(0));
        assert_eq!(l1.row(1), l2.row(1));
        assert!(l1.row(2) != l2.row(2));
        for l in [&l1, &l2] {
            for r in 0..3 {
                assert_abs_diff_eq!((k.row(r) * l.row(r).transpose())[0], a[r], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn majorizer_touches_and_bounds() {
        let (f, g) = majorization_gap([0.3, -1.1], [0.3, -1.1], [0.0, 1.0]);
        assert!((g - f).abs() < 1e-12);
        let (f, g) = majorization_gap([1.0, -1.0], [0.0, 0.0], [1.0, 0.0]);
        let f_direct = 2.0 * (1.0 + (-2.0f64).exp()).ln();
        assert_abs_diff_eq!(f, f_direct, epsilon = 1e-14);
        // f(θ̃) = 2 ln 2; deviance-scale gradient −2(g − π̃) = (−1, 1); curvature 2c = ½
        // (θ − θ̃)·∇ = 1·(−1) + (−1)·1
        let g_direct = 2.0 * std::f64::consts::LN_2 + (-1.0 - 1.0) + 0.5 * 2.0;
        assert_abs_diff_eq!(g, g_direct, epsilon = 1e-14);
        assert!(g >= f);
    }

    #[test]
    fn deviance_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let g = DMatrix::from_row_slice(3, 4, &[1., 0., 0., 1., 0., 1., 0., 1., 1., 0., 1., 0.]);
        let theta = random_matrix(&mut rng, 3, 4);
        let pi = pair_probabilities(&theta);
        let h = 1e-5;
        for idx in 0..theta.len() {
            let mut up = theta.clone();
            let mut dn = theta.clone();
            up[idx] += h;
            dn[idx] -= h;
            let fd = (deviance_from_theta(&g, &up) - deviance_from_theta(&g, &dn)) / (2.0 * h);
            let analytic = -2.0 * (g[idx] - pi[idx]);
            assert!(
                (fd - analytic).abs() <= 1e-6 * analytic.abs().max(1e-3),
                "{fd} vs {analytic}"
            );
        }
    }

    #[test]
    fn unconstrained_fit_descends_and_identifies() {
        let ds = random_dataset(1, 120, 4, 3);
        let res = fit_unconstrained(&ds, &FitConfig::new(2)).unwrap();
        assert!(res.converged);
        for w in res.trace.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-9));
        }
        assert_abs_diff_eq!(
            deviance(&ds, &res.params).unwrap(),
            *res.trace.last().unwrap(),
            epsilon = 1e-10
        );
        let n = ds.n() as f64;
        let ident = res.params.b.transpose() * ds.x().transpose() * ds.x() * &res.params.b / n;
        assert!((ident - DMatrix::identity(2, 2)).amax() < 1e-6);
        assert!(res.params.b.row(0).iter().all(|&v| v >= 0.0));
        let again = fit_unconstrained(&ds, &FitConfig::new(2)).unwrap();
        assert!((again.params.b - &res.params.b).amax() < 1e-6);
    }

    #[test]
    fn constrained_fit_respects_pattern() {
        let ds = random_dataset(2, 150, 4, 3);
        let d = DimensionAssignment::from_rows(&[vec![1, 0], vec![1, 0], vec![0, 1]]).unwrap();
        let res = fit_constrained(&ds, &FitConfig::constrained(d.clone())).unwrap();
        for w in res.trace.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-9));
        }
        for r in 0..3 {
            for m in 0..2 {
                if !d.pertains(r, m) {
                    assert_eq!(res.params.k[(r, m)], 0.0);
                    assert_eq!(res.params.l[(r, m)], 0.0);
                }
            }
        }
        let n = ds.n() as f64;
        for m in 0..2 {
            let xb = ds.x() * res.params.b.column(m);
            assert_abs_diff_eq!(xb.norm_squared() / n, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn fit_rejects_bad_inputs() {
        let ds = random_dataset(3, 30, 2, 2);
        assert!(matches!(
            fit(&ds, &FitConfig::new(3)),
            Err(MelodicError::Config { .. })
        ));
        let y = DMatrix::from_fn(30, 2, |i, j| if j == 0 { 1 } else { (i % 2) as u8 });
        let one_class = Dataset::from_model_scale(ds.x().clone(), y, DatasetMeta::identity(2, 2)).unwrap();
        assert!(matches!(
            fit(&one_class, &FitConfig::new(1)),
            Err(MelodicError::SingleClassResponse { .. })
        ));
        let mut cfg = FitConfig::new(1);
        cfg.max_iter = 1;
        let res = fit(&ds, &cfg).unwrap();
        assert!(!res.converged);
        assert_eq!(res.iterations, 1);
    }

    #[test]
    fn restarts_never_worse() {
        let ds = random_dataset(6, 80, 3, 3);
        let base = fit(&ds, &FitConfig::new(2)).unwrap();
        let mut cfg = FitConfig::new(2);
        cfg.restarts = 3;
        cfg.seed = 7;
        let res = fit(&ds, &cfg).unwrap();
        assert!(res.deviance <= base.deviance);
    }
}
