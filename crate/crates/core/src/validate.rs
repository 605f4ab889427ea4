//! Self-checks run by `melodic validate`: sampled majorization inequality,
//! monotone descent, full-rank equivalence and brute-force arbitration.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::model::DimensionAssignment;
use crate::oracles::{
    brute_force_fit, generate_synthetic, has_separated_response, random_assignment, reference_logistic,
    SyntheticSpec,
};
use crate::selection::with_intercept;
use crate::solver::{fit, majorization_gap_with, FitConfig, MAJORIZATION_CURVATURE};

#[derive(Debug, Clone)]
pub struct ValidateOptions {
    pub seed: u64,
    /// Curvature handed to the solver and the majorizer; only a mutation test changes it.
    pub curvature: f64,
    pub majorization_samples: usize,
    pub descent_instances: usize,
    pub full_rank_instances: usize,
    pub brute_force_instances: usize,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions {
            seed: 0,
            curvature: MAJORIZATION_CURVATURE,
            majorization_samples: 100_000,
            descent_instances: 40,
            full_rank_instances: 4,
            brute_force_instances: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        CheckResult {
            name: name.into(),
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect()
    }

    pub fn render(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let mut out = format!("validation (seed {})\n", self.seed);
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{status}  {:<width$}  {}", c.name, c.detail);
        }
        out
    }
}

/// Sample random `(θ, θ̃, g)` triples and check `g_maj ≥ f` and the touching condition.
pub fn check_majorization(samples: usize, curvature: f64, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let mut worst_touch = 0.0f64;
    for _ in 0..samples {
        let spread = if rng.random::<bool>() { 3.0 } else { 30.0 };
        let mut draw = || spread * (2.0 * rng.random::<f64>() - 1.0);
        let theta = [draw(), draw()];
        let tilde = [draw(), draw()];
        let g = if rng.random::<bool>() {
            [1.0, 0.0]
        } else {
            [0.0, 1.0]
        };
        let (f, g_maj) = majorization_gap_with(curvature, theta, tilde, g);
        worst = worst.min(g_maj - f);
        let (f0, g0) = majorization_gap_with(curvature, tilde, tilde, g);
        worst_touch = worst_touch.max((g0 - f0).abs());
    }
    CheckResult::new(
        "majorization inequality",
        worst >= -1e-12 && worst_touch <= 1e-12,
        format!("{samples} samples, min gap {worst:.3e}, max touch error {worst_touch:.3e}"),
    )
}

/// Random instance sizes in the ranges used by the descent checks.
pub fn random_instance(rng: &mut impl Rng) -> (SyntheticSpec, usize) {
    let n = rng.random_range(20..=200);
    let p = rng.random_range(2..=6);
    let r = rng.random_range(2..=6);
    let m = rng.random_range(1..=3usize.min(p).min(r));
    let scale = rng.random_range(0.2..1.5);
    (SyntheticSpec::new(n, p, r, m, scale, rng.random()), m)
}

/// Largest relative increase between consecutive trace entries.
pub fn worst_ascent(trace: &[f64]) -> f64 {
    trace
        .windows(2)
        .map(|w| (w[1] - w[0]) / w[0].max(f64::MIN_POSITIVE))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Both algorithms must never increase the deviance by more than 1e−9 relative.
pub fn check_descent(instances: usize, curvature: f64, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_d35c);
    let cases: Vec<(SyntheticSpec, usize, DimensionAssignment)> = (0..instances)
        .map(|_| {
            let (spec, m) = random_instance(&mut rng);
            let d = random_assignment(spec.r, m, &mut rng).expect("m ≤ r");
            (spec, m, d)
        })
        .collect();
    let outcomes: Vec<std::result::Result<f64, String>> = cases
        .par_iter()
        .map(|(spec, m, d)| {
            let (ds, _) = generate_synthetic(spec).map_err(|e| e.to_string())?;
            let mut worst = f64::NEG_INFINITY;
            for assignment in [None, Some(d.clone())] {
                let mut cfg = FitConfig::new(*m);
                cfg.assignment = assignment;
                cfg.curvature = curvature;
                cfg.max_iter = 2000;
                let result = fit(&ds, &cfg).map_err(|e| e.to_string())?;
                worst = worst.max(worst_ascent(&result.trace));
            }
            Ok(worst)
        })
        .collect();
    let mut worst = f64::NEG_INFINITY;
    let mut errors = 0;
    for o in &outcomes {
        match o {
            Ok(w) => worst = worst.max(*w),
            Err(_) => errors += 1,
        }
    }
    CheckResult::new(
        "monotone descent",
        errors == 0 && worst <= 1e-9,
        format!(
            "{instances} instances × 2 algorithms, worst relative ascent {worst:.3e}, {errors} failed fits"
        ),
    )
}

/// Sum of per-response logistic deviances from the reference fitter.
pub fn separate_logistic_deviance(ds: &crate::model::Dataset) -> Result<f64> {
    let design = with_intercept(ds.x());
    let mut total = 0.0;
    for r in 0..ds.n_responses() {
        let y: Vec<u8> = ds.y().column(r).iter().copied().collect();
        total += reference_logistic(&design, &y)?.deviance;
    }
    Ok(total)
}

/// Identity assignment with `M = R` reproduces separate logistic regressions.
pub fn check_full_rank(instances: usize, curvature: f64, seed: u64) -> CheckResult {
    let outcomes: Vec<std::result::Result<f64, String>> = (0..instances)
        .into_par_iter()
        .map(|i| {
            let spec = SyntheticSpec::new(200, 4, 3, 3, 0.8, seed.wrapping_add(1000 + i as u64));
            let (ds, _) = generate_synthetic(&spec).map_err(|e| e.to_string())?;
            let mut cfg = FitConfig::constrained(DimensionAssignment::identity(3));
            cfg.curvature = curvature;
            cfg.tol = 1e-12;
            let result = fit(&ds, &cfg).map_err(|e| e.to_string())?;
            let oracle = separate_logistic_deviance(&ds).map_err(|e| e.to_string())?;
            Ok((result.deviance - oracle).abs())
        })
        .collect();
    summarize(
        "full-rank equivalence",
        instances,
        &outcomes,
        1e-3,
        "max |deviance − Σ logistic|",
    )
}

/// Tiny one-dimensional instances whose maximum-likelihood estimate exists.
/// Separated draws are replaced; the second value counts them.
pub fn arbitration_instances(instances: usize, seed: u64) -> Result<(Vec<SyntheticSpec>, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb0b0);
    let mut specs = Vec::with_capacity(instances);
    let mut skipped = 0;
    while specs.len() < instances {
        let n = rng.random_range(20..=50);
        let p = rng.random_range(1..=3);
        let r = rng.random_range(1..=3);
        let spec = SyntheticSpec::new(n, p, r, 1, rng.random_range(0.3..1.2), rng.random());
        let (ds, _) = generate_synthetic(&spec)?;
        if has_separated_response(&ds)? {
            skipped += 1;
            if skipped > 10 * instances {
                return Err(crate::MelodicError::Numerical(
                    "could not draw enough non-separated instances".into(),
                ));
            }
            continue;
        }
        specs.push(spec);
    }
    Ok((specs, skipped))
}

/// The MM fit must reach the brute-force optimum on tiny one-dimensional problems.
pub fn check_brute_force(instances: usize, curvature: f64, seed: u64) -> CheckResult {
    let (specs, skipped) = match arbitration_instances(instances, seed) {
        Ok(v) => v,
        Err(e) => return CheckResult::new("brute-force arbitration", false, e.to_string()),
    };
    let outcomes: Vec<std::result::Result<f64, String>> = specs
        .par_iter()
        .map(|spec| {
            let (ds, _) = generate_synthetic(spec).map_err(|e| e.to_string())?;
            let mut cfg = FitConfig::new(1);
            cfg.curvature = curvature;
            cfg.tol = 1e-12;
            let mm = fit(&ds, &cfg).map_err(|e| e.to_string())?;
            let bf = brute_force_fit(&ds, 1, spec.seed).map_err(|e| e.to_string())?;
            Ok(mm.deviance - bf.deviance)
        })
        .collect();
    let mut result = summarize(
        "brute-force arbitration",
        instances,
        &outcomes,
        1e-4,
        "max MM − brute force",
    );
    let _ = write!(result.detail, ", {skipped} separated draws replaced");
    result
}

fn summarize(
    name: &str,
    instances: usize,
    outcomes: &[std::result::Result<f64, String>],
    bound: f64,
    label: &str,
) -> CheckResult {
    let mut worst = f64::NEG_INFINITY;
    let mut errors = Vec::new();
    for o in outcomes {
        match o {
            Ok(v) => worst = worst.max(*v),
            Err(e) => errors.push(e.clone()),
        }
    }
    let mut detail = format!("{instances} instances, {label} {worst:.3e}");
    if let Some(e) = errors.first() {
        let _ = write!(detail, ", {} errors (first: {e})", errors.len());
    }
    CheckResult::new(name, errors.is_empty() && worst <= bound, detail)
}

pub fn run_validation(options: &ValidateOptions) -> ValidationReport {
    let c = options.curvature;
    let s = options.seed;
    ValidationReport {
        seed: s,
        checks: vec![
            check_majorization(options.majorization_samples, c, s),
            check_descent(options.descent_instances, c, s),
            check_full_rank(options.full_rank_instances, c, s),
            check_brute_force(options.brute_force_instances, c, s),
        ],
    }
}
