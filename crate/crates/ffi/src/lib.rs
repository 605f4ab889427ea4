//! C interface to `melodic`.
//!
//! Matrices cross the boundary as row-major buffers. Every fallible call
//! returns a [`MelodicStatus`]; on failure `melodic_last_error` describes what
//! went wrong on the calling thread. Handles are opaque and must be released
//! with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use melodic::document::{to_json, FitDocument};
use melodic::selection::{count_parameters, information_criteria, quality_of_representation, ModelSummary};
use melodic::{
    Dataset, DatasetMeta, DimensionAssignment, FitConfig, MelodicError, ModelParams, Preprocessing,
};
use nalgebra::DMatrix;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MelodicStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    BufferTooSmall = 4,
    Panic = 5,
}

/// Predictors and binary responses prepared for fitting.
pub struct MelodicDataset {
    inner: Dataset,
}

/// A fitted model together with the metadata needed for prediction.
pub struct MelodicFit {
    params: ModelParams,
    meta: DatasetMeta,
    deviance: f64,
    iterations: usize,
    converged: bool,
    document: FitDocument,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &MelodicError) -> MelodicStatus {
    match e {
        MelodicError::Numerical(_) => MelodicStatus::Numerical,
        _ => MelodicStatus::InvalidArgument,
    }
}

/// Run `body`, translating errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), (MelodicStatus, String)>) -> MelodicStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => MelodicStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            MelodicStatus::Panic
        }
    }
}

fn lib(e: MelodicError) -> (MelodicStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (MelodicStatus, String) {
    (MelodicStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (MelodicStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn assignment(
    p: *const u8,
    r: usize,
    m: usize,
) -> Result<Option<DimensionAssignment>, (MelodicStatus, String)> {
    if p.is_null() {
        return Ok(None);
    }
    let values = slice(p, r * m, "assignment")?;
    DimensionAssignment::new(DMatrix::from_row_slice(r, m, values))
        .map(Some)
        .map_err(lib)
}

fn copy_matrix(m: &DMatrix<f64>, out: *mut f64, len: usize) -> Result<(), (MelodicStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    let needed = m.nrows() * m.ncols();
    if len < needed {
        return Err((
            MelodicStatus::BufferTooSmall,
            format!("buffer holds {len} values, {needed} needed"),
        ));
    }
    let dst = unsafe { std::slice::from_raw_parts_mut(out, needed) };
    for (i, row) in m.row_iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            dst[i * m.ncols() + j] = *v;
        }
    }
    Ok(())
}

/// Message for the last failed call on this thread, or null. The pointer stays
/// valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn melodic_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Build a dataset from an `n × p` predictor matrix and an `n × r` matrix of
/// 0/1 responses. Predictors are centered, and scaled to unit variance when
/// `standardize` is true.
///
/// # Safety
/// `x` must point to `n * p` doubles, `y` to `n * r` bytes and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn melodic_dataset_new(
    x: *const f64,
    n: usize,
    p: usize,
    y: *const u8,
    r: usize,
    standardize: bool,
    out: *mut *mut MelodicDataset,
) -> MelodicStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let xs = slice(x, n * p, "x")?;
        let ys = slice(y, n * r, "y")?;
        let pre = Preprocessing {
            standardize,
            ..Preprocessing::default()
        };
        let ds = Dataset::new(
            DMatrix::from_row_slice(n, p, xs),
            DMatrix::from_row_slice(n, r, ys),
            pre,
        )
        .map_err(lib)?;
        *out = Box::into_raw(Box::new(MelodicDataset { inner: ds }));
        Ok(())
    })
}

/// # Safety
/// `dataset` must come from `melodic_dataset_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn melodic_dataset_free(dataset: *mut MelodicDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Fit an `m`-dimensional model. `assignment` is either null (unconstrained)
/// or an `r × m` row-major 0/1 matrix tying responses to dimensions. A
/// `max_iter` of zero or a non-positive `tol` keeps the defaults.
///
/// # Safety
/// `dataset` must be a live handle, `assignment` null or `r * m` bytes, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn melodic_fit(
    dataset: *const MelodicDataset,
    m: usize,
    assignment_matrix: *const u8,
    tol: f64,
    max_iter: usize,
    seed: u64,
    out: *mut *mut MelodicFit,
) -> MelodicStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let ds = &dataset.as_ref().ok_or_else(|| null("dataset"))?.inner;
        let mut cfg = match assignment(assignment_matrix, ds.n_responses(), m)? {
            Some(d) => FitConfig::constrained(d),
            None => FitConfig::new(m),
        };
        if tol > 0.0 {
            cfg.tol = tol;
        }
        if max_iter > 0 {
            cfg.max_iter = max_iter;
        }
        cfg.seed = seed;
        let result = melodic::fit(ds, &cfg).map_err(lib)?;
        let label = match cfg.assignment {
            Some(_) => format!("constrained M = {m}"),
            None => format!("M = {m}"),
        };
        let summary = ModelSummary::from_fit(label, ds, &cfg, &result);
        let quality = quality_of_representation(ds, &result).map_err(lib)?.entries;
        let document = FitDocument::new(ds, &cfg, &result, summary, quality);
        *out = Box::into_raw(Box::new(MelodicFit {
            params: result.params,
            meta: ds.meta().clone(),
            deviance: result.deviance,
            iterations: result.iterations,
            converged: result.converged,
            document,
        }));
        Ok(())
    })
}

/// # Safety
/// `fit` must come from `melodic_fit` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn melodic_fit_free(fit: *mut MelodicFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Summary numbers of a fit; any output pointer may be null.
///
/// # Safety
/// `fit` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn melodic_fit_summary(
    fit: *const MelodicFit,
    deviance: *mut f64,
    iterations: *mut usize,
    converged: *mut bool,
) -> MelodicStatus {
    guard(|| {
        let f = fit.as_ref().ok_or_else(|| null("fit"))?;
        if let Some(d) = deviance.as_mut() {
            *d = f.deviance;
        }
        if let Some(i) = iterations.as_mut() {
            *i = f.iterations;
        }
        if let Some(c) = converged.as_mut() {
            *c = f.converged;
        }
        Ok(())
    })
}

/// Shape of the fitted model; any output pointer may be null.
///
/// # Safety
/// `fit` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn melodic_fit_shape(
    fit: *const MelodicFit,
    p: *mut usize,
    r: *mut usize,
    m: *mut usize,
) -> MelodicStatus {
    guard(|| {
        let f = fit.as_ref().ok_or_else(|| null("fit"))?;
        for (dst, v) in [
            (p, f.params.n_predictors()),
            (r, f.params.n_responses()),
            (m, f.params.dimensions()),
        ] {
            if let Some(d) = dst.as_mut() {
                *d = v;
            }
        }
        Ok(())
    })
}

/// Copy `B` (`p × m`), `K` and `L` (both `r × m`) into row-major buffers of
/// the given lengths.
///
/// # Safety
/// `fit` must be a live handle and each buffer must hold its stated length.
#[no_mangle]
pub unsafe extern "C" fn melodic_fit_copy_params(
    fit: *const MelodicFit,
    b: *mut f64,
    b_len: usize,
    k: *mut f64,
    k_len: usize,
    l: *mut f64,
    l_len: usize,
) -> MelodicStatus {
    guard(|| {
        let f = fit.as_ref().ok_or_else(|| null("fit"))?;
        copy_matrix(&f.params.b, b, b_len)?;
        copy_matrix(&f.params.k, k, k_len)?;
        copy_matrix(&f.params.l, l, l_len)
    })
}

/// Probability of category 1 for each response, for one subject given on the
/// original predictor scale.
///
/// # Safety
/// `x` must hold `p` doubles and `probabilities` room for `r` doubles.
#[no_mangle]
pub unsafe extern "C" fn melodic_fit_predict(
    fit: *const MelodicFit,
    x: *const f64,
    p: usize,
    probabilities: *mut f64,
    r: usize,
) -> MelodicStatus {
    guard(|| {
        let f = fit.as_ref().ok_or_else(|| null("fit"))?;
        if r != f.params.n_responses() {
            return Err((
                MelodicStatus::BufferTooSmall,
                format!(
                    "output holds {r} values, model has {} responses",
                    f.params.n_responses()
                ),
            ));
        }
        if probabilities.is_null() {
            return Err(null("probabilities"));
        }
        let xs = slice(x, p, "x")?;
        let pred = melodic::predict(xs, &f.params, &f.meta).map_err(lib)?;
        let dst = std::slice::from_raw_parts_mut(probabilities, r);
        for (d, pr) in dst.iter_mut().zip(&pred.probabilities) {
            *d = pr[1];
        }
        Ok(())
    })
}

/// The fit as a JSON document. Release the string with `melodic_string_free`.
///
/// # Safety
/// `fit` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn melodic_fit_to_json(fit: *const MelodicFit, out: *mut *mut c_char) -> MelodicStatus {
    guard(|| {
        let f = fit.as_ref().ok_or_else(|| null("fit"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let text = to_json(&f.document).map_err(lib)?;
        let c = CString::new(text).map_err(|e| (MelodicStatus::Numerical, e.to_string()))?;
        *out = c.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn melodic_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Number of free parameters; `assignment` is null or an `r × m` 0/1 matrix.
///
/// # Safety
/// `assignment` must be null or hold `r * m` bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn melodic_count_parameters(
    p: usize,
    r: usize,
    m: usize,
    assignment_matrix: *const u8,
    out: *mut usize,
) -> MelodicStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if m == 0 || m > p.min(r) {
            return Err((
                MelodicStatus::InvalidArgument,
                format!("m = {m} must lie in 1..={}", p.min(r)),
            ));
        }
        let d = assignment(assignment_matrix, r, m)?;
        *out = count_parameters(p, r, m, d.as_ref());
        Ok(())
    })
}

/// AIC and BIC from a deviance, parameter count and sample size.
///
/// # Safety
/// `aic` and `bic` must be writable.
#[no_mangle]
pub unsafe extern "C" fn melodic_information_criteria(
    deviance: f64,
    n_params: usize,
    n: usize,
    aic: *mut f64,
    bic: *mut f64,
) -> MelodicStatus {
    guard(|| {
        if aic.is_null() || bic.is_null() {
            return Err(null("aic or bic"));
        }
        if n == 0 {
            return Err((MelodicStatus::InvalidArgument, "n must be positive".into()));
        }
        (*aic, *bic) = information_criteria(deviance, n_params, n);
        Ok(())
    })
}
