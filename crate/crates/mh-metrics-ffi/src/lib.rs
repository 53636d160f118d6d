//! C ABI for the marginal homogeneity measures.
//!
//! Tables live behind an opaque handle created by [`mh_table_parse_csv`] or
//! [`mh_table_from_counts`] and released by [`mh_table_free`]. Every
//! fallible call returns an [`MhStatus`]; on failure a message is stored in
//! thread-local state and can be read with [`mh_last_error_message`].
//! Strings handed out by this library are owned by the caller and must be
//! released with [`mh_string_free`].
//!
//! All entry points catch panics and turn them into
//! [`MhStatus::InternalError`]; unwinding never crosses the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use mh_metrics::error::MhError;
use mh_metrics::inference::{confidence_interval, confidence_interval_for, resolve_estimator, EstimatorChoice, DEFAULT_ALPHA};
use mh_metrics::measures::{measure_gamma, measure_report, sub_measures};
use mh_metrics::report::{build_analysis_report, InputKind};
use mh_metrics::simulation::{true_measure, SimulationScenario, DEFAULT_CUTOFFS};
use mh_metrics::table::{marginal_summary, parse_table, to_probabilities, ProbSource, SquareTable};
use mh_metrics::viz::{build_viz_spec, render_svg, VizStyle};

/// Result of every fallible call in this library.
#[repr(C)]
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum MhStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// The input could not be parsed or violates a precondition.
    InputError = 2,
    /// The measure or interval is undefined for this table.
    Undefined = 3,
    /// An output could not be produced.
    IoError = 4,
    /// A string argument was not valid UTF-8.
    Utf8Error = 5,
    /// An internal invariant failed; file a bug.
    InternalError = 6,
}

/// How counts are turned into cell probabilities.
#[repr(C)]
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum MhEstimator {
    /// Sample proportions, smoothed only when a cut sits on the boundary.
    Auto = 0,
    /// Sample proportions, never smoothed.
    Sample = 1,
    /// Dirichlet-smoothed proportions; see the `alpha` argument.
    Bayes = 2,
}

/// A point estimate with its large-sample interval.
///
/// When `degenerate` is nonzero the table is at marginal homogeneity at
/// some cut: `estimate` is still valid but `se`, `ci_low`, and `ci_high`
/// are NaN. `alpha` is NaN unless `used_bayes` is nonzero.
#[repr(C)]
pub struct MhInterval {
    /// Point estimate of the measure.
    pub estimate: f64,
    /// Standard error, or NaN when degenerate.
    pub se: f64,
    /// Lower interval end, or NaN when degenerate.
    pub ci_low: f64,
    /// Upper interval end, or NaN when degenerate.
    pub ci_high: f64,
    /// Confidence level the interval was built at.
    pub level: f64,
    /// Smoothing weight that was applied, or NaN.
    pub alpha: f64,
    /// Total count behind the estimate.
    pub n: u64,
    /// 1 when the interval is unavailable because the table sits at
    /// marginal homogeneity at some cut.
    pub degenerate: u8,
    /// 1 when smoothed proportions were used.
    pub used_bayes: u8,
}

/// Opaque table of counts.
pub struct MhTable {
    inner: SquareTable,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    // Interior NULs cannot occur in our messages, but never panic over one.
    let owned = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(owned));
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn status_of(e: &MhError) -> MhStatus {
    match e {
        MhError::MeasureUndefined { .. }
        | MhError::BoundaryGc { .. }
        | MhError::DegenerateAtMH { .. } => MhStatus::Undefined,
        _ => MhStatus::InputError,
    }
}

fn fail(e: &MhError) -> MhStatus {
    set_last_error(&e.to_string());
    status_of(e)
}

fn null_pointer(what: &str) -> MhStatus {
    set_last_error(&format!("{what} is null"));
    MhStatus::NullPointer
}

/// Runs `f` with the panic shield installed and the error slot cleared.
fn entry<F: FnOnce() -> MhStatus>(f: F) -> MhStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_last_error("internal panic");
            MhStatus::InternalError
        }
    }
}

/// Maps the estimator selector onto a library choice. For `MhEstimator::Bayes`
/// a non-finite or non-positive `alpha` selects the default weight.
fn choice_of(estimator: MhEstimator, alpha: f64) -> EstimatorChoice {
    match estimator {
        MhEstimator::Auto => EstimatorChoice::Auto,
        MhEstimator::Sample => EstimatorChoice::Sample,
        MhEstimator::Bayes => EstimatorChoice::Bayes {
            alpha: if alpha.is_finite() && alpha > 0.0 { alpha } else { DEFAULT_ALPHA },
        },
    }
}

/// Moves a string to the caller as a NUL-terminated allocation.
fn hand_out(text: String, out: *mut *mut c_char) -> MhStatus {
    match CString::new(text) {
        Ok(s) => {
            unsafe { *out = s.into_raw() };
            MhStatus::Ok
        }
        Err(_) => {
            set_last_error("output contains an interior NUL byte");
            MhStatus::IoError
        }
    }
}

/// Message describing the most recent failure on this thread, or null when
/// the last call succeeded. The pointer is valid until the next call into
/// this library from the same thread; do not free it.
#[no_mangle]
pub extern "C" fn mh_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |s| s.as_ptr())
    })
}

/// Parses a square table of counts from CSV text (one row per line, an
/// optional header line is detected and skipped).
///
/// On success writes a table handle to `out`; release it with
/// `mh_table_free`.
///
/// # Safety
/// `text` must point to a NUL-terminated byte string and `out` must be
/// valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn mh_table_parse_csv(
    text: *const c_char,
    out: *mut *mut MhTable,
) -> MhStatus {
    entry(|| {
        if text.is_null() {
            return null_pointer("text");
        }
        if out.is_null() {
            return null_pointer("out");
        }
        let text = match unsafe { CStr::from_ptr(text) }.to_str() {
            Ok(t) => t,
            Err(_) => {
                set_last_error("text is not valid UTF-8");
                return MhStatus::Utf8Error;
            }
        };
        match parse_table(text) {
            Ok(inner) => {
                unsafe { *out = Box::into_raw(Box::new(MhTable { inner })) };
                MhStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Builds a table from a row-major `r x r` grid of counts.
///
/// # Safety
/// `counts` must point to `r * r` readable `uint64_t` values and `out`
/// must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn mh_table_from_counts(
    counts: *const u64,
    r: usize,
    out: *mut *mut MhTable,
) -> MhStatus {
    entry(|| {
        if counts.is_null() {
            return null_pointer("counts");
        }
        if out.is_null() {
            return null_pointer("out");
        }
        let cells = unsafe { std::slice::from_raw_parts(counts, r * r) };
        let rows: Vec<Vec<u64>> = cells.chunks(r.max(1)).map(|c| c.to_vec()).collect();
        match SquareTable::from_counts(rows) {
            Ok(inner) => {
                unsafe { *out = Box::into_raw(Box::new(MhTable { inner })) };
                MhStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Releases a table handle. Passing null is a no-op.
///
/// # Safety
/// `table` must be a handle produced by this library that has not been
/// freed yet, or null.
#[no_mangle]
pub unsafe extern "C" fn mh_table_free(table: *mut MhTable) {
    if !table.is_null() {
        drop(unsafe { Box::from_raw(table) });
    }
}

/// Number of categories of the table, or 0 for a null handle.
///
/// # Safety
/// `table` must be a live handle from this library, or null.
#[no_mangle]
pub unsafe extern "C" fn mh_table_dim(table: *const MhTable) -> usize {
    if table.is_null() {
        return 0;
    }
    unsafe { &*table }.inner.r()
}

/// Total count of the table, or 0 for a null handle.
///
/// # Safety
/// `table` must be a live handle from this library, or null.
#[no_mangle]
pub unsafe extern "C" fn mh_table_total(table: *const MhTable) -> u64 {
    if table.is_null() {
        return 0;
    }
    unsafe { &*table }.inner.n()
}

/// Computes the summary measure of departure from marginal homogeneity,
/// in `[0, 1]`.
///
/// # Safety
/// `table` must be a live handle from this library and `out` must be valid
/// for one `double` write.
#[no_mangle]
pub unsafe extern "C" fn mh_gamma(
    table: *const MhTable,
    estimator: MhEstimator,
    alpha: f64,
    out: *mut f64,
) -> MhStatus {
    entry(|| {
        if table.is_null() {
            return null_pointer("table");
        }
        if out.is_null() {
            return null_pointer("out");
        }
        let t = &unsafe { &*table }.inner;
        let p = match resolve_estimator(t, choice_of(estimator, alpha)) {
            Ok(p) => p,
            Err(e) => return fail(&e),
        };
        match measure_gamma(&marginal_summary(&p)) {
            Ok((gamma, _)) => {
                unsafe { *out = gamma };
                MhStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Computes the point estimate and its large-sample confidence interval.
///
/// Returns `MhStatus::Ok` with `out->degenerate = 1` (and NaN interval
/// fields) when the table sits exactly at marginal homogeneity at some cut.
///
/// # Safety
/// `table` must be a live handle from this library and `out` must be valid
/// for one `MhInterval` write.
#[no_mangle]
pub unsafe extern "C" fn mh_confidence_interval(
    table: *const MhTable,
    estimator: MhEstimator,
    alpha: f64,
    level: f64,
    out: *mut MhInterval,
) -> MhStatus {
    entry(|| {
        if table.is_null() {
            return null_pointer("table");
        }
        if out.is_null() {
            return null_pointer("out");
        }
        let t = &unsafe { &*table }.inner;
        match confidence_interval(t, level, choice_of(estimator, alpha)) {
            Ok(r) => {
                let (used_bayes, alpha_used) = match r.estimator_used {
                    ProbSource::SampleProportion => (0u8, f64::NAN),
                    ProbSource::BayesSmoothed { alpha } => (1u8, alpha),
                };
                unsafe {
                    *out = MhInterval {
                        estimate: r.estimate,
                        se: r.se.unwrap_or(f64::NAN),
                        ci_low: r.ci_low.unwrap_or(f64::NAN),
                        ci_high: r.ci_high.unwrap_or(f64::NAN),
                        level: r.level,
                        alpha: alpha_used,
                        n: r.n,
                        degenerate: r.degenerate_warning as u8,
                        used_bayes,
                    };
                }
                MhStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Produces the full analysis report as a JSON string.
///
/// On success `*out` receives a NUL-terminated string owned by the caller;
/// release it with `mh_string_free`.
///
/// # Safety
/// `table` must be a live handle from this library and `out` must be valid
/// for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn mh_analyze_json(
    table: *const MhTable,
    estimator: MhEstimator,
    alpha: f64,
    level: f64,
    out: *mut *mut c_char,
) -> MhStatus {
    entry(|| {
        if table.is_null() {
            return null_pointer("table");
        }
        if out.is_null() {
            return null_pointer("out");
        }
        let t = &unsafe { &*table }.inner;
        let p = match resolve_estimator(t, choice_of(estimator, alpha)) {
            Ok(p) => p,
            Err(e) => return fail(&e),
        };
        let s = marginal_summary(&p);
        let measures = match measure_report(&s, &[]) {
            Ok(m) => m,
            Err(e) => return fail(&e),
        };
        let inference = match confidence_interval_for(&p, t.n(), level) {
            Ok(i) => i,
            Err(e) => return fail(&e),
        };
        let report =
            build_analysis_report(&s, &measures, Some(&inference), Some(t.n()), InputKind::Counts);
        match serde_json::to_string_pretty(&report) {
            Ok(text) => hand_out(text, out),
            Err(e) => {
                set_last_error(&format!("cannot serialize report: {e}"));
                MhStatus::IoError
            }
        }
    })
}

/// Renders the per-cut panel grid as an SVG string with the default style.
///
/// A table with no off-diagonal mass still renders: every panel shows
/// "n/a". On success `*out` receives a NUL-terminated string owned by the
/// caller; release it with `mh_string_free`.
///
/// # Safety
/// `table` must be a live handle from this library and `out` must be valid
/// for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn mh_render_svg(
    table: *const MhTable,
    estimator: MhEstimator,
    alpha: f64,
    out: *mut *mut c_char,
) -> MhStatus {
    entry(|| {
        if table.is_null() {
            return null_pointer("table");
        }
        if out.is_null() {
            return null_pointer("out");
        }
        let t = &unsafe { &*table }.inner;
        let p = match resolve_estimator(t, choice_of(estimator, alpha)) {
            Ok(p) => p,
            // A fully diagonal table has no defined cut; show that rather
            // than refuse to draw.
            Err(MhError::MeasureUndefined { level: None }) => to_probabilities(t),
            Err(e) => return fail(&e),
        };
        let s = marginal_summary(&p);
        let subs = sub_measures(&s);
        let spec = match build_viz_spec(&s, &subs, VizStyle::default()) {
            Ok(spec) => spec,
            Err(e) => return fail(&e),
        };
        match render_svg(&spec) {
            Ok(svg) => hand_out(svg, out),
            Err(e) => fail(&e),
        }
    })
}

/// Population value of the measure for a latent bivariate normal scenario
/// with standard margins, shift `d`, and correlation `rho`, discretized at
/// `cutoffs`. Passing `cutoffs = NULL` with `n_cutoffs = 0` selects the
/// default five cut points.
///
/// # Safety
/// `cutoffs` must point to `n_cutoffs` readable doubles (or be null with
/// `n_cutoffs = 0`) and `out` must be valid for one `double` write.
#[no_mangle]
pub unsafe extern "C" fn mh_true_measure(
    d: f64,
    rho: f64,
    cutoffs: *const f64,
    n_cutoffs: usize,
    out: *mut f64,
) -> MhStatus {
    entry(|| {
        if out.is_null() {
            return null_pointer("out");
        }
        if cutoffs.is_null() && n_cutoffs != 0 {
            return null_pointer("cutoffs");
        }
        let cuts: Vec<f64> = if n_cutoffs == 0 {
            DEFAULT_CUTOFFS.to_vec()
        } else {
            unsafe { std::slice::from_raw_parts(cutoffs, n_cutoffs) }.to_vec()
        };
        let scenario = SimulationScenario { d, n: 1, rho, cutoffs: cuts };
        match true_measure(&scenario) {
            Ok(value) => {
                unsafe { *out = value };
                MhStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Releases a string produced by this library. Passing null is a no-op.
///
/// # Safety
/// `s` must be a string produced by this library that has not been freed
/// yet, or null.
#[no_mangle]
pub unsafe extern "C" fn mh_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}
