//! C ABI over `lecam`.
//!
//! Every fallible function returns a [`LecamStatus`]; on failure the message is
//! available from [`lecam_last_error`] on the same thread. Handles are opaque and
//! owned by the caller, who releases them with the matching `_free` function.
//! Strings returned through out-parameters are released with [`lecam_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use lecam::dist::{self, AtomicMeasure, DeconvolveOptions, FreqGrid, GridMeasure, Measure};
use lecam::scenario::{self, Outcome, ScenarioConfig};
use lecam::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LecamStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    NotProbability = 4,
    IncompatibleGrids = 5,
    Unsupported = 6,
    Config = 7,
    Io = 8,
    Panic = 9,
}

impl From<&Error> for LecamStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::NonSymmetricFrequencies | Error::InvalidCharFn(_) => {
                LecamStatus::InvalidArgument
            }
            Error::NotProbability(_) => LecamStatus::NotProbability,
            Error::IncompatibleSteps(..) | Error::NeedsLattice => LecamStatus::IncompatibleGrids,
            Error::Unsupported(_) => LecamStatus::Unsupported,
            Error::Config(_) | Error::Json(_) => LecamStatus::Config,
            Error::Io(_) | Error::Csv(_) => LecamStatus::Io,
        }
    }
}

/// A finite measure on the line: a lattice law or a finite set of atoms.
pub struct LecamMeasure(Measure);

/// A finished scenario run: report plus artifacts.
pub struct LecamOutcome(Outcome);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(LecamStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(LecamStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(LecamStatus::NullPointer, format!("`{what}` is null"))
}

/// Runs `f`, converting errors and panics into a status and the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> LecamStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LecamStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            LecamStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(LecamStatus::InvalidUtf8, format!("`{what}` is not UTF-8")))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Fail(LecamStatus::InvalidArgument, "string contains an interior NUL".into()))
}

fn grid_of<'a>(m: &'a LecamMeasure, what: &str) -> Result<&'a GridMeasure, Fail> {
    match &m.0 {
        Measure::Grid(g) => Ok(g),
        Measure::Atomic(_) => Err(Fail(LecamStatus::IncompatibleGrids, format!("`{what}` must be a lattice measure"))),
    }
}

/// Message of the last failed call on this thread, or NULL. Valid until the next call.
#[no_mangle]
pub extern "C" fn lecam_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lecam_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn lecam_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// JSON array of `{name, description, anchor}` for every scenario.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lecam_scenarios_json(out: *mut *mut c_char) -> LecamStatus {
    guard(|| {
        let s = serde_json::to_string(&scenario::list_scenarios()).map_err(Error::from)?;
        put(out, c_string(s)?, "out")
    })
}

/// Runs a scenario from a JSON config. A config problem returns `Config` before any
/// computation. A run whose checks fail still returns `Ok`; query
/// [`lecam_outcome_passed`]. If the config names `out`, artifacts are written there.
///
/// # Safety
/// `config_json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lecam_scenario_run(config_json: *const c_char, out: *mut *mut LecamOutcome) -> LecamStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = ScenarioConfig::from_json(str_arg(config_json, "config_json")?)?;
        let outcome = scenario::run(&cfg)?;
        put(out, Box::into_raw(Box::new(LecamOutcome(outcome))), "out")
    })
}

/// 1 if every check passed, 0 if not, -1 for NULL.
///
/// # Safety
/// `o` must be NULL or a live outcome handle.
#[no_mangle]
pub unsafe extern "C" fn lecam_outcome_passed(o: *const LecamOutcome) -> c_int {
    o.as_ref().map_or(-1, |o| c_int::from(o.0.report.pass))
}

/// Wall-clock duration of the run in seconds, or NaN for NULL.
///
/// # Safety
/// `o` must be NULL or a live outcome handle.
#[no_mangle]
pub unsafe extern "C" fn lecam_outcome_duration(o: *const LecamOutcome) -> f64 {
    o.as_ref().map_or(f64::NAN, |o| o.0.report.duration_secs)
}

/// The report as JSON.
///
/// # Safety
/// `o` must be a live outcome handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lecam_outcome_report_json(o: *const LecamOutcome, out: *mut *mut c_char) -> LecamStatus {
    guard(|| {
        let o = handle(o, "outcome")?;
        let s = serde_json::to_string_pretty(&o.0.report).map_err(Error::from)?;
        put(out, c_string(s)?, "out")
    })
}

/// Writes `report.json` and the CSV artifacts into `dir`, creating it if needed.
///
/// # Safety
/// `o` must be a live outcome handle and `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn lecam_outcome_write(o: *const LecamOutcome, dir: *const c_char) -> LecamStatus {
    guard(|| {
        let o = handle(o, "outcome")?;
        o.0.write_to(Path::new(str_arg(dir, "dir")?))?;
        Ok(())
    })
}

/// # Safety
/// `o` must be NULL or a handle from [`lecam_scenario_run`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lecam_outcome_free(o: *mut LecamOutcome) {
    if !o.is_null() {
        drop(Box::from_raw(o));
    }
}

/// Lattice measure with masses at `origin + j·step`. Masses must be non-negative.
///
/// # Safety
/// `masses` must point to `len` doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lecam_measure_grid(
    origin: f64,
    step: f64,
    masses: *const f64,
    len: usize,
    out: *mut *mut LecamMeasure,
) -> LecamStatus {
    guard(|| {
        let m = GridMeasure::new(origin, step, slice_arg(masses, len, "masses")?.to_vec())?;
        put(out, Box::into_raw(Box::new(LecamMeasure(m.into()))), "out")
    })
}

/// Atomic measure with weight `weights[i]` at `points[i]`.
///
/// # Safety
/// `points` and `weights` must each point to `len` doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lecam_measure_atoms(
    points: *const f64,
    weights: *const f64,
    len: usize,
    out: *mut *mut LecamMeasure,
) -> LecamStatus {
    guard(|| {
        let x = slice_arg(points, len, "points")?;
        let w = slice_arg(weights, len, "weights")?;
        let m = AtomicMeasure::new(x.iter().copied().zip(w.iter().copied()).collect())?;
        put(out, Box::into_raw(Box::new(LecamMeasure(m.into()))), "out")
    })
}

/// Total mass.
///
/// # Safety
/// `m` must be a live measure handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn lecam_measure_total_mass(m: *const LecamMeasure, out: *mut f64) -> LecamStatus {
    guard(|| {
        let total = match &handle(m, "measure")?.0 {
            Measure::Grid(g) => g.total_mass(),
            Measure::Atomic(a) => a.total_mass(),
        };
        put(out, total, "out")
    })
}

/// Number of support points (lattice length or atom count).
///
/// # Safety
/// `m` must be a live measure handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn lecam_measure_len(m: *const LecamMeasure, out: *mut usize) -> LecamStatus {
    guard(|| {
        let n = match &handle(m, "measure")?.0 {
            Measure::Grid(g) => g.len(),
            Measure::Atomic(a) => a.atoms().len(),
        };
        put(out, n, "out")
    })
}

/// Copies the support points and masses into caller buffers of capacity `cap`,
/// which must be at least [`lecam_measure_len`].
///
/// # Safety
/// `points` and `masses` must each hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn lecam_measure_points(
    m: *const LecamMeasure,
    points: *mut f64,
    masses: *mut f64,
    cap: usize,
) -> LecamStatus {
    guard(|| {
        let pts = handle(m, "measure")?.0.points();
        if cap < pts.len() {
            return Err(Fail(LecamStatus::InvalidArgument, format!("capacity {cap} below length {}", pts.len())));
        }
        if points.is_null() || masses.is_null() {
            return Err(null("points/masses"));
        }
        for (i, (x, w)) in pts.into_iter().enumerate() {
            points.add(i).write(x);
            masses.add(i).write(w);
        }
        Ok(())
    })
}

/// Characteristic function `∫ e^{itx} dm` at `n` frequencies, which must be ascending,
/// symmetric about 0 and contain 0.
///
/// # Safety
/// `freqs`, `re` and `im` must each hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn lecam_measure_charfn(
    m: *const LecamMeasure,
    freqs: *const f64,
    n: usize,
    re: *mut f64,
    im: *mut f64,
) -> LecamStatus {
    guard(|| {
        let m = handle(m, "measure")?;
        let grid = FreqGrid::new(slice_arg(freqs, n, "freqs")?.to_vec())?;
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        let phi = dist::to_charfn(&m.0, &grid)?;
        for (i, z) in phi.values().iter().enumerate() {
            re.add(i).write(z.re);
            im.add(i).write(z.im);
        }
        Ok(())
    })
}

/// Convolution `a ∗ b`. At least one side must be a lattice measure; atoms are snapped
/// to the lattice.
///
/// # Safety
/// `a`, `b` must be live measure handles and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn lecam_convolve(
    a: *const LecamMeasure,
    b: *const LecamMeasure,
    out: *mut *mut LecamMeasure,
) -> LecamStatus {
    guard(|| {
        let c = dist::convolve(&handle(a, "a")?.0, &handle(b, "b")?.0)?;
        put(out, Box::into_raw(Box::new(LecamMeasure(c.measure.into()))), "out")
    })
}

/// Total-variation distance `sup_A |a(A) − b(A)|`.
///
/// # Safety
/// `a`, `b` must be live measure handles and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn lecam_distance_tv(a: *const LecamMeasure, b: *const LecamMeasure, out: *mut f64) -> LecamStatus {
    guard(|| put(out, dist::distance_tv(&handle(a, "a")?.0, &handle(b, "b")?.0)?, "out"))
}

/// Kolmogorov distance between distribution functions.
///
/// # Safety
/// `a`, `b` must be live measure handles and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn lecam_distance_ks(a: *const LecamMeasure, b: *const LecamMeasure, out: *mut f64) -> LecamStatus {
    guard(|| put(out, dist::distance_ks(&handle(a, "a")?.0, &handle(b, "b")?.0)?, "out"))
}

/// Decides whether `q = ν ∗ p` for a probability `ν` by deconvolution on `|t| ≤ band`
/// where `|φ_p| ≥ floor`. Writes 1 or 0 to `holds`; when it holds and `nu` is not
/// NULL, the estimate of `ν` is returned there, otherwise `*nu` is set to NULL.
///
/// # Safety
/// `q`, `p` must be live lattice measure handles; `holds` valid; `nu` NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn lecam_check_spread(
    q: *const LecamMeasure,
    p: *const LecamMeasure,
    band: f64,
    floor: f64,
    holds: *mut c_int,
    nu: *mut *mut LecamMeasure,
) -> LecamStatus {
    guard(|| {
        let q = grid_of(handle(q, "q")?, "q")?;
        let p = grid_of(handle(p, "p")?, "p")?;
        let r = dist::check_spread(q, p, DeconvolveOptions::new(band, floor)?)?;
        put(holds, c_int::from(r.holds), "holds")?;
        if !nu.is_null() {
            let h = r.nu.map_or(ptr::null_mut(), |g| Box::into_raw(Box::new(LecamMeasure(g.into()))));
            nu.write(h);
        }
        Ok(())
    })
}

/// # Safety
/// `m` must be NULL or a measure handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lecam_measure_free(m: *mut LecamMeasure) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}
