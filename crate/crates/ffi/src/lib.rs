//! C ABI over the `chebotarev` library.
//!
//! Objects are opaque heap handles released with the matching `*_free`
//! function. Every fallible call returns a [`ChebStatus`]; on failure a
//! message is kept per thread and read with [`cheb_last_error_message`].
//! Strings returned through out-parameters are owned by the caller and must be
//! released with [`cheb_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use chebotarev::analysis::capacity;
use chebotarev::connectivity::{default_tolerance, is_connected};
use chebotarev::solver::{solve, ProblemSpec, Solution, SolverError};
use chebotarev::{Complex64, ComplexPoly};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChebStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    NoConvergence = 4,
    Degenerate = 5,
    Numerical = 6,
    Panic = 7,
}

/// Endpoints of the continuum.
pub const CHEB_ROLE_C: u32 = 0;
/// Branch points.
pub const CHEB_ROLE_D: u32 = 1;
/// Tangency points.
pub const CHEB_ROLE_Z: u32 = 2;

/// A polynomial with complex coefficients.
pub struct ChebPoly(ComplexPoly);

/// A solved problem specification.
pub struct ChebSolution(Solution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Runs `f`, recording the error message and converting panics.
fn guard(f: impl FnOnce() -> Result<(), (ChebStatus, String)>) -> ChebStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ChebStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            ChebStatus::Panic
        }
    }
}

fn null(what: &str) -> (ChebStatus, String) {
    (ChebStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (ChebStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (ChebStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

fn solver_status(e: &SolverError) -> ChebStatus {
    match e {
        SolverError::NoConvergence { .. } => ChebStatus::NoConvergence,
        SolverError::DegenerateSolution { .. } => ChebStatus::Degenerate,
        SolverError::NonFinite
        | SolverError::IdentityViolation { .. }
        | SolverError::LevelMismatch { .. }
        | SolverError::NoNegativePoint => ChebStatus::Numerical,
        _ => ChebStatus::InvalidArgument,
    }
}

fn to_c_string(s: String) -> Result<*mut c_char, (ChebStatus, String)> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| (ChebStatus::Numerical, "string contains a nul byte".to_string()))
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn cheb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Builds a polynomial from `len` ascending coefficients. `im` may be null
/// for real coefficients.
///
/// # Safety
/// `re` (and `im` when non-null) must point to `len` readable doubles;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cheb_poly_new(re: *const f64, im: *const f64, len: usize, out_poly: *mut *mut ChebPoly) -> ChebStatus {
    guard(|| {
        let slot = out(out_poly, "out")?;
        *slot = ptr::null_mut();
        if re.is_null() {
            return Err(null("re"));
        }
        if len == 0 {
            return Err((ChebStatus::InvalidArgument, "no coefficients".into()));
        }
        let re = std::slice::from_raw_parts(re, len);
        let coeffs: Vec<Complex64> = if im.is_null() {
            re.iter().map(|&r| Complex64::new(r, 0.0)).collect()
        } else {
            let im = std::slice::from_raw_parts(im, len);
            re.iter().zip(im).map(|(&r, &i)| Complex64::new(r, i)).collect()
        };
        let p = ComplexPoly::new(coeffs).map_err(|e| (ChebStatus::InvalidArgument, e.to_string()))?;
        *slot = Box::into_raw(Box::new(ChebPoly(p)));
        Ok(())
    })
}

/// # Safety
/// `poly` must come from this library and not be used afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cheb_poly_free(poly: *mut ChebPoly) {
    if !poly.is_null() {
        drop(Box::from_raw(poly));
    }
}

/// # Safety
/// `poly` must be a live handle and `degree` writable.
#[no_mangle]
pub unsafe extern "C" fn cheb_poly_degree(poly: *const ChebPoly, degree: *mut usize) -> ChebStatus {
    guard(|| {
        let p = deref(poly, "poly")?;
        *out(degree, "degree")? = p.0.degree();
        Ok(())
    })
}

/// # Safety
/// `poly` must be a live handle; `out_re` and `out_im` writable.
#[no_mangle]
pub unsafe extern "C" fn cheb_poly_eval(
    poly: *const ChebPoly,
    re: f64,
    im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> ChebStatus {
    guard(|| {
        let p = deref(poly, "poly")?;
        let (o_re, o_im) = (out(out_re, "out_re")?, out(out_im, "out_im")?);
        let w = p.0.eval(Complex64::new(re, im));
        *o_re = w.re;
        *o_im = w.im;
        Ok(())
    })
}

/// Logarithmic capacity of the inverse image of `[-1, 1]`.
///
/// # Safety
/// `poly` must be a live handle and `cap` writable.
#[no_mangle]
pub unsafe extern "C" fn cheb_poly_capacity(poly: *const ChebPoly, cap: *mut f64) -> ChebStatus {
    guard(|| {
        let p = deref(poly, "poly")?;
        let slot = out(cap, "cap")?;
        *slot = capacity(&p.0).map_err(|e| (ChebStatus::InvalidArgument, e.to_string()))?;
        Ok(())
    })
}

/// Whether the inverse image of `[-1, 1]` is connected, at the default
/// tolerance.
///
/// # Safety
/// `poly` must be a live handle and `connected` writable.
#[no_mangle]
pub unsafe extern "C" fn cheb_poly_is_connected(poly: *const ChebPoly, connected: *mut bool) -> ChebStatus {
    guard(|| {
        let p = deref(poly, "poly")?;
        let slot = out(connected, "connected")?;
        let v = is_connected(&p.0, default_tolerance(&p.0)).map_err(|e| (ChebStatus::Numerical, e.to_string()))?;
        *slot = v.connected;
        Ok(())
    })
}

/// Parses a problem specification (JSON, nul-terminated) and solves it from
/// its default starting point.
///
/// # Safety
/// `spec_json` must be a valid C string and `out_solution` writable.
#[no_mangle]
pub unsafe extern "C" fn cheb_solve_json(spec_json: *const c_char, out_solution: *mut *mut ChebSolution) -> ChebStatus {
    guard(|| {
        let slot = out(out_solution, "out")?;
        *slot = ptr::null_mut();
        if spec_json.is_null() {
            return Err(null("spec_json"));
        }
        let text = CStr::from_ptr(spec_json)
            .to_str()
            .map_err(|e| (ChebStatus::Parse, e.to_string()))?;
        let spec: ProblemSpec = serde_json::from_str(text).map_err(|e| (ChebStatus::Parse, e.to_string()))?;
        let sol = solve(&spec, &spec.initial_guess()).map_err(|e| (solver_status(&e), e.to_string()))?;
        *slot = Box::into_raw(Box::new(ChebSolution(sol)));
        Ok(())
    })
}

/// # Safety
/// `solution` must come from this library and not be used afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cheb_solution_free(solution: *mut ChebSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// # Safety
/// `solution` must be a live handle and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn cheb_solution_residual(solution: *const ChebSolution, value: *mut f64) -> ChebStatus {
    guard(|| {
        let s = deref(solution, "solution")?;
        *out(value, "value")? = s.0.residual_inf_norm;
        Ok(())
    })
}

/// # Safety
/// `solution` must be a live handle and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn cheb_solution_capacity(solution: *const ChebSolution, value: *mut f64) -> ChebStatus {
    guard(|| {
        let s = deref(solution, "solution")?;
        *out(value, "value")? = s.0.capacity;
        Ok(())
    })
}

fn points(s: &Solution, role: u32) -> Result<&[Complex64], (ChebStatus, String)> {
    match role {
        CHEB_ROLE_C => Ok(&s.points.c),
        CHEB_ROLE_D => Ok(&s.points.d),
        CHEB_ROLE_Z => Ok(&s.points.z),
        _ => Err((ChebStatus::InvalidArgument, format!("unknown role {role}"))),
    }
}

/// Number of points with the given `CHEB_ROLE_*`.
///
/// # Safety
/// `solution` must be a live handle and `count` writable.
#[no_mangle]
pub unsafe extern "C" fn cheb_solution_point_count(solution: *const ChebSolution, role: u32, count: *mut usize) -> ChebStatus {
    guard(|| {
        let s = deref(solution, "solution")?;
        let slot = out(count, "count")?;
        *slot = points(&s.0, role)?.len();
        Ok(())
    })
}

/// # Safety
/// `solution` must be a live handle; `out_re` and `out_im` writable.
#[no_mangle]
pub unsafe extern "C" fn cheb_solution_point(
    solution: *const ChebSolution,
    role: u32,
    index: usize,
    out_re: *mut f64,
    out_im: *mut f64,
) -> ChebStatus {
    guard(|| {
        let s = deref(solution, "solution")?;
        let (o_re, o_im) = (out(out_re, "out_re")?, out(out_im, "out_im")?);
        let pts = points(&s.0, role)?;
        let z = pts
            .get(index)
            .ok_or_else(|| (ChebStatus::InvalidArgument, format!("index {index} out of range ({})", pts.len())))?;
        *o_re = z.re;
        *o_im = z.im;
        Ok(())
    })
}

/// A new polynomial handle holding the solution's `T`.
///
/// # Safety
/// `solution` must be a live handle and `out_poly` writable.
#[no_mangle]
pub unsafe extern "C" fn cheb_solution_poly(solution: *const ChebSolution, out_poly: *mut *mut ChebPoly) -> ChebStatus {
    guard(|| {
        let slot = out(out_poly, "out")?;
        *slot = ptr::null_mut();
        let s = deref(solution, "solution")?;
        *slot = Box::into_raw(Box::new(ChebPoly(s.0.t.clone())));
        Ok(())
    })
}

/// The solution as JSON; release with [`cheb_string_free`].
///
/// # Safety
/// `solution` must be a live handle and `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn cheb_solution_to_json(solution: *const ChebSolution, out_json: *mut *mut c_char) -> ChebStatus {
    guard(|| {
        let slot = out(out_json, "out")?;
        *slot = ptr::null_mut();
        let s = deref(solution, "solution")?;
        let text = serde_json::to_string(&s.0).map_err(|e| (ChebStatus::Numerical, e.to_string()))?;
        *slot = to_c_string(text)?;
        Ok(())
    })
}

/// # Safety
/// `s` must be a string returned by this library, not freed before; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cheb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
