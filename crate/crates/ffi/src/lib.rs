//! C ABI for `weightlab`.
//!
//! Spaces, grids and weights live behind opaque handles created by the
//! `*_new` functions and released by the matching `*_free`. Every fallible
//! function returns a [`WlStatus`] and writes its result through an out
//! pointer; on failure [`wl_last_error_message`] describes the error on the
//! calling thread. Panics are caught at the boundary and reported as
//! [`WlStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use weightlab::constants::{
    ap_constant, exp_constant, fujii_wilson_constant, grid_ap_constant, grid_exp_constant,
    grid_fujii_wilson_constant, r_exponent,
};
use weightlab::maximal::{dyadic_maximal, hl_maximal};
use weightlab::{Cube, CubeFamily, DistanceMatrix, DyadicGrid, Error, QuasiMetricSpace, Weight};

/// Dyadic cubes only.
pub const WL_FAMILY_DYADIC: u32 = 0;
/// Every axis-parallel discrete cube.
pub const WL_FAMILY_ALL_CUBES: u32 = 1;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    StructuralViolation = 3,
    EpsilonOutOfRange = 4,
    BelowThreshold = 5,
    Unsupported = 6,
    Internal = 7,
    Panic = 8,
}

/// A finite quasimetric measure space.
pub struct WlSpace(QuasiMetricSpace);

/// A dyadic grid on the unit cube.
pub struct WlGrid(DyadicGrid);

/// A strictly positive weight.
pub struct WlWeight(Weight);

struct Failure(WlStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Structural(_) => WlStatus::StructuralViolation,
            Error::InvalidArgument { .. } | Error::NonPositiveWeight { .. } => WlStatus::InvalidArgument,
            Error::EpsilonOutOfRange { .. } => WlStatus::EpsilonOutOfRange,
            Error::BelowThreshold { .. } => WlStatus::BelowThreshold,
            Error::Unsupported(_) => WlStatus::Unsupported,
            Error::Internal(_) => WlStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> WlStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            WlStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("panic: {msg}"));
            WlStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(WlStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn family(code: u32) -> Result<CubeFamily, Failure> {
    match code {
        WL_FAMILY_DYADIC => Ok(CubeFamily::Dyadic),
        WL_FAMILY_ALL_CUBES => Ok(CubeFamily::AllCubes),
        _ => Err(Failure(WlStatus::InvalidArgument, format!("unknown cube family {code}"))),
    }
}

/// Builds a space from an `n × n` row-major distance matrix and `n` point
/// masses.
///
/// # Safety
/// `dist` must point to `n * n` doubles and `measure` to `n`; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn wl_space_new(
    n: usize,
    dist: *const f64,
    measure: *const f64,
    out: *mut *mut WlSpace,
) -> WlStatus {
    guard(|| {
        let cells = n.checked_mul(n).ok_or_else(|| Failure(WlStatus::InvalidArgument, "n is too large".into()))?;
        let d = DistanceMatrix::from_flat(n, slice(dist, cells, "dist")?.to_vec())?;
        let space = QuasiMetricSpace::new(d, slice(measure, n, "measure")?.to_vec())?;
        write(out, Box::into_raw(Box::new(WlSpace(space))), "out")
    })
}

/// # Safety
/// `space` must come from [`wl_space_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wl_space_free(space: *mut WlSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// Number of points, `κ`, `C_μ` and `D_μ = log₂ C_μ`.
///
/// # Safety
/// `space` must be a live handle; out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn wl_space_structure(
    space: *const WlSpace,
    n: *mut usize,
    kappa: *mut f64,
    c_mu: *mut f64,
    d_mu: *mut f64,
) -> WlStatus {
    guard(|| {
        let s = &as_ref(space, "space")?.0;
        write(n, s.n(), "n")?;
        write(kappa, s.kappa(), "kappa")?;
        write(c_mu, s.c_mu(), "c_mu")?;
        write(d_mu, s.d_mu(), "d_mu")
    })
}

/// # Safety
/// `values` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wl_weight_new(values: *const f64, len: usize, out: *mut *mut WlWeight) -> WlStatus {
    guard(|| {
        let w = Weight::new(slice(values, len, "values")?.to_vec())?;
        write(out, Box::into_raw(Box::new(WlWeight(w))), "out")
    })
}

/// # Safety
/// `weight` must come from [`wl_weight_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wl_weight_free(weight: *mut WlWeight) {
    if !weight.is_null() {
        drop(Box::from_raw(weight));
    }
}

/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wl_space_ap_constant(
    space: *const WlSpace,
    weight: *const WlWeight,
    p: f64,
    out: *mut f64,
) -> WlStatus {
    guard(|| {
        let v = ap_constant(&as_ref(space, "space")?.0, &as_ref(weight, "weight")?.0, p)?;
        write(out, v, "out")
    })
}

/// Fujii–Wilson `A_∞` constant over balls.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wl_space_fujii_wilson(space: *const WlSpace, weight: *const WlWeight, out: *mut f64) -> WlStatus {
    guard(|| {
        let v = fujii_wilson_constant(&as_ref(space, "space")?.0, &as_ref(weight, "weight")?.0)?;
        write(out, v, "out")
    })
}

/// Exponential (Hruščev) `A_∞` constant over balls.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wl_space_exp_constant(space: *const WlSpace, weight: *const WlWeight, out: *mut f64) -> WlStatus {
    guard(|| {
        let v = exp_constant(&as_ref(space, "space")?.0, &as_ref(weight, "weight")?.0)?;
        write(out, v, "out")
    })
}

/// Uncentered maximal function of `f`, written to `out`.
///
/// # Safety
/// `f` and `out` must each hold `len` doubles, `len` equal to the number of
/// points.
#[no_mangle]
pub unsafe extern "C" fn wl_space_hl_maximal(space: *const WlSpace, f: *const f64, len: usize, out: *mut f64) -> WlStatus {
    guard(|| {
        let m = hl_maximal(&as_ref(space, "space")?.0, slice(f, len, "f")?)?;
        if out.is_null() {
            return Err(null("out"));
        }
        ptr::copy_nonoverlapping(m.as_ptr(), out, m.len());
        Ok(())
    })
}

/// `τ_{κμ}` and `r = 1 + 1/(τ_{κμ}[w]_{A_∞})`.
///
/// # Safety
/// Out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn wl_r_exponent(ainf: f64, kappa: f64, d_mu: f64, tau: *mut f64, r: *mut f64) -> WlStatus {
    guard(|| {
        if !(ainf >= 1.0 && kappa >= 1.0 && d_mu >= 0.0) {
            return Err(Failure(
                WlStatus::InvalidArgument,
                format!("need ainf >= 1, kappa >= 1, d_mu >= 0; got {ainf}, {kappa}, {d_mu}"),
            ));
        }
        let (t, e) = r_exponent(ainf, kappa, d_mu);
        write(tau, t, "tau")?;
        write(r, e, "r")
    })
}

/// A depth-`depth` dyadic grid in dimension `dim`. `cell_measure` may be
/// null for Lebesgue measure, otherwise it holds `2^(dim·depth)` positive
/// cell masses in row-major order, first coordinate fastest.
///
/// # Safety
/// `cell_measure` is null or points to `2^(dim·depth)` doubles; `out` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn wl_grid_new(dim: u32, depth: u32, cell_measure: *const f64, out: *mut *mut WlGrid) -> WlStatus {
    guard(|| {
        let g = if cell_measure.is_null() {
            DyadicGrid::lebesgue(dim, depth)?
        } else {
            let bits = dim.checked_mul(depth).filter(|b| *b < usize::BITS);
            let bits = bits.ok_or_else(|| Failure(WlStatus::InvalidArgument, "grid is too large".into()))?;
            DyadicGrid::new(dim, depth, Some(slice(cell_measure, 1usize << bits, "cell_measure")?.to_vec()))?
        };
        write(out, Box::into_raw(Box::new(WlGrid(g))), "out")
    })
}

/// # Safety
/// `grid` must come from [`wl_grid_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wl_grid_free(grid: *mut WlGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Number of cells of the grid, `0` for a null handle.
///
/// # Safety
/// `grid` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wl_grid_cells(grid: *const WlGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.0.cells())
}

/// Dyadic maximal function relative to the unit cube.
///
/// # Safety
/// `f` and `out` must each hold `len` doubles, `len` equal to the number of
/// cells.
#[no_mangle]
pub unsafe extern "C" fn wl_grid_dyadic_maximal(grid: *const WlGrid, f: *const f64, len: usize, out: *mut f64) -> WlStatus {
    guard(|| {
        let m = dyadic_maximal(&as_ref(grid, "grid")?.0, slice(f, len, "f")?, &Cube::root())?;
        if out.is_null() {
            return Err(null("out"));
        }
        ptr::copy_nonoverlapping(m.as_ptr(), out, m.len());
        Ok(())
    })
}

/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wl_grid_ap_constant(
    grid: *const WlGrid,
    weight: *const WlWeight,
    p: f64,
    family_code: u32,
    out: *mut f64,
) -> WlStatus {
    guard(|| {
        let v = grid_ap_constant(&as_ref(grid, "grid")?.0, &as_ref(weight, "weight")?.0, p, family(family_code)?)?;
        write(out, v, "out")
    })
}

/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wl_grid_fujii_wilson(
    grid: *const WlGrid,
    weight: *const WlWeight,
    family_code: u32,
    out: *mut f64,
) -> WlStatus {
    guard(|| {
        let v = grid_fujii_wilson_constant(&as_ref(grid, "grid")?.0, &as_ref(weight, "weight")?.0, family(family_code)?)?;
        write(out, v, "out")
    })
}

/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wl_grid_exp_constant(
    grid: *const WlGrid,
    weight: *const WlWeight,
    family_code: u32,
    out: *mut f64,
) -> WlStatus {
    guard(|| {
        let v = grid_exp_constant(&as_ref(grid, "grid")?.0, &as_ref(weight, "weight")?.0, family(family_code)?)?;
        write(out, v, "out")
    })
}

/// Message of the last failed call on this thread, empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn wl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn wl_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => c"unknown",
    };
    VERSION.as_ptr()
}
