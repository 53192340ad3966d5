//! C ABI for the celsim kernels.
//!
//! Parameters live behind an opaque `CelParams` handle. Every fallible call
//! returns a `CelStatus`; on failure a description is available from
//! `cel_last_error_message` on the same thread. Frequencies cross the
//! boundary in Hz (names end in `_hz`), matching the parameter-file format.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use celsim::cli::full_steady;
use celsim::config::Config;
use celsim::correlation::duan_trajectory;
use celsim::hilbert::{ProbeConvention, Truncation};
use celsim::model::{default_working_point, from_hz, to_hz, FrameSpec, SystemParams};
use celsim::ode::OdeOptions;
use celsim::phase::{diffusion_coefficients, schawlow_townes, PolarState};
use celsim::reduced::{atom_steady_state, coefficients, steady_photon_numbers};
use celsim::spectroscopy::{photons_from_power, transmission};
use celsim::Error;

/// Result of a C ABI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CelStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidParams = 3,
    Config = 4,
    Unstable = 5,
    Solver = 6,
    Io = 7,
    Panic = 8,
}

/// Opaque parameter set.
pub struct CelParams {
    inner: SystemParams,
}

/// Reduced-model steady state.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CelSteadyPhotons {
    pub n1: f64,
    pub n2: f64,
    pub c_re: f64,
    pub c_im: f64,
    /// Largest real part of the moment-block spectrum, Hz (negative when stable).
    pub abscissa_hz: f64,
}

/// Full master-equation steady state.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CelFullSteady {
    pub n1: f64,
    pub n2: f64,
    pub c_re: f64,
    pub c_im: f64,
    pub rho_gg: f64,
    pub rho_ee: f64,
    pub rho_dd: f64,
    /// Residual of the linear solve, |L·ρ|.
    pub residual: f64,
}

/// Drift and diffusion coefficients of the phase Fokker–Planck equation, in s⁻¹.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CelDiffusion {
    pub d_theta: f64,
    pub d_eta: f64,
    pub d_thetatheta: f64,
    pub d_etaeta: f64,
    pub d_thetaeta: f64,
}

/// Which probe Hamiltonian prefactors to use for transmission.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CelProbeConvention {
    HalfPrefactors = 0,
    UnitPrefactors = 1,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CelStatus {
    match e {
        Error::InvalidParams(_) | Error::NegativeRate { .. } | Error::InvalidFrame(_) => CelStatus::InvalidParams,
        Error::InvalidMode(_) | Error::Truncation(_) | Error::DimensionMismatch { .. } => CelStatus::InvalidArgument,
        Error::Config(_) => CelStatus::Config,
        Error::Unstable { .. } => CelStatus::Unstable,
        Error::Io { .. } => CelStatus::Io,
        _ => CelStatus::Solver,
    }
}

struct Fail(CelStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(CelStatus::InvalidArgument, msg.into())
}

/// Run `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CelStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CelStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            CelStatus::Panic
        }
    }
}

unsafe fn params_ref<'a>(p: *const CelParams) -> Result<&'a SystemParams, Fail> {
    // SAFETY: caller passes either NULL or a live handle from `cel_params_*`.
    unsafe { p.as_ref() }
        .map(|h| &h.inner)
        .ok_or_else(|| Fail(CelStatus::NullPointer, "null parameter handle".into()))
}

unsafe fn out_ref<'a, T>(p: *mut T) -> Result<&'a mut T, Fail> {
    // SAFETY: caller passes either NULL or a valid, writable pointer.
    unsafe { p.as_mut() }.ok_or_else(|| Fail(CelStatus::NullPointer, "null output pointer".into()))
}

unsafe fn str_arg<'a>(s: *const c_char) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(Fail(CelStatus::NullPointer, "null string argument".into()));
    }
    // SAFETY: caller passes a NUL-terminated string.
    unsafe { CStr::from_ptr(s) }
        .to_str()
        .map_err(|_| invalid("string argument is not valid UTF-8"))
}

fn truncation(n1_max: usize, n2_max: usize) -> Truncation {
    Truncation::new(n1_max, n2_max)
}

/// Message describing the last failure on this thread, or NULL if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cel_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cel_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// New handle holding the default working point. Free with `cel_params_free`.
#[no_mangle]
pub extern "C" fn cel_params_new_default() -> *mut CelParams {
    Box::into_raw(Box::new(CelParams {
        inner: default_working_point(),
    }))
}

/// Load a parameter file (`key = value`, Hz) into a new handle.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cel_params_load(path: *const c_char, out: *mut *mut CelParams) -> CelStatus {
    guard(|| {
        let out = unsafe { out_ref(out) }?;
        let path = unsafe { str_arg(path) }?;
        let cfg = Config::load(Path::new(path))?;
        *out = Box::into_raw(Box::new(CelParams { inner: cfg.params }));
        Ok(())
    })
}

/// Release a handle. NULL is ignored.
///
/// # Safety
/// `p` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cel_params_free(p: *mut CelParams) {
    if !p.is_null() {
        // SAFETY: the handle was created by Box::into_raw in this crate.
        drop(unsafe { Box::from_raw(p) });
    }
}

/// Set a parameter by its file key (`Omega`, `kappa1`, …) in file units.
/// The handle is unchanged if the result would be invalid.
///
/// # Safety
/// `p` must be a live handle and `key` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cel_params_set(p: *mut CelParams, key: *const c_char, value: f64) -> CelStatus {
    guard(|| {
        let h = unsafe { out_ref(p) }?;
        let key = unsafe { str_arg(key) }?;
        let mut next = h.inner;
        next.set_field(key, value)?;
        next.validate()?;
        h.inner = next;
        Ok(())
    })
}

/// Read a parameter by its file key in file units.
///
/// # Safety
/// `p` must be a live handle, `key` a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cel_params_get(p: *const CelParams, key: *const c_char, out: *mut f64) -> CelStatus {
    guard(|| {
        let params = unsafe { params_ref(p) }?;
        let key = unsafe { str_arg(key) }?;
        let out = unsafe { out_ref(out) }?;
        *out = params
            .get_field(key)
            .ok_or_else(|| Fail(CelStatus::InvalidParams, format!("unknown parameter `{key}`")))?;
        Ok(())
    })
}

/// Steady state of the reduced moment model.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cel_steady_photons(p: *const CelParams, out: *mut CelSteadyPhotons) -> CelStatus {
    guard(|| {
        let params = unsafe { params_ref(p) }?;
        let out = unsafe { out_ref(out) }?;
        let s = steady_photon_numbers(params)?;
        *out = CelSteadyPhotons {
            n1: s.n1,
            n2: s.n2,
            c_re: s.c.re,
            c_im: s.c.im,
            abscissa_hz: to_hz(s.abscissa),
        };
        Ok(())
    })
}

/// Steady state of the full master equation with Fock cutoffs `n1_max`, `n2_max`.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cel_full_steady(
    p: *const CelParams,
    n1_max: usize,
    n2_max: usize,
    out: *mut CelFullSteady,
) -> CelStatus {
    guard(|| {
        let params = unsafe { params_ref(p) }?;
        let out = unsafe { out_ref(out) }?;
        let s = full_steady(params, FrameSpec::slow(params), truncation(n1_max, n2_max))?;
        *out = CelFullSteady {
            n1: s.obs.n1,
            n2: s.obs.n2,
            c_re: s.c.re,
            c_im: s.c.im,
            rho_gg: s.obs.pg,
            rho_ee: s.obs.pe,
            rho_dd: s.obs.pd,
            residual: s.residual,
        };
        Ok(())
    })
}

/// Phase drift and diffusion coefficients at amplitudes `r1`, `r2` and
/// phases `eta`, `theta`.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cel_diffusion(
    p: *const CelParams,
    r1: f64,
    r2: f64,
    eta: f64,
    theta: f64,
    out: *mut CelDiffusion,
) -> CelStatus {
    guard(|| {
        let params = unsafe { params_ref(p) }?;
        let out = unsafe { out_ref(out) }?;
        let d = diffusion_coefficients(
            &coefficients(params)?,
            &atom_steady_state(params)?,
            &PolarState::new(r1, r2, eta, theta)?,
        )?;
        *out = CelDiffusion {
            d_theta: d.d_theta,
            d_eta: d.d_eta,
            d_thetatheta: d.d_thetatheta,
            d_etaeta: d.d_etaeta,
            d_thetaeta: d.d_thetaeta,
        };
        Ok(())
    })
}

/// Entanglement witness Var(u) + Var(v) from the vacuum on `len` equally
/// spaced times in [0, t_end] seconds, written to `values`.
///
/// # Safety
/// `p` must be a live handle and `values` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn cel_duan_trajectory(
    p: *const CelParams,
    t_end: f64,
    values: *mut f64,
    len: usize,
) -> CelStatus {
    guard(|| {
        let params = unsafe { params_ref(p) }?;
        if values.is_null() {
            return Err(Fail(CelStatus::NullPointer, "null output buffer".into()));
        }
        if len < 2 || t_end.is_nan() || t_end <= 0.0 {
            return Err(invalid("need t_end > 0 and at least 2 points"));
        }
        let grid: Vec<f64> = (0..len).map(|k| t_end * k as f64 / (len - 1) as f64).collect();
        let traj = duan_trajectory(params, &grid, &OdeOptions::with_tol(1e-10))?;
        // SAFETY: caller guarantees `len` writable doubles.
        let out = unsafe { std::slice::from_raw_parts_mut(values, len) };
        for (o, w) in out.iter_mut().zip(&traj) {
            *o = w.duan_sum;
        }
        Ok(())
    })
}

/// Complex transmission of mode 2 probed at `omega_d_hz` with mean probe
/// photon number `n_probe`, on Fock cutoff `n2_max`.
///
/// # Safety
/// `p` must be a live handle; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cel_transmission(
    p: *const CelParams,
    omega_d_hz: f64,
    n_probe: f64,
    n2_max: usize,
    convention: CelProbeConvention,
    re: *mut f64,
    im: *mut f64,
) -> CelStatus {
    guard(|| {
        let params = unsafe { params_ref(p) }?;
        let re = unsafe { out_ref(re) }?;
        let im = unsafe { out_ref(im) }?;
        let convention = match convention {
            CelProbeConvention::HalfPrefactors => ProbeConvention::HalfPrefactors,
            CelProbeConvention::UnitPrefactors => ProbeConvention::UnitPrefactors,
        };
        let t = transmission(params, from_hz(omega_d_hz), n_probe, truncation(0, n2_max), convention)?;
        *re = t.re;
        *im = t.im;
        Ok(())
    })
}

/// Intracavity photon number from emitted power in dBm.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cel_photons_from_power(
    power_dbm: f64,
    omega_hz: f64,
    kappa_hz: f64,
    out: *mut f64,
) -> CelStatus {
    guard(|| {
        let out = unsafe { out_ref(out) }?;
        *out = photons_from_power(power_dbm, from_hz(omega_hz), from_hz(kappa_hz))?;
        Ok(())
    })
}

/// Schawlow–Townes linewidth (κ₁ + κ₂)/(2 N_tot), all in Hz.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cel_schawlow_townes(kappa1_hz: f64, kappa2_hz: f64, n_tot: f64, out: *mut f64) -> CelStatus {
    guard(|| {
        let out = unsafe { out_ref(out) }?;
        *out = to_hz(schawlow_townes(from_hz(kappa1_hz), from_hz(kappa2_hz), n_tot)?);
        Ok(())
    })
}
