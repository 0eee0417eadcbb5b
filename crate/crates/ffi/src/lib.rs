//! C ABI for the gravsim simulator.
//!
//! Every fallible function returns a [`GsStatus`] and writes its result
//! through an out-pointer. On failure a description is kept per thread and
//! can be copied out with [`gs_last_error_message`]. Scans are opaque
//! handles created by [`gs_scan_simulate`] and released with
//! [`gs_scan_free`].

use std::cell::RefCell;
use std::ffi::{CString, c_char};
use std::panic::{AssertUnwindSafe, catch_unwind};
use std::ptr;

use gravsim::Error;
use gravsim::measurement::{FringeScan, ScanConfig, estimate_g, simulate_scan};
use gravsim::noise::{AllanMethod, SensitivityProfile, TimeSeries, allan_deviation_with, transfer_function_exact};
use gravsim::trajectory::classical_action;
use gravsim::twolevel::{evolve_pulse, mach_zehnder_probability};
use gravsim::types::{PulseParams, TwoLevelState};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InsufficientData = 3,
    Convergence = 4,
    Coverage = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsAllanMethod {
    NonOverlapping = 0,
    Overlapping = 1,
}

/// Result of a fringe fit.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GsGravityEstimate {
    pub g_hat: f64,
    pub sigma_g: f64,
    pub beta_null: f64,
    pub offset: f64,
    pub amplitude: f64,
    pub fit_residual: f64,
    pub iterations: u32,
}

/// Opaque simulated fringe scan.
pub struct GsScan {
    scan: FringeScan,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> GsStatus {
    match err {
        Error::InsufficientData(_) | Error::InvalidState { .. } => GsStatus::InsufficientData,
        Error::FitFailure(_) | Error::AmbiguousFringe(_) => GsStatus::Convergence,
        Error::Coverage(_) => GsStatus::Coverage,
        _ => GsStatus::InvalidArgument,
    }
}

fn fail(status: GsStatus, msg: impl Into<String>) -> GsStatus {
    set_error(msg.into());
    status
}

fn from_error(err: Error) -> GsStatus {
    let status = status_of(&err);
    fail(status, err.to_string())
}

/// Runs `f`, turning a panic into [`GsStatus::Panic`].
fn guard<F: FnOnce() -> GsStatus>(f: F) -> GsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(GsStatus::Panic, "internal panic"),
    }
}

/// Copy the last error message of this thread into `buf` (NUL-terminated).
/// Returns the message length without the terminator, 0 if there is none,
/// or -1 if `buf` is null or too small.
///
/// # Safety
/// `buf` must be valid for writes of `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn gs_last_error_message(buf: *mut c_char, len: usize) -> i64 {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            return 0;
        };
        let bytes = msg.as_bytes_with_nul();
        if buf.is_null() || len < bytes.len() {
            return -1;
        }
        ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, bytes.len());
        (bytes.len() - 1) as i64
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Excited-state probability after one square pulse from the ground state.
///
/// # Safety
/// `out` must be null or valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gs_pulse_excited_probability(
    rabi: f64,
    detuning: f64,
    phase: f64,
    duration: f64,
    out: *mut f64,
) -> GsStatus {
    guard(|| {
        if out.is_null() {
            return fail(GsStatus::NullPointer, "out is null");
        }
        let pulse = PulseParams::new(rabi, detuning, phase, 0.0, duration);
        if let Err(e) = pulse.validate() {
            return from_error(e);
        }
        *out = evolve_pulse(&TwoLevelState::ground(), &pulse).c_b.norm_sqr();
        GsStatus::Ok
    })
}

/// Three-pulse fringe ½[1 − cos(Δφ − δτ_p/2)].
#[no_mangle]
pub extern "C" fn gs_fringe_probability(delta: f64, tau_p: f64, dphi_laser: f64) -> f64 {
    mach_zehnder_probability(delta, tau_p, dphi_laser)
}

/// Classical action of free fall between (z1, t1) and (z2, t2).
///
/// # Safety
/// `out` must be null or valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gs_classical_action(
    z1: f64,
    t1: f64,
    z2: f64,
    t2: f64,
    mass: f64,
    g: f64,
    out: *mut f64,
) -> GsStatus {
    guard(|| {
        if out.is_null() {
            return fail(GsStatus::NullPointer, "out is null");
        }
        match classical_action(z1, t1, z2, t2, mass, g) {
            Ok(s) => {
                *out = s;
                GsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// |G(ω)| of the three-pulse sensitivity function.
///
/// # Safety
/// `out` must be null or valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gs_transfer_function(
    interrogation_time: f64,
    tau_p: f64,
    omega: f64,
    out: *mut f64,
) -> GsStatus {
    guard(|| {
        if out.is_null() {
            return fail(GsStatus::NullPointer, "out is null");
        }
        match SensitivityProfile::new(interrogation_time, tau_p) {
            Ok(p) => {
                *out = transfer_function_exact(omega, &p).norm();
                GsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Simulate a chirp scan. `n_atoms = 0` records ideal probabilities. On
/// success `*out` owns a new handle to release with [`gs_scan_free`].
///
/// # Safety
/// `betas` must point to `n` readable values; `out` must be valid for a write.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn gs_scan_simulate(
    betas: *const f64,
    n: usize,
    k_eff: f64,
    g_true: f64,
    interrogation_time: f64,
    dphi_laser: f64,
    n_atoms: u64,
    phase_noise: f64,
    seed: u64,
    out: *mut *mut GsScan,
) -> GsStatus {
    guard(|| {
        if out.is_null() || (betas.is_null() && n > 0) {
            return fail(GsStatus::NullPointer, "betas or out is null");
        }
        *out = ptr::null_mut();
        let betas = if n == 0 { &[][..] } else { std::slice::from_raw_parts(betas, n) };
        let cfg = ScanConfig {
            k_eff,
            g_true,
            interrogation_time,
            dphi_laser,
            n_atoms: (n_atoms > 0).then_some(n_atoms),
            phase_noise,
            seed,
        };
        match simulate_scan(betas, &cfg) {
            Ok(scan) => {
                *out = Box::into_raw(Box::new(GsScan { scan }));
                GsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Number of points in a scan; 0 for a null handle.
///
/// # Safety
/// `scan` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gs_scan_len(scan: *const GsScan) -> usize {
    scan.as_ref().map_or(0, |s| s.scan.betas.len())
}

/// Copy the measured excited fractions into `buf`.
///
/// # Safety
/// `scan` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn gs_scan_measured(scan: *const GsScan, buf: *mut f64, len: usize) -> GsStatus {
    guard(|| {
        let Some(s) = scan.as_ref() else {
            return fail(GsStatus::NullPointer, "scan is null");
        };
        if buf.is_null() {
            return fail(GsStatus::NullPointer, "buf is null");
        }
        let m = &s.scan.measured;
        if len < m.len() {
            return fail(
                GsStatus::BufferTooSmall,
                format!("buffer holds {len} values, scan has {}", m.len()),
            );
        }
        ptr::copy_nonoverlapping(m.as_ptr(), buf, m.len());
        GsStatus::Ok
    })
}

/// Fit the scan and convert the fringe null to g.
///
/// # Safety
/// `scan` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gs_scan_estimate_g(
    scan: *const GsScan,
    k_eff: f64,
    interrogation_time: f64,
    out: *mut GsGravityEstimate,
) -> GsStatus {
    guard(|| {
        let Some(s) = scan.as_ref() else {
            return fail(GsStatus::NullPointer, "scan is null");
        };
        if out.is_null() {
            return fail(GsStatus::NullPointer, "out is null");
        }
        match estimate_g(&s.scan, k_eff, interrogation_time) {
            Ok(e) => {
                *out = GsGravityEstimate {
                    g_hat: e.g_hat,
                    sigma_g: e.sigma_g,
                    beta_null: e.beta_null,
                    offset: e.offset,
                    amplitude: e.amplitude,
                    fit_residual: e.fit_residual,
                    iterations: e.iterations as u32,
                };
                GsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Release a scan handle. Null is ignored.
///
/// # Safety
/// `scan` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gs_scan_free(scan: *mut GsScan) {
    if !scan.is_null() {
        drop(Box::from_raw(scan));
    }
}

/// Allan deviation of `samples` at each of `n_taus` averaging times.
/// `adev_out[i]` is NaN and `blocks_out[i]` 0 where τ leaves fewer than two
/// blocks; `tau_out[i]` receives τ snapped to a whole number of samples.
///
/// # Safety
/// Input pointers must be readable for their lengths, output pointers
/// writable for `n_taus` values.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn gs_allan_deviation(
    samples: *const f64,
    n_samples: usize,
    dt: f64,
    taus: *const f64,
    n_taus: usize,
    method: GsAllanMethod,
    tau_out: *mut f64,
    adev_out: *mut f64,
    blocks_out: *mut u64,
) -> GsStatus {
    guard(|| {
        if samples.is_null() || taus.is_null() || tau_out.is_null() || adev_out.is_null() || blocks_out.is_null()
        {
            return fail(GsStatus::NullPointer, "null array argument");
        }
        let y = std::slice::from_raw_parts(samples, n_samples).to_vec();
        let taus = std::slice::from_raw_parts(taus, n_taus);
        let series = match TimeSeries::new(y, dt, 0.0) {
            Ok(s) => s,
            Err(e) => return from_error(e),
        };
        let method = match method {
            GsAllanMethod::NonOverlapping => AllanMethod::NonOverlapping,
            GsAllanMethod::Overlapping => AllanMethod::Overlapping,
        };
        let mut status = GsStatus::Ok;
        for (i, &tau) in taus.iter().enumerate() {
            let (t, a, b) = match allan_deviation_with(&series, &[tau], method) {
                Ok(r) => (r.tau_avgs[0], r.adevs[0], r.n_blocks[0] as u64),
                Err(Error::InsufficientData(msg)) => {
                    set_error(msg);
                    status = GsStatus::InsufficientData;
                    (tau, f64::NAN, 0)
                }
                Err(e) => return from_error(e),
            };
            *tau_out.add(i) = t;
            *adev_out.add(i) = a;
            *blocks_out.add(i) = b;
        }
        status
    })
}
