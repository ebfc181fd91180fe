//! C interface to `sbm-tcl`.
//!
//! Every function returns an [`SbmStatus`]; on failure the message is kept
//! per thread and can be read with [`sbm_last_error`]. Objects created here
//! are released with the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use sbm_tcl::dynamics::{evolve, EvolveOptions, Trajectory};
use sbm_tcl::generators::{tcl2_asymptotic, tcl2_at_time, tcl4_f30, tcl4_f33, GeneratorMatrix, SystemParams};
use sbm_tcl::numerics::QuadConfig;
use sbm_tcl::spectral::{DqdSincParams, DrudeParams, SpectralDensity};
use sbm_tcl::steadystate::{assemble_report, BlochVector};
use sbm_tcl::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SbmStatus {
    Ok = 0,
    /// Invalid argument or null pointer.
    InvalidArgument = 1,
    /// A numerical procedure failed or did not converge.
    Numerical = 2,
    /// Configuration or I/O problem.
    Config = 3,
    /// Internal panic caught at the boundary.
    Panic = 4,
}

/// Spectral density handle.
pub struct SbmDensity {
    inner: Box<dyn SpectralDensity>,
}

/// Trajectory handle.
pub struct SbmTrajectory {
    inner: Trajectory,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SbmSystem {
    pub omega: f64,
    pub a1: f64,
    pub a3: f64,
    pub beta: f64,
    pub coupling_sq: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SbmBloch {
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SbmSteadyState {
    pub gibbs: SbmBloch,
    pub tcl_correction: SbmBloch,
    pub mfgs_correction: SbmBloch,
    pub assembled: SbmBloch,
    pub assembled_mfgs: SbmBloch,
    pub tcl4_f30: f64,
    pub tcl4_f33: f64,
}

impl From<BlochVector> for SbmBloch {
    fn from(v: BlochVector) -> Self {
        Self { v1: v.v1, v2: v.v2, v3: v.v3 }
    }
}

impl From<SbmBloch> for BlochVector {
    fn from(v: SbmBloch) -> Self {
        BlochVector::new(v.v1, v.v2, v.v3)
    }
}

impl From<SystemParams> for SbmSystem {
    fn from(p: SystemParams) -> Self {
        Self { omega: p.omega, a1: p.a1, a3: p.a3, beta: p.beta, coupling_sq: p.coupling_sq }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> SbmStatus {
    match e {
        Error::Validation { .. } => SbmStatus::InvalidArgument,
        Error::Config(_) | Error::Io { .. } => SbmStatus::Config,
        Error::Domain(_) | Error::Convergence { .. } | Error::Numerical(_) => SbmStatus::Numerical,
    }
}

fn guard<F: FnOnce() -> Result<(), Error>>(f: F) -> SbmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            SbmStatus::Ok
        }
        Ok(Err(e)) => {
            let s = status_of(&e);
            set_error(e.to_string());
            s
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            SbmStatus::Panic
        }
    }
}

fn non_null<T>(ptr: *const T, name: &str) -> Result<(), Error> {
    if ptr.is_null() {
        Err(Error::validation(name, "null pointer"))
    } else {
        Ok(())
    }
}

/// # Safety
/// `sys` must be null or point to a valid `SbmSystem`.
unsafe fn read_system(sys: *const SbmSystem) -> Result<SystemParams, Error> {
    non_null(sys, "system")?;
    let s = unsafe { *sys };
    SystemParams::new(s.omega, s.a1, s.a3, s.beta, s.coupling_sq)
}

/// # Safety
/// `d` must be null or a handle from an `sbm_density_*` constructor.
unsafe fn read_density<'a>(d: *const SbmDensity) -> Result<&'a dyn SpectralDensity, Error> {
    non_null(d, "density")?;
    Ok(unsafe { (*d).inner.as_ref() })
}

fn quad_config(rel_tol: f64) -> Result<QuadConfig, Error> {
    let cfg = if rel_tol > 0.0 { QuadConfig::default().with_rel_tol(rel_tol) } else { QuadConfig::default() };
    cfg.validate()?;
    Ok(cfg)
}

fn store_density(out: *mut *mut SbmDensity, inner: Box<dyn SpectralDensity>) -> Result<(), Error> {
    non_null(out, "out")?;
    unsafe { *out = Box::into_raw(Box::new(SbmDensity { inner })) };
    Ok(())
}

/// Drude density `γΛ²ω/(Λ²+ω²)`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn sbm_density_drude(gamma: f64, lambda_cut: f64, out: *mut *mut SbmDensity) -> SbmStatus {
    guard(|| store_density(out, Box::new(DrudeParams::new(gamma, lambda_cut)?)))
}

/// Double-quantum-dot phonon density with a sinc form factor and Gaussian cutoff.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn sbm_density_dqd_sinc(
    gamma: f64,
    omega_c: f64,
    omega_max: f64,
    out: *mut *mut SbmDensity,
) -> SbmStatus {
    guard(|| store_density(out, Box::new(DqdSincParams::new(gamma, omega_c, omega_max)?)))
}

/// # Safety
/// `density` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sbm_density_free(density: *mut SbmDensity) {
    if !density.is_null() {
        drop(unsafe { Box::from_raw(density) });
    }
}

/// Fill `out` from double-dot detuning and tunnelling.
///
/// # Safety
/// `out` must point to writable storage for one `SbmSystem`.
#[no_mangle]
pub unsafe extern "C" fn sbm_system_from_dqd(
    epsilon: f64,
    t_c: f64,
    beta: f64,
    coupling_sq: f64,
    out: *mut SbmSystem,
) -> SbmStatus {
    guard(|| {
        non_null(out, "out")?;
        let p = SystemParams::from_dqd(epsilon, t_c, beta, coupling_sq)?;
        unsafe { *out = p.into() };
        Ok(())
    })
}

/// Second-order steady state by both routes. `rel_tol <= 0` selects the default.
///
/// # Safety
/// Pointers must be valid; `density` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sbm_steady_state(
    sys: *const SbmSystem,
    density: *const SbmDensity,
    rel_tol: f64,
    out: *mut SbmSteadyState,
) -> SbmStatus {
    guard(|| {
        let p = unsafe { read_system(sys)? };
        let sd = unsafe { read_density(density)? };
        non_null(out, "out")?;
        let r = assemble_report(&p, sd, &quad_config(rel_tol)?)?;
        unsafe {
            *out = SbmSteadyState {
                gibbs: r.gibbs.into(),
                tcl_correction: r.tcl_correction.into(),
                mfgs_correction: r.mfgs_correction.into(),
                assembled: r.assembled.into(),
                assembled_mfgs: r.assembled_mfgs.into(),
                tcl4_f30: r.fourth_order.f30,
                tcl4_f33: r.fourth_order.f33,
            }
        };
        Ok(())
    })
}

fn write_matrix(g: &GeneratorMatrix, out: *mut f64) {
    for (i, x) in g.entries.iter().flatten().enumerate() {
        unsafe { *out.add(i) = *x };
    }
}

/// Second-order generator, row-major into `out[16]`. A negative or NaN
/// `time` selects the long-time limit.
///
/// # Safety
/// `out` must point to 16 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sbm_tcl2_generator(
    sys: *const SbmSystem,
    density: *const SbmDensity,
    time: f64,
    out: *mut f64,
) -> SbmStatus {
    guard(|| {
        let p = unsafe { read_system(sys)? };
        let sd = unsafe { read_density(density)? };
        non_null(out, "out")?;
        let g = if time >= 0.0 { tcl2_at_time(&p, sd, time)? } else { tcl2_asymptotic(&p, sd, &QuadConfig::default())? };
        write_matrix(&g, out);
        Ok(())
    })
}

/// Long-time fourth-order coefficients `F₃₀` and `F₃₃`.
///
/// # Safety
/// Output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn sbm_tcl4_coefficients(
    sys: *const SbmSystem,
    density: *const SbmDensity,
    out_f30: *mut f64,
    out_f33: *mut f64,
) -> SbmStatus {
    guard(|| {
        let p = unsafe { read_system(sys)? };
        let sd = unsafe { read_density(density)? };
        non_null(out_f30, "out_f30")?;
        non_null(out_f33, "out_f33")?;
        let cfg = QuadConfig::default();
        let (f30, f33) = (tcl4_f30(&p, sd, &cfg)?, tcl4_f33(&p, sd, &cfg)?);
        unsafe {
            *out_f30 = f30;
            *out_f33 = f33;
        }
        Ok(())
    })
}

/// Evolve `v_init` to `t_max`, sampling every `dt_out`.
///
/// # Safety
/// Pointers must be valid; `out` receives a handle freed by `sbm_trajectory_free`.
#[no_mangle]
pub unsafe extern "C" fn sbm_evolve(
    sys: *const SbmSystem,
    density: *const SbmDensity,
    v_init: *const SbmBloch,
    t_max: f64,
    dt_out: f64,
    out: *mut *mut SbmTrajectory,
) -> SbmStatus {
    guard(|| {
        let p = unsafe { read_system(sys)? };
        let sd = unsafe { read_density(density)? };
        non_null(v_init, "v_init")?;
        non_null(out, "out")?;
        let v: BlochVector = unsafe { *v_init }.into();
        let traj = evolve(&p, sd, &v, &EvolveOptions::new(t_max, dt_out))?;
        unsafe { *out = Box::into_raw(Box::new(SbmTrajectory { inner: traj })) };
        Ok(())
    })
}

/// Number of samples; 0 for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sbm_trajectory_len(traj: *const SbmTrajectory) -> usize {
    if traj.is_null() {
        0
    } else {
        unsafe { (*traj).inner.len() }
    }
}

/// Sample `index` of a trajectory.
///
/// # Safety
/// `traj` must be a live handle; output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn sbm_trajectory_sample(
    traj: *const SbmTrajectory,
    index: usize,
    out_t: *mut f64,
    out_v: *mut SbmBloch,
) -> SbmStatus {
    guard(|| {
        non_null(traj, "trajectory")?;
        non_null(out_t, "out_t")?;
        non_null(out_v, "out_v")?;
        let tr = unsafe { &(*traj).inner };
        if index >= tr.len() {
            return Err(Error::validation("index", format!("{index} out of range for {} samples", tr.len())));
        }
        unsafe {
            *out_t = tr.times[index];
            *out_v = tr.bloch(index).into();
        }
        Ok(())
    })
}

/// # Safety
/// `traj` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sbm_trajectory_free(traj: *mut SbmTrajectory) {
    if !traj.is_null() {
        drop(unsafe { Box::from_raw(traj) });
    }
}

/// Copy the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length excluding the NUL.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn sbm_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            unsafe {
                std::ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
        }
        msg.len()
    })
}
