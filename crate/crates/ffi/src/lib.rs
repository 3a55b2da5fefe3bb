//! C ABI over `tfch-core`.
//!
//! Every function returns a [`TfchStatus`]; on failure the message is kept per
//! thread and can be read with [`tfch_last_error_message`]. Meshes and runs are
//! opaque handles released with their `_free` functions. Output arrays are
//! caller-allocated, with their capacity passed alongside.

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tfch_core::caputo::{apply_caputo, kernel_row_b, rho_bar, rho_star, theta};
use tfch_core::diagnostics::{energy_series, EnergyForm, EnergySeries};
use tfch_core::mesh::{validate_ratio_bound, TemporalMesh};
use tfch_core::solver::{solve, Initial, Nonlinearity, RunHistory, SolverConfig, Source};
use tfch_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TfchStatus {
    Ok = 0,
    InvalidArgument = 1,
    Numeric = 2,
    NonConvergence = 3,
    NullPointer = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TfchInitial {
    Bump = 0,
    Zero = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TfchSource {
    None = 0,
    Manufactured = 1,
}

/// Solver parameters; start from [`tfch_params_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TfchParams {
    pub alpha: f64,
    pub kappa: f64,
    pub epsilon: f64,
    pub domain_a: f64,
    pub domain_b: f64,
    /// Number of spatial intervals.
    pub m: usize,
    pub iteration_tol: f64,
    pub max_iterations: usize,
    pub initial: TfchInitial,
    pub source: TfchSource,
    /// Replace `u^3 - u` by `-u`.
    pub linear: bool,
}

/// Opaque temporal mesh.
pub struct TfchMesh {
    inner: TemporalMesh,
}

/// Opaque result of a full solver run.
pub struct TfchRun {
    config: SolverConfig,
    history: RunHistory,
    energy: EnergySeries,
}

struct Failure {
    status: TfchStatus,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidArgument(_) => TfchStatus::InvalidArgument,
            Error::Numeric(_) => TfchStatus::Numeric,
            Error::NonConvergence { .. } => TfchStatus::NonConvergence,
        };
        Failure {
            status,
            message: e.to_string(),
        }
    }
}

fn fail(status: TfchStatus, message: impl Into<String>) -> Failure {
    Failure {
        status,
        message: message.into(),
    }
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TfchStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            TfchStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(e.message);
            e.status
        }
        Err(_) => {
            set_error("internal panic".into());
            TfchStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| fail(TfchStatus::NullPointer, format!("{what} is null")))
}

unsafe fn write_out<T>(p: *mut T, v: T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(fail(TfchStatus::NullPointer, format!("{what} is null")));
    }
    p.write(v);
    Ok(())
}

unsafe fn copy_out(src: &[f64], out: *mut f64, capacity: usize) -> Result<(), Failure> {
    if out.is_null() {
        return Err(fail(TfchStatus::NullPointer, "output buffer is null"));
    }
    if capacity < src.len() {
        return Err(fail(
            TfchStatus::BufferTooSmall,
            format!("need {} entries, got {capacity}", src.len()),
        ));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    Ok(())
}

unsafe fn slice_in<'a>(p: *const f64, len: usize) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(fail(TfchStatus::NullPointer, "input buffer is null"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn boxed_mesh(m: tfch_core::Result<TemporalMesh>, out: *mut *mut TfchMesh) -> Result<(), Failure> {
    let mesh = m?;
    unsafe {
        write_out(
            out,
            Box::into_raw(Box::new(TfchMesh { inner: mesh })),
            "out",
        )
    }
}

/// Copies the calling thread's last error message into `buf` (NUL terminated,
/// truncated to `len`) and returns the full message length plus one.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn tfch_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len() + 1
    })
}

/// Graded cubic mesh with `n` steps on `[0, horizon]`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn tfch_mesh_graded_cubic(
    n: usize,
    horizon: f64,
    out: *mut *mut TfchMesh,
) -> TfchStatus {
    guard(|| boxed_mesh(TemporalMesh::graded_cubic(n, horizon), out))
}

/// Uniform mesh with `n` steps on `[0, horizon]`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn tfch_mesh_uniform(
    n: usize,
    horizon: f64,
    out: *mut *mut TfchMesh,
) -> TfchStatus {
    guard(|| boxed_mesh(TemporalMesh::uniform(n, horizon), out))
}

/// Mesh from `len` positive steps.
///
/// # Safety
/// `steps` must point to `len` readable values and `out` to storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn tfch_mesh_custom(
    steps: *const f64,
    len: usize,
    out: *mut *mut TfchMesh,
) -> TfchStatus {
    guard(|| boxed_mesh(TemporalMesh::custom(slice_in(steps, len)?), out))
}

/// # Safety
/// `mesh` must be null or a handle from a `tfch_mesh_*` constructor not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tfch_mesh_free(mesh: *mut TfchMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// Number of steps `N`, or 0 for a null handle.
///
/// # Safety
/// `mesh` must be null or a live mesh handle.
#[no_mangle]
pub unsafe extern "C" fn tfch_mesh_len(mesh: *const TfchMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.inner.len())
}

/// Writes the `N + 1` nodes `t_0..t_N`.
///
/// # Safety
/// `mesh` must be a live mesh handle and `out` must point to `capacity` writable values.
#[no_mangle]
pub unsafe extern "C" fn tfch_mesh_nodes(
    mesh: *const TfchMesh,
    out: *mut f64,
    capacity: usize,
) -> TfchStatus {
    guard(|| copy_out(deref(mesh, "mesh")?.inner.nodes(), out, capacity))
}

/// Whether every ratio satisfies `1 <= rho_k <= rho*(alpha)`.
///
/// # Safety
/// `mesh` must be a live mesh handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tfch_mesh_ratio_bound_ok(
    mesh: *const TfchMesh,
    alpha: f64,
    out: *mut bool,
) -> TfchStatus {
    guard(|| {
        let r = validate_ratio_bound(&deref(mesh, "mesh")?.inner, alpha)?;
        write_out(out, r.passed(), "out")
    })
}

/// Largest admissible step ratio for `alpha` in `(0, 1]`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tfch_rho_star(alpha: f64, out: *mut f64) -> TfchStatus {
    guard(|| write_out(out, rho_star(alpha)?, "out"))
}

/// Weight of the current step in the split form of the L2 formula.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tfch_theta(alpha: f64, out: *mut f64) -> TfchStatus {
    guard(|| write_out(out, theta(alpha)?, "out"))
}

/// Minimum of `rho*` over the order and its location.
///
/// # Safety
/// `rho` and `alpha` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn tfch_rho_bar(rho: *mut f64, alpha: *mut f64) -> TfchStatus {
    guard(|| {
        let (r, a) = rho_bar()?;
        write_out(rho, r, "rho")?;
        write_out(alpha, a, "alpha")
    })
}

/// Writes the `n` kernels `B_j^{(n)}`, `j = 0..n-1` (lag order).
///
/// # Safety
/// `mesh` must be a live mesh handle and `out` must point to `capacity` writable values.
#[no_mangle]
pub unsafe extern "C" fn tfch_kernel_row_b(
    mesh: *const TfchMesh,
    alpha: f64,
    n: usize,
    out: *mut f64,
    capacity: usize,
) -> TfchStatus {
    guard(|| {
        copy_out(
            &kernel_row_b(n, &deref(mesh, "mesh")?.inner, alpha)?,
            out,
            capacity,
        )
    })
}

/// Discrete Caputo derivative at level `len - 1` of the values `w^0..w^{len-1}`.
///
/// # Safety
/// `mesh` must be a live mesh handle, `history` must point to `len` readable
/// values and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tfch_apply_caputo(
    mesh: *const TfchMesh,
    alpha: f64,
    history: *const f64,
    len: usize,
    out: *mut f64,
) -> TfchStatus {
    guard(|| {
        let v = apply_caputo(slice_in(history, len)?, &deref(mesh, "mesh")?.inner, alpha)?;
        write_out(out, v, "out")
    })
}

/// Unit domain, `kappa = 0.01`, `epsilon = 0.1`, tolerance `1e-10`, 500 iterations,
/// bump initial data, no source, double-well nonlinearity.
#[no_mangle]
pub extern "C" fn tfch_params_default(alpha: f64, m: usize) -> TfchParams {
    TfchParams {
        alpha,
        kappa: 0.01,
        epsilon: 0.1,
        domain_a: 0.0,
        domain_b: 1.0,
        m,
        iteration_tol: 1e-10,
        max_iterations: 500,
        initial: TfchInitial::Bump,
        source: TfchSource::None,
        linear: false,
    }
}

fn config(p: &TfchParams, mesh: &TemporalMesh) -> SolverConfig {
    SolverConfig {
        alpha: p.alpha,
        kappa: p.kappa,
        epsilon: p.epsilon,
        domain: (p.domain_a, p.domain_b),
        m: p.m,
        mesh: mesh.clone(),
        iteration_tol: p.iteration_tol,
        max_iterations: p.max_iterations,
        source: match p.source {
            TfchSource::None => Source::None,
            TfchSource::Manufactured => Source::Manufactured,
        },
        initial: match p.initial {
            TfchInitial::Bump => Initial::Bump,
            TfchInitial::Zero => Initial::Zero,
        },
        nonlinearity: if p.linear {
            Nonlinearity::Linear
        } else {
            Nonlinearity::DoubleWell
        },
    }
}

/// Runs the solver over the whole mesh.
///
/// # Safety
/// `params` and `mesh` must be valid pointers and `out` must point to storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn tfch_solve(
    params: *const TfchParams,
    mesh: *const TfchMesh,
    out: *mut *mut TfchRun,
) -> TfchStatus {
    guard(|| {
        let cfg = config(deref(params, "params")?, &deref(mesh, "mesh")?.inner);
        let history = solve(&cfg)?;
        let energy = energy_series(&cfg, &history, EnergyForm::NegHForm)?;
        write_out(
            out,
            Box::into_raw(Box::new(TfchRun {
                config: cfg,
                history,
                energy,
            })),
            "out",
        )
    })
}

/// # Safety
/// `run` must be null or a handle from [`tfch_solve`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tfch_run_free(run: *mut TfchRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Number of stored levels `N + 1`, or 0 for a null handle.
///
/// # Safety
/// `run` must be null or a live run handle.
#[no_mangle]
pub unsafe extern "C" fn tfch_run_levels(run: *const TfchRun) -> usize {
    run.as_ref().map_or(0, |r| r.history.states.len())
}

/// Grid values per state, `M + 1`, or 0 for a null handle.
///
/// # Safety
/// `run` must be null or a live run handle.
#[no_mangle]
pub unsafe extern "C" fn tfch_run_state_len(run: *const TfchRun) -> usize {
    run.as_ref().map_or(0, |r| r.config.m + 1)
}

/// Writes the `M + 1` values of `u^n`, boundary included.
///
/// # Safety
/// `run` must be a live run handle and `out` must point to `capacity` writable values.
#[no_mangle]
pub unsafe extern "C" fn tfch_run_state(
    run: *const TfchRun,
    n: usize,
    out: *mut f64,
    capacity: usize,
) -> TfchStatus {
    guard(|| {
        let r = deref(run, "run")?;
        let u = r.history.states.get(n).ok_or_else(|| {
            fail(
                TfchStatus::InvalidArgument,
                format!("level {n} outside the run"),
            )
        })?;
        copy_out(u.values(), out, capacity)
    })
}

/// Writes the fixed-point iteration counts of steps `1..N`.
///
/// # Safety
/// `run` must be a live run handle and `out` must point to `capacity` writable values.
#[no_mangle]
pub unsafe extern "C" fn tfch_run_iterations(
    run: *const TfchRun,
    out: *mut usize,
    capacity: usize,
) -> TfchStatus {
    guard(|| {
        let it = &deref(run, "run")?.history.iterations;
        if out.is_null() {
            return Err(fail(TfchStatus::NullPointer, "output buffer is null"));
        }
        if capacity < it.len() {
            return Err(fail(
                TfchStatus::BufferTooSmall,
                format!("need {} entries, got {capacity}", it.len()),
            ));
        }
        ptr::copy_nonoverlapping(it.as_ptr(), out, it.len());
        Ok(())
    })
}

/// Writes the free energy and the modified energy at levels `0..N`; the
/// modified energy at level 0 is NaN. Either output may be null.
///
/// # Safety
/// `run` must be a live run handle; non-null outputs must point to `capacity` writable values.
#[no_mangle]
pub unsafe extern "C" fn tfch_run_energy(
    run: *const TfchRun,
    free_energy: *mut f64,
    modified: *mut f64,
    capacity: usize,
) -> TfchStatus {
    guard(|| {
        let e = &deref(run, "run")?.energy;
        if !free_energy.is_null() {
            copy_out(&e.free_energy, free_energy, capacity)?;
        }
        if !modified.is_null() {
            let m: Vec<f64> = e
                .modified_energy
                .iter()
                .map(|v| v.unwrap_or(f64::NAN))
                .collect();
            copy_out(&m, modified, capacity)?;
        }
        Ok(())
    })
}

/// Writes the trapezoidal mass at levels `0..N`.
///
/// # Safety
/// `run` must be a live run handle and `out` must point to `capacity` writable values.
#[no_mangle]
pub unsafe extern "C" fn tfch_run_mass(
    run: *const TfchRun,
    out: *mut f64,
    capacity: usize,
) -> TfchStatus {
    guard(|| copy_out(&deref(run, "run")?.energy.mass, out, capacity))
}
