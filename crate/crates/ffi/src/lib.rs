//! C ABI for the simulator.
//!
//! Every function returns a [`VwStatus`]; on failure the message is kept per
//! thread and read with [`vw_last_error_message`]. Simulations live behind the
//! opaque [`VwSimulation`] handle and must be released with
//! [`vw_simulation_free`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use vlasov_wave::app::grid_for;
use vlasov_wave::diagnostics::record;
use vlasov_wave::division::{pair_lhs, pair_rhs, TestFunction};
use vlasov_wave::{parse_config, Error, Simulation};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidConfig = 3,
    InvalidArgument = 4,
    BufferTooSmall = 5,
    /// The run already reached its final step.
    Finished = 6,
    /// Light-cone contact or another failure while stepping.
    Runtime = 7,
    Panic = 8,
}

/// Which grid function [`vw_simulation_copy_field`] returns.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VwField {
    A = 0,
    DtA = 1,
    DxA = 2,
    BPlus = 3,
    BMinus = 4,
    Rho = 5,
    Current = 6,
}

/// Diagnostics of the current time level.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VwDiagnostics {
    pub step: usize,
    pub t: f64,
    pub mass: f64,
    pub kinetic: f64,
    pub field: f64,
    pub total: f64,
    pub p_of_t: f64,
    pub sup_dta: f64,
    pub sup_dxdta: f64,
    pub sup_j: f64,
    pub f_max: f64,
    pub undershoot: f64,
}

/// Opaque simulation handle.
pub struct VwSimulation {
    sim: Simulation,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into_bytes());
}

fn fail(status: VwStatus, msg: impl Into<String>) -> VwStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> VwStatus {
    let status = if e.exit_code() == 1 { VwStatus::InvalidConfig } else { VwStatus::Runtime };
    fail(status, e.to_string())
}

/// Run `f`, turning a panic into [`VwStatus::Panic`].
fn guard(f: impl FnOnce() -> VwStatus) -> VwStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(VwStatus::Panic, "internal panic"))
}

unsafe fn handle<'a>(sim: *const VwSimulation) -> Option<&'a VwSimulation> {
    sim.as_ref()
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> VwStatus {
    if buf.is_null() {
        return fail(VwStatus::NullPointer, "output buffer is null");
    }
    if len < src.len() {
        return fail(VwStatus::BufferTooSmall, format!("buffer holds {len} values, {} needed", src.len()));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    VwStatus::Ok
}

/// Copy the last error message, NUL-terminated and truncated to `len` bytes.
/// Returns the full message length without the terminator.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn vw_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn vw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Relativistic velocity `v / √(1 + v²)`.
#[no_mangle]
pub extern "C" fn vw_v_hat(v: f64) -> f64 {
    vlasov_wave::v_hat(v)
}

/// Build a simulation from configuration text. The grid and initial state
/// are set up; no step is taken.
///
/// # Safety
/// `config` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn vw_simulation_new(config: *const c_char, out: *mut *mut VwSimulation) -> VwStatus {
    guard(|| {
        if config.is_null() || out.is_null() {
            return fail(VwStatus::NullPointer, "config or out is null");
        }
        *out = ptr::null_mut();
        let Ok(text) = CStr::from_ptr(config).to_str() else {
            return fail(VwStatus::InvalidUtf8, "config is not UTF-8");
        };
        let built = parse_config(text)
            .map_err(Error::from)
            .and_then(|cfg| Simulation::new(grid_for(&cfg, cfg.grid.t_final)?, cfg.data, cfg.solver));
        match built {
            Ok(sim) => {
                *out = Box::into_raw(Box::new(VwSimulation { sim }));
                VwStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Release a handle. Null is ignored.
///
/// # Safety
/// `sim` must come from [`vw_simulation_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn vw_simulation_free(sim: *mut VwSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Advance one step.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn vw_simulation_step(sim: *mut VwSimulation) -> VwStatus {
    guard(|| {
        let Some(h) = sim.as_mut() else {
            return fail(VwStatus::NullPointer, "simulation is null");
        };
        if h.sim.state.step >= h.sim.grid.n_steps {
            return fail(VwStatus::Finished, "run already at its final step");
        }
        h.sim.step().map_or_else(from_error, |()| VwStatus::Ok)
    })
}

/// Advance to the final step.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn vw_simulation_run(sim: *mut VwSimulation) -> VwStatus {
    guard(|| {
        let Some(h) = sim.as_mut() else {
            return fail(VwStatus::NullPointer, "simulation is null");
        };
        h.sim.run().map_or_else(from_error, |()| VwStatus::Ok)
    })
}

/// Node counts `(nx + 1, nv + 1)`, the current step and the total step count.
///
/// # Safety
/// `sim` must be a live handle; each output pointer may be null.
#[no_mangle]
pub unsafe extern "C" fn vw_simulation_shape(
    sim: *const VwSimulation,
    nx_nodes: *mut usize,
    nv_nodes: *mut usize,
    step: *mut usize,
    n_steps: *mut usize,
) -> VwStatus {
    let Some(h) = handle(sim) else {
        return fail(VwStatus::NullPointer, "simulation is null");
    };
    let g = &h.sim.grid;
    for (p, v) in [(nx_nodes, g.nx1()), (nv_nodes, g.nv1()), (step, h.sim.state.step), (n_steps, g.n_steps)] {
        if !p.is_null() {
            *p = v;
        }
    }
    VwStatus::Ok
}

/// Diagnostics of the current level.
///
/// # Safety
/// `sim` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vw_simulation_diagnostics(sim: *const VwSimulation, out: *mut VwDiagnostics) -> VwStatus {
    guard(|| {
        let Some(h) = handle(sim) else {
            return fail(VwStatus::NullPointer, "simulation is null");
        };
        if out.is_null() {
            return fail(VwStatus::NullPointer, "out is null");
        }
        let r = record(&h.sim);
        *out = VwDiagnostics {
            step: r.step,
            t: r.t,
            mass: r.mass,
            kinetic: r.kinetic,
            field: r.field,
            total: r.total,
            p_of_t: r.p_of_t,
            sup_dta: r.sup_dta,
            sup_dxdta: r.sup_dxdta,
            sup_j: r.sup_j,
            f_max: r.f_max,
            undershoot: r.undershoot,
        };
        VwStatus::Ok
    })
}

/// Copy `f` at the current level, x-major: `f[i * nv_nodes + j]`.
///
/// # Safety
/// `sim` must be a live handle and `buf` point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn vw_simulation_copy_distribution(sim: *const VwSimulation, buf: *mut f64, len: usize) -> VwStatus {
    let Some(h) = handle(sim) else {
        return fail(VwStatus::NullPointer, "simulation is null");
    };
    copy_out(&h.sim.state.distribution.values, buf, len)
}

/// Copy one grid function of x (length `nx_nodes`).
///
/// # Safety
/// `sim` must be a live handle and `buf` point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn vw_simulation_copy_field(
    sim: *const VwSimulation,
    which: VwField,
    buf: *mut f64,
    len: usize,
) -> VwStatus {
    let Some(h) = handle(sim) else {
        return fail(VwStatus::NullPointer, "simulation is null");
    };
    let s = &h.sim.state;
    let owned;
    let src: &[f64] = match which {
        VwField::A => &s.fields.a,
        VwField::BPlus => &s.fields.b_plus,
        VwField::BMinus => &s.fields.b_minus,
        VwField::Rho => &s.rho,
        VwField::Current => &s.j,
        VwField::DtA => {
            owned = s.fields.dt_a();
            &owned
        }
        VwField::DxA => {
            owned = s.fields.dx_a();
            &owned
        }
    };
    copy_out(src, buf, len)
}

/// Both sides of the division identity at speed `a` for a named test
/// function (`product_bump`, `product_bump_squared`, `offset`, `odd_in_x`,
/// `away_from_rays`).
///
/// # Safety
/// `preset` must be a NUL-terminated string; `lhs` and `rhs` writable.
#[no_mangle]
pub unsafe extern "C" fn vw_division_pair(a: f64, preset: *const c_char, lhs: *mut f64, rhs: *mut f64) -> VwStatus {
    guard(|| {
        if preset.is_null() || lhs.is_null() || rhs.is_null() {
            return fail(VwStatus::NullPointer, "preset, lhs or rhs is null");
        }
        let Ok(name) = CStr::from_ptr(preset).to_str() else {
            return fail(VwStatus::InvalidUtf8, "preset is not UTF-8");
        };
        let Some(phi) = TestFunction::preset(name) else {
            return fail(VwStatus::InvalidArgument, format!("unknown test function `{name}`"));
        };
        match pair_lhs(a, &phi).and_then(|l| Ok((l, pair_rhs(a, &phi)?))) {
            Ok((l, r)) => {
                *lhs = l;
                *rhs = r;
                VwStatus::Ok
            }
            Err(e @ Error::SpeedOutOfRange(_)) => fail(VwStatus::InvalidArgument, e.to_string()),
            Err(e) => from_error(e),
        }
    })
}
