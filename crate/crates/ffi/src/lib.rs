//! C interface: opaque mesh and solver handles, integer status codes and a
//! thread-local last-error message.
//!
//! Every function returns a [`PwStatus`]. Outputs go through pointer
//! arguments and are only written on success. Handles are released with the
//! matching `*_free` function; passing null to a `*_free` function is a no-op.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use polywave::geometry::Point;
use polywave::mesh::{self, HoleConfig, MeshFamily, PolygonalMesh};
use polywave::scenario::{Scenario, ScenarioConfig, ScenarioError};
use polywave::timestepping::{Stepper, WaveState};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PwStatus {
    Ok = 0,
    NullPointer = 1,
    /// Invalid argument or scenario; matches the CLI's exit code 2.
    Config = 2,
    /// Assembly, factorization or time-step failure; matches exit code 3.
    Solver = 3,
    Io = 4,
    Panic = 5,
}

/// A polygonal mesh.
pub struct PwMesh {
    mesh: PolygonalMesh,
}

/// A discretized scenario with its time stepper and current state.
pub struct PwSolver {
    // Borrows from `scenario`, which `pw_solver_free` reclaims after dropping this.
    stepper: Stepper<'static>,
    state: WaveState,
    scenario: *mut Scenario,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn fail(status: PwStatus, msg: impl Into<String>) -> PwStatus {
    set_error(msg);
    status
}

fn scenario_status(e: &ScenarioError) -> PwStatus {
    match e {
        ScenarioError::Config(_) => PwStatus::Config,
        ScenarioError::Solver(_) => PwStatus::Solver,
        ScenarioError::Io { .. } => PwStatus::Io,
    }
}

fn guard(f: impl FnOnce() -> PwStatus) -> PwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(PwStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, PwStatus> {
    if p.is_null() {
        return Err(fail(PwStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(PwStatus::Config, format!("{what} is not valid UTF-8")))
}

/// Copies the last error message of the calling thread into `buf` (always
/// NUL-terminated when `len > 0`) and returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn pw_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = e.len().min(len - 1);
            ptr::copy_nonoverlapping(e.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        e.len()
    })
}

/// Generates a unit-square mesh of family `tria`, `quad`, `hexa` or `voro`.
///
/// # Safety
/// `family` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pw_mesh_generate(family: *const c_char, n: usize, seed: u64, out: *mut *mut PwMesh) -> PwStatus {
    guard(|| {
        if out.is_null() {
            return fail(PwStatus::NullPointer, "out is null");
        }
        let family: MeshFamily = match str_arg(family, "family").map(str::parse) {
            Ok(Ok(f)) => f,
            Ok(Err(e)) => return fail(PwStatus::Config, e.to_string()),
            Err(s) => return s,
        };
        match mesh::generate(family, n, seed) {
            Ok(mesh) => {
                *out = Box::into_raw(Box::new(PwMesh { mesh }));
                PwStatus::Ok
            }
            Err(e) => fail(PwStatus::Config, e.to_string()),
        }
    })
}

/// Builds a hole mesh, `config` being `five` or `eight`.
///
/// # Safety
/// As [`pw_mesh_generate`].
#[no_mangle]
pub unsafe extern "C" fn pw_mesh_holes(config: *const c_char, n: usize, refine: u32, out: *mut *mut PwMesh) -> PwStatus {
    guard(|| {
        if out.is_null() {
            return fail(PwStatus::NullPointer, "out is null");
        }
        let config: HoleConfig = match str_arg(config, "config").map(str::parse) {
            Ok(Ok(c)) => c,
            Ok(Err(e)) => return fail(PwStatus::Config, e.to_string()),
            Err(s) => return s,
        };
        match mesh::build_holes_mesh(config, n, refine) {
            Ok(mesh) => {
                *out = Box::into_raw(Box::new(PwMesh { mesh }));
                PwStatus::Ok
            }
            Err(e) => fail(PwStatus::Config, e.to_string()),
        }
    })
}

/// Cell, edge and vertex counts. Any of the outputs may be null.
///
/// # Safety
/// `mesh` must be a live handle; non-null outputs must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pw_mesh_counts(mesh: *const PwMesh, cells: *mut usize, edges: *mut usize, vertices: *mut usize) -> PwStatus {
    guard(|| {
        let Some(m) = mesh.as_ref() else {
            return fail(PwStatus::NullPointer, "mesh is null");
        };
        for (p, v) in [(cells, m.mesh.num_cells()), (edges, m.mesh.num_edges()), (vertices, m.mesh.num_vertices())] {
            if !p.is_null() {
                *p = v;
            }
        }
        PwStatus::Ok
    })
}

/// Smallest star-shapedness ratio over the cells.
///
/// # Safety
/// `mesh` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pw_mesh_min_quality(mesh: *const PwMesh, out: *mut f64) -> PwStatus {
    guard(|| {
        let (Some(m), false) = (mesh.as_ref(), out.is_null()) else {
            return fail(PwStatus::NullPointer, "mesh or out is null");
        };
        match mesh::validate(&m.mesh) {
            Ok(r) => {
                *out = r.min_rho_star();
                PwStatus::Ok
            }
            Err(e) => fail(PwStatus::Config, e.to_string()),
        }
    })
}

/// # Safety
/// `mesh` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn pw_mesh_free(mesh: *mut PwMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// Builds a solver from a scenario in JSON and sets the initial state.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pw_solver_new(config_json: *const c_char, out: *mut *mut PwSolver) -> PwStatus {
    guard(|| {
        if out.is_null() {
            return fail(PwStatus::NullPointer, "out is null");
        }
        let text = match str_arg(config_json, "config_json") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let scenario = match ScenarioConfig::from_json(text).and_then(|c| Scenario::new(c, None)) {
            Ok(s) => Box::into_raw(Box::new(s)),
            Err(e) => return fail(scenario_status(&e), e.to_string()),
        };
        // SAFETY: the box stays alive until `pw_solver_free`, which drops the
        // stepper before reclaiming it.
        let sc: &'static Scenario = &*scenario;
        match Stepper::new(&sc.disc, &sc.system, &sc.material, sc.data.as_ref(), sc.config.stepping.clone()) {
            Ok(stepper) => {
                let state = sc.initial_state();
                *out = Box::into_raw(Box::new(PwSolver { stepper, state, scenario }));
                PwStatus::Ok
            }
            Err(e) => {
                drop(Box::from_raw(scenario));
                fail(PwStatus::Solver, e.to_string())
            }
        }
    })
}

/// Advances `steps` time steps. On failure the state is left at the last
/// completed step.
///
/// # Safety
/// `solver` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pw_solver_step(solver: *mut PwSolver, steps: usize) -> PwStatus {
    guard(|| {
        let Some(s) = solver.as_mut() else {
            return fail(PwStatus::NullPointer, "solver is null");
        };
        for _ in 0..steps {
            match s.stepper.step(&s.state) {
                Ok(next) => s.state = next,
                Err(e) => return fail(PwStatus::Solver, e.to_string()),
            }
        }
        PwStatus::Ok
    })
}

/// Current time and discrete energy `u^T M u + p^T N p`. Either output may be null.
///
/// # Safety
/// `solver` must be a live handle; non-null outputs must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pw_solver_state(solver: *const PwSolver, time: *mut f64, energy: *mut f64) -> PwStatus {
    guard(|| {
        let Some(s) = solver.as_ref() else {
            return fail(PwStatus::NullPointer, "solver is null");
        };
        if !time.is_null() {
            *time = s.state.t;
        }
        if !energy.is_null() {
            *energy = s.state.energy;
        }
        PwStatus::Ok
    })
}

/// Velocity and pressure unknown counts. Either output may be null.
///
/// # Safety
/// As [`pw_solver_state`].
#[no_mangle]
pub unsafe extern "C" fn pw_solver_dofs(solver: *const PwSolver, n_u: *mut usize, n_p: *mut usize) -> PwStatus {
    guard(|| {
        let Some(s) = solver.as_ref() else {
            return fail(PwStatus::NullPointer, "solver is null");
        };
        let d = &(*s.scenario).disc.dofs;
        if !n_u.is_null() {
            *n_u = d.n_u;
        }
        if !n_p.is_null() {
            *n_p = d.n_p;
        }
        PwStatus::Ok
    })
}

/// Discrete pressure at `(x, y)`; `PW_STATUS_CONFIG` outside the mesh.
///
/// # Safety
/// `solver` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pw_solver_pressure_at(solver: *const PwSolver, x: f64, y: f64, out: *mut f64) -> PwStatus {
    guard(|| {
        let (Some(s), false) = (solver.as_ref(), out.is_null()) else {
            return fail(PwStatus::NullPointer, "solver or out is null");
        };
        match polywave::analysis::sample_pressure(&(*s.scenario).disc, &s.state.p, &[Point::new(x, y)])[0] {
            Some(v) => {
                *out = v;
                PwStatus::Ok
            }
            None => fail(PwStatus::Config, format!("point ({x}, {y}) is outside the mesh")),
        }
    })
}

/// # Safety
/// `solver` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn pw_solver_free(solver: *mut PwSolver) {
    if solver.is_null() {
        return;
    }
    let s = Box::from_raw(solver);
    let scenario = s.scenario;
    drop(s);
    drop(Box::from_raw(scenario));
}
