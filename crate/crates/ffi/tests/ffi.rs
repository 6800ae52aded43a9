use std::ffi::{c_char, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use polywave_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    let n = unsafe { pw_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..n.min(511)].iter().map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

const ENERGY: &str = r#"{
  "version": 1,
  "mesh": { "kind": "generated", "family": "quad", "n": 4 },
  "k": 1,
  "boundary": "dirichletTopBottomNeumannSides",
  "data": { "name": "energy" },
  "stepping": { "scheme": "theta", "theta": 0.5, "tau": 0.01, "T": 0.1 }
}"#;

#[test]
fn mesh_handles() {
    let family = CString::new("hexa").unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { pw_mesh_generate(family.as_ptr(), 4, 7, &mut m) }, PwStatus::Ok);
    let (mut c, mut e, mut v) = (0, 0, 0);
    assert_eq!(unsafe { pw_mesh_counts(m, &mut c, &mut e, &mut v) }, PwStatus::Ok);
    assert_eq!(c as i64 - e as i64 + v as i64, 1);
    let mut q = 0.0;
    assert_eq!(unsafe { pw_mesh_min_quality(m, &mut q) }, PwStatus::Ok);
    assert!(q > 0.0 && q <= 1.0);
    unsafe { pw_mesh_free(m) };

    let holes = CString::new("five").unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { pw_mesh_holes(holes.as_ptr(), 38, 0, &mut h) }, PwStatus::Ok);
    let mut cells = 0;
    assert_eq!(unsafe { pw_mesh_counts(h, &mut cells, ptr::null_mut(), ptr::null_mut()) }, PwStatus::Ok);
    assert_eq!(cells, 38 * 38);
    unsafe { pw_mesh_free(h) };
}

#[test]
fn errors_are_reported() {
    let bad = CString::new("octagons").unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { pw_mesh_generate(bad.as_ptr(), 4, 0, &mut m) }, PwStatus::Config);
    assert!(m.is_null());
    assert!(last_error().contains("octagons"));
    let quad = CString::new("quad").unwrap();
    assert_eq!(unsafe { pw_mesh_generate(quad.as_ptr(), 0, 0, &mut m) }, PwStatus::Config);
    assert_eq!(unsafe { pw_mesh_generate(ptr::null(), 4, 0, &mut m) }, PwStatus::NullPointer);
    assert_eq!(unsafe { pw_mesh_generate(quad.as_ptr(), 4, 0, ptr::null_mut()) }, PwStatus::NullPointer);
    assert_eq!(unsafe { pw_solver_step(ptr::null_mut(), 1) }, PwStatus::NullPointer);
    let cfg = CString::new(ENERGY.replace("\"k\": 1", "\"k\": 9")).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { pw_solver_new(cfg.as_ptr(), &mut s) }, PwStatus::Config);
    assert!(last_error().contains("k = 9"));
    // Truncation keeps the terminator and reports the full length.
    let mut small = [1 as c_char; 4];
    let n = unsafe { pw_last_error_message(small.as_mut_ptr(), small.len()) };
    assert!(n > 3 && small[3] == 0);
    unsafe {
        pw_mesh_free(ptr::null_mut());
        pw_solver_free(ptr::null_mut());
    }
}

#[test]
fn solver_conserves_energy() {
    let cfg = CString::new(ENERGY).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { pw_solver_new(cfg.as_ptr(), &mut s) }, PwStatus::Ok, "{}", last_error());
    let (mut t0, mut e0) = (-1.0, 0.0);
    assert_eq!(unsafe { pw_solver_state(s, &mut t0, &mut e0) }, PwStatus::Ok);
    assert_eq!(t0, 0.0);
    assert_eq!(unsafe { pw_solver_step(s, 10) }, PwStatus::Ok);
    let (mut t1, mut e1) = (0.0, 0.0);
    assert_eq!(unsafe { pw_solver_state(s, &mut t1, &mut e1) }, PwStatus::Ok);
    assert!((t1 - 0.1).abs() < 1e-12);
    assert!((e1 - e0).abs() <= 1e-10 * e0);
    let (mut nu, mut np) = (0, 0);
    assert_eq!(unsafe { pw_solver_dofs(s, &mut nu, &mut np) }, PwStatus::Ok);
    assert_eq!(np, 16 * 3);
    assert_eq!(nu, 40 * 2 + 16 * 3);
    let mut p = 0.0;
    assert_eq!(unsafe { pw_solver_pressure_at(s, 0.3, 0.4, &mut p) }, PwStatus::Ok);
    assert!(p.is_finite());
    assert_eq!(unsafe { pw_solver_pressure_at(s, 3.0, 0.4, &mut p) }, PwStatus::Config);
    unsafe { pw_solver_free(s) };
}

#[test]
fn header_is_current_and_compiles() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/polywave.h")).unwrap();
    for sym in ["pw_mesh_generate", "pw_solver_new", "pw_solver_step", "pw_last_error_message", "typedef struct PwSolver PwSolver", "PW_STATUS_SOLVER = 3"] {
        assert!(header.contains(sym), "{sym} missing from header");
    }
    let Ok(out) = Command::new("cc").args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"]).arg(dir.join("include/polywave.h")).output() else {
        eprintln!("no C compiler, syntax check skipped");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
