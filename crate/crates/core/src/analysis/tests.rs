use super::*;
use crate::assembly::assemble;
use crate::geometry::Vector;
use crate::mesh::{generate, MeshFamily};
use crate::problem::{EnergyCase, Manufactured};
use crate::space::ElementOptions;
use crate::timestepping::{init_state, integrate, SteppingConfig, Stepper};

/// Static polynomial pair `u = (1 + x y, x - y²)`, `p = 1 + 2x - y + x y`.
struct Poly;

impl ProblemData for Poly {
    fn initial_velocity(&self, x: &Point) -> Vector {
        Vector::new(1.0 + x.x * x.y, x.x - x.y * x.y)
    }
    fn initial_velocity_divergence(&self, x: &Point) -> f64 {
        x.y - 2.0 * x.y
    }
    fn initial_pressure(&self, x: &Point) -> f64 {
        1.0 + 2.0 * x.x - x.y + x.x * x.y
    }
    fn dirichlet(&self, x: &Point, _t: f64) -> f64 {
        self.initial_pressure(x)
    }
    fn exact(&self, x: &Point, _t: f64) -> Option<(Vector, f64)> {
        Some((self.initial_velocity(x), self.initial_pressure(x)))
    }
    fn has_exact(&self) -> bool {
        true
    }
}

fn report(h: f64, e: f64) -> ErrorReport {
    ErrorReport {
        e_u: e,
        e_p: 2.0 * e,
        e_energy: 3.0 * e,
        h,
        k: 1,
        family: "quad".into(),
        n_u: 0,
        n_p: 0,
        wall_time: 0.0,
        c_hat: 1.0,
    }
}

#[test]
fn eoc_of_exact_power_law() {
    let h = [0.5, 0.25, 0.125, 0.0625];
    let e: Vec<f64> = h.iter().map(|x: &f64| 3.0 * x.powf(2.5)).collect();
    let r = eoc(&h, &e).unwrap();
    assert!((r.fit - 2.5).abs() < 1e-12);
    assert!(r.pairwise.iter().all(|x| (x - 2.5).abs() < 1e-12));
}

#[test]
fn eoc_rejects_bad_tables() {
    assert!(matches!(eoc(&[0.5], &[1.0]), Err(AnalysisError::TooFewRows(1))));
    assert!(matches!(eoc(&[0.5, 0.5], &[1.0, 0.5]), Err(AnalysisError::NonMonotone(1))));
    assert!(matches!(eoc(&[0.5, 0.25, 0.3], &[1.0, 0.5, 0.2]), Err(AnalysisError::NonMonotone(2))));
}

#[test]
fn csv_layout() {
    let t = ConvergenceTable { rows: vec![report(0.5, 1.0), report(0.25, 0.25)] };
    let mut buf = Vec::new();
    t.write_csv(&mut buf).unwrap();
    let s = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines[0], "h,e_u,e_p,e_energy,eoc_u,eoc_p");
    assert!(lines[1].ends_with(",,"));
    assert!(lines[2].ends_with(",2.0000,2.0000"));
}

#[test]
fn polynomial_state_has_no_error() {
    let mesh = generate(MeshFamily::Voro, 5, 1).unwrap();
    let d = Discretization::new(mesh, 2, ElementOptions::default()).unwrap();
    let mat = MaterialField::default();
    let s = assemble(&d, &mat).unwrap();
    let st = init_state(&d, &s, &mat, &Poly);
    let r = compute_errors(&d, &mat, &st, &Poly).unwrap();
    assert!(r.e_u < 1e-11 && r.e_p < 1e-11, "{r:?}");
    assert!(projection_energy_gap(&d, &mat, &Poly, 8) < 1e-22);
}

#[test]
fn missing_exact_solution_is_an_error() {
    let d = Discretization::new(generate(MeshFamily::Quad, 2, 0).unwrap(), 0, ElementOptions::default()).unwrap();
    let mat = MaterialField::default();
    let s = assemble(&d, &mat).unwrap();
    let st = init_state(&d, &s, &mat, &EnergyCase);
    assert!(matches!(compute_errors(&d, &mat, &st, &EnergyCase), Err(AnalysisError::NoExactSolution)));
}

#[test]
fn energy_gap_decays_at_double_rate() {
    let mat = MaterialField::default();
    let gaps: Vec<(f64, f64)> = [4, 8]
        .iter()
        .map(|&n| {
            let d = Discretization::new(generate(MeshFamily::Quad, n, 0).unwrap(), 1, ElementOptions::default()).unwrap();
            (d.mesh.mesh_size(), projection_energy_gap(&d, &mat, &EnergyCase, 10))
        })
        .collect();
    let rate = (gaps[0].1 / gaps[1].1).ln() / (gaps[0].0 / gaps[1].0).ln();
    assert!((rate - 4.0).abs() < 0.4, "rate {rate}");
}

#[test]
fn manufactured_errors_shrink() {
    let mat = MaterialField::default();
    let data = Manufactured { c: 1.0 };
    let errs: Vec<f64> = [4, 8]
        .iter()
        .map(|&n| {
            let d = Discretization::new(generate(MeshFamily::Quad, n, 0).unwrap(), 1, ElementOptions::default()).unwrap();
            let s = assemble(&d, &mat).unwrap();
            let mut st = Stepper::new(&d, &s, &mat, &data, SteppingConfig::theta(0.5, 0.01, 0.1)).unwrap();
            let end = integrate(&mut st, init_state(&d, &s, &mat, &data), |_, _| {}).unwrap();
            compute_errors(&d, &mat, &end, &data).unwrap().e_p
        })
        .collect();
    assert!(errs[0] / errs[1] > 3.0, "{errs:?}");
}

#[test]
fn infsup_constant_is_positive_and_mesh_stable() {
    let mat = MaterialField::default();
    let betas: Vec<f64> = [2, 4]
        .iter()
        .map(|&n| {
            let d = Discretization::new(generate(MeshFamily::Quad, n, 0).unwrap(), 1, ElementOptions::default()).unwrap();
            infsup_probe(&assemble(&d, &mat).unwrap()).unwrap()
        })
        .collect();
    assert!(betas.iter().all(|&b| b > 0.1), "{betas:?}");
    assert!(betas[1] > 0.5 * betas[0]);
}

#[test]
fn sampling_matches_projection() {
    let mesh = generate(MeshFamily::Tria, 3, 0).unwrap();
    let d = Discretization::new(mesh, 2, ElementOptions::default()).unwrap();
    let mat = MaterialField::default();
    let s = assemble(&d, &mat).unwrap();
    let st = init_state(&d, &s, &mat, &Poly);
    let pts = [Point::new(0.3, 0.7), Point::new(0.9, 0.1), Point::new(2.0, 0.5)];
    let v = sample_pressure(&d, &st.p, &pts);
    for (x, s) in pts.iter().zip(&v).take(2) {
        assert!((s.unwrap() - Poly.initial_pressure(x)).abs() < 1e-12);
    }
    assert!(v[2].is_none());
}
