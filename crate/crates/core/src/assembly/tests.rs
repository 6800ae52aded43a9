use super::*;
use crate::geometry::Vector;
use crate::mesh::{generate, rules, MeshFamily};
use crate::problem::{EnergyCase, ProblemData, Zero};
use crate::space::fortin_interpolate;
use crate::testing::PolyField;

fn disc(family: MeshFamily, n: usize, k: usize) -> Discretization {
    Discretization::new(generate(family, n, 1).unwrap(), k, ElementOptions::default()).unwrap()
}

#[test]
fn two_by_two_quad_lowest_order() {
    let d = disc(MeshFamily::Quad, 2, 0);
    let s = assemble(&d, &MaterialField::default()).unwrap();
    assert_eq!((s.m.nrows, s.m.ncols), (12, 12));
    assert_eq!((s.n.nrows, s.n.ncols), (4, 4));
    assert_eq!((s.b.nrows, s.b.ncols), (4, 12));
    let nd = s.n.to_dense();
    for i in 0..4 {
        for j in 0..4 {
            let want = if i == j { 0.25 } else { 0.0 };
            assert!((nd[(i, j)] - want).abs() < 1e-15);
        }
    }
    // Hand oracle: b(φ_e, 1) = σ_e h_e on each cell's four edges.
    let bd = s.b.to_dense();
    for (c, cell) in d.mesh.cells.iter().enumerate() {
        let mut expect = DVector::zeros(12);
        for (j, &e) in cell.edges.iter().enumerate() {
            expect[e] = d.mesh.orientation(c, j) * 0.5;
        }
        assert!((bd.row(c).transpose() - expect).norm() < 1e-15);
    }
    // Interior edges contribute to two rows with opposite signs.
    for (e, edge) in d.mesh.edges.iter().enumerate() {
        let col_sum: f64 = (0..4).map(|c| bd[(c, e)]).sum();
        if edge.cells.1.is_some() {
            assert!(col_sum.abs() < 1e-15);
        }
    }
    assert_eq!(s.m.asymmetry(), 0.0);
}

#[test]
fn constant_flow_is_divergence_free() {
    for fam in MeshFamily::ALL {
        for k in 0..=2 {
            let d = disc(fam, 4, k);
            let s = assemble(&d, &MaterialField::default()).unwrap();
            let u = fortin_interpolate(&d.mesh, &d.dofs, &d.elements, &PolyField::constant(Vector::new(1.0, 0.0)), 2 * k + 2);
            assert!(s.b.mul(&u).amax() < 1e-13, "{fam:?} k={k}");
            assert_eq!(s.m.asymmetry(), 0.0);
            assert_eq!(s.n.asymmetry(), 0.0);
        }
    }
}

#[test]
fn robin_block() {
    let d = disc(MeshFamily::Quad, 3, 1);
    assert_eq!(assemble(&d, &MaterialField::default()).unwrap().r.max_abs(), 0.0);
    let mesh = generate(MeshFamily::Quad, 3, 0).unwrap().tag_boundary(|_| Some(BoundaryTag::Robin)).unwrap();
    let d = Discretization::new(mesh, 1, ElementOptions::default()).unwrap();
    let s = assemble(&d, &MaterialField::uniform(2.0)).unwrap();
    let rd = s.r.to_dense();
    assert!(rd.symmetric_eigenvalues().min() >= -1e-13);
    // Constant unit trace on one edge: r = c h_e.
    let e = d.mesh.boundary_edges().next().unwrap();
    let mut u = DVector::zeros(d.dofs.n_u);
    u[d.dofs.edge_dof(e, 0)] = 1.0;
    assert!((u.dot(&s.r.mul(&u)) - 2.0 / 3.0).abs() < 1e-15);
    // Against an edge-quadrature oracle for linear traces.
    let re = local_robin(0.7, 1.3, 1.0, 1);
    let rule = edge_rule(&Point::new(0.0, 0.0), &Point::new(0.7, 0.0), 6);
    for i in 0..2 {
        for j in 0..2 {
            let q: f64 = rule
                .params
                .iter()
                .zip(&rule.weights)
                .map(|(s, w)| w * 1.3 * (2 * i + 1) as f64 * legendre(i, *s) * (2 * j + 1) as f64 * legendre(j, *s))
                .sum();
            assert!((re[(i, j)] - q).abs() < 1e-14);
        }
    }
}

struct UnitSource;
impl ProblemData for UnitSource {
    fn source(&self, _: &Point, _: f64) -> f64 {
        1.0
    }
}

#[test]
fn load_vectors() {
    let d = disc(MeshFamily::Voro, 4, 0);
    let mat = MaterialField::default();
    let l = loads(&d, &mat, &UnitSource, 0.0);
    for (c, cell) in d.mesh.cells.iter().enumerate() {
        assert!((l.f[c] - cell.area).abs() < 1e-15);
    }
    let l = loads(&d, &mat, &Zero, 0.3);
    assert_eq!(l.f.amax() + l.g.amax(), 0.0);
    let mesh = generate(MeshFamily::Quad, 4, 0).unwrap().tag_boundary(rules::dirichlet_top_bottom_neumann_sides).unwrap();
    let d = Discretization::new(mesh, 2, ElementOptions::default()).unwrap();
    let s = assemble(&d, &mat).unwrap();
    let l = loads(&d, &mat, &EnergyCase, 0.0);
    assert_eq!(l.essential_values.len(), s.essential.len());
    assert_eq!(l.f.amax() + l.g.amax() + l.essential_values.amax(), 0.0);
}

#[test]
fn mass_norm_equivalence_is_stable() {
    // m_h(v, v) / ‖Π⁰ v‖² for interpolated smooth fields on refined voro meshes.
    let field = crate::space::FnField {
        value: |x: &Point| Vector::new((3.0 * x.y).sin() + x.x, (2.0 * x.x).cos()),
        divergence: |_: &Point| 1.0,
    };
    let mut ratios = Vec::new();
    for n in [4, 8, 16] {
        let d = disc(MeshFamily::Voro, n, 1);
        let s = assemble(&d, &MaterialField::default()).unwrap();
        let u = fortin_interpolate(&d.mesh, &d.dofs, &d.elements, &field, 8);
        let mut proj = 0.0;
        for (c, e) in d.elements.iter().enumerate() {
            let loc = DVector::from_iterator(e.num_dofs(), d.dofs.cell_dofs[c].iter().map(|&g| u[g]));
            let pc = e.project(&loc);
            proj += pc.dot(&(&e.g * &pc));
        }
        ratios.push(u.dot(&s.m.mul(&u)) / proj);
    }
    for r in &ratios {
        assert!(*r >= 1.0 - 1e-12 && *r <= 10.0, "{ratios:?}");
    }
}

#[test]
fn random_dof_vectors_have_positive_mass() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    let d = disc(MeshFamily::Hexa, 4, 2);
    let s = assemble(&d, &MaterialField::default()).unwrap();
    for _ in 0..5 {
        let v = DVector::from_fn(d.dofs.n_u, |_, _| rng.random_range(-1.0..1.0));
        assert!(v.dot(&s.m.mul(&v)) > 0.0);
    }
}
