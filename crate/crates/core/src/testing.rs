//! Fixtures shared by unit, integration and acceptance tests: random
//! polygons and analytic vector fields with exact divergence.

use rand::Rng;

use crate::geometry::{Point, Vector};
use crate::mesh::PolygonalMesh;
use crate::quadrature::multi_indices;
use crate::space::VectorField;

/// Random polygon star-shaped with respect to its centroid region: `n`
/// sorted angles with jittered radii around `centre`.
pub fn random_star_polygon(rng: &mut impl Rng, n: usize, centre: Point, scale: f64) -> Vec<Point> {
    loop {
        let mut angles: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * std::f64::consts::TAU).collect();
        angles.sort_by(f64::total_cmp);
        let gap_ok = (0..n).all(|i| {
            let next = if i + 1 < n { angles[i + 1] } else { angles[0] + std::f64::consts::TAU };
            let gap = next - angles[i];
            gap > 0.15 && gap < 0.9 * std::f64::consts::PI
        });
        if !gap_ok {
            continue;
        }
        let pts: Vec<Point> = angles
            .iter()
            .map(|&a| {
                let r = scale * (0.6 + 0.4 * rng.random::<f64>());
                Point::new(centre.x + r * a.cos(), centre.y + r * a.sin())
            })
            .collect();
        if crate::geometry::is_simple(&pts) {
            return pts;
        }
    }
}

/// A one-cell mesh from a polygon.
pub fn single_cell_mesh(poly: &[Point]) -> PolygonalMesh {
    PolygonalMesh::from_cells(poly.to_vec(), vec![(0..poly.len()).collect()], vec![0])
        .expect("valid polygon")
        .tag_boundary(crate::mesh::rules::all_dirichlet)
        .expect("all edges tagged")
}

/// Vector polynomial `Σ (a_α, b_α) x^α` in global coordinates.
#[derive(Clone, Debug)]
pub struct PolyField {
    pub indices: Vec<(u32, u32)>,
    pub ax: Vec<f64>,
    pub ay: Vec<f64>,
}

impl PolyField {
    pub fn random(rng: &mut impl Rng, degree: usize) -> Self {
        let indices = multi_indices(degree);
        let ax = indices.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
        let ay = indices.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
        Self { indices, ax, ay }
    }

    pub fn constant(v: Vector) -> Self {
        Self { indices: vec![(0, 0)], ax: vec![v.x], ay: vec![v.y] }
    }
}

fn mono(x: f64, y: f64, a: i32, b: i32) -> f64 {
    if a < 0 || b < 0 {
        0.0
    } else {
        x.powi(a) * y.powi(b)
    }
}

impl VectorField for PolyField {
    fn value(&self, p: &Point) -> Vector {
        let mut v = Vector::zeros();
        for ((&(a, b), ax), ay) in self.indices.iter().zip(&self.ax).zip(&self.ay) {
            let m = mono(p.x, p.y, a as i32, b as i32);
            v += Vector::new(ax * m, ay * m);
        }
        v
    }

    fn divergence(&self, p: &Point) -> f64 {
        let mut d = 0.0;
        for ((&(a, b), ax), ay) in self.indices.iter().zip(&self.ax).zip(&self.ay) {
            let (a, b) = (a as i32, b as i32);
            d += ax * a as f64 * mono(p.x, p.y, a - 1, b) + ay * b as f64 * mono(p.x, p.y, a, b - 1);
        }
        d
    }
}

/// `w = (Σ a_i sin(k_i·x + φ_i), Σ b_i cos(l_i·x + ψ_i))`.
#[derive(Clone, Debug)]
pub struct TrigField {
    terms: Vec<(f64, Vector, f64, f64, Vector, f64)>,
}

impl TrigField {
    pub fn random(rng: &mut impl Rng, terms: usize, max_wavenumber: f64) -> Self {
        let wave = |rng: &mut dyn rand::RngCore| {
            Vector::new(rng.random_range(-max_wavenumber..max_wavenumber), rng.random_range(-max_wavenumber..max_wavenumber))
        };
        let terms = (0..terms)
            .map(|_| {
                let k = wave(rng);
                let l = wave(rng);
                (
                    rng.random_range(-1.0..1.0),
                    k,
                    rng.random_range(0.0..std::f64::consts::TAU),
                    rng.random_range(-1.0..1.0),
                    l,
                    rng.random_range(0.0..std::f64::consts::TAU),
                )
            })
            .collect();
        Self { terms }
    }
}

impl VectorField for TrigField {
    fn value(&self, p: &Point) -> Vector {
        self.terms.iter().fold(Vector::zeros(), |acc, (a, k, phi, b, l, psi)| {
            acc + Vector::new(a * (k.dot(&p.coords) + phi).sin(), b * (l.dot(&p.coords) + psi).cos())
        })
    }

    fn divergence(&self, p: &Point) -> f64 {
        self.terms
            .iter()
            .map(|(a, k, phi, b, l, psi)| a * k.x * (k.dot(&p.coords) + phi).cos() - b * l.y * (l.dot(&p.coords) + psi).sin())
            .sum()
    }
}
