use serde::Serialize;

use super::{MeshError, PolygonalMesh};
use crate::geometry::{clip_convex, is_simple, HalfPlane, Point};

/// Shape-regularity figures of a mesh.
#[derive(Clone, Debug, Serialize)]
pub struct MeshQualityReport {
    /// Inradius of the kernel over the diameter, per cell.
    pub rho_star: Vec<f64>,
    /// `min_E min_e h_e / h_E`.
    pub rho_edge: f64,
    pub h: f64,
    /// Cell with the smallest `min(rho_star, edge ratio)`.
    pub worst_cell: usize,
}

impl MeshQualityReport {
    pub fn min_rho_star(&self) -> f64 {
        self.rho_star.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Radius of the largest disc inside the intersection of the interior
/// half-planes of all edges.
fn kernel_inradius(poly: &[Point], h: f64) -> f64 {
    let n = poly.len();
    let planes: Vec<HalfPlane> = (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            let t = (b - a).normalize();
            let normal = crate::geometry::Vector::new(t.y, -t.x);
            HalfPlane { normal, offset: normal.dot(&a.coords) }
        })
        .collect();
    let bbox = bounding_box(poly);
    let feasible = |r: f64| {
        let mut region = bbox.clone();
        for hp in &planes {
            let shifted = HalfPlane { normal: hp.normal, offset: hp.offset - r };
            region = clip_convex(&region, &shifted, 0.0);
            if region.is_empty() {
                return false;
            }
        }
        true
    };
    let (mut lo, mut hi) = (0.0, 0.5 * h);
    if !feasible(lo) {
        return 0.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn bounding_box(poly: &[Point]) -> Vec<Point> {
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in poly {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    vec![Point::new(x0, y0), Point::new(x1, y0), Point::new(x1, y1), Point::new(x0, y1)]
}

/// Reports star-shapedness and edge-ratio figures; only rejects broken cells.
pub fn validate(mesh: &PolygonalMesh) -> Result<MeshQualityReport, MeshError> {
    let mut rho_star = Vec::with_capacity(mesh.num_cells());
    let mut rho_edge = f64::INFINITY;
    let mut worst = (f64::INFINITY, 0);
    for (c, cell) in mesh.cells.iter().enumerate() {
        let pts = mesh.cell_points(c);
        if !(cell.area > 0.0) {
            return Err(MeshError::Structural { cell: c, reason: format!("cell area {:e}", cell.area) });
        }
        if !is_simple(&pts) {
            return Err(MeshError::Structural { cell: c, reason: "polygon is not simple".into() });
        }
        let rs = kernel_inradius(&pts, cell.diameter) / cell.diameter;
        let re = cell.edges.iter().map(|&e| mesh.edges[e].length).fold(f64::INFINITY, f64::min) / cell.diameter;
        rho_edge = rho_edge.min(re);
        if rs.min(re) < worst.0 {
            worst = (rs.min(re), c);
        }
        rho_star.push(rs);
    }
    let report = MeshQualityReport { rho_star, rho_edge, h: mesh.mesh_size(), worst_cell: worst.1 };
    if worst.0 < 0.01 {
        log::warn!("mesh quality ratio {:.3e} below 0.01 at cell {}", worst.0, worst.1);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate, MeshFamily};

    #[test]
    fn unit_square_cell() {
        let m = PolygonalMesh::from_cells(
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)],
            vec![vec![0, 1, 2, 3]],
            vec![0],
        )
        .unwrap();
        let r = validate(&m).unwrap();
        assert!((r.rho_star[0] - 0.5 / 2f64.sqrt()).abs() < 1e-12, "{}", r.rho_star[0]);
        assert!((r.rho_edge - 1.0 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn l_shape_kernel_is_smaller_than_hull() {
        let pts = [(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)];
        let m = PolygonalMesh::from_cells(pts.iter().map(|&(x, y)| Point::new(x, y)).collect(), vec![(0..6).collect()], vec![0])
            .unwrap();
        let r = validate(&m).unwrap();
        // Kernel is the unit square [0,1]^2.
        assert!((r.rho_star[0] - 0.5 / 8f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn quad_mesh_size_exact() {
        for n in [2, 5, 16] {
            let r = validate(&generate(MeshFamily::Quad, n, 0).unwrap()).unwrap();
            assert!((r.h - 2f64.sqrt() / n as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn voro_edge_ratio_matches_brute_force() {
        let m = generate(MeshFamily::Voro, 8, 42).unwrap();
        let r = validate(&m).unwrap();
        let mut brute = f64::INFINITY;
        for c in 0..m.num_cells() {
            let p = m.cell_points(c);
            let mut diam: f64 = 0.0;
            for a in &p {
                for b in &p {
                    diam = diam.max((a - b).norm());
                }
            }
            for j in 0..p.len() {
                brute = brute.min((p[(j + 1) % p.len()] - p[j]).norm() / diam);
            }
        }
        assert!((r.rho_edge - brute).abs() < 1e-14);
        assert!(r.rho_edge > 0.0 && r.rho_edge <= 1.0);
        assert!(r.rho_star.iter().all(|&x| x > 0.0 && x <= 1.0));
        assert!((m.total_area() - 1.0).abs() < 1e-12);
    }
}
