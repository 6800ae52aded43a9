use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::voronoi::{lloyd, voronoi_cells};
use super::weld::polygons_to_mesh;
use super::{rules, BoundaryTag, MeshError, PolygonalMesh};
use crate::geometry::Point;

/// Lloyd iteration cap for the `voro` family.
pub const LLOYD_MAX_ITER: usize = 100;
/// Lloyd stops once no seed moves more than this times `1/n`.
pub const LLOYD_REL_TOL: f64 = 1e-10;
/// Hexagon vertices move at most this fraction of their shortest incident edge.
pub const HEXA_DISTORTION: f64 = 0.2;

const WELD_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshFamily {
    Tria,
    Quad,
    Hexa,
    Voro,
}

impl MeshFamily {
    pub const ALL: [MeshFamily; 4] = [MeshFamily::Tria, MeshFamily::Quad, MeshFamily::Hexa, MeshFamily::Voro];

    pub fn as_str(self) -> &'static str {
        match self {
            MeshFamily::Tria => "tria",
            MeshFamily::Quad => "quad",
            MeshFamily::Hexa => "hexa",
            MeshFamily::Voro => "voro",
        }
    }
}

impl std::str::FromStr for MeshFamily {
    type Err = MeshError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tria" => Ok(MeshFamily::Tria),
            "quad" => Ok(MeshFamily::Quad),
            "hexa" => Ok(MeshFamily::Hexa),
            "voro" => Ok(MeshFamily::Voro),
            other => Err(MeshError::InvalidParameter(format!("unknown mesh family `{other}`"))),
        }
    }
}

/// Mesh of the unit square. All boundary edges are tagged Dirichlet.
///
/// `seed` only affects `hexa` (vertex distortion) and `voro` (initial seeds).
pub fn generate(family: MeshFamily, n: usize, seed: u64) -> Result<PolygonalMesh, MeshError> {
    if n < 2 {
        return Err(MeshError::InvalidParameter(format!("subdivision count n = {n} must be at least 2")));
    }
    let mesh = match family {
        MeshFamily::Tria => crisscross(n)?,
        MeshFamily::Quad => cartesian(n)?,
        MeshFamily::Hexa => hexagonal(n, seed)?,
        MeshFamily::Voro => lloyd_voronoi(n, seed)?,
    };
    mesh.tag_boundary(rules::all_dirichlet)
}

fn grid(n: usize, i: usize, j: usize) -> Point {
    Point::new(i as f64 / n as f64, j as f64 / n as f64)
}

pub(crate) fn cartesian(n: usize) -> Result<PolygonalMesh, MeshError> {
    let vid = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(grid(n, i, j));
        }
    }
    let mut loops = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            loops.push(vec![vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)]);
        }
    }
    let regions = vec![0; loops.len()];
    PolygonalMesh::from_cells(vertices, loops, regions)
}

/// Each square split into four triangles through its centre.
fn crisscross(n: usize) -> Result<PolygonalMesh, MeshError> {
    let vid = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1) + n * n);
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(grid(n, i, j));
        }
    }
    let centre0 = vertices.len();
    for j in 0..n {
        for i in 0..n {
            vertices.push(Point::new((i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64));
        }
    }
    let mut loops = Vec::with_capacity(4 * n * n);
    for j in 0..n {
        for i in 0..n {
            let c = centre0 + j * n + i;
            let (a, b, cc, d) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
            loops.push(vec![a, b, c]);
            loops.push(vec![b, cc, c]);
            loops.push(vec![cc, d, c]);
            loops.push(vec![d, a, c]);
        }
    }
    let regions = vec![0; loops.len()];
    PolygonalMesh::from_cells(vertices, loops, regions)
}

fn snap_to_square(p: &mut Point) {
    for v in p.coords.iter_mut() {
        if v.abs() < 1e-12 {
            *v = 0.0;
        } else if (*v - 1.0).abs() < 1e-12 {
            *v = 1.0;
        }
    }
}

fn clipped_voronoi_mesh(mut cells: Vec<Vec<Point>>) -> Result<PolygonalMesh, MeshError> {
    for c in &mut cells {
        c.iter_mut().for_each(snap_to_square);
    }
    let mesh = polygons_to_mesh(&cells, WELD_TOL)?;
    for (i, e) in mesh.edges.iter().enumerate() {
        if e.tag == BoundaryTag::Untagged && !rules::on_unit_square_boundary(&e.midpoint) {
            return Err(MeshError::Structural {
                cell: e.cells.0,
                reason: format!("non-conforming Voronoi edge {i} inside the domain"),
            });
        }
    }
    Ok(mesh)
}

fn lloyd_voronoi(n: usize, seed: u64) -> Result<PolygonalMesh, MeshError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<Point> = (0..n * n).map(|_| Point::new(rng.random(), rng.random())).collect();
    let h = 1.0 / n as f64;
    let relaxed = lloyd(seeds, LLOYD_MAX_ITER, LLOYD_REL_TOL * h);
    clipped_voronoi_mesh(relaxed.cells)
}

/// Voronoi diagram of a staggered lattice (hexagons inside, cut hexagons on
/// the boundary) with interior vertices randomly displaced.
fn hexagonal(n: usize, seed: u64) -> Result<PolygonalMesh, MeshError> {
    let rows = {
        let r = (2.0 * n as f64 / 3f64.sqrt()).round() as usize;
        (r + r % 2).max(2)
    };
    let mut seeds = Vec::new();
    for j in 0..=rows {
        let y = j as f64 / rows as f64;
        if j % 2 == 0 {
            for i in 0..=n {
                seeds.push(Point::new(i as f64 / n as f64, y));
            }
        } else {
            for i in 0..n {
                seeds.push(Point::new((i as f64 + 0.5) / n as f64, y));
            }
        }
    }
    let cells = voronoi_cells(&seeds);
    let mut mesh = clipped_voronoi_mesh(cells)?;

    let mut shortest = vec![f64::INFINITY; mesh.num_vertices()];
    let mut on_boundary = vec![false; mesh.num_vertices()];
    for e in &mesh.edges {
        for &v in &e.vertices {
            shortest[v] = shortest[v].min(e.length);
            if e.tag.is_boundary() {
                on_boundary[v] = true;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let original = mesh.vertices.clone();
    let mut moved = original.clone();
    for (v, p) in moved.iter_mut().enumerate() {
        let angle: f64 = rng.random::<f64>() * std::f64::consts::TAU;
        let frac: f64 = rng.random::<f64>();
        if on_boundary[v] {
            continue;
        }
        let r = HEXA_DISTORTION * shortest[v] * frac;
        p.x += r * angle.cos();
        p.y += r * angle.sin();
    }
    let loops: Vec<Vec<usize>> = mesh.cells.drain(..).map(|c| c.vertices).collect();
    let regions = vec![0; loops.len()];
    PolygonalMesh::from_cells(moved, loops, regions)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quad_two_by_two_counts() {
        let m = generate(MeshFamily::Quad, 2, 0).unwrap();
        assert_eq!((m.num_cells(), m.num_edges(), m.num_vertices()), (4, 12, 9));
    }

    #[test]
    fn quad_mesh_size_is_diagonal() {
        for n in [2, 3, 8, 16] {
            let m = generate(MeshFamily::Quad, n, 0).unwrap();
            assert!((m.mesh_size() - 2f64.sqrt() / n as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn n_below_two_rejected() {
        for f in MeshFamily::ALL {
            assert!(matches!(generate(f, 1, 0), Err(MeshError::InvalidParameter(_))));
        }
    }

    #[test]
    fn every_family_is_valid_and_tiles_the_square() {
        for f in MeshFamily::ALL {
            let m = generate(f, 6, 3).unwrap();
            assert!((m.total_area() - 1.0).abs() < 1e-12, "{f:?}: area {}", m.total_area());
            assert_eq!(m.euler_characteristic(), 1, "{f:?}");
            assert!(m.boundary_edges().all(|e| rules::on_unit_square_boundary(&m.edges[e].midpoint)));
            assert!(m.edges.iter().all(|e| e.tag != BoundaryTag::Untagged));
        }
    }

    #[test]
    fn tria_counts() {
        let n = 3;
        let m = generate(MeshFamily::Tria, n, 0).unwrap();
        assert_eq!(m.num_cells(), 4 * n * n);
        assert_eq!(m.num_edges(), 2 * n * (n + 1) + 4 * n * n);
        assert!((m.mesh_size() - 1.0 / n as f64).abs() < 1e-15);
    }

    #[test]
    fn generation_is_reproducible() {
        for f in [MeshFamily::Hexa, MeshFamily::Voro] {
            let a = generate(f, 5, 11).unwrap();
            let b = generate(f, 5, 11).unwrap();
            assert_eq!(a.vertices, b.vertices);
            for (ea, eb) in a.edges.iter().zip(&b.edges) {
                assert_eq!(ea.vertices, eb.vertices);
                assert_eq!(ea.normal, eb.normal);
            }
        }
    }

    #[test]
    fn hexa_is_mostly_hexagons() {
        let m = generate(MeshFamily::Hexa, 8, 1).unwrap();
        let hexes = m.cells.iter().filter(|c| c.vertices.len() == 6).count();
        assert!(hexes * 2 > m.num_cells());
    }
}
