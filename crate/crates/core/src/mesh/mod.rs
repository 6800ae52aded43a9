//! Polygonal meshes: data model, generators, quality checks and file I/O.

mod generate;
mod holes;
mod io;
mod quality;
pub mod voronoi;
mod weld;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::geometry::{centroid, diameter, is_simple, right_normal, signed_area, Point, Vector};

pub use generate::{generate, MeshFamily};
pub use holes::{build_holes_mesh, HoleConfig, HOLE_DIAMETER, HOLE_POLYGON_SEGMENTS};
pub use io::{read_polymesh, write_polymesh};
pub use quality::{validate, MeshQualityReport};

#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("cell {cell}: {reason}")]
    Structural { cell: usize, reason: String },
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryTag {
    Interior,
    /// Boundary edge that has not been assigned a condition yet.
    Untagged,
    Dirichlet,
    Neumann,
    Robin,
}

impl BoundaryTag {
    pub fn is_boundary(self) -> bool {
        !matches!(self, BoundaryTag::Interior)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryTag::Interior => "interior",
            BoundaryTag::Untagged => "untagged",
            BoundaryTag::Dirichlet => "dirichlet",
            BoundaryTag::Neumann => "neumann",
            BoundaryTag::Robin => "robin",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "dirichlet" | "D" => BoundaryTag::Dirichlet,
            "neumann" | "N" => BoundaryTag::Neumann,
            "robin" | "R" => BoundaryTag::Robin,
            _ => return None,
        })
    }
}

/// A mesh edge. The global normal is the right-hand normal of `v0 -> v1`;
/// it points out of `cells.0` (the lower-indexed neighbour).
#[derive(Clone, Debug)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub cells: (usize, Option<usize>),
    pub tag: BoundaryTag,
    pub length: f64,
    pub normal: Vector,
    pub midpoint: Point,
}

#[derive(Clone, Debug)]
pub struct Cell {
    /// Counterclockwise vertex loop.
    pub vertices: Vec<usize>,
    /// `edges[j]` joins `vertices[j]` and `vertices[j + 1]`.
    pub edges: Vec<usize>,
    pub region: u32,
    pub area: f64,
    pub centroid: Point,
    pub diameter: f64,
}

#[derive(Clone, Debug)]
pub struct PolygonalMesh {
    pub vertices: Vec<Point>,
    pub edges: Vec<Edge>,
    pub cells: Vec<Cell>,
}

impl PolygonalMesh {
    /// Builds the edge structure from counterclockwise cell loops.
    ///
    /// Boundary edges start out [`BoundaryTag::Untagged`].
    pub fn from_cells(
        vertices: Vec<Point>,
        loops: Vec<Vec<usize>>,
        regions: Vec<u32>,
    ) -> Result<Self, MeshError> {
        if regions.len() != loops.len() {
            return Err(MeshError::InvalidParameter(format!(
                "{} region tags for {} cells",
                regions.len(),
                loops.len()
            )));
        }
        let mut edges: Vec<Edge> = Vec::new();
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut cells = Vec::with_capacity(loops.len());
        for (c, (lp, region)) in loops.into_iter().zip(regions).enumerate() {
            if lp.len() < 3 {
                return Err(MeshError::Structural { cell: c, reason: "fewer than 3 vertices".into() });
            }
            if let Some(&bad) = lp.iter().find(|&&v| v >= vertices.len()) {
                return Err(MeshError::Structural { cell: c, reason: format!("vertex {bad} out of range") });
            }
            let pts: Vec<Point> = lp.iter().map(|&v| vertices[v]).collect();
            let area = signed_area(&pts);
            if area <= 0.0 {
                return Err(MeshError::Structural {
                    cell: c,
                    reason: format!("non-positive signed area {area:e} (clockwise or degenerate)"),
                });
            }
            if !is_simple(&pts) {
                return Err(MeshError::Structural { cell: c, reason: "polygon is not simple".into() });
            }
            let n = lp.len();
            let mut cell_edges = Vec::with_capacity(n);
            for j in 0..n {
                let (a, b) = (lp[j], lp[(j + 1) % n]);
                let key = (a.min(b), a.max(b));
                match lookup.get(&key) {
                    None => {
                        let id = edges.len();
                        lookup.insert(key, id);
                        let (pa, pb) = (vertices[a], vertices[b]);
                        edges.push(Edge {
                            vertices: [a, b],
                            cells: (c, None),
                            tag: BoundaryTag::Untagged,
                            length: (pb - pa).norm(),
                            normal: right_normal(&pa, &pb),
                            midpoint: Point::from((pa.coords + pb.coords) * 0.5),
                        });
                        cell_edges.push(id);
                    }
                    Some(&id) => {
                        let e = &mut edges[id];
                        if e.cells.1.is_some() || e.cells.0 == c {
                            return Err(MeshError::Structural {
                                cell: c,
                                reason: format!("edge {a}-{b} shared by more than two cells"),
                            });
                        }
                        if e.vertices != [b, a] {
                            return Err(MeshError::Structural {
                                cell: c,
                                reason: format!("edge {a}-{b} traversed in the same direction by two cells"),
                            });
                        }
                        e.cells.1 = Some(c);
                        e.tag = BoundaryTag::Interior;
                        cell_edges.push(id);
                    }
                }
            }
            cells.push(Cell {
                centroid: centroid(&pts),
                diameter: diameter(&pts),
                vertices: lp,
                edges: cell_edges,
                region,
                area,
            });
        }
        Ok(Self { vertices, edges, cells })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_points(&self, c: usize) -> Vec<Point> {
        self.cells[c].vertices.iter().map(|&v| self.vertices[v]).collect()
    }

    /// `+1` when the global normal of the cell's `j`-th edge is outward for the cell.
    #[inline]
    pub fn orientation(&self, cell: usize, local_edge: usize) -> f64 {
        let e = &self.edges[self.cells[cell].edges[local_edge]];
        if e.cells.0 == cell {
            1.0
        } else {
            -1.0
        }
    }

    /// Mean cell diameter, `h = (1/L_P) Σ h_E`.
    pub fn mesh_size(&self) -> f64 {
        self.cells.iter().map(|c| c.diameter).sum::<f64>() / self.cells.len() as f64
    }

    pub fn total_area(&self) -> f64 {
        self.cells.iter().map(|c| c.area).sum()
    }

    /// `L_V - L_e + L_P`.
    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64 + self.num_cells() as i64
    }

    pub fn boundary_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().enumerate().filter(|(_, e)| e.tag.is_boundary()).map(|(i, _)| i)
    }

    /// Assigns a condition to every boundary edge from its midpoint.
    /// Interior edges are left untouched.
    pub fn tag_boundary(
        mut self,
        rule: impl Fn(&Point) -> Option<BoundaryTag>,
    ) -> Result<Self, MeshError> {
        for (i, e) in self.edges.iter_mut().enumerate() {
            if !e.tag.is_boundary() {
                continue;
            }
            match rule(&e.midpoint) {
                Some(t) if t.is_boundary() && t != BoundaryTag::Untagged => e.tag = t,
                _ => {
                    return Err(MeshError::Configuration(format!(
                        "boundary edge {i} ({}-{}) at ({:.6}, {:.6}) received no boundary condition",
                        e.vertices[0], e.vertices[1], e.midpoint.x, e.midpoint.y
                    )))
                }
            }
        }
        Ok(self)
    }

    /// Index of the cell containing `p`, if any.
    pub fn locate(&self, p: &Point) -> Option<usize> {
        self.cells.iter().position(|c| {
            let pts: Vec<Point> = c.vertices.iter().map(|&v| self.vertices[v]).collect();
            point_in_polygon(p, &pts)
        })
    }
}

/// Even-odd test; points on an edge count as inside.
pub fn point_in_polygon(p: &Point, poly: &[Point]) -> bool {
    let n = poly.len();
    let mut inside = false;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let t = b - a;
        let w = p - a;
        if crate::geometry::cross(&t, &w).abs() <= 1e-14 * t.norm() && w.dot(&t) >= 0.0 && w.dot(&t) <= t.norm_squared() {
            return true;
        }
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Boundary rules used by the built-in scenarios.
pub mod rules {
    use super::BoundaryTag;
    use crate::geometry::Point;

    const EPS: f64 = 1e-10;

    pub fn on_unit_square_boundary(p: &Point) -> bool {
        p.x.abs() < EPS || (p.x - 1.0).abs() < EPS || p.y.abs() < EPS || (p.y - 1.0).abs() < EPS
    }

    pub fn all_dirichlet(_: &Point) -> Option<BoundaryTag> {
        Some(BoundaryTag::Dirichlet)
    }

    /// Dirichlet on `y = 0, 1`, Neumann on `x = 0, 1`.
    pub fn dirichlet_top_bottom_neumann_sides(p: &Point) -> Option<BoundaryTag> {
        if p.y.abs() < EPS || (p.y - 1.0).abs() < EPS {
            Some(BoundaryTag::Dirichlet)
        } else if p.x.abs() < EPS || (p.x - 1.0).abs() < EPS {
            Some(BoundaryTag::Neumann)
        } else {
            None
        }
    }

    /// Robin on the outer square, Neumann everywhere else (hole perimeters).
    pub fn robin_outer_neumann_inner(p: &Point) -> Option<BoundaryTag> {
        if on_unit_square_boundary(p) {
            Some(BoundaryTag::Robin)
        } else {
            Some(BoundaryTag::Neumann)
        }
    }
}
