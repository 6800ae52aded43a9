//! The mixed virtual element spaces: DoF numbering, per-cell projectors and
//! interpolation of analytic fields.

mod element;
mod interpolate;

pub use element::{ElementOps, ElementOptions};
pub use interpolate::{fortin_interpolate, fortin_interpolate_cell, project_scalar, project_scalar_cell};

use crate::geometry::{Point, Vector};
use crate::mesh::{BoundaryTag, PolygonalMesh};
use crate::quadrature::poly_dim;

#[derive(Debug, thiserror::Error)]
pub enum SpaceError {
    #[error("cell {cell}: {what} Gram matrix is not positive definite (condition estimate {condition:.3e})")]
    Conditioning { cell: usize, what: &'static str, condition: f64 },
    #[error("cell {cell}: {source}")]
    Quadrature { cell: usize, source: crate::quadrature::QuadratureError },
    #[error("order k = {0} is outside the supported range 0..=4")]
    Order(usize),
}

/// A smooth vector field known together with its divergence.
pub trait VectorField: Sync {
    fn value(&self, x: &Point) -> Vector;
    fn divergence(&self, x: &Point) -> f64;
}

/// Vector field from a pair of closures.
pub struct FnField<F, D> {
    pub value: F,
    pub divergence: D,
}

impl<F, D> VectorField for FnField<F, D>
where
    F: Fn(&Point) -> Vector + Sync,
    D: Fn(&Point) -> f64 + Sync,
{
    fn value(&self, x: &Point) -> Vector {
        (self.value)(x)
    }
    fn divergence(&self, x: &Point) -> f64 {
        (self.divergence)(x)
    }
}

/// Number of local DoFs on a cell with `edges` edges.
#[inline]
pub fn local_dim(edges: usize, k: usize) -> usize {
    edges * (k + 1) + k * k + 2 * k
}

/// Global numbering of velocity and pressure unknowns.
///
/// Velocity: all edge moments first (`edge * (k+1) + i`), then per cell the
/// divergence moments followed by the rotated moments. Edge moments are
/// taken against the global edge normal, so both neighbours share them
/// verbatim; the outward sign enters only the local matrices.
#[derive(Clone, Debug)]
pub struct DofMap {
    pub k: usize,
    pub n_u: usize,
    pub n_p: usize,
    pub n_edge_dofs: usize,
    /// Local-to-global velocity map of every cell.
    pub cell_dofs: Vec<Vec<usize>>,
    /// Outward sign of each local edge of every cell.
    pub signs: Vec<Vec<f64>>,
    /// Velocity DoFs fixed by an essential (Neumann) condition.
    pub essential: Vec<bool>,
}

impl DofMap {
    pub fn new(mesh: &PolygonalMesh, k: usize) -> Self {
        let per_edge = k + 1;
        let per_cell = k * k + 2 * k;
        let n_edge_dofs = per_edge * mesh.num_edges();
        let n_u = n_edge_dofs + per_cell * mesh.num_cells();
        let n_p = poly_dim(k) * mesh.num_cells();
        let mut cell_dofs = Vec::with_capacity(mesh.num_cells());
        let mut signs = Vec::with_capacity(mesh.num_cells());
        for (c, cell) in mesh.cells.iter().enumerate() {
            let mut d = Vec::with_capacity(local_dim(cell.edges.len(), k));
            for &e in &cell.edges {
                d.extend((0..per_edge).map(|i| e * per_edge + i));
            }
            d.extend((0..per_cell).map(|j| n_edge_dofs + c * per_cell + j));
            cell_dofs.push(d);
            signs.push((0..cell.edges.len()).map(|j| mesh.orientation(c, j)).collect());
        }
        let mut essential = vec![false; n_u];
        for (e, edge) in mesh.edges.iter().enumerate() {
            if edge.tag == BoundaryTag::Neumann {
                essential[e * per_edge..(e + 1) * per_edge].iter_mut().for_each(|x| *x = true);
            }
        }
        Self { k, n_u, n_p, n_edge_dofs, cell_dofs, signs, essential }
    }

    pub fn edge_dof(&self, edge: usize, i: usize) -> usize {
        edge * (self.k + 1) + i
    }

    pub fn pressure_dofs(&self, cell: usize) -> std::ops::Range<usize> {
        let m = poly_dim(self.k);
        cell * m..(cell + 1) * m
    }

    pub fn num_essential(&self) -> usize {
        self.essential.iter().filter(|&&e| e).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate, rules, MeshFamily};

    #[test]
    fn dimension_formulas() {
        assert_eq!(local_dim(4, 1), 11);
        assert_eq!(local_dim(3, 2), 17);
        let m = generate(MeshFamily::Quad, 2, 0).unwrap();
        let d = DofMap::new(&m, 0);
        assert_eq!((d.n_u, d.n_p), (12, 4));
        for fam in MeshFamily::ALL {
            let m = generate(fam, 5, 1).unwrap();
            for k in 0..=3 {
                let d = DofMap::new(&m, k);
                assert_eq!(d.n_u, (k + 1) * m.num_edges() + (k * k + 2 * k) * m.num_cells());
                assert_eq!(d.n_p, m.num_cells() * (k + 1) * (k + 2) / 2);
                for (c, cell) in m.cells.iter().enumerate() {
                    assert_eq!(d.cell_dofs[c].len(), local_dim(cell.edges.len(), k));
                }
            }
        }
    }

    #[test]
    fn interior_edges_shared_with_opposite_signs() {
        let m = generate(MeshFamily::Voro, 6, 2).unwrap();
        let d = DofMap::new(&m, 1);
        for (e, edge) in m.edges.iter().enumerate() {
            if let (c0, Some(c1)) = edge.cells {
                let j0 = m.cells[c0].edges.iter().position(|&x| x == e).unwrap();
                let j1 = m.cells[c1].edges.iter().position(|&x| x == e).unwrap();
                assert_eq!(d.signs[c0][j0] * d.signs[c1][j1], -1.0);
                assert_eq!(d.cell_dofs[c0][2 * j0], d.cell_dofs[c1][2 * j1]);
            }
        }
    }

    #[test]
    fn neumann_dofs_flagged() {
        let m = generate(MeshFamily::Quad, 4, 0).unwrap().tag_boundary(rules::dirichlet_top_bottom_neumann_sides).unwrap();
        let d = DofMap::new(&m, 2);
        assert_eq!(d.num_essential(), 2 * 4 * 3);
    }
}
