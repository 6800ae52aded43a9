use nalgebra::DVector;
use rayon::prelude::*;

use super::element::global_edge_moments;
use super::{DofMap, ElementOps, VectorField};
use crate::geometry::Point;
use crate::mesh::PolygonalMesh;
use crate::quadrature::{edge_rule, polygon_rule, PolygonQuadrature};

fn cell_rule(ops: &ElementOps, mesh: &PolygonalMesh, order: usize) -> PolygonQuadrature {
    if order == ops.rule.order {
        ops.rule.clone()
    } else {
        polygon_rule(&mesh.cell_points(ops.cell), order).expect("cell already passed quadrature construction")
    }
}

/// Local DoFs of an analytic field, each functional evaluated with rules of
/// exactness `order`.
pub fn fortin_interpolate_cell(mesh: &PolygonalMesh, ops: &ElementOps, w: &impl VectorField, order: usize) -> DVector<f64> {
    let rules: Vec<_> = ops.edges.iter().map(|e| edge_rule(&e.a, &e.b, order)).collect();
    let rule = cell_rule(ops, mesh, order);
    ops.dofs_with(&rules, &rule, |x| w.value(x), |x| w.divergence(x))
}

/// Global DoF vector of an analytic field; `order` is the exactness order of
/// the rules evaluating the functionals.
pub fn fortin_interpolate(
    mesh: &PolygonalMesh,
    dofs: &DofMap,
    elements: &[ElementOps],
    w: &impl VectorField,
    order: usize,
) -> DVector<f64> {
    let k = dofs.k;
    let mut out = DVector::zeros(dofs.n_u);
    let edge_vals: Vec<Vec<f64>> = mesh
        .edges
        .par_iter()
        .map(|e| {
            let mut v = vec![0.0; k + 1];
            let (a, b) = (mesh.vertices[e.vertices[0]], mesh.vertices[e.vertices[1]]);
            global_edge_moments(k, &a, &b, e.normal, order, &|x: &Point| w.value(x), &mut v);
            v
        })
        .collect();
    for (e, v) in edge_vals.iter().enumerate() {
        for (i, x) in v.iter().enumerate() {
            out[dofs.edge_dof(e, i)] = *x;
        }
    }
    let per_cell = k * k + 2 * k;
    if per_cell > 0 {
        let cell_vals: Vec<Vec<f64>> = elements
            .par_iter()
            .map(|ops| {
                let rule = cell_rule(ops, mesh, order);
                let mut v = vec![0.0; per_cell];
                ops.cell_moments_into(&rule, &|x: &Point| w.value(x), &|x: &Point| w.divergence(x), &mut v);
                v
            })
            .collect();
        for (c, v) in cell_vals.iter().enumerate() {
            let base = dofs.n_edge_dofs + c * per_cell;
            out.as_mut_slice()[base..base + per_cell].copy_from_slice(v);
        }
    }
    out
}

/// `Π⁰_k f` on one cell, in the pressure basis.
pub fn project_scalar_cell(mesh: &PolygonalMesh, ops: &ElementOps, f: &(impl Fn(&Point) -> f64 + Sync), order: usize) -> DVector<f64> {
    let rule = cell_rule(ops, mesh, order);
    let mut rhs = DVector::zeros(ops.scalar.len());
    for (p, w) in rule.points.iter().zip(&rule.weights) {
        rhs += ops.pressure_basis(p) * (w * f(p));
    }
    let gram = &ops.t * &ops.h_mono * ops.t.transpose();
    gram.cholesky().expect("checked at construction").solve(&rhs)
}

/// Cellwise `Π⁰_k f` as a global pressure vector.
pub fn project_scalar(
    mesh: &PolygonalMesh,
    dofs: &DofMap,
    elements: &[ElementOps],
    f: &(impl Fn(&Point) -> f64 + Sync),
    order: usize,
) -> DVector<f64> {
    let parts: Vec<DVector<f64>> = elements.par_iter().map(|ops| project_scalar_cell(mesh, ops, f, order)).collect();
    let mut out = DVector::zeros(dofs.n_p);
    for (c, v) in parts.iter().enumerate() {
        out.rows_mut(dofs.pressure_dofs(c).start, v.len()).copy_from(v);
    }
    out
}
