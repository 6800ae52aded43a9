//! Error norms, convergence rates, energy metrics and the inf-sup probe.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::assembly::{Discretization, GlobalSystem, MaterialField};
use crate::geometry::Point;
use crate::problem::ProblemData;
use crate::quadrature::polygon_rule;
use crate::timestepping::WaveState;

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("convergence table needs at least two rows, got {0}")]
    TooFewRows(usize),
    #[error("mesh sizes must strictly decrease down the table (row {0})")]
    NonMonotone(usize),
    #[error("problem data has no exact solution")]
    NoExactSolution,
}

/// Error quadrature order for a method of order `k`.
pub fn error_order(k: usize) -> usize {
    2 * k + 4
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorReport {
    /// `‖u(T) - Π⁰_k u_h(T)‖`.
    pub e_u: f64,
    /// `‖p(T) - p_h(T)‖`.
    pub e_p: f64,
    /// `sqrt(e_u² + ‖c⁻¹(p - p_h)‖²)`.
    pub e_energy: f64,
    pub h: f64,
    pub k: usize,
    pub family: String,
    pub n_u: usize,
    pub n_p: usize,
    pub wall_time: f64,
    pub c_hat: f64,
}

/// Sums per-cell values pairwise so the result does not depend on thread count.
fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}

fn local(disc: &Discretization, c: usize, u: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(disc.dofs.cell_dofs[c].len(), disc.dofs.cell_dofs[c].iter().map(|&g| u[g]))
}

/// Errors of `state` against the exact solution at `state.t`, with rules of
/// exactness `order`.
pub fn compute_errors_with_order(
    disc: &Discretization,
    material: &MaterialField,
    state: &WaveState,
    data: &dyn ProblemData,
    order: usize,
) -> Result<ErrorReport, AnalysisError> {
    if !data.has_exact() {
        return Err(AnalysisError::NoExactSolution);
    }
    let t = state.t;
    let per_cell: Vec<(f64, f64, f64)> = disc
        .elements
        .par_iter()
        .enumerate()
        .map(|(c, e)| {
            let rule = polygon_rule(&disc.mesh.cell_points(c), order).expect("valid cell");
            let coeffs = e.project(&local(disc, c, &state.u));
            let p = state.p.rows(disc.dofs.pressure_dofs(c).start, e.scalar.len()).into_owned();
            let inv_c2 = 1.0 / material.speed(disc.mesh.cells[c].region).powi(2);
            let (mut eu, mut ep) = (0.0, 0.0);
            for (x, w) in rule.points.iter().zip(&rule.weights) {
                let (ue, pe) = data.exact(x, t).expect("checked above");
                eu += w * (ue - e.eval_vector(&coeffs, x)).norm_squared();
                ep += w * (pe - e.eval_scalar(p.as_slice(), x)).powi(2);
            }
            (eu, ep, ep * inv_c2)
        })
        .collect();
    let eu = pairwise_sum(&per_cell.iter().map(|x| x.0).collect::<Vec<_>>());
    let ep = pairwise_sum(&per_cell.iter().map(|x| x.1).collect::<Vec<_>>());
    let epc = pairwise_sum(&per_cell.iter().map(|x| x.2).collect::<Vec<_>>());
    Ok(ErrorReport {
        e_u: eu.sqrt(),
        e_p: ep.sqrt(),
        e_energy: (eu + epc).sqrt(),
        h: disc.mesh.mesh_size(),
        k: disc.k,
        family: String::new(),
        n_u: disc.dofs.n_u,
        n_p: disc.dofs.n_p,
        wall_time: 0.0,
        c_hat: material.c_hat(&disc.mesh),
    })
}

/// [`compute_errors_with_order`] at the elevated order `2k + 4`.
pub fn compute_errors(
    disc: &Discretization,
    material: &MaterialField,
    state: &WaveState,
    data: &dyn ProblemData,
) -> Result<ErrorReport, AnalysisError> {
    let r = compute_errors_with_order(disc, material, state, data, error_order(disc.k))?;
    log::info!("errors k={} h={:.4e}: e_u={:.4e} e_p={:.4e} (c_hat={})", r.k, r.h, r.e_u, r.e_p, r.c_hat);
    Ok(r)
}

/// `Σ_E ‖u_0 - Π⁰_k u_0‖² + ‖c⁻¹(p_0 - Π⁰_k p_0)‖²`.
pub fn projection_energy_gap(disc: &Discretization, material: &MaterialField, data: &dyn ProblemData, order: usize) -> f64 {
    let per_cell: Vec<f64> = disc
        .elements
        .par_iter()
        .enumerate()
        .map(|(c, e)| {
            let rule = polygon_rule(&disc.mesh.cell_points(c), order).expect("valid cell");
            let nv = e.vector.len();
            let ns = e.scalar.len();
            let mut rv = DVector::zeros(nv);
            let mut rs = DVector::zeros(ns);
            for (x, w) in rule.points.iter().zip(&rule.weights) {
                let u0 = data.initial_velocity(x);
                for (i, s) in e.vector_basis(x).iter().enumerate() {
                    rv[i] += w * s.value.dot(&u0);
                }
                rs += DVector::from_vec(e.scalar.eval(x)) * (w * data.initial_pressure(x));
            }
            let gv = e.vector_gram(&rule);
            let gs = e.scalar.gram(&rule);
            let cv = gv.cholesky().expect("vector Gram SPD").solve(&rv);
            let cs = gs.cholesky().expect("scalar Gram SPD").solve(&rs);
            let inv_c2 = 1.0 / material.speed(disc.mesh.cells[c].region).powi(2);
            let mut gap = 0.0;
            for (x, w) in rule.points.iter().zip(&rule.weights) {
                let du = data.initial_velocity(x) - e.eval_vector(&cv, x);
                let m = e.scalar.eval(x);
                let pp: f64 = m.iter().zip(cs.iter()).map(|(a, b)| a * b).sum();
                gap += w * (du.norm_squared() + inv_c2 * (data.initial_pressure(x) - pp).powi(2));
            }
            gap
        })
        .collect();
    pairwise_sum(&per_cell)
}

/// `(‖s_T‖_{E_h} - ‖s_0‖_{E_h}) / ‖s_0‖_{E_h}`.
pub fn relative_energy_error(initial: &WaveState, last: &WaveState) -> f64 {
    (last.norm() - initial.norm()) / initial.norm()
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ErrorReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Rates {
    /// Rate between consecutive rows, one fewer than the rows.
    pub pairwise: Vec<f64>,
    /// Least-squares slope of `log e` against `log h`.
    pub fit: f64,
}

fn rates(h: &[f64], e: &[f64]) -> Result<Rates, AnalysisError> {
    if h.len() < 2 {
        return Err(AnalysisError::TooFewRows(h.len()));
    }
    if let Some(i) = (1..h.len()).find(|&i| h[i] >= h[i - 1]) {
        return Err(AnalysisError::NonMonotone(i));
    }
    let pairwise = (1..h.len()).map(|i| (e[i - 1] / e[i]).ln() / (h[i - 1] / h[i]).ln()).collect();
    let lx: Vec<f64> = h.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = e.iter().map(|x| x.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(Rates { pairwise, fit: sxy / sxx })
}

/// EOC of a generic error sequence.
pub fn eoc(h: &[f64], e: &[f64]) -> Result<Rates, AnalysisError> {
    rates(h, e)
}

impl ConvergenceTable {
    pub fn h(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.h).collect()
    }

    pub fn eoc_u(&self) -> Result<Rates, AnalysisError> {
        rates(&self.h(), &self.rows.iter().map(|r| r.e_u).collect::<Vec<_>>())
    }

    pub fn eoc_p(&self) -> Result<Rates, AnalysisError> {
        rates(&self.h(), &self.rows.iter().map(|r| r.e_p).collect::<Vec<_>>())
    }

    pub fn eoc_energy(&self) -> Result<Rates, AnalysisError> {
        rates(&self.h(), &self.rows.iter().map(|r| r.e_energy).collect::<Vec<_>>())
    }

    /// CSV with header `h,e_u,e_p,e_energy,eoc_u,eoc_p`; the first row has empty rates.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "h,e_u,e_p,e_energy,eoc_u,eoc_p")?;
        let (ru, rp) = match (self.eoc_u(), self.eoc_p()) {
            (Ok(a), Ok(b)) => (a.pairwise, b.pairwise),
            _ => (Vec::new(), Vec::new()),
        };
        for (i, r) in self.rows.iter().enumerate() {
            let fmt = |v: Option<&f64>| v.map(|x| format!("{x:.4}")).unwrap_or_default();
            let (a, b) = if i == 0 { (String::new(), String::new()) } else { (fmt(ru.get(i - 1)), fmt(rp.get(i - 1))) };
            writeln!(w, "{:.6e},{:.6e},{:.6e},{:.6e},{a},{b}", r.h, r.e_u, r.e_p, r.e_energy)?;
        }
        Ok(())
    }
}

/// Size limit of the dense inf-sup probe.
pub const INFSUP_MAX_DOFS: usize = 4000;

/// Smallest singular value of `N^{-1/2} B_F M_F^{-1/2}`, the discrete inf-sup
/// constant in the energy inner products restricted to free velocity DoFs.
/// Returns `None` above [`INFSUP_MAX_DOFS`].
pub fn infsup_probe(system: &GlobalSystem) -> Option<f64> {
    let nf = system.free.len();
    let np = system.n.nrows;
    if nf + np > INFSUP_MAX_DOFS {
        log::info!("inf-sup probe skipped: {} unknowns exceed {}", nf + np, INFSUP_MAX_DOFS);
        return None;
    }
    let m = system.m.select(&system.free, &system.free).to_dense();
    let n = system.n.to_dense();
    let b = system.b.select(&(0..np).collect::<Vec<_>>(), &system.free).to_dense();
    let inv_sqrt = |a: DMatrix<f64>| {
        let e = a.symmetric_eigen();
        let d = DMatrix::from_diagonal(&e.eigenvalues.map(|x| 1.0 / x.sqrt()));
        &e.eigenvectors * d * e.eigenvectors.transpose()
    };
    let s = inv_sqrt(n) * b * inv_sqrt(m);
    let sv = s.singular_values();
    Some(sv.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Pressure values at `points` (cells located by search), `None` outside the mesh.
pub fn sample_pressure(disc: &Discretization, p: &DVector<f64>, points: &[Point]) -> Vec<Option<f64>> {
    points
        .par_iter()
        .map(|x| {
            disc.mesh.locate(x).map(|c| {
                let e = &disc.elements[c];
                let coeffs = p.rows(disc.dofs.pressure_dofs(c).start, e.scalar.len()).into_owned();
                e.eval_scalar(coeffs.as_slice(), x)
            })
        })
        .collect()
}

#[cfg(test)]
mod tests;
