use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{local_dim, SpaceError};
use crate::geometry::{Point, Vector};
use crate::mesh::PolygonalMesh;
use crate::quadrature::{
    default_order, edge_rule, legendre, orthonormalize, orthonormalize_samples, polygon_rule, EdgeQuadrature, PolygonQuadrature,
    ScaledMonomialBasis, VectorDecomposition, VectorSample,
};

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct ElementOptions {
    /// Exactness order of the cell and edge rules; `None` means `2k + 2`.
    #[serde(default)]
    pub quadrature_order: Option<usize>,
    /// Orthonormalize the pressure and vector bases; `None` means on for `k >= 3`.
    #[serde(default)]
    pub orthonormalize: Option<bool>,
}

impl ElementOptions {
    pub fn order(&self, k: usize) -> usize {
        self.quadrature_order.unwrap_or(default_order(k)).max(default_order(k))
    }

    pub fn orthonormal(&self, k: usize) -> bool {
        self.orthonormalize.unwrap_or(k >= 3)
    }
}

/// Edge of a cell seen from the cell.
#[derive(Clone, Debug)]
pub struct LocalEdge {
    /// Endpoints in global edge direction.
    pub a: Point,
    pub b: Point,
    pub length: f64,
    /// Global normal.
    pub normal: Vector,
    /// `+1` when the global normal is outward.
    pub sign: f64,
    pub rule: EdgeQuadrature,
}

/// Everything computable on one cell from its DoFs.
///
/// Local DoF layout: `k+1` normal moments per edge in loop order, then the
/// divergence moments against `m_α`, `1 <= |α| <= k`, then the rotated
/// moments against `x⊥ m_β`, `|β| <= k-1`.
#[derive(Clone, Debug)]
pub struct ElementOps {
    pub cell: usize,
    pub k: usize,
    pub area: f64,
    pub h: f64,
    pub centroid: Point,
    pub edges: Vec<LocalEdge>,
    pub rule: PolygonQuadrature,
    pub scalar: ScaledMonomialBasis,
    pub vector: VectorDecomposition,
    /// Monomial Gram `∫ m_α m_β`, `|α|, |β| <= k`.
    pub h_mono: DMatrix<f64>,
    /// Pressure basis `ψ = T m`.
    pub t: DMatrix<f64>,
    /// Vector basis `φ = V g`; `None` keeps the raw decomposition.
    pub vt: Option<DMatrix<f64>>,
    /// Vector Gram `∫ φ_i · φ_j`.
    pub g: DMatrix<f64>,
    /// DoFs to `∫ div v m_α` for every `|α| <= k`.
    pub div_moments: DMatrix<f64>,
    /// DoFs to the coefficients of `Π⁰_k v` in the vector basis.
    pub projector: DMatrix<f64>,
    /// DoFs of each vector basis function, one column each.
    pub basis_dofs: DMatrix<f64>,
}

impl ElementOps {
    pub fn new(mesh: &PolygonalMesh, cell: usize, k: usize, opts: &ElementOptions) -> Result<Self, SpaceError> {
        if k > 4 {
            return Err(SpaceError::Order(k));
        }
        let c = &mesh.cells[cell];
        let pts = mesh.cell_points(cell);
        let order = opts.order(k);
        let rule = polygon_rule(&pts, order).map_err(|source| SpaceError::Quadrature { cell, source })?;
        let (area, h, centroid) = (c.area, c.diameter, c.centroid);
        let edges: Vec<LocalEdge> = c
            .edges
            .iter()
            .enumerate()
            .map(|(j, &e)| {
                let edge = &mesh.edges[e];
                let (a, b) = (mesh.vertices[edge.vertices[0]], mesh.vertices[edge.vertices[1]]);
                LocalEdge {
                    a,
                    b,
                    length: edge.length,
                    normal: edge.normal,
                    sign: mesh.orientation(cell, j),
                    rule: edge_rule(&a, &b, order),
                }
            })
            .collect();
        let scalar = ScaledMonomialBasis::new(k, centroid, h);
        let vector = VectorDecomposition::new(k, centroid, h);
        let h_mono = scalar.gram(&rule);
        let positive = rule.weights.iter().all(|w| *w > 0.0);
        let t = if opts.orthonormal(k) {
            let t = if positive {
                orthonormalize_samples(&scalar_samples(&scalar, &rule))
            } else {
                orthonormalize(&h_mono)
            };
            t.map_err(|_| SpaceError::Conditioning { cell, what: "scalar", condition: condition_estimate(&h_mono) })?
        } else {
            DMatrix::identity(h_mono.nrows(), h_mono.nrows())
        };
        let raw_g = vector.gram(&rule);
        let vt = if opts.orthonormal(k) {
            let v = if positive {
                orthonormalize_samples(&vector_samples(&vector, &rule))
            } else {
                orthonormalize(&raw_g)
            };
            Some(v.map_err(|_| SpaceError::Conditioning { cell, what: "vector", condition: condition_estimate(&raw_g) })?)
        } else {
            None
        };
        let mut ops = Self {
            cell,
            k,
            area,
            h,
            centroid,
            edges,
            rule,
            scalar,
            vector,
            h_mono,
            t,
            vt,
            g: DMatrix::zeros(0, 0),
            div_moments: DMatrix::zeros(0, 0),
            projector: DMatrix::zeros(0, 0),
            basis_dofs: DMatrix::zeros(0, 0),
        };
        ops.g = if ops.vt.is_some() { ops.vector_gram(&ops.rule) } else { raw_g };
        ops.div_moments = ops.build_div_moments();
        ops.projector = ops.build_projector()?;
        ops.basis_dofs = ops.build_basis_dofs();
        Ok(ops)
    }

    pub fn num_dofs(&self) -> usize {
        local_dim(self.edges.len(), self.k)
    }

    pub fn num_edge_dofs(&self) -> usize {
        self.edges.len() * (self.k + 1)
    }

    fn num_div_dofs(&self) -> usize {
        self.scalar.len() - 1
    }

    fn build_div_moments(&self) -> DMatrix<f64> {
        let k = self.k;
        let mut m = DMatrix::zeros(self.scalar.len(), self.num_dofs());
        for (j, e) in self.edges.iter().enumerate() {
            m[(0, j * (k + 1))] = e.sign * e.length;
        }
        let off = self.num_edge_dofs();
        for a in 0..self.num_div_dofs() {
            m[(a + 1, off + a)] = self.area / self.h;
        }
        m
    }

    fn build_projector(&self) -> Result<DMatrix<f64>, SpaceError> {
        let k = self.k;
        let n = self.num_dofs();
        let nv = self.vector.len();
        let ng = self.vector.gradient_count();
        let high = ScaledMonomialBasis::new(k + 1, self.centroid, self.h);
        // With ψ = S m orthonormal, div v = Σ (S μ)_l ψ_l and
        // ∫ div v m̃_α = Σ_l (S μ)_l ∫ ψ_l m̃_α.
        let cond = || SpaceError::Conditioning { cell: self.cell, what: "scalar", condition: condition_estimate(&self.h_mono) };
        let s = if self.rule.weights.iter().all(|w| *w > 0.0) {
            orthonormalize_samples(&scalar_samples(&self.scalar, &self.rule))
        } else {
            orthonormalize(&self.h_mono)
        }
        .map_err(|_| cond())?;
        let mut mix = DMatrix::<f64>::zeros(self.scalar.len(), high.len());
        let mut hi = vec![0.0; high.len()];
        for (p, w) in self.rule.points.iter().zip(&self.rule.weights) {
            let psi = &s * DVector::from_vec(self.scalar.eval(p));
            high.eval_into(p, &mut hi);
            for (l, pl) in psi.iter().enumerate() {
                for (a, ha) in hi.iter().enumerate() {
                    mix[(l, a)] += w * pl * ha;
                }
            }
        }
        let div_in_high: DMatrix<f64> = mix.transpose() * (&s * &self.div_moments);
        let mut r = DMatrix::zeros(nv, n);
        for i in 0..ng {
            for col in 0..n {
                r[(i, col)] = -self.h * div_in_high[(i + 1, col)];
            }
        }
        for (j, e) in self.edges.iter().enumerate() {
            for (s, (p, w)) in e.rule.params.iter().zip(e.rule.points.iter().zip(&e.rule.weights)) {
                high.eval_into(p, &mut hi);
                for i in 0..=k {
                    let c = self.h * e.sign * (2 * i + 1) as f64 * w * legendre(i, *s);
                    for a in 0..ng {
                        r[(a, j * (k + 1) + i)] += c * hi[a + 1];
                    }
                }
            }
        }
        let off = self.num_edge_dofs() + self.num_div_dofs();
        for b in 0..self.vector.rotated_count() {
            r[(ng + b, off + b)] = self.area;
        }
        let r = match &self.vt {
            Some(v) => v * r,
            None => r,
        };
        let g_chol = self.g.clone().cholesky().ok_or(SpaceError::Conditioning {
            cell: self.cell,
            what: "vector",
            condition: condition_estimate(&self.g),
        })?;
        Ok(g_chol.solve(&r))
    }

    /// Applies the local DoF functionals to a field known through values and
    /// divergence at points, using the given rules.
    pub fn dofs_with(
        &self,
        edge_rules: &[EdgeQuadrature],
        rule: &PolygonQuadrature,
        value: impl Fn(&Point) -> Vector,
        div: impl Fn(&Point) -> f64,
    ) -> DVector<f64> {
        let mut out = DVector::zeros(self.num_dofs());
        for (j, (e, er)) in self.edges.iter().zip(edge_rules).enumerate() {
            self.edge_moments_into(e, er, &value, &mut out.as_mut_slice()[j * (self.k + 1)..(j + 1) * (self.k + 1)]);
        }
        self.cell_moments_into(rule, &value, &div, &mut out.as_mut_slice()[self.num_edge_dofs()..]);
        out
    }

    /// `(1/h_e) ∫_e (w · n_e) L_i`, global normal and orientation.
    pub fn edge_moments_into(&self, e: &LocalEdge, er: &EdgeQuadrature, value: &impl Fn(&Point) -> Vector, out: &mut [f64]) {
        edge_moments(self.k, e.normal, e.length, er, value, out);
    }

    /// Divergence then rotated moments.
    pub fn cell_moments_into(
        &self,
        rule: &PolygonQuadrature,
        value: &impl Fn(&Point) -> Vector,
        div: &impl Fn(&Point) -> f64,
        out: &mut [f64],
    ) {
        let nd = self.num_div_dofs();
        let mut m = vec![0.0; self.scalar.len()];
        out.iter_mut().for_each(|x| *x = 0.0);
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            self.scalar.eval_into(p, &mut m);
            let d = div(p);
            for a in 0..nd {
                out[a] += w * d * m[a + 1];
            }
            if self.k > 0 {
                let v = value(p);
                let (xi, eta) = self.scalar.scaled(p);
                let vr = v.x * eta - v.y * xi;
                for b in 0..self.vector.rotated_count() {
                    out[nd + b] += w * vr * m[b];
                }
            }
        }
        for a in 0..nd {
            out[a] *= self.h / self.area;
        }
        for b in 0..self.vector.rotated_count() {
            out[nd + b] /= self.area;
        }
    }

    fn build_basis_dofs(&self) -> DMatrix<f64> {
        let nv = self.vector.len();
        let mut d = DMatrix::zeros(self.num_dofs(), nv);
        let rules: Vec<EdgeQuadrature> = self.edges.iter().map(|e| e.rule.clone()).collect();
        for i in 0..nv {
            let sample = |x: &Point| -> VectorSample { self.vector_basis(x)[i] };
            let col = self.dofs_with(&rules, &self.rule, |x| sample(x).value, |x| sample(x).div);
            d.set_column(i, &col);
        }
        d
    }

    /// `Q = D P`, the DoF vector of `Π⁰_k v` from the DoF vector of `v`.
    pub fn dof_projector(&self) -> DMatrix<f64> {
        &self.basis_dofs * &self.projector
    }

    /// `m_h^E = Pᵀ G P + |E| (I - Q)ᵀ (I - Q)`.
    pub fn mass(&self) -> DMatrix<f64> {
        let n = self.num_dofs();
        let consistency = self.projector.transpose() * &self.g * &self.projector;
        let iq = DMatrix::identity(n, n) - self.dof_projector();
        let mut m = consistency + (iq.transpose() * iq) * self.area;
        m = (&m + m.transpose()) * 0.5;
        m
    }

    /// `∫ div φ_j ψ_i`.
    pub fn divergence(&self) -> DMatrix<f64> {
        &self.t * &self.div_moments
    }

    /// `∫ c⁻² ψ_i ψ_j`.
    pub fn pressure_mass(&self, c: f64) -> DMatrix<f64> {
        let g = &self.t * &self.h_mono * self.t.transpose();
        (&g + g.transpose()) * (0.5 / (c * c))
    }

    /// Coefficients of `div v` in the monomials `m_α`.
    pub fn div_coefficients(&self, dofs: &DVector<f64>) -> DVector<f64> {
        let mu = &self.div_moments * dofs;
        self.h_mono.clone().cholesky().expect("checked at construction").solve(&mu)
    }

    /// Coefficient vector of `Π⁰_k v` in the vector basis.
    pub fn project(&self, dofs: &DVector<f64>) -> DVector<f64> {
        &self.projector * dofs
    }

    /// Vector basis values and divergences `φ_i(x)`.
    pub fn vector_basis(&self, x: &Point) -> Vec<VectorSample> {
        let raw = self.vector.eval(x);
        let Some(v) = &self.vt else { return raw };
        (0..raw.len())
            .map(|i| {
                raw.iter().enumerate().take(i + 1).fold(VectorSample::default(), |acc, (j, s)| VectorSample {
                    value: acc.value + s.value * v[(i, j)],
                    div: acc.div + s.div * v[(i, j)],
                })
            })
            .collect()
    }

    /// `∫ φ_i · φ_j` with the given rule.
    pub fn vector_gram(&self, rule: &PolygonQuadrature) -> DMatrix<f64> {
        let n = self.vector.len();
        let mut g = DMatrix::zeros(n, n);
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            let v = self.vector_basis(p);
            for i in 0..n {
                for j in 0..=i {
                    g[(i, j)] += w * v[i].value.dot(&v[j].value);
                }
            }
        }
        g.fill_upper_triangle_with_lower_triangle();
        g
    }

    /// Evaluates a vector-basis coefficient vector at `x`.
    pub fn eval_vector(&self, coeffs: &DVector<f64>, x: &Point) -> Vector {
        self.vector_basis(x).iter().zip(coeffs.iter()).fold(Vector::zeros(), |acc, (s, c)| acc + s.value * *c)
    }

    /// Evaluates a pressure-basis coefficient vector at `x`.
    pub fn eval_scalar(&self, coeffs: &[f64], x: &Point) -> f64 {
        self.pressure_basis(x).iter().zip(coeffs).map(|(a, b)| a * b).sum()
    }

    /// Pressure basis values `ψ_i(x)`.
    pub fn pressure_basis(&self, x: &Point) -> DVector<f64> {
        &self.t * DVector::from_vec(self.scalar.eval(x))
    }

    /// Converts monomial coefficients to pressure-basis coefficients.
    pub fn monomial_to_pressure(&self, mono: &DVector<f64>) -> DVector<f64> {
        // m = T⁻¹ ψ, so Σ a_j m_j = Σ (T⁻ᵀ a)_i ψ_i.
        if self.t.is_identity(0.0) {
            return mono.clone();
        }
        self.t.transpose().clone().lu().solve(mono).expect("triangular transform is invertible")
    }
}

fn edge_moments(k: usize, normal: Vector, length: f64, er: &EdgeQuadrature, value: &impl Fn(&Point) -> Vector, out: &mut [f64]) {
    out.iter_mut().for_each(|x| *x = 0.0);
    for ((p, s), w) in er.points.iter().zip(&er.params).zip(&er.weights) {
        let vn = value(p).dot(&normal);
        for (i, o) in out.iter_mut().enumerate().take(k + 1) {
            *o += w * vn * legendre(i, *s);
        }
    }
    out.iter_mut().for_each(|x| *x /= length);
}

pub(super) fn global_edge_moments(
    k: usize,
    a: &Point,
    b: &Point,
    normal: Vector,
    order: usize,
    value: &impl Fn(&Point) -> Vector,
    out: &mut [f64],
) {
    let er = edge_rule(a, b, order);
    edge_moments(k, normal, (b - a).norm(), &er, value, out);
}

fn scalar_samples(b: &ScaledMonomialBasis, rule: &PolygonQuadrature) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(rule.points.len(), b.len());
    for (i, (p, w)) in rule.points.iter().zip(&rule.weights).enumerate() {
        for (j, v) in b.eval(p).iter().enumerate() {
            a[(i, j)] = w.sqrt() * v;
        }
    }
    a
}

fn vector_samples(b: &VectorDecomposition, rule: &PolygonQuadrature) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(2 * rule.points.len(), b.len());
    for (i, (p, w)) in rule.points.iter().zip(&rule.weights).enumerate() {
        let sw = w.sqrt();
        for (j, v) in b.eval(p).iter().enumerate() {
            a[(2 * i, j)] = sw * v.value.x;
            a[(2 * i + 1, j)] = sw * v.value.y;
        }
    }
    a
}

fn condition_estimate(m: &DMatrix<f64>) -> f64 {
    let e = m.clone().symmetric_eigenvalues();
    let (lo, hi) = e.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x.abs()), hi.max(x.abs())));
    hi / lo
}
