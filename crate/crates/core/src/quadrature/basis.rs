//! Scaled monomials and the `∇P_{k+1} ⊕ x^⊥ P_{k-1}` decomposition of `[P_k]^2`.

use nalgebra::DMatrix;

use super::{PolygonQuadrature, QuadratureError};
use crate::geometry::{Point, Vector};

/// Graded lexicographic multi-indices `(a, b)` with `a + b <= degree`.
pub fn multi_indices(degree: usize) -> Vec<(u32, u32)> {
    let mut out = Vec::with_capacity(poly_dim(degree));
    for d in 0..=degree as u32 {
        for a in (0..=d).rev() {
            out.push((a, d - a));
        }
    }
    out
}

/// `dim P_n` in two variables; zero for negative degrees.
#[inline]
pub fn poly_dim(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

#[inline]
fn ipow(x: f64, e: i64) -> f64 {
    if e < 0 {
        0.0
    } else {
        x.powi(e as i32)
    }
}

/// `m_α(x) = ((x - x_E) / h_E)^α` for all `|α| <= degree`.
#[derive(Clone, Debug)]
pub struct ScaledMonomialBasis {
    pub degree: usize,
    pub centroid: Point,
    pub h: f64,
    indices: Vec<(u32, u32)>,
}

impl ScaledMonomialBasis {
    pub fn new(degree: usize, centroid: Point, h: f64) -> Self {
        Self { degree, centroid, h, indices: multi_indices(degree) }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn indices(&self) -> &[(u32, u32)] {
        &self.indices
    }

    #[inline]
    pub fn scaled(&self, x: &Point) -> (f64, f64) {
        ((x.x - self.centroid.x) / self.h, (x.y - self.centroid.y) / self.h)
    }

    pub fn eval_into(&self, x: &Point, out: &mut [f64]) {
        let (xi, eta) = self.scaled(x);
        for (o, &(a, b)) in out.iter_mut().zip(&self.indices) {
            *o = xi.powi(a as i32) * eta.powi(b as i32);
        }
    }

    pub fn eval(&self, x: &Point) -> Vec<f64> {
        let mut v = vec![0.0; self.len()];
        self.eval_into(x, &mut v);
        v
    }

    pub fn eval_grad(&self, x: &Point) -> Vec<Vector> {
        let (xi, eta) = self.scaled(x);
        self.indices
            .iter()
            .map(|&(a, b)| {
                let (a, b) = (a as i64, b as i64);
                Vector::new(
                    a as f64 * ipow(xi, a - 1) * ipow(eta, b),
                    b as f64 * ipow(xi, a) * ipow(eta, b - 1),
                ) / self.h
            })
            .collect()
    }

    /// Values at each point, one row per point.
    pub fn eval_matrix(&self, points: &[Point]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(points.len(), self.len());
        let mut row = vec![0.0; self.len()];
        for (i, p) in points.iter().enumerate() {
            self.eval_into(p, &mut row);
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    /// `∫_E m_α m_β` with the given rule.
    pub fn gram(&self, rule: &PolygonQuadrature) -> DMatrix<f64> {
        let n = self.len();
        let mut g = DMatrix::zeros(n, n);
        let mut v = vec![0.0; n];
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            self.eval_into(p, &mut v);
            for i in 0..n {
                let wi = w * v[i];
                for j in 0..=i {
                    g[(i, j)] += wi * v[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                g[(j, i)] = g[(i, j)];
            }
        }
        g
    }

    /// The vector decomposition basis of `[P_k]^2` with `k = self.degree`.
    pub fn vector_decomposition(&self) -> VectorDecomposition {
        VectorDecomposition::new(self.degree, self.centroid, self.h)
    }
}

/// Basis of `[P_k(E)]^2` split into two families:
///
/// * `g_α = h_E ∇m_α` for the scaled monomials of degree `1..=k+1`;
/// * `g⊥_β = x⊥_E m_β` for `|β| <= k-1`, with `x⊥_E = ((y-y_E)/h_E, -(x-x_E)/h_E)`.
///
/// The gradients carry the `h_E` factor so every function is O(1) on the cell.
#[derive(Clone, Debug)]
pub struct VectorDecomposition {
    pub k: usize,
    pub centroid: Point,
    pub h: f64,
    grad_indices: Vec<(u32, u32)>,
    rot_indices: Vec<(u32, u32)>,
}

/// Value and divergence of one vector basis function at a point.
#[derive(Clone, Copy, Debug, Default)]
pub struct VectorSample {
    pub value: Vector,
    pub div: f64,
}

impl VectorDecomposition {
    pub fn new(k: usize, centroid: Point, h: f64) -> Self {
        let grad_indices = multi_indices(k + 1).into_iter().skip(1).collect();
        let rot_indices = if k == 0 { Vec::new() } else { multi_indices(k - 1) };
        Self { k, centroid, h, grad_indices, rot_indices }
    }

    pub fn gradient_count(&self) -> usize {
        self.grad_indices.len()
    }

    pub fn rotated_count(&self) -> usize {
        self.rot_indices.len()
    }

    pub fn len(&self) -> usize {
        self.grad_indices.len() + self.rot_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn gradient_indices(&self) -> &[(u32, u32)] {
        &self.grad_indices
    }

    pub fn rotated_indices(&self) -> &[(u32, u32)] {
        &self.rot_indices
    }

    pub fn eval_into(&self, x: &Point, out: &mut [VectorSample]) {
        let xi = (x.x - self.centroid.x) / self.h;
        let eta = (x.y - self.centroid.y) / self.h;
        let h = self.h;
        let mut j = 0;
        for &(a, b) in &self.grad_indices {
            let (a, b) = (a as i64, b as i64);
            let (af, bf) = (a as f64, b as f64);
            let value = Vector::new(af * ipow(xi, a - 1) * ipow(eta, b), bf * ipow(xi, a) * ipow(eta, b - 1));
            let lap = af * (af - 1.0) * ipow(xi, a - 2) * ipow(eta, b) + bf * (bf - 1.0) * ipow(xi, a) * ipow(eta, b - 2);
            out[j] = VectorSample { value, div: lap / h };
            j += 1;
        }
        for &(a, b) in &self.rot_indices {
            let (a, b) = (a as i64, b as i64);
            let (af, bf) = (a as f64, b as f64);
            let m = ipow(xi, a) * ipow(eta, b);
            let value = Vector::new(eta * m, -xi * m);
            let div = (af * ipow(xi, a - 1) * ipow(eta, b + 1) - bf * ipow(xi, a + 1) * ipow(eta, b - 1)) / h;
            out[j] = VectorSample { value, div };
            j += 1;
        }
    }

    pub fn eval(&self, x: &Point) -> Vec<VectorSample> {
        let mut v = vec![VectorSample::default(); self.len()];
        self.eval_into(x, &mut v);
        v
    }

    /// `∫_E g_i · g_j`.
    pub fn gram(&self, rule: &PolygonQuadrature) -> DMatrix<f64> {
        let n = self.len();
        let mut g = DMatrix::zeros(n, n);
        let mut v = vec![VectorSample::default(); n];
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            self.eval_into(p, &mut v);
            for i in 0..n {
                for j in 0..=i {
                    g[(i, j)] += w * v[i].value.dot(&v[j].value);
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                g[(j, i)] = g[(i, j)];
            }
        }
        g
    }
}

/// Lower-triangular `T` with `T G Tᵀ = I`, i.e. the change of basis that makes
/// a basis with Gram matrix `G` orthonormal.
pub fn orthonormalize(gram: &DMatrix<f64>) -> Result<DMatrix<f64>, QuadratureError> {
    let chol = nalgebra::Cholesky::new(gram.clone()).ok_or(QuadratureError::Conditioning)?;
    let l = chol.l();
    let n = l.nrows();
    l.solve_lower_triangular(&DMatrix::identity(n, n)).ok_or(QuadratureError::Conditioning)
}

/// Lower-triangular `T` making a basis orthonormal, computed from its weighted
/// samples `A` (one row per point and component, scaled by `√w`, one column per
/// basis function) so that `A Tᵀ` has orthonormal columns.
///
/// Two passes of Householder QR; unlike [`orthonormalize`] the loss of
/// accuracy grows with `cond(A)` rather than `cond(AᵀA)`.
pub fn orthonormalize_samples(a: &DMatrix<f64>) -> Result<DMatrix<f64>, QuadratureError> {
    let n = a.ncols();
    if a.nrows() < n {
        return Err(QuadratureError::Conditioning);
    }
    let mut c = DMatrix::identity(n, n);
    let mut cur = a.clone();
    for _ in 0..2 {
        let r = cur.qr().r();
        let scale = r.diagonal().amax();
        if r.diagonal().iter().any(|d| d.abs() <= 1e-14 * scale) {
            return Err(QuadratureError::Conditioning);
        }
        let rinv = r.solve_upper_triangular(&DMatrix::identity(n, n)).ok_or(QuadratureError::Conditioning)?;
        c *= rinv;
        cur = a * &c;
    }
    Ok(c.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::polygon_rule;

    fn unit_square() -> Vec<Point> {
        vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ]
    }

    #[test]
    fn ordering_is_graded_lex() {
        assert_eq!(multi_indices(2), vec![(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]);
        for k in 0..6 {
            assert_eq!(multi_indices(k).len(), (k + 1) * (k + 2) / 2);
        }
    }

    #[test]
    fn vector_family_sizes() {
        let d = VectorDecomposition::new(1, Point::origin(), 1.0);
        assert_eq!((d.gradient_count(), d.rotated_count()), (5, 1));
        for k in 0..6 {
            let d = VectorDecomposition::new(k, Point::origin(), 1.0);
            assert_eq!(d.gradient_count(), (k + 2) * (k + 3) / 2 - 1);
            assert_eq!(d.rotated_count(), k * (k + 1) / 2);
            assert_eq!(d.len(), (k + 1) * (k + 2));
        }
    }

    #[test]
    fn monomials_at_centroid() {
        let b = ScaledMonomialBasis::new(3, Point::new(0.3, 0.7), 0.5);
        let v = b.eval(&Point::new(0.3, 0.7));
        assert_eq!(v[0], 1.0);
        assert!(v[1..].iter().all(|x| *x == 0.0));
    }

    #[test]
    fn gram_spd_and_orthonormalization() {
        let sq = unit_square();
        let rule = polygon_rule(&sq, 8).unwrap();
        let b = ScaledMonomialBasis::new(3, Point::new(0.5, 0.5), 2f64.sqrt());
        let g = b.gram(&rule);
        let eig = g.clone().symmetric_eigen();
        assert!(eig.eigenvalues.iter().all(|l| *l > 0.0));
        // ‖m_(1,0)‖² = |E|/h² · 1/12
        assert!((g[(1, 1)] - 1.0 / 2.0 / 12.0).abs() < 1e-15);
        let t = orthonormalize(&g).unwrap();
        let id = &t * &g * t.transpose();
        assert!((id - DMatrix::<f64>::identity(10, 10)).amax() < 1e-12);
        // Already orthonormal: the transform is the identity.
        let again = orthonormalize(&DMatrix::identity(10, 10)).unwrap();
        assert!((again - DMatrix::<f64>::identity(10, 10)).amax() < 1e-12);
    }

    #[test]
    fn sample_orthonormalization_matches_gram_route() {
        let sq = unit_square();
        let rule = polygon_rule(&sq, 8).unwrap();
        let b = ScaledMonomialBasis::new(3, Point::new(0.5, 0.5), 2f64.sqrt());
        let mut a = DMatrix::zeros(rule.points.len(), b.len());
        for (i, (p, w)) in rule.points.iter().zip(&rule.weights).enumerate() {
            for (j, v) in b.eval(p).iter().enumerate() {
                a[(i, j)] = w.sqrt() * v;
            }
        }
        let t = orthonormalize_samples(&a).unwrap();
        let id = &t * b.gram(&rule) * t.transpose();
        assert!((id - DMatrix::<f64>::identity(10, 10)).amax() < 1e-13);
        // Same triangular transform as the Cholesky route, up to column signs.
        let tc = orthonormalize(&b.gram(&rule)).unwrap();
        assert!((t.abs() - tc.abs()).amax() < 1e-9);
        assert!(orthonormalize_samples(&DMatrix::zeros(3, 2)).is_err());
    }

    #[test]
    fn singular_gram_is_reported() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(orthonormalize(&g).is_err());
    }
}
