//! One-dimensional Gauss-Legendre rules, Legendre polynomials and edge rules.

use crate::geometry::Point;

/// Legendre polynomial `P_n(s)` on `[-1, 1]` by the three-term recurrence.
pub fn legendre(n: usize, s: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => s,
        _ => {
            let (mut p0, mut p1) = (1.0, s);
            for j in 1..n {
                let jf = j as f64;
                let p2 = ((2.0 * jf + 1.0) * s * p1 - jf * p0) / (jf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            p1
        }
    }
}

/// Values and derivatives of `P_0..=P_n` at `s`.
fn legendre_with_derivative(n: usize, s: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = s;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 1..n {
        let jf = j as f64;
        let p2 = ((2.0 * jf + 1.0) * s * p1 - jf * p0) / (jf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (s * p1 - p0) / (s * s - 1.0);
    (p1, dp)
}

/// Nodes and weights of the `npts`-point Gauss-Legendre rule on `[-1, 1]`,
/// nodes in increasing order.
pub fn gauss_legendre(npts: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(npts > 0);
    let mut nodes = vec![0.0; npts];
    let mut weights = vec![0.0; npts];
    let n = npts as f64;
    for i in 0..npts.div_ceil(2) {
        // Tricomi initial guess, then Newton.
        let mut s = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(npts, s);
            let ds = p / dp;
            s -= ds;
            if ds.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(npts, s);
        let w = 2.0 / ((1.0 - s * s) * dp * dp);
        nodes[i] = -s;
        nodes[npts - 1 - i] = s;
        weights[i] = w;
        weights[npts - 1 - i] = w;
    }
    if npts % 2 == 1 {
        nodes[npts / 2] = 0.0;
    }
    (nodes, weights)
}

/// Number of Gauss points needed for exactness up to `order`.
#[inline]
pub fn points_for_order(order: usize) -> usize {
    order / 2 + 1
}

/// Gauss-Legendre rule mapped onto a segment.
#[derive(Clone, Debug)]
pub struct EdgeQuadrature {
    pub points: Vec<Point>,
    /// Parameter of each point in `[-1, 1]`, increasing from `a` to `b`.
    pub params: Vec<f64>,
    /// Weights summing to the segment length.
    pub weights: Vec<f64>,
    pub order: usize,
}

impl EdgeQuadrature {
    pub fn integrate(&self, f: impl Fn(&Point) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }
}

/// Rule exact for polynomials of degree `order` along segment `a -> b`.
pub fn edge_rule(a: &Point, b: &Point, order: usize) -> EdgeQuadrature {
    let (nodes, weights) = gauss_legendre(points_for_order(order));
    let half = 0.5 * (b - a).norm();
    let mid = Point::from((a.coords + b.coords) * 0.5);
    let t = (b - a) * 0.5;
    EdgeQuadrature {
        points: nodes.iter().map(|s| mid + t * *s).collect(),
        params: nodes.clone(),
        weights: weights.iter().map(|w| w * half).collect(),
        order,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_values() {
        assert_eq!(legendre(0, 0.3), 1.0);
        assert!((legendre(2, 0.5) - (-0.125)).abs() < 1e-15);
        assert!((legendre(3, 1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gauss_rules_integrate_monomials() {
        for npts in 1..=12 {
            let (x, w) = gauss_legendre(npts);
            for deg in 0..2 * npts {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-14, "n={npts} deg={deg}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn edge_rule_examples() {
        let r = edge_rule(&Point::new(0.0, 0.0), &Point::new(1.0, 0.0), 1);
        assert!((r.integrate(|p| p.x) - 0.5).abs() < 1e-15);
        let r = edge_rule(&Point::new(0.0, 0.0), &Point::new(1.0, 0.0), 3);
        assert!((r.integrate(|p| p.x.powi(3)) - 0.25).abs() < 1e-15);
        let r = edge_rule(&Point::new(0.0, 0.0), &Point::new(3.0, 4.0), 0);
        assert!((r.integrate(|_| 1.0) - 5.0).abs() < 1e-14);
        assert_eq!(r.points.len(), 1);
    }

    #[test]
    fn legendre_orthogonality_on_edge() {
        let a = Point::new(0.2, -1.0);
        let b = Point::new(1.7, 0.5);
        let r = edge_rule(&a, &b, 8);
        let len = (b - a).norm();
        for i in 0..5 {
            for j in 0..5 {
                let v: f64 = r
                    .params
                    .iter()
                    .zip(&r.weights)
                    .map(|(s, w)| w * legendre(i, *s) * legendre(j, *s))
                    .sum();
                let exact = if i == j { len / (2.0 * i as f64 + 1.0) } else { 0.0 };
                assert!((v - exact).abs() < 1e-13);
            }
        }
    }
}
