use super::triangle::triangle_rule;
use super::QuadratureError;
use crate::geometry::{centroid, cross, signed_area, Point};

/// Area-weighted rule on a polygon.
#[derive(Clone, Debug)]
pub struct PolygonQuadrature {
    pub points: Vec<Point>,
    /// Positive weights summing to the polygon area.
    pub weights: Vec<f64>,
    pub order: usize,
}

impl PolygonQuadrature {
    pub fn integrate(&self, f: impl Fn(&Point) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn tri_area(a: &Point, b: &Point, c: &Point) -> f64 {
    0.5 * cross(&(b - a), &(c - a))
}

/// Triangles of the centroid fan, or `None` if the centroid does not see
/// every edge.
fn centroid_fan(poly: &[Point]) -> Option<Vec<[Point; 3]>> {
    let c = centroid(poly);
    let area = signed_area(poly);
    let n = poly.len();
    let mut tris = Vec::with_capacity(n);
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if tri_area(&c, &a, &b) <= 1e-14 * area {
            return None;
        }
        tris.push([c, a, b]);
    }
    Some(tris)
}

/// Ear-clipping triangulation of a simple counterclockwise polygon.
pub fn ear_clip(poly: &[Point]) -> Result<Vec<[Point; 3]>, QuadratureError> {
    let mut idx: Vec<usize> = (0..poly.len()).collect();
    let mut tris = Vec::with_capacity(poly.len().saturating_sub(2));
    let area = signed_area(poly).abs();
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        for i in 0..m {
            let (ia, ib, ic) = (idx[(i + m - 1) % m], idx[i], idx[(i + 1) % m]);
            let (a, b, c) = (poly[ia], poly[ib], poly[ic]);
            if tri_area(&a, &b, &c) <= 1e-14 * area {
                continue;
            }
            let blocked = idx.iter().any(|&j| {
                if j == ia || j == ib || j == ic {
                    return false;
                }
                let p = poly[j];
                tri_area(&a, &b, &p) >= 0.0 && tri_area(&b, &c, &p) >= 0.0 && tri_area(&c, &a, &p) >= 0.0
            });
            if !blocked {
                tris.push([a, b, c]);
                idx.remove(i);
                clipped = true;
                break;
            }
        }
        if !clipped {
            // Only collinear chains remain; drop a flat vertex.
            let flat = (0..m).find(|&i| {
                let (a, b, c) = (poly[idx[(i + m - 1) % m]], poly[idx[i]], poly[idx[(i + 1) % m]]);
                tri_area(&a, &b, &c).abs() <= 1e-14 * area
            });
            match flat {
                Some(i) => {
                    idx.remove(i);
                }
                None => return Err(QuadratureError::Triangulation),
            }
        }
    }
    if idx.len() == 3 {
        let (a, b, c) = (poly[idx[0]], poly[idx[1]], poly[idx[2]]);
        if tri_area(&a, &b, &c) > 0.0 {
            tris.push([a, b, c]);
        }
    }
    Ok(tris)
}

/// Sub-triangulation rule exact for total degree `order` on a polygon.
///
/// Uses the centroid fan when the centroid lies in the polygon's kernel,
/// and an ear-clipping triangulation otherwise.
pub fn polygon_rule(poly: &[Point], order: usize) -> Result<PolygonQuadrature, QuadratureError> {
    if poly.len() < 3 || signed_area(poly) <= 0.0 {
        return Err(QuadratureError::DegeneratePolygon);
    }
    let tris = match centroid_fan(poly) {
        Some(t) => t,
        None => ear_clip(poly)?,
    };
    let reference = triangle_rule(order);
    let mut points = Vec::with_capacity(tris.len() * reference.len());
    let mut weights = Vec::with_capacity(points.capacity());
    for [a, b, c] in &tris {
        let area = tri_area(a, b, c);
        for (l, w) in &reference {
            points.push(Point::from(a.coords * l[0] + b.coords * l[1] + c.coords * l[2]));
            weights.push(w * area);
        }
    }
    Ok(PolygonQuadrature { points, weights, order })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_examples() {
        let sq = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        let q = polygon_rule(&sq, 2).unwrap();
        assert!((q.integrate(|_| 1.0) - 1.0).abs() < 1e-15);
        assert!((q.integrate(|p| p.x) - 0.5).abs() < 1e-15);
        assert!((q.integrate(|p| p.x * p.x) - 1.0 / 3.0).abs() < 1e-15);
        let q = polygon_rule(&sq, 3).unwrap();
        assert!((q.integrate(|p| p.x * p.x * p.y) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn regular_pentagon_area() {
        let pent: Vec<Point> = (0..5)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / 5.0;
                Point::new(t.cos(), t.sin())
            })
            .collect();
        let q = polygon_rule(&pent, 0).unwrap();
        assert!((q.integrate(|_| 1.0) - 2.377_641_290_737_884).abs() < 1e-14);
    }

    #[test]
    fn nonconvex_polygon_falls_back_to_ear_clipping() {
        // Thin L-shape whose centroid lies outside the kernel.
        let l = [
            Point::new(0.0, 0.0),
            Point::new(3.0, 0.0),
            Point::new(3.0, 0.2),
            Point::new(0.2, 0.2),
            Point::new(0.2, 3.0),
            Point::new(0.0, 3.0),
        ];
        assert!(centroid_fan(&l).is_none());
        let q = polygon_rule(&l, 2).unwrap();
        let area = signed_area(&l);
        assert!((q.integrate(|_| 1.0) - area).abs() < 1e-13);
        assert!(q.weights.iter().all(|w| *w > 0.0));
    }

    #[test]
    fn clockwise_polygon_rejected() {
        let cw = [Point::new(0.0, 0.0), Point::new(0.0, 1.0), Point::new(1.0, 0.0)];
        assert!(polygon_rule(&cw, 1).is_err());
    }
}
