//! Planar primitives shared by the mesh, quadrature and space modules.

pub type Point = nalgebra::Point2<f64>;
pub type Vector = nalgebra::Vector2<f64>;

#[inline]
pub fn cross(a: &Vector, b: &Vector) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Signed area of a closed vertex loop (positive when counterclockwise).
pub fn signed_area(loop_: &[Point]) -> f64 {
    let n = loop_.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = &loop_[i];
        let b = &loop_[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    0.5 * acc
}

/// Area centroid of a simple polygon.
pub fn centroid(loop_: &[Point]) -> Point {
    let n = loop_.len();
    let area = signed_area(loop_);
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let a = &loop_[i];
        let b = &loop_[(i + 1) % n];
        let w = a.x * b.y - b.x * a.y;
        cx += (a.x + b.x) * w;
        cy += (a.y + b.y) * w;
    }
    Point::new(cx / (6.0 * area), cy / (6.0 * area))
}

/// Largest vertex-to-vertex distance.
pub fn diameter(loop_: &[Point]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in loop_.iter().enumerate() {
        for b in &loop_[i + 1..] {
            d = d.max((b - a).norm());
        }
    }
    d
}

/// Outward unit normal of the segment a->b for a counterclockwise loop.
#[inline]
pub fn right_normal(a: &Point, b: &Point) -> Vector {
    let t = b - a;
    Vector::new(t.y, -t.x) / t.norm()
}

fn segments_cross(p1: &Point, p2: &Point, q1: &Point, q2: &Point) -> bool {
    let d1 = cross(&(p2 - p1), &(q1 - p1));
    let d2 = cross(&(p2 - p1), &(q2 - p1));
    let d3 = cross(&(q2 - q1), &(p1 - q1));
    let d4 = cross(&(q2 - q1), &(p2 - q1));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// True when no two non-adjacent edges of the loop properly intersect
/// and no vertex is repeated.
pub fn is_simple(loop_: &[Point]) -> bool {
    let n = loop_.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        for j in i + 1..n {
            if (loop_[i] - loop_[j]).norm() == 0.0 {
                return false;
            }
        }
    }
    for i in 0..n {
        let (a, b) = (&loop_[i], &loop_[(i + 1) % n]);
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (c, d) = (&loop_[j], &loop_[(j + 1) % n]);
            if segments_cross(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

/// Half-plane `normal · x <= offset`.
#[derive(Clone, Copy, Debug)]
pub struct HalfPlane {
    pub normal: Vector,
    pub offset: f64,
}

impl HalfPlane {
    #[inline]
    pub fn signed_distance(&self, p: &Point) -> f64 {
        self.normal.dot(&p.coords) - self.offset
    }
}

/// Sutherland-Hodgman clip of a convex polygon against one half-plane.
/// Vertices within `eps` of the line count as inside and are not duplicated.
pub fn clip_convex(poly: &[Point], hp: &HalfPlane, eps: f64) -> Vec<Point> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    if n == 0 {
        return out;
    }
    for i in 0..n {
        let a = &poly[i];
        let b = &poly[(i + 1) % n];
        let da = hp.signed_distance(a);
        let db = hp.signed_distance(b);
        let a_in = da <= eps;
        if a_in {
            out.push(*a);
        }
        if (a_in && db > eps && da < -eps) || (!a_in && db < -eps) {
            let s = da / (da - db);
            out.push(a + (b - a) * s);
        }
    }
    out
}
