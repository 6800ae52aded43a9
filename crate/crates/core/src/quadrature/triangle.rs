//! Reference-triangle rules in barycentric form; weights sum to one.

use super::gauss::gauss_legendre;

/// A point in barycentric coordinates with its (area-normalised) weight.
pub type BaryPoint = ([f64; 3], f64);

fn orbit3(a: f64, w: f64, out: &mut Vec<BaryPoint>) {
    let b = 1.0 - 2.0 * a;
    out.push(([a, a, b], w));
    out.push(([a, b, a], w));
    out.push(([b, a, a], w));
}

fn orbit6(a: f64, b: f64, w: f64, out: &mut Vec<BaryPoint>) {
    let c = 1.0 - a - b;
    for p in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
        out.push((p, w));
    }
}

/// Highest order covered by a fully symmetric table.
pub const MAX_SYMMETRIC_ORDER: usize = 6;

fn symmetric_rule(order: usize) -> Vec<BaryPoint> {
    let mut r = Vec::new();
    match order {
        0 | 1 => r.push(([1.0 / 3.0; 3], 1.0)),
        2 => orbit3(1.0 / 6.0, 1.0 / 3.0, &mut r),
        3 | 4 => {
            orbit3(0.445_948_490_915_965, 0.223_381_589_678_011, &mut r);
            orbit3(0.091_576_213_509_771, 0.109_951_743_655_322, &mut r);
        }
        5 => {
            let s15 = 15f64.sqrt();
            r.push(([1.0 / 3.0; 3], 0.225));
            orbit3((6.0 - s15) / 21.0, (155.0 - s15) / 1200.0, &mut r);
            orbit3((6.0 + s15) / 21.0, (155.0 + s15) / 1200.0, &mut r);
        }
        6 => {
            orbit3(0.249_286_745_170_910, 0.116_786_275_726_379, &mut r);
            orbit3(0.063_089_014_491_502, 0.050_844_906_370_207, &mut r);
            orbit6(
                0.053_145_049_844_817,
                0.310_352_451_033_784,
                0.082_851_075_618_374,
                &mut r,
            );
        }
        _ => unreachable!(),
    }
    r
}

/// Collapsed-square (Duffy) rule: tensor Gauss-Legendre pulled back to the
/// triangle. Exact for total degree `order`, all weights positive.
fn collapsed_rule(order: usize) -> Vec<BaryPoint> {
    // The Jacobian adds one degree in the collapsed direction.
    let n_u = order.div_ceil(2) + 1;
    let n_v = order / 2 + 1;
    let (xu, wu) = gauss_legendre(n_u);
    let (xv, wv) = gauss_legendre(n_v);
    let mut r = Vec::with_capacity(n_u * n_v);
    for (su, wu) in xu.iter().zip(&wu) {
        let u = 0.5 * (su + 1.0);
        for (sv, wv) in xv.iter().zip(&wv) {
            let v = 0.5 * (sv + 1.0);
            // (u, v) in [0,1]^2 -> (x, y) = (u, v (1 - u)), |J| = 1 - u.
            let x = u;
            let y = v * (1.0 - u);
            // Reference area is 1/2; normalise weights to sum to one.
            let w = 0.25 * wu * wv * (1.0 - u) * 2.0;
            r.push(([1.0 - x - y, x, y], w));
        }
    }
    r
}

/// Rule exact for polynomials of total degree `order` on any triangle.
pub fn triangle_rule(order: usize) -> Vec<BaryPoint> {
    if order <= MAX_SYMMETRIC_ORDER {
        symmetric_rule(order)
    } else {
        collapsed_rule(order)
    }
}
