//! Voronoi diagrams clipped to the unit square, and Lloyd relaxation.

use crate::geometry::{centroid, clip_convex, HalfPlane, Point, Vector};
use crate::quadrature::polygon_rule;

const CLIP_EPS: f64 = 1e-13;

fn unit_square() -> Vec<Point> {
    vec![
        Point::new(0.0, 0.0),
        Point::new(1.0, 0.0),
        Point::new(1.0, 1.0),
        Point::new(0.0, 1.0),
    ]
}

/// Uniform bucket grid over the unit square for neighbour searches.
struct SeedGrid {
    g: usize,
    buckets: Vec<Vec<usize>>,
}

impl SeedGrid {
    fn new(seeds: &[Point]) -> Self {
        let g = ((seeds.len() as f64).sqrt().ceil() as usize).max(1);
        let mut buckets = vec![Vec::new(); g * g];
        for (i, s) in seeds.iter().enumerate() {
            let (bx, by) = Self::bucket_of(g, s);
            buckets[by * g + bx].push(i);
        }
        Self { g, buckets }
    }

    fn bucket_of(g: usize, p: &Point) -> (usize, usize) {
        let f = |v: f64| ((v * g as f64).floor().max(0.0) as usize).min(g - 1);
        (f(p.x), f(p.y))
    }
}

/// Voronoi cell of every seed, intersected with `(0,1)^2`, counterclockwise.
///
/// Each cell is clipped by bisectors of neighbours in growing rings of
/// buckets until the ring is farther than twice the cell's radius.
pub fn voronoi_cells(seeds: &[Point]) -> Vec<Vec<Point>> {
    let grid = SeedGrid::new(seeds);
    let g = grid.g as i64;
    let bucket = 1.0 / grid.g as f64;
    seeds
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut poly = unit_square();
            let (bx, by) = SeedGrid::bucket_of(grid.g, s);
            let (bx, by) = (bx as i64, by as i64);
            for ring in 0..=g {
                for dx in -ring..=ring {
                    for dy in -ring..=ring {
                        if dx.abs().max(dy.abs()) != ring {
                            continue;
                        }
                        let (x, y) = (bx + dx, by + dy);
                        if x < 0 || y < 0 || x >= g || y >= g {
                            continue;
                        }
                        for &j in &grid.buckets[(y * g + x) as usize] {
                            if j == i {
                                continue;
                            }
                            let o = seeds[j];
                            let normal: Vector = o - s;
                            let mid = (s.coords + o.coords) * 0.5;
                            let hp = HalfPlane { normal, offset: normal.dot(&mid) };
                            poly = clip_convex(&poly, &hp, CLIP_EPS * normal.norm());
                        }
                    }
                }
                let radius = poly.iter().map(|p| (p - s).norm()).fold(0.0, f64::max);
                if (ring as f64) * bucket > 2.0 * radius {
                    break;
                }
            }
            poly
        })
        .collect()
}

/// Centroidal-Voronoi energy `Σ_i ∫_{V_i} |x - z_i|^2`.
pub fn cvt_energy(seeds: &[Point], cells: &[Vec<Point>]) -> f64 {
    seeds
        .iter()
        .zip(cells)
        .map(|(s, c)| {
            polygon_rule(c, 2).map(|q| q.integrate(|p| (p - s).norm_squared())).unwrap_or(0.0)
        })
        .sum()
}

#[derive(Clone, Debug)]
pub struct LloydResult {
    pub seeds: Vec<Point>,
    pub cells: Vec<Vec<Point>>,
    /// CVT energy before each update, then after the last one.
    pub energies: Vec<f64>,
    pub iterations: usize,
    pub last_movement: f64,
}

/// Lloyd relaxation: move each seed to its cell centroid until the largest
/// displacement drops below `tol` or `max_iter` updates have been made.
pub fn lloyd(mut seeds: Vec<Point>, max_iter: usize, tol: f64) -> LloydResult {
    let mut cells = voronoi_cells(&seeds);
    let mut energies = vec![cvt_energy(&seeds, &cells)];
    let mut iterations = 0;
    let mut last_movement = f64::INFINITY;
    while iterations < max_iter {
        let mut movement: f64 = 0.0;
        for (s, c) in seeds.iter_mut().zip(&cells) {
            let z = centroid(c);
            movement = movement.max((z - *s).norm());
            *s = z;
        }
        iterations += 1;
        cells = voronoi_cells(&seeds);
        energies.push(cvt_energy(&seeds, &cells));
        last_movement = movement;
        if movement < tol {
            break;
        }
    }
    LloydResult { seeds, cells, energies, iterations, last_movement }
}
