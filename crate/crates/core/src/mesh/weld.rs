use std::collections::HashMap;

use super::{MeshError, PolygonalMesh};
use crate::geometry::Point;

/// Merges coordinates closer than `tol` into one vertex index.
pub(crate) struct VertexWelder {
    tol: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
    pub points: Vec<Point>,
}

impl VertexWelder {
    pub fn new(tol: f64) -> Self {
        Self { tol, buckets: HashMap::new(), points: Vec::new() }
    }

    fn key(&self, p: &Point) -> (i64, i64) {
        ((p.x / self.tol).floor() as i64, (p.y / self.tol).floor() as i64)
    }

    pub fn insert(&mut self, p: Point) -> usize {
        let (kx, ky) = self.key(&p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.buckets.get(&(kx + dx, ky + dy)) {
                    for &id in ids {
                        if (self.points[id] - p).norm() <= self.tol {
                            return id;
                        }
                    }
                }
            }
        }
        let id = self.points.len();
        self.points.push(p);
        self.buckets.entry((kx, ky)).or_default().push(id);
        id
    }
}

/// Welds independently computed polygons into a conforming mesh.
pub(crate) fn polygons_to_mesh(polys: &[Vec<Point>], tol: f64) -> Result<PolygonalMesh, MeshError> {
    let mut welder = VertexWelder::new(tol);
    let mut loops = Vec::with_capacity(polys.len());
    for poly in polys {
        let mut lp: Vec<usize> = Vec::with_capacity(poly.len());
        for p in poly {
            let id = welder.insert(*p);
            if lp.last() != Some(&id) {
                lp.push(id);
            }
        }
        while lp.len() > 1 && lp.first() == lp.last() {
            lp.pop();
        }
        loops.push(lp);
    }
    let regions = vec![0; loops.len()];
    PolygonalMesh::from_cells(welder.points, loops, regions)
}
