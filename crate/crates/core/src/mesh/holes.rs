//! Cartesian meshes of the unit square with small polygonal holes.

use serde::{Deserialize, Serialize};

use super::weld::VertexWelder;
use super::{rules, MeshError, PolygonalMesh};
use crate::geometry::Point;

pub const HOLE_DIAMETER: f64 = 0.02;
/// Segments of the inscribed polygon standing in for each circle.
pub const HOLE_POLYGON_SEGMENTS: usize = 16;
const MIN_CELL_AREA: f64 = 1e-14;

const A: f64 = 0.605_263_157_894_735_5;
const B: f64 = 0.5;
const C: f64 = 0.394_736_842_105_262_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum HoleConfig {
    #[serde(alias = "five")]
    FiveHoles,
    #[serde(alias = "eight")]
    EightHoles,
}

impl HoleConfig {
    pub fn centres(self) -> Vec<Point> {
        let mut c = vec![
            Point::new(A, C),
            Point::new(A, B),
            Point::new(A, A),
            Point::new(B, A),
            Point::new(C, A),
        ];
        if self == HoleConfig::EightHoles {
            c.extend([Point::new(B, C), Point::new(C, C), Point::new(C, B)]);
        }
        c
    }
}

impl std::str::FromStr for HoleConfig {
    type Err = MeshError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "five" | "fiveHoles" => Ok(HoleConfig::FiveHoles),
            "eight" | "eightHoles" => Ok(HoleConfig::EightHoles),
            other => Err(MeshError::InvalidParameter(format!("unknown hole configuration `{other}`"))),
        }
    }
}

/// Which corner of a grid cell a hole sits on, counterclockwise from bottom-left.
#[derive(Clone, Copy)]
struct Cut {
    corner: usize,
    centre: Point,
}

/// `n x n` Cartesian mesh with the configured holes cut out.
///
/// Every hole must be centred on an interior grid node with radius below the
/// cell size, so each hole removes a quarter polygon from the four cells
/// around its node. Uncut cells are subdivided `4^refine`-fold; cut cells keep
/// the hanging nodes of their refined neighbours. Hole edges are tagged
/// Neumann, the outer square Robin.
pub fn build_holes_mesh(config: HoleConfig, n: usize, refine: u32) -> Result<PolygonalMesh, MeshError> {
    if n < 2 {
        return Err(MeshError::InvalidParameter(format!("n = {n} must be at least 2")));
    }
    if refine > 6 {
        return Err(MeshError::InvalidParameter(format!("refine = {refine} is too large")));
    }
    let radius = 0.5 * HOLE_DIAMETER;
    let cell = 1.0 / n as f64;
    if radius >= cell {
        return Err(MeshError::InvalidParameter(format!(
            "hole radius {radius} does not fit in cells of size {cell}"
        )));
    }
    let sub = 1usize << refine;
    let fine = n * sub;
    let fine_pt = |i: usize, j: usize| Point::new(i as f64 / fine as f64, j as f64 / fine as f64);

    let mut cuts: Vec<Option<Cut>> = vec![None; n * n];
    for centre in config.centres() {
        let gi = (centre.x * n as f64).round();
        let gj = (centre.y * n as f64).round();
        if (gi / n as f64 - centre.x).abs() > 1e-9 || (gj / n as f64 - centre.y).abs() > 1e-9 {
            return Err(MeshError::InvalidParameter(format!(
                "hole centre ({}, {}) is not on a node of the {n}x{n} grid",
                centre.x, centre.y
            )));
        }
        let (gi, gj) = (gi as usize, gj as usize);
        let centre = Point::new(gi as f64 / n as f64, gj as f64 / n as f64);
        if gi == 0 || gj == 0 || gi >= n || gj >= n {
            return Err(MeshError::InvalidParameter("hole touches the outer boundary".into()));
        }
        // Cells around the node and the corner of each that the node occupies.
        for (ci, cj, corner) in [(gi, gj, 0), (gi - 1, gj, 1), (gi - 1, gj - 1, 2), (gi, gj - 1, 3)] {
            let slot = &mut cuts[cj * n + ci];
            if slot.is_some() {
                return Err(MeshError::InvalidParameter("two holes cut the same cell".into()));
            }
            *slot = Some(Cut { corner, centre });
        }
    }

    let mut welder = VertexWelder::new(1e-12);
    let mut loops = Vec::new();
    let is_refined = |ci: i64, cj: i64| -> bool {
        ci >= 0 && cj >= 0 && (ci as usize) < n && (cj as usize) < n && cuts[cj as usize * n + ci as usize].is_none()
    };
    for cj in 0..n {
        for ci in 0..n {
            match cuts[cj * n + ci] {
                None => {
                    for b in 0..sub {
                        for a in 0..sub {
                            let (i, j) = (ci * sub + a, cj * sub + b);
                            loops.push(vec![
                                welder.insert(fine_pt(i, j)),
                                welder.insert(fine_pt(i + 1, j)),
                                welder.insert(fine_pt(i + 1, j + 1)),
                                welder.insert(fine_pt(i, j + 1)),
                            ]);
                        }
                    }
                }
                Some(cut) => {
                    // Corners in fine-grid indices, counterclockwise from bottom-left,
                    // and the coarse neighbour across each side c[s] -> c[s+1].
                    let (i0, j0) = (ci * sub, cj * sub);
                    let corners = [(i0, j0), (i0 + sub, j0), (i0 + sub, j0 + sub), (i0, j0 + sub)];
                    let (ci, cj) = (ci as i64, cj as i64);
                    let across = [(ci, cj - 1), (ci + 1, cj), (ci, cj + 1), (ci - 1, cj)];
                    let h = cut.corner;
                    let x = cut.centre;
                    let dir = |s: usize| {
                        let (a, b) = (corners[s], corners[(s + 1) % 4]);
                        let sgn = |p: usize, q: usize| (q as f64 - p as f64).clamp(-1.0, 1.0);
                        (sgn(a.0, b.0), sgn(a.1, b.1))
                    };
                    let mut lp = Vec::new();
                    // Leaving the hole along side h.
                    let d0 = dir(h);
                    lp.push(welder.insert(Point::new(x.x + radius * d0.0, x.y + radius * d0.1)));
                    for step in 1..=3 {
                        let s = (h + step) % 4;
                        let (a, b) = (corners[s], corners[(s + 1) % 4]);
                        lp.push(welder.insert(fine_pt(a.0, a.1)));
                        if step < 3 && is_refined(across[s].0, across[s].1) {
                            for t in 1..sub {
                                let i = (a.0 as i64 + (b.0 as i64 - a.0 as i64) * t as i64 / sub as i64) as usize;
                                let j = (a.1 as i64 + (b.1 as i64 - a.1 as i64) * t as i64 / sub as i64) as usize;
                                lp.push(welder.insert(fine_pt(i, j)));
                            }
                        }
                    }
                    // Arriving at the hole along side h-1, then the arc back.
                    let d3 = dir((h + 3) % 4);
                    lp.push(welder.insert(Point::new(x.x - radius * d3.0, x.y - radius * d3.1)));
                    let start = d0.1.atan2(d0.0);
                    let per_quadrant = HOLE_POLYGON_SEGMENTS / 4;
                    for m in (1..per_quadrant).rev() {
                        let t = start + std::f64::consts::FRAC_PI_2 * m as f64 / per_quadrant as f64;
                        lp.push(welder.insert(Point::new(x.x + radius * t.cos(), x.y + radius * t.sin())));
                    }
                    loops.push(lp);
                }
            }
        }
    }
    let regions = vec![0; loops.len()];
    let mesh = PolygonalMesh::from_cells(welder.points, loops, regions)?;
    if let Some((c, cell)) = mesh.cells.iter().enumerate().find(|(_, c)| c.area < MIN_CELL_AREA) {
        return Err(MeshError::Structural { cell: c, reason: format!("sliver cell of area {:e}", cell.area) });
    }
    mesh.tag_boundary(rules::robin_outer_neumann_inner)
}
