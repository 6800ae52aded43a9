//! Local and global discrete forms, load vectors and boundary data.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::Point;
use crate::linalg::CsrMatrix;
use crate::mesh::{BoundaryTag, PolygonalMesh};
use crate::problem::ProblemData;
use crate::quadrature::{edge_rule, legendre};
use crate::space::{DofMap, ElementOps, ElementOptions, SpaceError};

#[derive(Debug, thiserror::Error)]
pub enum AssemblyError {
    #[error("material: {0}")]
    Material(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Piecewise-constant wave speed per region tag and the Robin impedance.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialField {
    /// Speed of regions without an explicit entry.
    pub c: f64,
    #[serde(default)]
    pub regions: BTreeMap<u32, f64>,
    #[serde(default = "one")]
    pub alpha: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for MaterialField {
    fn default() -> Self {
        Self::uniform(1.0)
    }
}

impl MaterialField {
    pub fn uniform(c: f64) -> Self {
        Self { c, regions: BTreeMap::new(), alpha: 1.0 }
    }

    pub fn speed(&self, region: u32) -> f64 {
        self.regions.get(&region).copied().unwrap_or(self.c)
    }

    /// `ĉ = max 1/c` over the regions present in the mesh.
    pub fn c_hat(&self, mesh: &PolygonalMesh) -> f64 {
        mesh.cells.iter().map(|c| 1.0 / self.speed(c.region)).fold(0.0, f64::max)
    }

    pub fn validate(&self, mesh: &PolygonalMesh) -> Result<(), AssemblyError> {
        if !(self.alpha > 0.0) {
            return Err(AssemblyError::Material(format!("impedance alpha = {} must be positive", self.alpha)));
        }
        for c in &mesh.cells {
            let s = self.speed(c.region);
            if !(s > 0.0 && s.is_finite()) {
                return Err(AssemblyError::Material(format!("wave speed {s} of region {} must be positive", c.region)));
            }
        }
        Ok(())
    }
}

/// Mesh, DoF map and per-cell operators of one discretization.
pub struct Discretization {
    pub mesh: PolygonalMesh,
    pub k: usize,
    pub dofs: DofMap,
    pub elements: Vec<ElementOps>,
    pub options: ElementOptions,
}

impl Discretization {
    pub fn new(mesh: PolygonalMesh, k: usize, options: ElementOptions) -> Result<Self, SpaceError> {
        let elements = (0..mesh.num_cells())
            .into_par_iter()
            .map(|c| ElementOps::new(&mesh, c, k, &options))
            .collect::<Result<Vec<_>, _>>()?;
        let dofs = DofMap::new(&mesh, k);
        Ok(Self { mesh, k, dofs, elements, options })
    }

    pub fn quadrature_order(&self) -> usize {
        self.options.order(self.k)
    }
}

/// `α c h_e (2i+1)` on the diagonal: the Robin form on one edge's moments.
pub fn local_robin(length: f64, c: f64, alpha: f64, k: usize) -> DMatrix<f64> {
    DMatrix::from_fn(k + 1, k + 1, |i, j| if i == j { alpha * c * length * (2 * i + 1) as f64 } else { 0.0 })
}

/// Global sparse blocks of the semi-discrete system
/// `M u' + Bᵀ p + R u = G`, `N p' - B u = F`.
pub struct GlobalSystem {
    pub m: CsrMatrix,
    pub n: CsrMatrix,
    pub b: CsrMatrix,
    pub r: CsrMatrix,
    /// Per-cell blocks of `N`.
    pub n_blocks: Vec<DMatrix<f64>>,
    /// Velocity DoFs with prescribed values.
    pub essential: Vec<usize>,
    /// The remaining velocity DoFs.
    pub free: Vec<usize>,
}

struct CellBlocks {
    m: DMatrix<f64>,
    n: DMatrix<f64>,
    b: DMatrix<f64>,
}

pub fn assemble(disc: &Discretization, material: &MaterialField) -> Result<GlobalSystem, AssemblyError> {
    material.validate(&disc.mesh)?;
    let mesh = &disc.mesh;
    let dofs = &disc.dofs;
    let blocks: Vec<CellBlocks> = disc
        .elements
        .par_iter()
        .map(|e| {
            let c = material.speed(mesh.cells[e.cell].region);
            CellBlocks { m: e.mass(), n: e.pressure_mass(c), b: e.divergence() }
        })
        .collect();
    let mut tm = Vec::new();
    let mut tn = Vec::new();
    let mut tb = Vec::new();
    for (cell, blk) in blocks.iter().enumerate() {
        let gu = &dofs.cell_dofs[cell];
        let gp = dofs.pressure_dofs(cell);
        for (i, &gi) in gu.iter().enumerate() {
            for (j, &gj) in gu.iter().enumerate() {
                tm.push((gi, gj, blk.m[(i, j)]));
            }
        }
        for (i, gi) in gp.clone().enumerate() {
            for (j, gj) in gp.clone().enumerate() {
                tn.push((gi, gj, blk.n[(i, j)]));
            }
            for (j, &gj) in gu.iter().enumerate() {
                if blk.b[(i, j)] != 0.0 {
                    tb.push((gi, gj, blk.b[(i, j)]));
                }
            }
        }
    }
    let mut tr = Vec::new();
    for (e, edge) in mesh.edges.iter().enumerate() {
        if edge.tag == BoundaryTag::Robin {
            let c = material.speed(mesh.cells[edge.cells.0].region);
            let re = local_robin(edge.length, c, material.alpha, disc.k);
            for i in 0..=disc.k {
                tr.push((dofs.edge_dof(e, i), dofs.edge_dof(e, i), re[(i, i)]));
            }
        }
    }
    let essential: Vec<usize> = (0..dofs.n_u).filter(|&i| dofs.essential[i]).collect();
    let free: Vec<usize> = (0..dofs.n_u).filter(|&i| !dofs.essential[i]).collect();
    Ok(GlobalSystem {
        m: CsrMatrix::from_triplets(dofs.n_u, dofs.n_u, tm),
        n: CsrMatrix::from_triplets(dofs.n_p, dofs.n_p, tn),
        b: CsrMatrix::from_triplets(dofs.n_p, dofs.n_u, tb),
        r: CsrMatrix::from_triplets(dofs.n_u, dofs.n_u, tr),
        n_blocks: blocks.into_iter().map(|b| b.n).collect(),
        essential,
        free,
    })
}

impl GlobalSystem {
    /// Writes `M.mtx`, `N.mtx`, `B.mtx` and `R.mtx` into `dir`.
    pub fn write_matrix_market(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>, AssemblyError> {
        std::fs::create_dir_all(dir)?;
        let mut out = Vec::new();
        for (name, m) in [("M", &self.m), ("N", &self.n), ("B", &self.b), ("R", &self.r)] {
            let path = dir.join(format!("{name}.mtx"));
            m.write_matrix_market(std::io::BufWriter::new(std::fs::File::create(&path)?))?;
            out.push(path);
        }
        Ok(out)
    }

    /// `uᵀ M u + pᵀ N p`.
    pub fn energy(&self, u: &DVector<f64>, p: &DVector<f64>) -> f64 {
        u.dot(&self.m.mul(u)) + p.dot(&self.n.mul(p))
    }
}

/// Right-hand sides at one time level.
#[derive(Clone, Debug)]
pub struct Loads {
    /// `(f, ψ_i)`.
    pub f: DVector<f64>,
    /// Natural boundary terms of the velocity equation.
    pub g: DVector<f64>,
    /// Values of the essential (Neumann) DoFs, aligned with `GlobalSystem::essential`.
    pub essential_values: DVector<f64>,
}

/// Loads and boundary data at time `t`.
pub fn loads(disc: &Discretization, material: &MaterialField, data: &dyn ProblemData, t: f64) -> Loads {
    let mesh = &disc.mesh;
    let dofs = &disc.dofs;
    let k = disc.k;
    let order = disc.quadrature_order();
    let mut f = DVector::zeros(dofs.n_p);
    if !data.is_unforced() {
        let parts: Vec<DVector<f64>> = disc
            .elements
            .par_iter()
            .map(|e| {
                let mut v = DVector::zeros(e.scalar.len());
                for (x, w) in e.rule.points.iter().zip(&e.rule.weights) {
                    v += e.pressure_basis(x) * (w * data.source(x, t));
                }
                v
            })
            .collect();
        for (c, v) in parts.iter().enumerate() {
            f.rows_mut(dofs.pressure_dofs(c).start, v.len()).copy_from(v);
        }
    }
    let mut g = DVector::zeros(dofs.n_u);
    let mut essential_values = Vec::new();
    for (e, edge) in mesh.edges.iter().enumerate() {
        let (a, b) = (mesh.vertices[edge.vertices[0]], mesh.vertices[edge.vertices[1]]);
        let moments = |func: &dyn Fn(&Point) -> f64| -> Vec<f64> {
            let rule = edge_rule(&a, &b, order);
            (0..=k)
                .map(|i| rule.points.iter().zip(&rule.params).zip(&rule.weights).map(|((x, s), w)| w * func(x) * legendre(i, *s)).sum())
                .collect()
        };
        match edge.tag {
            BoundaryTag::Dirichlet => {
                for (i, m) in moments(&|x| data.dirichlet(x, t)).into_iter().enumerate() {
                    g[dofs.edge_dof(e, i)] += (2 * i + 1) as f64 * m;
                }
            }
            BoundaryTag::Robin => {
                let c = material.speed(mesh.cells[edge.cells.0].region);
                for (i, m) in moments(&|x| data.robin(x, t)).into_iter().enumerate() {
                    g[dofs.edge_dof(e, i)] += material.alpha * c * (2 * i + 1) as f64 * m;
                }
            }
            BoundaryTag::Neumann => {
                for m in moments(&|x| data.neumann(x, t)) {
                    essential_values.push(m / edge.length);
                }
            }
            _ => {}
        }
    }
    Loads { f, g, essential_values: DVector::from_vec(essential_values) }
}

#[cfg(test)]
mod tests;
