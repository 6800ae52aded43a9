//! Legacy ASCII VTK snapshots and a structural validator for them.

use std::io::{self, Write};

use crate::assembly::Discretization;
use crate::timestepping::WaveState;

fn local_pressure(disc: &Discretization, c: usize, p: &nalgebra::DVector<f64>) -> Vec<f64> {
    let r = disc.dofs.pressure_dofs(c);
    p.as_slice()[r].to_vec()
}

/// Polygon cells with the cell-mean pressure and `Π⁰_k u_h` at the centroid.
pub fn write_cells(mut w: impl Write, disc: &Discretization, state: &WaveState) -> io::Result<()> {
    let mesh = &disc.mesh;
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "polywave cells t={:.12e}", state.t)?;
    writeln!(w, "ASCII\nDATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", mesh.num_vertices())?;
    for v in &mesh.vertices {
        writeln!(w, "{:.15e} {:.15e} 0", v.x, v.y)?;
    }
    let size: usize = mesh.cells.iter().map(|c| c.vertices.len() + 1).sum();
    writeln!(w, "CELLS {} {}", mesh.num_cells(), size)?;
    for c in &mesh.cells {
        write!(w, "{}", c.vertices.len())?;
        for v in &c.vertices {
            write!(w, " {v}")?;
        }
        writeln!(w)?;
    }
    writeln!(w, "CELL_TYPES {}", mesh.num_cells())?;
    for _ in &mesh.cells {
        writeln!(w, "7")?;
    }
    writeln!(w, "CELL_DATA {}", mesh.num_cells())?;
    writeln!(w, "SCALARS pressure_mean double 1\nLOOKUP_TABLE default")?;
    for (c, e) in disc.elements.iter().enumerate() {
        let p = local_pressure(disc, c, &state.p);
        let mean = e.rule.integrate(|x| e.eval_scalar(&p, x)) / e.area;
        writeln!(w, "{mean:.15e}")?;
    }
    writeln!(w, "SCALARS region int 1\nLOOKUP_TABLE default")?;
    for c in &mesh.cells {
        writeln!(w, "{}", c.region)?;
    }
    writeln!(w, "VECTORS velocity double")?;
    for (c, e) in disc.elements.iter().enumerate() {
        let dofs = nalgebra::DVector::from_iterator(disc.dofs.cell_dofs[c].len(), disc.dofs.cell_dofs[c].iter().map(|&g| state.u[g]));
        let v = e.eval_vector(&e.project(&dofs), &mesh.cells[c].centroid);
        writeln!(w, "{:.15e} {:.15e} 0", v.x, v.y)?;
    }
    Ok(())
}

/// Point cloud of the pressure polynomial sampled at each cell's quadrature points.
pub fn write_pressure_points(mut w: impl Write, disc: &Discretization, state: &WaveState) -> io::Result<()> {
    let n: usize = disc.elements.iter().map(|e| e.rule.len()).sum();
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "polywave pressure samples t={:.12e}", state.t)?;
    writeln!(w, "ASCII\nDATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {n} double")?;
    let mut values = Vec::with_capacity(n);
    for (c, e) in disc.elements.iter().enumerate() {
        let p = local_pressure(disc, c, &state.p);
        for x in &e.rule.points {
            writeln!(w, "{:.15e} {:.15e} 0", x.x, x.y)?;
            values.push(e.eval_scalar(&p, x));
        }
    }
    writeln!(w, "CELLS {n} {}", 2 * n)?;
    for i in 0..n {
        writeln!(w, "1 {i}")?;
    }
    writeln!(w, "CELL_TYPES {n}")?;
    for _ in 0..n {
        writeln!(w, "1")?;
    }
    writeln!(w, "POINT_DATA {n}\nSCALARS pressure double 1\nLOOKUP_TABLE default")?;
    for v in values {
        writeln!(w, "{v:.15e}")?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VtkSummary {
    pub points: usize,
    pub cells: usize,
    /// Names of the SCALARS and VECTORS arrays, in file order.
    pub arrays: Vec<String>,
}

/// Checks the header, section keywords and that every section holds the
/// number of values its header announces.
pub fn validate_vtk(text: &str) -> Result<VtkSummary, String> {
    let mut lines = text.lines();
    let magic = lines.next().ok_or("empty file")?;
    if !magic.starts_with("# vtk DataFile Version") {
        return Err(format!("bad magic line {magic:?}"));
    }
    lines.next().ok_or("missing title line")?;
    if lines.next().map(str::trim) != Some("ASCII") {
        return Err("only ASCII files are supported".into());
    }
    if lines.next().map(str::trim) != Some("DATASET UNSTRUCTURED_GRID") {
        return Err("expected DATASET UNSTRUCTURED_GRID".into());
    }
    let mut tokens = lines.flat_map(str::split_whitespace).peekable();
    let mut next = |what: &str| tokens.next().ok_or_else(|| format!("unexpected end of file in {what}"));
    let count = |s: &str, what: &str| s.parse::<usize>().map_err(|_| format!("bad count {s:?} in {what}"));
    let number = |s: &str, what: &str| s.parse::<f64>().map(|_| ()).map_err(|_| format!("bad number {s:?} in {what}"));

    let mut summary = VtkSummary { points: 0, cells: 0, arrays: Vec::new() };
    if next("POINTS")? != "POINTS" {
        return Err("expected POINTS".into());
    }
    summary.points = count(next("POINTS")?, "POINTS")?;
    next("POINTS")?;
    for _ in 0..3 * summary.points {
        number(next("POINTS")?, "POINTS")?;
    }
    if next("CELLS")? != "CELLS" {
        return Err("expected CELLS".into());
    }
    summary.cells = count(next("CELLS")?, "CELLS")?;
    let size = count(next("CELLS")?, "CELLS")?;
    let mut seen = 0;
    for _ in 0..summary.cells {
        let m = count(next("CELLS")?, "CELLS")?;
        for _ in 0..m {
            let v = count(next("CELLS")?, "CELLS")?;
            if v >= summary.points {
                return Err(format!("cell references point {v} of {}", summary.points));
            }
        }
        seen += m + 1;
    }
    if seen != size {
        return Err(format!("CELLS size {size} but {seen} entries"));
    }
    if next("CELL_TYPES")? != "CELL_TYPES" || count(next("CELL_TYPES")?, "CELL_TYPES")? != summary.cells {
        return Err("CELL_TYPES count differs from CELLS".into());
    }
    for _ in 0..summary.cells {
        count(next("CELL_TYPES")?, "CELL_TYPES")?;
    }
    let mut attached = 0;
    while let Ok(kw) = next("data") {
        match kw {
            "CELL_DATA" => attached = count(next("CELL_DATA")?, "CELL_DATA")?,
            "POINT_DATA" => attached = count(next("POINT_DATA")?, "POINT_DATA")?,
            "SCALARS" => {
                summary.arrays.push(next("SCALARS")?.to_string());
                next("SCALARS")?;
                let comps = count(next("SCALARS")?, "SCALARS")?;
                if next("SCALARS")? != "LOOKUP_TABLE" {
                    return Err("SCALARS without LOOKUP_TABLE".into());
                }
                next("SCALARS")?;
                for _ in 0..attached * comps {
                    number(next("SCALARS")?, "SCALARS")?;
                }
            }
            "VECTORS" => {
                summary.arrays.push(next("VECTORS")?.to_string());
                next("VECTORS")?;
                for _ in 0..3 * attached {
                    number(next("VECTORS")?, "VECTORS")?;
                }
            }
            other => return Err(format!("unexpected token {other:?}")),
        }
    }
    Ok(summary)
}
