//! Plain-text `polymesh` format.
//!
//! ```text
//! polymesh 1
//! vertices N
//! x y            (N lines)
//! cells M
//! v0 v1 v2 ...   (M lines, counterclockwise)
//! regions M      (optional, one integer per cell)
//! boundary K
//! v0 v1 tag      (K lines, tag = dirichlet | neumann | robin)
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use super::{BoundaryTag, MeshError, PolygonalMesh};
use crate::geometry::Point;

pub fn write_polymesh(mesh: &PolygonalMesh, mut w: impl Write) -> Result<(), MeshError> {
    let mut s = String::new();
    let _ = writeln!(s, "polymesh 1");
    let _ = writeln!(s, "vertices {}", mesh.num_vertices());
    for p in &mesh.vertices {
        let _ = writeln!(s, "{:?} {:?}", p.x, p.y);
    }
    let _ = writeln!(s, "cells {}", mesh.num_cells());
    for c in &mesh.cells {
        let line: Vec<String> = c.vertices.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    if mesh.cells.iter().any(|c| c.region != 0) {
        let _ = writeln!(s, "regions {}", mesh.num_cells());
        for c in &mesh.cells {
            let _ = writeln!(s, "{}", c.region);
        }
    }
    let boundary: Vec<_> = mesh.boundary_edges().collect();
    let _ = writeln!(s, "boundary {}", boundary.len());
    for e in boundary {
        let e = &mesh.edges[e];
        let _ = writeln!(s, "{} {} {}", e.vertices[0], e.vertices[1], e.tag.as_str());
    }
    w.write_all(s.as_bytes())?;
    Ok(())
}

struct Lines<R> {
    inner: std::iter::Enumerate<std::io::Lines<R>>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_line(&mut self) -> Result<String, MeshError> {
        loop {
            match self.inner.next() {
                None => return Err(MeshError::Parse { line: self.line + 1, message: "unexpected end of file".into() }),
                Some((i, l)) => {
                    self.line = i + 1;
                    let l = l?;
                    let t = l.trim();
                    if !t.is_empty() && !t.starts_with('#') {
                        return Ok(t.to_string());
                    }
                }
            }
        }
    }

    fn err(&self, message: impl Into<String>) -> MeshError {
        MeshError::Parse { line: self.line, message: message.into() }
    }

    fn header(&mut self, name: &str) -> Result<usize, MeshError> {
        let l = self.next_line()?;
        self.section(&l, name)
    }

    fn section(&self, l: &str, name: &str) -> Result<usize, MeshError> {
        let mut it = l.split_whitespace();
        if it.next() != Some(name) {
            return Err(self.err(format!("expected `{name} <count>`")));
        }
        it.next().and_then(|n| n.parse().ok()).ok_or_else(|| self.err(format!("bad {name} count")))
    }
}

pub fn read_polymesh(r: impl BufRead) -> Result<PolygonalMesh, MeshError> {
    let mut lines = Lines { inner: r.lines().enumerate(), line: 0 };
    if lines.next_line()?.split_whitespace().collect::<Vec<_>>() != ["polymesh", "1"] {
        return Err(lines.err("expected header `polymesh 1`"));
    }
    let nv = lines.header("vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let l = lines.next_line()?;
        let xy: Vec<f64> = l.split_whitespace().map(str::parse).collect::<Result<_, _>>().map_err(|_| lines.err("bad coordinate"))?;
        if xy.len() != 2 {
            return Err(lines.err("expected two coordinates"));
        }
        vertices.push(Point::new(xy[0], xy[1]));
    }
    let nc = lines.header("cells")?;
    let mut loops = Vec::with_capacity(nc);
    for _ in 0..nc {
        let l = lines.next_line()?;
        let lp: Vec<usize> = l.split_whitespace().map(str::parse).collect::<Result<_, _>>().map_err(|_| lines.err("bad vertex index"))?;
        loops.push(lp);
    }
    let mut regions = vec![0u32; nc];
    let mut l = lines.next_line()?;
    if l.starts_with("regions") {
        if lines.section(&l, "regions")? != nc {
            return Err(lines.err("region count differs from cell count"));
        }
        for r in regions.iter_mut() {
            let l = lines.next_line()?;
            *r = l.parse().map_err(|_| lines.err("bad region tag"))?;
        }
        l = lines.next_line()?;
    }
    let nb = lines.section(&l, "boundary")?;
    let mut tags = HashMap::new();
    for _ in 0..nb {
        let l = lines.next_line()?;
        let parts: Vec<&str> = l.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(lines.err("expected `v0 v1 tag`"));
        }
        let a: usize = parts[0].parse().map_err(|_| lines.err("bad vertex index"))?;
        let b: usize = parts[1].parse().map_err(|_| lines.err("bad vertex index"))?;
        let tag = BoundaryTag::parse(parts[2]).ok_or_else(|| lines.err(format!("unknown tag `{}`", parts[2])))?;
        tags.insert((a.min(b), a.max(b)), tag);
    }
    let mut mesh = PolygonalMesh::from_cells(vertices, loops, regions)?;
    for (i, e) in mesh.edges.iter_mut().enumerate() {
        if !e.tag.is_boundary() {
            continue;
        }
        let [a, b] = e.vertices;
        match tags.remove(&(a.min(b), a.max(b))) {
            Some(t) => e.tag = t,
            None => return Err(MeshError::Configuration(format!("boundary edge {i} ({a}-{b}) has no tag"))),
        }
    }
    if let Some(((a, b), _)) = tags.into_iter().next() {
        return Err(MeshError::Configuration(format!("tagged pair {a}-{b} is not a boundary edge")));
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_holes_mesh, generate, HoleConfig, MeshFamily};

    fn roundtrip(m: &PolygonalMesh) -> PolygonalMesh {
        let mut buf = Vec::new();
        write_polymesh(m, &mut buf).unwrap();
        read_polymesh(&buf[..]).unwrap()
    }

    #[test]
    fn roundtrip_preserves_mesh() {
        let meshes = [
            generate(MeshFamily::Voro, 5, 3).unwrap(),
            build_holes_mesh(HoleConfig::FiveHoles, 38, 0).unwrap(),
        ];
        for m in &meshes {
            let r = roundtrip(m);
            assert_eq!(r.vertices, m.vertices);
            assert_eq!(r.num_edges(), m.num_edges());
            for (a, b) in r.edges.iter().zip(&m.edges) {
                assert_eq!(a.vertices, b.vertices);
                assert_eq!(a.tag, b.tag);
            }
        }
    }

    #[test]
    fn regions_survive() {
        let mut m = generate(MeshFamily::Quad, 2, 0).unwrap();
        m.cells[3].region = 7;
        assert_eq!(roundtrip(&m).cells[3].region, 7);
    }

    #[test]
    fn reports_line_numbers() {
        let text = "polymesh 1\nvertices 1\n0.0 zz\n";
        match read_polymesh(text.as_bytes()) {
            Err(MeshError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_tag_rejected() {
        let text = "polymesh 1\nvertices 3\n0 0\n1 0\n0 1\ncells 1\n0 1 2\nboundary 2\n0 1 dirichlet\n1 2 robin\n";
        assert!(matches!(read_polymesh(text.as_bytes()), Err(MeshError::Configuration(_))));
    }
}
