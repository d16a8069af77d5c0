//! Legacy ASCII VTK unstructured grids.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fem::DofMap;
use crate::mesh::Mesh;
use crate::solver::SolutionFields;

const VTK_TRIANGLE: usize = 5;

/// Serialises the mesh with vertex values of `u`, `p` and `theta`. The title
/// line records the concentration range.
pub fn write_vtk(mesh: &Mesh, dofs: &DofMap, fields: &SolutionFields) -> String {
    let n = mesh.n_vertices();
    let mut s = String::with_capacity(n * 120);
    s.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(s, "rosim theta_range {} {}", fields.theta_min(), fields.theta_max());
    s.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {n} double");
    for p in mesh.vertices() {
        let _ = writeln!(s, "{} {} 0", p[0], p[1]);
    }
    let nc = mesh.n_cells();
    let _ = writeln!(s, "CELLS {nc} {}", 4 * nc);
    for c in mesh.cells() {
        let _ = writeln!(s, "3 {} {} {}", c[0], c[1], c[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {nc}");
    for _ in 0..nc {
        let _ = writeln!(s, "{VTK_TRIANGLE}");
    }
    let _ = writeln!(s, "POINT_DATA {n}");
    s.push_str("VECTORS u double\n");
    for v in 0..n {
        let u = fields.velocity(dofs, v);
        let _ = writeln!(s, "{} {} 0", u[0], u[1]);
    }
    for (name, data) in [("p", &fields.p), ("theta", &fields.theta)] {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for x in data.iter() {
            let _ = writeln!(s, "{x}");
        }
    }
    s
}

pub fn export_vtk(mesh: &Mesh, dofs: &DofMap, fields: &SolutionFields, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_vtk(mesh, dofs, fields)).map_err(|e| Error::io(path, e))
}

/// Contents of a legacy VTK file as written by [`write_vtk`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VtkData {
    pub title: String,
    pub points: Vec<[f64; 3]>,
    pub cells: Vec<Vec<usize>>,
    pub cell_types: Vec<usize>,
    pub scalars: BTreeMap<String, Vec<f64>>,
    pub vectors: BTreeMap<String, Vec<[f64; 3]>>,
}

impl VtkData {
    /// `(min, max)` recorded in the title line, if present.
    pub fn theta_range(&self) -> Option<(f64, f64)> {
        let mut it = self.title.strip_prefix("rosim theta_range ")?.split_whitespace();
        Some((it.next()?.parse().ok()?, it.next()?.parse().ok()?))
    }
}

fn vtk_err(path: &Path, msg: String) -> Error {
    Error::io(path, std::io::Error::new(std::io::ErrorKind::InvalidData, msg))
}

/// Reads the ASCII unstructured-grid subset produced by [`write_vtk`].
pub fn read_vtk(path: impl AsRef<Path>) -> Result<VtkData> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let bad = |m: &str| vtk_err(path, m.to_string());
    if !lines.next().is_some_and(|l| l.starts_with("# vtk DataFile")) {
        return Err(bad("missing vtk header"));
    }
    let mut out = VtkData {
        title: lines.next().ok_or_else(|| bad("missing title"))?.to_string(),
        ..Default::default()
    };
    let mut tokens = lines.flat_map(str::split_whitespace);
    let mut next = || tokens.next().ok_or_else(|| bad("unexpected end of file"));
    fn num<T: std::str::FromStr>(s: &str, path: &Path) -> Result<T> {
        s.parse().map_err(|_| vtk_err(path, format!("bad number '{s}'")))
    }
    if next()? != "ASCII" {
        return Err(bad("only ASCII files are supported"));
    }
    let mut n_points = 0;
    loop {
        let Ok(kw) = next() else { break };
        match kw {
            "DATASET" => {
                if next()? != "UNSTRUCTURED_GRID" {
                    return Err(bad("only UNSTRUCTURED_GRID datasets are supported"));
                }
            }
            "POINTS" => {
                n_points = num(next()?, path)?;
                next()?;
                for _ in 0..n_points {
                    let p = [num(next()?, path)?, num(next()?, path)?, num(next()?, path)?];
                    out.points.push(p);
                }
            }
            "CELLS" => {
                let n: usize = num(next()?, path)?;
                next()?;
                for _ in 0..n {
                    let k: usize = num(next()?, path)?;
                    let c = (0..k).map(|_| num(next()?, path)).collect::<Result<Vec<usize>>>()?;
                    out.cells.push(c);
                }
            }
            "CELL_TYPES" => {
                let n: usize = num(next()?, path)?;
                for _ in 0..n {
                    out.cell_types.push(num(next()?, path)?);
                }
            }
            "POINT_DATA" => {
                let n: usize = num(next()?, path)?;
                if n != n_points {
                    return Err(bad("POINT_DATA size differs from POINTS"));
                }
            }
            "VECTORS" => {
                let name = next()?.to_string();
                next()?;
                let v = (0..n_points)
                    .map(|_| Ok([num(next()?, path)?, num(next()?, path)?, num(next()?, path)?]))
                    .collect::<Result<Vec<_>>>()?;
                out.vectors.insert(name, v);
            }
            "SCALARS" => {
                let name = next()?.to_string();
                next()?;
                next()?;
                if next()? != "LOOKUP_TABLE" {
                    return Err(bad("expected LOOKUP_TABLE"));
                }
                next()?;
                let v = (0..n_points).map(|_| num(next()?, path)).collect::<Result<Vec<f64>>>()?;
                out.scalars.insert(name, v);
            }
            other => return Err(bad(&format!("unsupported section '{other}'"))),
        }
    }
    Ok(out)
}
