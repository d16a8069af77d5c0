//! Gmsh MSH 2.2 ASCII subset: nodes, 2-node boundary lines carrying physical
//! tags 1-4 (inlet, outlet, membrane, wall) and 3-node triangles.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use super::{BoundaryTag, Mesh};
use crate::error::{Error, Result};

fn element_name(t: i64) -> &'static str {
    match t {
        1 => "2-node line",
        2 => "3-node triangle",
        3 => "4-node quadrangle",
        4 => "4-node tetrahedron",
        5 => "8-node hexahedron",
        6 => "6-node prism",
        7 => "5-node pyramid",
        8 => "3-node second order line",
        9 => "6-node second order triangle",
        15 => "1-node point",
        _ => "unknown element",
    }
}

pub fn import_msh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_msh(&text)
}

pub fn parse_msh(text: &str) -> Result<Mesh> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let err = |line: usize, msg: String| Error::MshParse { line, msg };

    let mut nodes: Vec<(i64, [f64; 2])> = Vec::new();
    let mut lines_tagged: Vec<([i64; 2], BoundaryTag)> = Vec::new();
    let mut triangles: Vec<[i64; 3]> = Vec::new();
    let mut seen_format = false;
    let mut seen_elements = false;
    let mut end_line = 0;

    let next = |what: &str, lines: &mut dyn Iterator<Item = (usize, &str)>| -> Result<(usize, String)> {
        lines
            .next()
            .map(|(n, l)| (n, l.to_string()))
            .ok_or_else(|| err(0, format!("unexpected end of file while reading {what}")))
    };

    while let Some((ln, line)) = lines.next() {
        if line.is_empty() {
            continue;
        }
        match line {
            "$MeshFormat" => {
                let (n, fmt) = next("$MeshFormat", &mut lines)?;
                let mut it = fmt.split_whitespace();
                let version = it.next().unwrap_or("");
                let file_type = it.next().unwrap_or("");
                if !version.starts_with('2') {
                    return Err(err(n, format!("unsupported MSH version '{version}', expected 2.x")));
                }
                if file_type != "0" {
                    return Err(err(n, "binary MSH files are not supported".into()));
                }
                let (n, end) = next("$MeshFormat", &mut lines)?;
                if end != "$EndMeshFormat" {
                    return Err(err(n, format!("expected $EndMeshFormat, found '{end}'")));
                }
                seen_format = true;
            }
            "$Nodes" => {
                let (n, count) = next("$Nodes", &mut lines)?;
                let count: usize = count
                    .parse()
                    .map_err(|_| err(n, format!("malformed node count '{count}'")))?;
                nodes.reserve(count);
                for _ in 0..count {
                    let (n, l) = next("$Nodes", &mut lines)?;
                    let f: Vec<&str> = l.split_whitespace().collect();
                    if f.len() < 3 {
                        return Err(err(n, format!("malformed node line '{l}'")));
                    }
                    let id: i64 = f[0].parse().map_err(|_| err(n, format!("malformed node id '{}'", f[0])))?;
                    let x: f64 = f[1].parse().map_err(|_| err(n, format!("malformed coordinate '{}'", f[1])))?;
                    let y: f64 = f[2].parse().map_err(|_| err(n, format!("malformed coordinate '{}'", f[2])))?;
                    nodes.push((id, [x, y]));
                }
                let (n, end) = next("$Nodes", &mut lines)?;
                if end != "$EndNodes" {
                    return Err(err(n, format!("expected $EndNodes, found '{end}'")));
                }
            }
            "$Elements" => {
                let (n, count) = next("$Elements", &mut lines)?;
                let count: usize = count
                    .parse()
                    .map_err(|_| err(n, format!("malformed element count '{count}'")))?;
                for _ in 0..count {
                    let (n, l) = next("$Elements", &mut lines)?;
                    let f: Vec<i64> = l
                        .split_whitespace()
                        .map(|s| s.parse::<i64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| err(n, format!("malformed element line '{l}'")))?;
                    if f.len() < 3 {
                        return Err(err(n, format!("malformed element line '{l}'")));
                    }
                    let etype = f[1];
                    let ntags = f[2] as usize;
                    let body = &f[3..];
                    if body.len() < ntags {
                        return Err(err(n, format!("element line has fewer than {ntags} tags")));
                    }
                    let (tags, conn) = body.split_at(ntags);
                    let expect = |k: usize| -> Result<()> {
                        if conn.len() != k {
                            Err(err(n, format!("{} needs {k} nodes, found {}", element_name(etype), conn.len())))
                        } else {
                            Ok(())
                        }
                    };
                    match etype {
                        1 => {
                            expect(2)?;
                            let phys = *tags
                                .first()
                                .ok_or_else(|| err(n, "boundary line without a physical tag".into()))?;
                            let tag = BoundaryTag::from_physical_id(phys).ok_or_else(|| {
                                err(n, format!("unknown physical tag {phys} on boundary line (expected 1-4)"))
                            })?;
                            lines_tagged.push(([conn[0], conn[1]], tag));
                        }
                        2 => {
                            expect(3)?;
                            triangles.push([conn[0], conn[1], conn[2]]);
                        }
                        15 => {}
                        other => {
                            return Err(err(
                                n,
                                format!("unsupported element type {other} ({})", element_name(other)),
                            ))
                        }
                    }
                }
                let (n, end) = next("$Elements", &mut lines)?;
                if end != "$EndElements" {
                    return Err(err(n, format!("expected $EndElements, found '{end}'")));
                }
                end_line = n;
                seen_elements = true;
            }
            s if s.starts_with('$') => {
                let closing = format!("$End{}", &s[1..]);
                loop {
                    let (_, l) = next(s, &mut lines)?;
                    if l == closing {
                        break;
                    }
                }
            }
            other => return Err(err(ln, format!("unexpected content '{other}' outside a section"))),
        }
    }
    if !seen_format {
        return Err(err(1, "missing $MeshFormat section".into()));
    }
    if !seen_elements {
        return Err(err(end_line, "missing $Elements section".into()));
    }

    // compact to the nodes referenced by triangles, keeping file order
    let known: HashSet<i64> = nodes.iter().map(|(id, _)| *id).collect();
    let referenced: HashSet<i64> = triangles.iter().flatten().copied().collect();
    if let Some(id) = referenced.iter().find(|id| !known.contains(id)) {
        return Err(err(end_line, format!("triangle references missing node {id}")));
    }
    let mut remap: HashMap<i64, usize> = HashMap::new();
    let mut vertices = Vec::new();
    for (id, p) in &nodes {
        if referenced.contains(id) && !remap.contains_key(id) {
            remap.insert(*id, vertices.len());
            vertices.push(*p);
        }
    }
    let cells: Vec<[usize; 3]> = triangles
        .iter()
        .map(|t| [remap[&t[0]], remap[&t[1]], remap[&t[2]]])
        .collect();
    let mut tagged = Vec::with_capacity(lines_tagged.len());
    for ([a, b], tag) in lines_tagged {
        match (remap.get(&a), remap.get(&b)) {
            (Some(&a), Some(&b)) => tagged.push(([a, b], tag)),
            _ => {
                return Err(err(
                    end_line,
                    format!("boundary line ({a}, {b}) is not attached to any triangle"),
                ))
            }
        }
    }
    Mesh::from_parts(vertices, cells, &tagged).map_err(|e| err(end_line, e.to_string()))
}

/// Serialises a mesh as MSH 2.2 ASCII. Triangles carry physical group 100.
pub fn write_msh(mesh: &Mesh) -> String {
    let mut s = String::new();
    s.push_str("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n");
    s.push_str("$PhysicalNames\n5\n");
    for t in BoundaryTag::ALL {
        let _ = writeln!(s, "1 {} \"{}\"", t.physical_id(), t.name());
    }
    s.push_str("2 100 \"fluid\"\n$EndPhysicalNames\n");
    let _ = writeln!(s, "$Nodes\n{}", mesh.n_vertices());
    for (i, p) in mesh.vertices().iter().enumerate() {
        let _ = writeln!(s, "{} {} {} 0", i + 1, p[0], p[1]);
    }
    s.push_str("$EndNodes\n");
    let nb = mesh.boundary_edges().len();
    let _ = writeln!(s, "$Elements\n{}", nb + mesh.n_cells());
    let mut id = 1;
    for b in mesh.boundary_edges() {
        let phys = b.tag.physical_id();
        let _ = writeln!(s, "{id} 1 2 {phys} {phys} {} {}", b.vertices[0] + 1, b.vertices[1] + 1);
        id += 1;
    }
    for c in mesh.cells() {
        let _ = writeln!(s, "{id} 2 2 100 1 {} {} {}", c[0] + 1, c[1] + 1, c[2] + 1);
        id += 1;
    }
    s.push_str("$EndElements\n");
    s
}

pub fn export_msh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(write_msh(mesh).as_bytes())
        .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ChannelGeometry, GradingSpec};
    use crate::mesh::build_rectangle_mesh;

    const SQUARE: &str = "$MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
4
1 0 0 0
2 1 0 0
3 1 1 0
4 0 1 0
$EndNodes
$Elements
6
1 1 2 3 1 1 2
2 1 2 2 2 2 3
3 1 2 3 3 3 4
4 1 2 1 4 4 1
5 2 2 100 1 1 2 3
6 2 2 100 1 1 3 4
$EndElements
";

    #[test]
    fn minimal_square() {
        let m = parse_msh(SQUARE).unwrap();
        assert_eq!(m.n_vertices(), 4);
        assert_eq!(m.n_cells(), 2);
        assert_eq!(m.boundary_edges().len(), 4);
        assert_eq!(m.boundary_edges_tagged(BoundaryTag::Membrane).count(), 2);
    }

    #[test]
    fn quad_element_is_named_in_error() {
        let bad = SQUARE.replace("6 2 2 100 1 1 3 4", "6 3 2 100 1 1 2 3 4");
        let e = parse_msh(&bad).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("quadrangle"), "{msg}");
        assert!(matches!(e, Error::MshParse { line: 18, .. }));
    }

    #[test]
    fn untagged_line_reports_line_number() {
        let bad = SQUARE.replace("2 1 2 2 2 2 3", "2 1 0 2 3");
        match parse_msh(&bad).unwrap_err() {
            Error::MshParse { line, msg } => {
                assert_eq!(line, 14);
                assert!(msg.contains("physical tag"));
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn missing_boundary_line_is_an_error() {
        let bad = SQUARE.replace("6\n1 1 2 3 1 1 2\n", "5\n");
        let e = parse_msh(&bad).unwrap_err();
        assert!(e.to_string().contains("no tag"), "{e}");
    }

    #[test]
    fn malformed_section() {
        let bad = SQUARE.replace("4\n1 0 0 0", "four\n1 0 0 0");
        assert!(matches!(parse_msh(&bad), Err(Error::MshParse { line: 5, .. })));
        let bad = SQUARE.replace("$EndNodes", "$EndNode");
        assert!(parse_msh(&bad).is_err());
    }

    #[test]
    fn rectangle_round_trip() {
        let g = ChannelGeometry::default();
        let m = build_rectangle_mesh(&g, &GradingSpec::toward_membrane(4, 1.3)).unwrap();
        let back = parse_msh(&write_msh(&m)).unwrap();
        assert_eq!(back.n_vertices(), m.n_vertices());
        assert_eq!(back.n_cells(), m.n_cells());
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(back.boundary_edges().len(), m.boundary_edges().len());
    }
}
