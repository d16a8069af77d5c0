use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{dist, BoundaryTag, Mesh};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TagStats {
    pub edge_count: usize,
    pub total_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshQuality {
    pub vertex_count: usize,
    pub cell_count: usize,
    pub min_area: f64,
    pub max_area: f64,
    pub total_area: f64,
    /// Smallest interior angle over all cells, in radians.
    pub min_angle: f64,
    /// `l_max^2 * sqrt(3) / (4 A)`, equal to 1 for an equilateral triangle.
    pub max_aspect_ratio: f64,
    /// Per boundary tag, keyed by tag name.
    pub tags: BTreeMap<String, TagStats>,
}

pub fn cell_aspect_ratio(mesh: &Mesh, c: usize) -> f64 {
    let l = mesh.cell_diameter(c);
    l * l * 3f64.sqrt() / (4.0 * mesh.cell_area(c))
}

pub fn cell_min_angle(mesh: &Mesh, c: usize) -> f64 {
    let p = mesh.cell_points(c);
    (0..3)
        .map(|k| {
            let (a, b, o) = (p[(k + 1) % 3], p[(k + 2) % 3], p[k]);
            let u = [a[0] - o[0], a[1] - o[1]];
            let v = [b[0] - o[0], b[1] - o[1]];
            let cross = u[0] * v[1] - u[1] * v[0];
            let dot = u[0] * v[0] + u[1] * v[1];
            cross.abs().atan2(dot)
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn mesh_quality(mesh: &Mesh) -> MeshQuality {
    let mut q = MeshQuality {
        vertex_count: mesh.n_vertices(),
        cell_count: mesh.n_cells(),
        min_area: f64::INFINITY,
        max_area: 0.0,
        total_area: 0.0,
        min_angle: f64::INFINITY,
        max_aspect_ratio: 0.0,
        tags: BoundaryTag::ALL
            .iter()
            .map(|t| (t.name().to_string(), TagStats::default()))
            .collect(),
    };
    for c in 0..mesh.n_cells() {
        let a = mesh.cell_area(c);
        q.min_area = q.min_area.min(a);
        q.max_area = q.max_area.max(a);
        q.total_area += a;
        q.min_angle = q.min_angle.min(cell_min_angle(mesh, c));
        q.max_aspect_ratio = q.max_aspect_ratio.max(cell_aspect_ratio(mesh, c));
    }
    for b in mesh.boundary_edges() {
        let s = q.tags.get_mut(b.tag.name()).unwrap();
        s.edge_count += 1;
        s.total_length += dist(mesh.vertices()[b.vertices[0]], mesh.vertices()[b.vertices[1]]);
    }
    q
}
