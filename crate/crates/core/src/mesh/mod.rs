//! Triangular meshes with tagged boundary edges.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod msh;
mod quality;
mod rectangle;
mod spacer;

pub use msh::{export_msh, import_msh, parse_msh, write_msh};
pub use quality::{mesh_quality, MeshQuality, TagStats};
pub use rectangle::build_rectangle_mesh;
pub use spacer::build_spacer_mesh;

use crate::geometry::{ChannelGeometry, GradingSpec, SpacerConfig};

pub type Point = [f64; 2];

const NONE: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryTag {
    Inlet,
    Outlet,
    Membrane,
    Wall,
}

impl BoundaryTag {
    pub const ALL: [BoundaryTag; 4] = [
        BoundaryTag::Inlet,
        BoundaryTag::Outlet,
        BoundaryTag::Membrane,
        BoundaryTag::Wall,
    ];

    /// Physical-group id used in MSH files.
    pub fn physical_id(self) -> i64 {
        match self {
            BoundaryTag::Inlet => 1,
            BoundaryTag::Outlet => 2,
            BoundaryTag::Membrane => 3,
            BoundaryTag::Wall => 4,
        }
    }

    pub fn from_physical_id(id: i64) -> Option<Self> {
        match id {
            1 => Some(BoundaryTag::Inlet),
            2 => Some(BoundaryTag::Outlet),
            3 => Some(BoundaryTag::Membrane),
            4 => Some(BoundaryTag::Wall),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BoundaryTag::Inlet => "inlet",
            BoundaryTag::Outlet => "outlet",
            BoundaryTag::Membrane => "membrane",
            BoundaryTag::Wall => "wall",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryEdge {
    /// End points, ordered counter-clockwise with respect to the adjacent cell.
    pub vertices: [usize; 2],
    pub tag: BoundaryTag,
    /// Outward unit normal.
    pub normal: Point,
    pub length: f64,
    /// The single cell adjacent to this edge.
    pub cell: usize,
    /// Local edge index `k` in that cell: `(v[k], v[(k+1)%3])`.
    pub local_edge: usize,
    /// Global edge index.
    pub edge: usize,
}

/// An immutable, counter-clockwise oriented triangulation.
#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point>,
    cells: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    cell_edges: Vec<[usize; 3]>,
    edge_cells: Vec<[usize; 2]>,
    boundary: Vec<BoundaryEdge>,
}

impl Mesh {
    /// Builds topology and validates tagging. Cells with negative orientation are
    /// flipped; degenerate cells are rejected.
    pub fn from_parts(
        vertices: Vec<Point>,
        mut cells: Vec<[usize; 3]>,
        tagged_edges: &[([usize; 2], BoundaryTag)],
    ) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::Mesh("mesh has no cells".into()));
        }
        for (c, cell) in cells.iter_mut().enumerate() {
            if cell.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::Mesh(format!("cell {c} references a missing vertex")));
            }
            let a = signed_area(vertices[cell[0]], vertices[cell[1]], vertices[cell[2]]);
            let scale = bbox_diag_sq(&[vertices[cell[0]], vertices[cell[1]], vertices[cell[2]]]);
            if a.abs() <= 1e-14 * scale {
                return Err(Error::Mesh(format!("cell {c} is degenerate")));
            }
            if a < 0.0 {
                cell.swap(1, 2);
            }
        }

        let mut edge_index: HashMap<(usize, usize), usize> = HashMap::with_capacity(cells.len() * 2);
        let mut edges = Vec::with_capacity(cells.len() * 2);
        let mut edge_cells: Vec<[usize; 2]> = Vec::with_capacity(cells.len() * 2);
        let mut cell_edges = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            let mut ce = [0; 3];
            for k in 0..3 {
                let (a, b) = (cell[k], cell[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let e = *edge_index.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edge_cells.push([NONE, NONE]);
                    edges.len() - 1
                });
                let slot = &mut edge_cells[e];
                if slot[0] == NONE {
                    slot[0] = c;
                } else if slot[1] == NONE {
                    slot[1] = c;
                } else {
                    return Err(Error::Mesh(format!(
                        "edge ({}, {}) is shared by more than two cells",
                        key.0, key.1
                    )));
                }
                ce[k] = e;
            }
            cell_edges.push(ce);
        }

        let mut tags: HashMap<usize, BoundaryTag> = HashMap::new();
        for &([a, b], tag) in tagged_edges {
            let key = (a.min(b), a.max(b));
            let Some(&e) = edge_index.get(&key) else {
                return Err(Error::Mesh(format!(
                    "tagged edge ({a}, {b}) is not an edge of the mesh"
                )));
            };
            if edge_cells[e][1] != NONE {
                return Err(Error::Mesh(format!(
                    "tagged edge ({a}, {b}) is an interior edge"
                )));
            }
            if let Some(prev) = tags.insert(e, tag) {
                if prev != tag {
                    return Err(Error::Mesh(format!(
                        "edge ({a}, {b}) carries two tags ({} and {})",
                        prev.name(),
                        tag.name()
                    )));
                }
            }
        }

        let mut boundary = Vec::new();
        for (e, ec) in edge_cells.iter().enumerate() {
            if ec[1] != NONE {
                continue;
            }
            let Some(&tag) = tags.get(&e) else {
                let [a, b] = edges[e];
                return Err(Error::Mesh(format!(
                    "boundary edge ({a}, {b}) at {:?}-{:?} has no tag",
                    vertices[a], vertices[b]
                )));
            };
            let c = ec[0];
            let k = (0..3).find(|&k| cell_edges[c][k] == e).unwrap();
            let (a, b) = (cells[c][k], cells[c][(k + 1) % 3]);
            let (pa, pb) = (vertices[a], vertices[b]);
            let (dx, dy) = (pb[0] - pa[0], pb[1] - pa[1]);
            let length = dx.hypot(dy);
            boundary.push(BoundaryEdge {
                vertices: [a, b],
                tag,
                normal: [dy / length, -dx / length],
                length,
                cell: c,
                local_edge: k,
                edge: e,
            });
        }

        Ok(Self {
            vertices,
            cells,
            edges,
            cell_edges,
            edge_cells,
            boundary,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[[usize; 3]] {
        &self.cells
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn cell_edges(&self) -> &[[usize; 3]] {
        &self.cell_edges
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary
    }

    pub fn boundary_edges_tagged(&self, tag: BoundaryTag) -> impl Iterator<Item = &BoundaryEdge> {
        self.boundary.iter().filter(move |b| b.tag == tag)
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Cells adjacent to an edge; the second entry is `None` on the boundary.
    pub fn edge_cells(&self, e: usize) -> (usize, Option<usize>) {
        let [a, b] = self.edge_cells[e];
        (a, (b != NONE).then_some(b))
    }

    pub fn cell_points(&self, c: usize) -> [Point; 3] {
        let [a, b, d] = self.cells[c];
        [self.vertices[a], self.vertices[b], self.vertices[d]]
    }

    pub fn cell_area(&self, c: usize) -> f64 {
        let [a, b, d] = self.cell_points(c);
        signed_area(a, b, d)
    }

    pub fn centroid(&self, c: usize) -> Point {
        let [a, b, d] = self.cell_points(c);
        [(a[0] + b[0] + d[0]) / 3.0, (a[1] + b[1] + d[1]) / 3.0]
    }

    /// Longest edge of the cell.
    pub fn cell_diameter(&self, c: usize) -> f64 {
        let p = self.cell_points(c);
        (0..3)
            .map(|k| dist(p[k], p[(k + 1) % 3]))
            .fold(0.0, f64::max)
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &self.vertices {
            for i in 0..2 {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        (lo, hi)
    }

    /// Barycentric coordinates of `p` in cell `c`.
    pub fn barycentric(&self, c: usize, p: Point) -> [f64; 3] {
        let [a, b, d] = self.cell_points(c);
        let area = signed_area(a, b, d);
        let l0 = signed_area(p, b, d) / area;
        let l1 = signed_area(a, p, d) / area;
        [l0, l1, 1.0 - l0 - l1]
    }

    /// Finds the cell containing `p`, walking from `hint` and falling back to a
    /// linear scan when the walk leaves the domain.
    pub fn locate(&self, p: Point, hint: Option<usize>) -> Option<(usize, [f64; 3])> {
        const EPS: f64 = 1e-10;
        let mut c = hint.filter(|&c| c < self.cells.len()).unwrap_or(0);
        for _ in 0..self.cells.len().min(100_000) {
            let l = self.barycentric(c, p);
            let (kmin, lmin) = l
                .iter()
                .copied()
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (k, v)| if v < acc.1 { (k, v) } else { acc });
            if lmin >= -EPS {
                return Some((c, l));
            }
            // local edge k joins v[k], v[k+1] and is opposite v[k+2]
            let edge_local = (kmin + 1) % 3;
            let e = self.cell_edges[c][edge_local];
            let [c0, c1] = self.edge_cells[e];
            let next = if c0 == c { c1 } else { c0 };
            if next == NONE {
                break;
            }
            c = next;
        }
        (0..self.cells.len()).find_map(|c| {
            let l = self.barycentric(c, p);
            (l.iter().all(|&v| v >= -EPS)).then_some((c, l))
        })
    }
}

pub(crate) fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    (b[0] - a[0]).hypot(b[1] - a[1])
}

fn bbox_diag_sq(pts: &[Point]) -> f64 {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in pts {
        for i in 0..2 {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    (hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2)
}

/// Dispatches to the rectangle or spacer mesher depending on the configuration.
pub fn build_channel_mesh(geom: &ChannelGeometry, grading: &GradingSpec) -> Result<Mesh> {
    match geom.config {
        SpacerConfig::NoSpacers => build_rectangle_mesh(geom, grading),
        _ => build_spacer_mesh(geom, grading),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Mesh {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let c = vec![[0, 1, 2], [0, 3, 2]]; // second one is clockwise on purpose
        let t = [
            ([0, 1], BoundaryTag::Membrane),
            ([1, 2], BoundaryTag::Outlet),
            ([2, 3], BoundaryTag::Membrane),
            ([3, 0], BoundaryTag::Inlet),
        ];
        Mesh::from_parts(v, c, &t).unwrap()
    }

    #[test]
    fn orientation_is_fixed_and_normals_point_out() {
        let m = unit_square();
        for c in 0..m.n_cells() {
            assert!(m.cell_area(c) > 0.0);
        }
        assert_eq!(m.boundary_edges().len(), 4);
        for b in m.boundary_edges() {
            let pa = m.vertices()[b.vertices[0]];
            let pb = m.vertices()[b.vertices[1]];
            let mid = [(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0];
            let cen = m.centroid(b.cell);
            let dot = b.normal[0] * (cen[0] - mid[0]) + b.normal[1] * (cen[1] - mid[1]);
            assert!(dot < 0.0);
        }
        let inlet = m.boundary_edges_tagged(BoundaryTag::Inlet).next().unwrap();
        assert_eq!(inlet.normal, [-1.0, 0.0]);
    }

    #[test]
    fn untagged_boundary_rejected() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let err = Mesh::from_parts(v, vec![[0, 1, 2]], &[([0, 1], BoundaryTag::Wall)]).unwrap_err();
        assert!(err.to_string().contains("no tag"));
    }

    #[test]
    fn interior_edge_cannot_be_tagged() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let c = vec![[0, 1, 2], [0, 2, 3]];
        let mut t = vec![
            ([0, 1], BoundaryTag::Membrane),
            ([1, 2], BoundaryTag::Outlet),
            ([2, 3], BoundaryTag::Membrane),
            ([3, 0], BoundaryTag::Inlet),
        ];
        t.push(([0, 2], BoundaryTag::Wall));
        assert!(Mesh::from_parts(v, c, &t).is_err());
    }

    #[test]
    fn double_tag_rejected() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let t = [
            ([0, 1], BoundaryTag::Wall),
            ([1, 0], BoundaryTag::Inlet),
            ([1, 2], BoundaryTag::Wall),
            ([2, 0], BoundaryTag::Wall),
        ];
        assert!(Mesh::from_parts(v, vec![[0, 1, 2]], &t).is_err());
    }

    #[test]
    fn locate_walks_to_the_right_cell() {
        let m = unit_square();
        let (c, l) = m.locate([0.9, 0.1], Some(1)).unwrap();
        assert!(l.iter().all(|&x| x >= -1e-12));
        assert!((m.barycentric(c, [0.9, 0.1]).iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(m.locate([1.5, 0.5], None).is_none());
        assert!(m.locate([0.0, 0.5], None).is_some());
    }
}
