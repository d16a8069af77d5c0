//! Boundary-conforming triangulation of channels with cylindrical spacers.
//!
//! Points are laid out in the same graded rows as the structured mesher, thinned
//! around the spacers, and joined by a constrained Delaunay triangulation whose
//! constraints are the channel outline and the polygonised spacer arcs.

use std::collections::HashMap;
use std::f64::consts::PI;

use spade::{ConstrainedDelaunayTriangulation, Point2, Triangulation};

use super::quality::cell_aspect_ratio;
use super::{dist, signed_area, BoundaryTag, Mesh, Point};
use crate::error::{Error, Result};
use crate::geometry::{ChannelGeometry, GradingSpec, Spacer, SpacerAnchor, SpacerConfig};

const MIN_ARC_SEGMENTS: f64 = 32.0;
/// Row points keep at least this multiple of the local arc step away from an arc.
const CLEARANCE: f64 = 0.7;

struct Layout<'a> {
    rows: &'a [f64],
    h0: f64,
    growth: f64,
    spacers: Vec<Spacer>,
}

impl Layout<'_> {
    /// Spacing of the row band containing `y`.
    fn row_spacing(&self, y: f64) -> f64 {
        let n = self.rows.len() - 1;
        let j = self.rows.partition_point(|&r| r <= y).clamp(1, n) - 1;
        let mut h = self.rows[j + 1] - self.rows[j];
        // on a row line, use the finer neighbour band
        if (y - self.rows[j]).abs() < 1e-12 * h && j > 0 {
            h = h.min(self.rows[j] - self.rows[j - 1]);
        }
        h
    }

    fn max_arc_step(&self, s: &Spacer) -> f64 {
        let span = match s.anchor {
            SpacerAnchor::Centre => 2.0 * PI,
            _ => PI,
        };
        (span * s.radius / MIN_ARC_SEGMENTS).min(self.h0)
    }

    /// Target arc segment length at height `y`.
    fn arc_step(&self, s: &Spacer, y: f64) -> f64 {
        self.row_spacing(y).min(self.max_arc_step(s))
    }

    /// Angular range of the arc, traversed in boundary order.
    fn arc_range(s: &Spacer) -> (f64, f64) {
        match s.anchor {
            // bottom: left foot, over the top, to the right foot
            SpacerAnchor::Bottom => (PI, 0.0),
            // top: traversed right to left along the top wall, bulging downward
            SpacerAnchor::Top => (0.0, -PI),
            SpacerAnchor::Centre => (0.0, 2.0 * PI),
        }
    }

    fn arc_point(s: &Spacer, phi: f64) -> Point {
        [
            s.centre[0] + s.radius * phi.cos(),
            s.centre[1] + s.radius * phi.sin(),
        ]
    }

    /// Polygonises one arc with segment lengths following `arc_step`.
    fn polygonise(&self, s: &Spacer) -> Vec<Point> {
        let (a, b) = Self::arc_range(s);
        const SUB: usize = 4096;
        // cumulative number of segments as a function of angle
        let mut t = vec![0.0; SUB + 1];
        for k in 0..SUB {
            let phi = a + (b - a) * (k as f64 + 0.5) / SUB as f64;
            let y = Self::arc_point(s, phi)[1];
            let dphi = (b - a).abs() / SUB as f64;
            t[k + 1] = t[k] + s.radius * dphi / self.arc_step(s, y);
        }
        let min_n = match s.anchor {
            SpacerAnchor::Centre => MIN_ARC_SEGMENTS,
            _ => MIN_ARC_SEGMENTS,
        };
        let n = t[SUB].ceil().max(min_n) as usize;
        let mut pts = Vec::with_capacity(n + 1);
        let mut k = 0;
        for i in 0..=n {
            let target = t[SUB] * i as f64 / n as f64;
            while k < SUB - 1 && t[k + 1] < target {
                k += 1;
            }
            let frac = if t[k + 1] > t[k] {
                ((target - t[k]) / (t[k + 1] - t[k])).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let phi = if i == 0 {
                a
            } else if i == n {
                b
            } else {
                a + (b - a) * (k as f64 + frac) / SUB as f64
            };
            let mut p = Self::arc_point(s, phi);
            // snap feet exactly onto the wall
            if s.anchor != SpacerAnchor::Centre && (i == 0 || i == n) {
                p[1] = s.centre[1];
            }
            pts.push(p);
        }
        if s.anchor == SpacerAnchor::Centre {
            pts.pop();
        }
        pts
    }

    /// Distance from `p` to the spacer boundary and the arc step there.
    fn near_arc(&self, s: &Spacer, p: Point) -> (f64, f64) {
        let dx = p[0] - s.centre[0];
        let dy = p[1] - s.centre[1];
        let r = dx.hypot(dy);
        let d = (r - s.radius).abs();
        let y_arc = if r > 0.0 {
            s.centre[1] + s.radius * dy / r
        } else {
            s.centre[1]
        };
        (d, self.arc_step(s, y_arc))
    }

    /// Horizontal point spacing at `p`.
    fn spacing(&self, p: Point) -> f64 {
        self.spacers.iter().fold(self.h0, |h, s| {
            let (d, step) = self.near_arc(s, p);
            h.min(step + self.growth * d)
        })
    }

    fn too_close(&self, p: Point) -> bool {
        self.spacers.iter().any(|s| {
            let (d, step) = self.near_arc(s, p);
            let inside = dist(p, s.centre) < s.radius;
            inside || d < CLEARANCE * step
        })
    }

    /// Row points at height `y`, including `x = 0` and `x = L`.
    fn row(&self, y: f64, length: f64) -> Result<Vec<Point>> {
        let mut blocked: Vec<(f64, f64)> = Vec::new();
        for s in &self.spacers {
            let dy = y - s.centre[1];
            if dy.abs() <= s.radius {
                let w = (s.radius * s.radius - dy * dy).max(0.0).sqrt();
                let c = CLEARANCE * self.arc_step(s, y);
                let (lo, hi) = (s.centre[0] - w - c, s.centre[0] + w + c);
                if lo <= 0.0 || hi >= length {
                    return Err(Error::Geometry(format!(
                        "spacer at x={} is too close to the channel ends",
                        s.centre[0]
                    )));
                }
                blocked.push((lo, hi));
            }
        }
        blocked.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut free: Vec<(f64, bool, f64, bool)> = Vec::new();
        let mut start = (0.0, true);
        for (lo, hi) in blocked {
            if lo > start.0 {
                free.push((start.0, start.1, lo, false));
            }
            if hi > start.0 {
                start = (hi, false);
            }
        }
        free.push((start.0, start.1, length, true));

        let mut out = Vec::new();
        for (a, keep_a, b, keep_b) in free {
            const SUB: usize = 512;
            let mut t = vec![0.0; SUB + 1];
            for k in 0..SUB {
                let x = a + (b - a) * (k as f64 + 0.5) / SUB as f64;
                t[k + 1] = t[k] + (b - a) / SUB as f64 / self.spacing([x, y]);
            }
            let n = t[SUB].round().max(1.0) as usize;
            let mut k = 0;
            for i in 0..=n {
                if (i == 0 && !keep_a) || (i == n && !keep_b) {
                    continue;
                }
                let x = if i == 0 {
                    a
                } else if i == n {
                    b
                } else {
                    let target = t[SUB] * i as f64 / n as f64;
                    while k < SUB - 1 && t[k + 1] < target {
                        k += 1;
                    }
                    let frac = ((target - t[k]) / (t[k + 1] - t[k])).clamp(0.0, 1.0);
                    a + (b - a) * (k as f64 + frac) / SUB as f64
                };
                out.push([x, y]);
            }
            if n == 1 && !keep_a && !keep_b {
                out.push([0.5 * (a + b), y]);
            }
        }
        let last = out.len() - 1;
        Ok(out
            .into_iter()
            .enumerate()
            .filter(|&(i, p)| i == 0 || i == last || !self.too_close(p))
            .map(|(_, p)| p)
            .collect())
    }
}

fn point_in_polygon(p: Point, poly: &[Point]) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Builds a boundary-conforming mesh for a channel with spacers.
///
/// Cavity spacers are half discs on the bottom membrane, zig-zag spacers
/// alternate bottom and top, submerged spacers are full discs at mid-height.
/// Membrane under attached spacers is not part of the domain; spacer surfaces
/// are tagged as walls.
pub fn build_spacer_mesh(geom: &ChannelGeometry, grading: &GradingSpec) -> Result<Mesh> {
    if geom.config == SpacerConfig::NoSpacers {
        return Err(Error::Geometry(
            "spacer mesher needs a spacer configuration; use the rectangle mesher".into(),
        ));
    }
    geom.validate()?;
    grading.validate()?;

    let (length, height) = (geom.length, geom.height);
    let rows = grading.row_coordinates(height);
    let layout = Layout {
        rows: &rows,
        h0: length / grading.columns(geom) as f64,
        growth: (grading.effective_ratio() - 1.0).clamp(0.15, 0.5),
        spacers: geom.spacers(),
    };

    let row_points: Vec<Vec<Point>> = rows
        .iter()
        .map(|&y| layout.row(y, length))
        .collect::<Result<_>>()?;
    let arcs: Vec<Vec<Point>> = layout.spacers.iter().map(|s| layout.polygonise(s)).collect();

    // Outer boundary, counter-clockwise, each entry tagging the segment to the next point.
    let mut outer: Vec<(Point, BoundaryTag)> = Vec::new();
    let wall_arcs = |anchor: SpacerAnchor| {
        let mut v: Vec<(f64, &Vec<Point>)> = layout
            .spacers
            .iter()
            .zip(&arcs)
            .filter(|(s, _)| s.anchor == anchor)
            .map(|(s, a)| (s.centre[0], a))
            .collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    };
    let merge_wall = |row: &[Point], arcs: Vec<(f64, &Vec<Point>)>, ascending: bool| {
        let mut seq: Vec<(Point, BoundaryTag)> = Vec::new();
        let mut row: Vec<Point> = row.to_vec();
        let mut arcs = arcs;
        if !ascending {
            row.reverse();
            arcs.reverse();
        }
        let mut ai = 0;
        for p in row {
            while ai < arcs.len() && ((arcs[ai].0 < p[0]) == ascending) {
                let a = arcs[ai].1;
                for (k, &q) in a.iter().enumerate() {
                    let tag = if k + 1 < a.len() {
                        BoundaryTag::Wall
                    } else {
                        BoundaryTag::Membrane
                    };
                    seq.push((q, tag));
                }
                ai += 1;
            }
            seq.push((p, BoundaryTag::Membrane));
        }
        seq
    };
    let bottom = merge_wall(&row_points[0], wall_arcs(SpacerAnchor::Bottom), true);
    let top = merge_wall(&row_points[rows.len() - 1], wall_arcs(SpacerAnchor::Top), false);
    // bottom: (0,0) .. (L,0)
    outer.extend(bottom[..bottom.len() - 1].iter().copied());
    // right: (L,0) .. (L,d)
    for r in &row_points[..rows.len() - 1] {
        outer.push((*r.last().unwrap(), BoundaryTag::Outlet));
    }
    // top: (L,d) .. (0,d)
    outer.extend(top[..top.len() - 1].iter().copied());
    // left: (0,d) .. (0,0)
    for r in row_points[1..].iter().rev() {
        outer.push((r[0], BoundaryTag::Inlet));
    }

    let holes: Vec<&Vec<Point>> = layout
        .spacers
        .iter()
        .zip(&arcs)
        .filter(|(s, _)| s.anchor == SpacerAnchor::Centre)
        .map(|(_, a)| a)
        .collect();

    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> = ConstrainedDelaunayTriangulation::new();
    let insert = |cdt: &mut ConstrainedDelaunayTriangulation<Point2<f64>>, p: Point| {
        cdt.insert(Point2::new(p[0], p[1]))
            .map_err(|e| Error::Mesh(format!("triangulation insert failed at {p:?}: {e:?}")))
    };

    let mut constraint_tags: Vec<(spade::handles::FixedVertexHandle, spade::handles::FixedVertexHandle, BoundaryTag)> =
        Vec::new();
    let mut add_loop = |cdt: &mut ConstrainedDelaunayTriangulation<Point2<f64>>,
                        pts: &[(Point, BoundaryTag)]|
     -> Result<()> {
        let handles: Vec<_> = pts.iter().map(|(p, _)| insert(cdt, *p)).collect::<Result<_>>()?;
        for (i, (_, tag)) in pts.iter().enumerate() {
            let (a, b) = (handles[i], handles[(i + 1) % handles.len()]);
            if a == b {
                return Err(Error::Mesh("boundary polygon has coincident points".into()));
            }
            if !cdt.can_add_constraint(a, b) {
                return Err(Error::Mesh(
                    "spacer polygonisation produces a self-intersecting boundary".into(),
                ));
            }
            cdt.add_constraint(a, b);
            constraint_tags.push((a, b, *tag));
        }
        Ok(())
    };
    add_loop(&mut cdt, &outer)?;
    for h in &holes {
        let pts: Vec<(Point, BoundaryTag)> = h.iter().map(|&p| (p, BoundaryTag::Wall)).collect();
        add_loop(&mut cdt, &pts)?;
    }
    for r in &row_points[1..rows.len() - 1] {
        for &p in &r[1..r.len() - 1] {
            insert(&mut cdt, p)?;
        }
    }

    // keep fluid triangles only
    let obstacles: Vec<Vec<Point>> = arcs.clone();
    let mut used: HashMap<usize, usize> = HashMap::new();
    let mut vertices: Vec<Point> = Vec::new();
    let mut cells: Vec<[usize; 3]> = Vec::new();
    for f in cdt.inner_faces() {
        let vs = f.vertices();
        let ps: Vec<Point> = vs.iter().map(|v| [v.position().x, v.position().y]).collect();
        let c = [
            (ps[0][0] + ps[1][0] + ps[2][0]) / 3.0,
            (ps[0][1] + ps[1][1] + ps[2][1]) / 3.0,
        ];
        if obstacles.iter().any(|poly| point_in_polygon(c, poly)) {
            continue;
        }
        let mut cell = [0; 3];
        for (k, v) in vs.iter().enumerate() {
            let idx = v.fix().index();
            cell[k] = *used.entry(idx).or_insert_with(|| {
                vertices.push(ps[k]);
                vertices.len() - 1
            });
        }
        cells.push(cell);
    }
    let tags: Vec<([usize; 2], BoundaryTag)> = constraint_tags
        .iter()
        .map(|&(a, b, t)| {
            let (a, b) = (a.index(), b.index());
            match (used.get(&a), used.get(&b)) {
                (Some(&a), Some(&b)) => Ok(([a, b], t)),
                _ => Err(Error::Mesh("boundary vertex lost during triangulation".into())),
            }
        })
        .collect::<Result<_>>()?;

    let boundary: Vec<bool> = {
        let mut b = vec![false; vertices.len()];
        for ([a, c], _) in &tags {
            b[*a] = true;
            b[*c] = true;
        }
        b
    };
    smooth(&mut vertices, &mut cells, &boundary);

    Mesh::from_parts(vertices, cells, &tags)
}

/// Moves interior vertices of badly shaped cells toward the centroid of their
/// neighbours when that strictly improves the worst incident aspect ratio.
fn smooth(vertices: &mut [Point], cells: &mut [[usize; 3]], boundary: &[bool]) {
    for c in cells.iter_mut() {
        if signed_area(vertices[c[0]], vertices[c[1]], vertices[c[2]]) < 0.0 {
            c.swap(1, 2);
        }
    }
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); vertices.len()];
    for (i, c) in cells.iter().enumerate() {
        for &v in c {
            incident[v].push(i);
        }
    }
    let aspect = |vs: &[Point], c: &[usize; 3]| -> f64 {
        let p = [vs[c[0]], vs[c[1]], vs[c[2]]];
        let a = signed_area(p[0], p[1], p[2]);
        if a <= 0.0 {
            return f64::INFINITY;
        }
        let l = (0..3).map(|k| dist(p[k], p[(k + 1) % 3])).fold(0.0, f64::max);
        l * l * 3f64.sqrt() / (4.0 * a)
    };
    const THRESHOLD: f64 = 8.0;
    for _ in 0..4 {
        let mut moved = false;
        for v in 0..vertices.len() {
            if boundary[v] || incident[v].is_empty() {
                continue;
            }
            let worst = incident[v].iter().map(|&c| aspect(vertices, &cells[c])).fold(0.0, f64::max);
            if worst < THRESHOLD {
                continue;
            }
            let mut sum = [0.0, 0.0];
            let mut n = 0.0;
            for &c in &incident[v] {
                for &u in &cells[c] {
                    if u != v {
                        sum[0] += vertices[u][0];
                        sum[1] += vertices[u][1];
                        n += 1.0;
                    }
                }
            }
            let old = vertices[v];
            vertices[v] = [sum[0] / n, sum[1] / n];
            let new_worst = incident[v].iter().map(|&c| aspect(vertices, &cells[c])).fold(0.0, f64::max);
            if new_worst < worst {
                moved = true;
            } else {
                vertices[v] = old;
            }
        }
        if !moved {
            break;
        }
    }
}

#[allow(dead_code)]
pub(crate) fn max_aspect(mesh: &Mesh) -> f64 {
    (0..mesh.n_cells()).map(|c| cell_aspect_ratio(mesh, c)).fold(0.0, f64::max)
}
