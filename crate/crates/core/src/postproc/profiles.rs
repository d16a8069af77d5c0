use serde::{Deserialize, Serialize};

use crate::fem::DofMap;
use crate::mesh::{BoundaryTag, Mesh, Point};
use crate::solver::SolutionFields;

/// Samples of one field along a line, ordered by `x`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LineProfile {
    pub field: String,
    pub x: Vec<f64>,
    pub values: Vec<f64>,
    /// Requested sample positions that fell outside the fluid.
    pub skipped: Vec<f64>,
}

impl LineProfile {
    pub fn new(field: impl Into<String>) -> Self {
        LineProfile {
            field: field.into(),
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Wall {
    Bottom,
    Top,
}

/// Pressure at `p` by linear interpolation, with the containing cell.
pub fn pressure_at(mesh: &Mesh, fields: &SolutionFields, p: Point, hint: Option<usize>) -> Option<(f64, usize)> {
    let (c, l) = mesh.locate(p, hint)?;
    let v = mesh.cells()[c];
    Some((l[0] * fields.p[v[0]] + l[1] * fields.p[v[1]] + l[2] * fields.p[v[2]], c))
}

/// `p(0, y) - p(x, y)` at each `x`; positions outside the mesh are skipped.
pub fn pressure_drop_at(mesh: &Mesh, fields: &SolutionFields, xs: &[f64], y: f64) -> LineProfile {
    let mut out = LineProfile::new("pressure_drop");
    let Some((p0, mut hint)) = pressure_at(mesh, fields, [0.0, y], None) else {
        out.skipped = xs.to_vec();
        return out;
    };
    for &x in xs {
        match pressure_at(mesh, fields, [x, y], Some(hint)) {
            Some((p, c)) => {
                hint = c;
                out.x.push(x);
                out.values.push(p0 - p);
            }
            None => out.skipped.push(x),
        }
    }
    out
}

/// Pressure drop along mid-height at `n_samples` equispaced points from
/// `x = 0` to the channel end.
pub fn pressure_drop_profile(mesh: &Mesh, fields: &SolutionFields, n_samples: usize) -> LineProfile {
    let (lo, hi) = mesh.bounding_box();
    let y = 0.5 * (lo[1] + hi[1]);
    let xs: Vec<f64> = match n_samples {
        0 => Vec::new(),
        1 => vec![lo[0]],
        n => (0..n)
            .map(|i| if i == n - 1 { hi[0] } else { lo[0] + (hi[0] - lo[0]) * i as f64 / (n - 1) as f64 })
            .collect(),
    };
    pressure_drop_at(mesh, fields, &xs, y)
}

/// Vertical velocity and concentration at the midpoints of the membrane edges
/// on one wall, ordered by `x`.
pub fn permeate_profile(mesh: &Mesh, dofs: &DofMap, fields: &SolutionFields, wall: Wall) -> (LineProfile, LineProfile) {
    let (lo, hi) = mesh.bounding_box();
    let mid = 0.5 * (lo[1] + hi[1]);
    let mut samples: Vec<(f64, f64, f64)> = mesh
        .boundary_edges_tagged(BoundaryTag::Membrane)
        .filter(|b| {
            let y = mesh.vertices()[b.vertices[0]][1];
            match wall {
                Wall::Bottom => y < mid,
                Wall::Top => y > mid,
            }
        })
        .map(|b| {
            let [a, c] = b.vertices;
            let (pa, pc) = (mesh.vertices()[a], mesh.vertices()[c]);
            let node = mesh.n_vertices() + b.edge;
            let uy = fields.u[dofs.velocity(1, node)];
            (0.5 * (pa[0] + pc[0]), uy, 0.5 * (fields.theta[a] + fields.theta[c]))
        })
        .collect();
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut uy = LineProfile::new("u_y");
    let mut th = LineProfile::new("theta");
    for (x, u, t) in samples {
        uy.x.push(x);
        uy.values.push(u);
        th.x.push(x);
        th.values.push(t);
    }
    (uy, th)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ChannelGeometry, GradingSpec, SpacerConfig};
    use crate::mesh::build_spacer_mesh;
    use crate::postproc::testing::channel;

    #[test]
    fn linear_pressure_is_sampled_exactly() {
        let (g, m, d) = channel();
        let f = SolutionFields::interpolate(&m, &d, |_| [0.0, 0.0], |p| 50.0 - 2.5e3 * p[0], |_| 0.0);
        let prof = pressure_drop_profile(&m, &f, 11);
        assert_eq!(prof.len(), 11);
        assert!(prof.skipped.is_empty());
        assert_eq!(prof.values[0], 0.0);
        assert_eq!(prof.x[10], g.length);
        for (x, v) in prof.x.iter().zip(&prof.values) {
            assert!((v - 2.5e3 * x).abs() < 1e-11, "{x} {v}");
        }
        assert!(prof.x.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn submerged_spacers_skip_mid_height_samples() {
        let g = ChannelGeometry::with_spacers(SpacerConfig::Submerged, 1);
        let m = build_spacer_mesh(&g, &GradingSpec::toward_membrane(6, 1.2)).unwrap();
        let d = crate::fem::DofMap::new(&m);
        let f = SolutionFields::zeros(&d);
        let prof = pressure_drop_at(&m, &f, &[0.001, 0.0075, 0.014], g.half_height());
        assert_eq!(prof.skipped, vec![0.0075]);
        assert_eq!(prof.x, vec![0.001, 0.014]);
    }

    #[test]
    fn permeate_profiles_follow_sign_convention() {
        let (g, m, d) = channel();
        let zero = SolutionFields::zeros(&d);
        let (u, _) = permeate_profile(&m, &d, &zero, Wall::Bottom);
        assert!(!u.is_empty() && u.values.iter().all(|&v| v == 0.0));

        let f = SolutionFields::interpolate(&m, &d, |p| [0.0, 1e-5 * (2.0 * p[1] / g.height - 1.0)], |_| 0.0, |p| 600.0 + p[0]);
        let (ub, tb) = permeate_profile(&m, &d, &f, Wall::Bottom);
        let (ut, _) = permeate_profile(&m, &d, &f, Wall::Top);
        assert!(ub.values.iter().all(|&v| v < 0.0));
        assert!(ut.values.iter().all(|&v| v > 0.0));
        assert_eq!(ub.len(), 30);
        assert!(tb.values.windows(2).all(|w| w[1] > w[0]));
        assert!(ub.x.windows(2).all(|w| w[1] > w[0]));
    }
}
