//! Lagrange P1 and P2 shape functions on triangles.
//!
//! P2 local order: vertices 0, 1, 2, then edge midpoints (0,1), (1,2), (2,0).

use crate::mesh::{Mesh, Point};

/// Affine data of one cell.
#[derive(Debug, Clone, Copy)]
pub struct CellGeometry {
    pub points: [Point; 3],
    pub area: f64,
    /// Constant gradients of the barycentric coordinates.
    pub grad_lambda: [[f64; 2]; 3],
}

impl CellGeometry {
    pub fn new(points: [Point; 3]) -> Self {
        let [p0, p1, p2] = points;
        let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        let inv = 1.0 / det;
        let grad_lambda = [
            [(p1[1] - p2[1]) * inv, (p2[0] - p1[0]) * inv],
            [(p2[1] - p0[1]) * inv, (p0[0] - p2[0]) * inv],
            [(p0[1] - p1[1]) * inv, (p1[0] - p0[0]) * inv],
        ];
        CellGeometry {
            points,
            area: 0.5 * det,
            grad_lambda,
        }
    }

    pub fn of(mesh: &Mesh, c: usize) -> Self {
        Self::new(mesh.cell_points(c))
    }

    pub fn map(&self, bary: [f64; 3]) -> Point {
        let p = &self.points;
        [
            bary[0] * p[0][0] + bary[1] * p[1][0] + bary[2] * p[2][0],
            bary[0] * p[0][1] + bary[1] * p[1][1] + bary[2] * p[2][1],
        ]
    }

    pub fn diameter(&self) -> f64 {
        let p = &self.points;
        (0..3)
            .map(|k| {
                let (a, b) = (p[k], p[(k + 1) % 3]);
                (a[0] - b[0]).hypot(a[1] - b[1])
            })
            .fold(0.0, f64::max)
    }
}

pub const P2_EDGES: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];

pub fn p2_values(l: [f64; 3]) -> [f64; 6] {
    [
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[0] * l[1],
        4.0 * l[1] * l[2],
        4.0 * l[2] * l[0],
    ]
}

pub fn p2_gradients(l: [f64; 3], g: &[[f64; 2]; 3]) -> [[f64; 2]; 6] {
    let mut out = [[0.0; 2]; 6];
    for k in 0..3 {
        let s = 4.0 * l[k] - 1.0;
        out[k] = [s * g[k][0], s * g[k][1]];
    }
    for (e, &[i, j]) in P2_EDGES.iter().enumerate() {
        out[3 + e] = [
            4.0 * (l[j] * g[i][0] + l[i] * g[j][0]),
            4.0 * (l[j] * g[i][1] + l[i] * g[j][1]),
        ];
    }
    out
}

#[inline]
pub fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}
