//! Degree-of-freedom layout for the Taylor-Hood flow space and the P1
//! concentration space, with strong (Dirichlet) constraints.
//!
//! Flow vector: `[u_x (P2 nodes), u_y (P2 nodes), p (vertices)]`, where P2 nodes
//! are the mesh vertices followed by the edge midpoints. Concentration dofs are
//! the mesh vertices.

use crate::mesh::{BoundaryTag, Mesh, Point};

/// Strong velocity condition on one boundary tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VelocityBc {
    /// Natural (do-nothing) boundary, or handled weakly.
    Free,
    /// Only the x-component is prescribed.
    Tangential,
    /// Both components prescribed.
    Full,
}

/// Prescribed values of a coefficient vector; `None` marks a free dof.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraints {
    values: Vec<Option<f64>>,
}

impl Constraints {
    pub fn none(n: usize) -> Self {
        Constraints { values: vec![None; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        self.values[i]
    }

    pub fn set(&mut self, i: usize, v: f64) {
        self.values[i] = Some(v);
    }

    pub fn is_fixed(&self, i: usize) -> bool {
        self.values[i].is_some()
    }

    pub fn n_fixed(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    /// Overwrites the prescribed entries of `x`.
    pub fn impose(&self, x: &mut [f64]) {
        for (xi, v) in x.iter_mut().zip(&self.values) {
            if let Some(v) = v {
                *xi = *v;
            }
        }
    }
}

/// Global numbering for the flow and concentration spaces.
#[derive(Debug, Clone)]
pub struct DofMap {
    n_vertices: usize,
    n_edges: usize,
    cell_p2: Vec<[usize; 6]>,
    cell_p1: Vec<[usize; 3]>,
    nodes: Vec<Point>,
    pub flow: Constraints,
    pub theta: Constraints,
}

impl DofMap {
    /// Unconstrained layout on `mesh`.
    pub fn new(mesh: &Mesh) -> Self {
        let nv = mesh.n_vertices();
        let cell_p2 = mesh
            .cells()
            .iter()
            .zip(mesh.cell_edges())
            .map(|(c, e)| [c[0], c[1], c[2], nv + e[0], nv + e[1], nv + e[2]])
            .collect();
        let mut nodes = mesh.vertices().to_vec();
        nodes.extend(mesh.edges().iter().map(|&[a, b]| {
            let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
            [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
        }));
        let n_p2 = nv + mesh.n_edges();
        DofMap {
            n_vertices: nv,
            n_edges: mesh.n_edges(),
            cell_p2,
            cell_p1: mesh.cells().to_vec(),
            nodes,
            flow: Constraints::none(2 * n_p2 + nv),
            theta: Constraints::none(nv),
        }
    }

    pub fn n_p2(&self) -> usize {
        self.n_vertices + self.n_edges
    }

    pub fn n_velocity(&self) -> usize {
        2 * self.n_p2()
    }

    pub fn n_pressure(&self) -> usize {
        self.n_vertices
    }

    pub fn n_flow(&self) -> usize {
        self.n_velocity() + self.n_vertices
    }

    pub fn n_theta(&self) -> usize {
        self.n_vertices
    }

    /// Global index of velocity component `c` at P2 node `node`.
    #[inline]
    pub fn velocity(&self, c: usize, node: usize) -> usize {
        c * self.n_p2() + node
    }

    #[inline]
    pub fn pressure(&self, vertex: usize) -> usize {
        self.n_velocity() + vertex
    }

    pub fn cell_p2(&self, c: usize) -> &[usize; 6] {
        &self.cell_p2[c]
    }

    pub fn cell_p1(&self, c: usize) -> &[usize; 3] {
        &self.cell_p1[c]
    }

    /// Coordinates of the P2 nodes.
    pub fn p2_nodes(&self) -> &[Point] {
        &self.nodes
    }

    /// P2 nodes lying on the boundary edges tagged `tag`.
    pub fn boundary_p2_nodes(&self, mesh: &Mesh, tag: BoundaryTag) -> Vec<usize> {
        let mut out: Vec<usize> = mesh
            .boundary_edges_tagged(tag)
            .flat_map(|b| [b.vertices[0], b.vertices[1], self.n_vertices + b.edge])
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Prescribes velocity on `tag`. `Full` overrides earlier `Tangential`
    /// constraints at shared nodes; `Tangential` never overrides.
    pub fn constrain_velocity(
        &mut self,
        mesh: &Mesh,
        tag: BoundaryTag,
        bc: VelocityBc,
        value: impl Fn(Point) -> [f64; 2],
    ) {
        for node in self.boundary_p2_nodes(mesh, tag) {
            let v = value(self.nodes[node]);
            let (ix, iy) = (self.velocity(0, node), self.velocity(1, node));
            match bc {
                VelocityBc::Free => {}
                VelocityBc::Tangential => {
                    if !self.flow.is_fixed(ix) {
                        self.flow.set(ix, v[0]);
                    }
                }
                VelocityBc::Full => {
                    self.flow.set(ix, v[0]);
                    self.flow.set(iy, v[1]);
                }
            }
        }
    }

    pub fn constrain_theta(&mut self, mesh: &Mesh, tag: BoundaryTag, value: impl Fn(Point) -> f64) {
        for b in mesh.boundary_edges_tagged(tag) {
            for v in b.vertices {
                self.theta.set(v, value(mesh.vertices()[v]));
            }
        }
    }

    /// Fixes the pressure at one vertex, for problems without a natural outflow.
    pub fn pin_pressure(&mut self, vertex: usize, value: f64) {
        let i = self.pressure(vertex);
        self.flow.set(i, value);
    }
}

/// How the membrane-normal velocity is enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MembraneCondition {
    /// Normal velocity imposed weakly by Nitsche's method.
    #[default]
    Nitsche,
    /// Impermeable wall: full no-slip imposed strongly.
    NoSlip,
}

/// Taylor-Hood velocity/pressure pair plus P1 concentration on one mesh.
#[derive(Debug, Clone)]
pub struct FemSpaces {
    pub dofs: DofMap,
    pub membrane: MembraneCondition,
}

impl FemSpaces {
    /// Standard channel constraints: parabolic inflow and `theta0` on the inlet,
    /// no-slip on spacer walls, zero tangential velocity on membranes.
    pub fn channel(mesh: &Mesh, u0: f64, theta0: f64, membrane: MembraneCondition) -> Self {
        let (lo, hi) = mesh.bounding_box();
        let (y0, d) = (lo[1], hi[1] - lo[1]);
        let mut dofs = DofMap::new(mesh);
        let membrane_bc = match membrane {
            MembraneCondition::Nitsche => VelocityBc::Tangential,
            MembraneCondition::NoSlip => VelocityBc::Full,
        };
        dofs.constrain_velocity(mesh, BoundaryTag::Membrane, membrane_bc, |_| [0.0, 0.0]);
        dofs.constrain_velocity(mesh, BoundaryTag::Wall, VelocityBc::Full, |_| [0.0, 0.0]);
        dofs.constrain_velocity(mesh, BoundaryTag::Inlet, VelocityBc::Full, |p| {
            [inlet_profile(u0, d, p[1] - y0), 0.0]
        });
        dofs.constrain_theta(mesh, BoundaryTag::Inlet, |_| theta0);
        FemSpaces { dofs, membrane }
    }

    pub fn nitsche_active(&self) -> bool {
        self.membrane == MembraneCondition::Nitsche
    }
}

/// Fully developed inflow `6 u0 (y/d)(1 - y/d)`, with mean `u0`.
pub fn inlet_profile(u0: f64, d: f64, y: f64) -> f64 {
    let s = (y / d).clamp(0.0, 1.0);
    6.0 * u0 * s * (1.0 - s)
}
