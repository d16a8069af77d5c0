use serde::{Deserialize, Serialize};

use crate::fem::basis::{dot, p2_values};
use crate::fem::quadrature::{edge_bary, GAUSS3};
use crate::fem::DofMap;
use crate::mesh::{BoundaryEdge, BoundaryTag, Mesh};
use crate::params::PhysicalParams;
use crate::solver::SolutionFields;

fn edge_integral(mesh: &Mesh, dofs: &DofMap, fields: &SolutionFields, b: &BoundaryEdge, f: impl Fn([f64; 2]) -> f64) -> f64 {
    let nodes = dofs.cell_p2(b.cell);
    let _ = mesh;
    GAUSS3
        .iter()
        .map(|&(t, w)| {
            let n = p2_values(edge_bary(b.local_edge, t));
            let mut u = [0.0; 2];
            for k in 0..6 {
                let v = fields.velocity(dofs, nodes[k]);
                u[0] += n[k] * v[0];
                u[1] += n[k] * v[1];
            }
            w * b.length * f(u)
        })
        .sum()
}

/// `int u . n` over the edges tagged `tag` (outward positive).
pub fn boundary_flux(mesh: &Mesh, dofs: &DofMap, fields: &SolutionFields, tag: BoundaryTag) -> f64 {
    mesh.boundary_edges_tagged(tag)
        .map(|b| edge_integral(mesh, dofs, fields, b, |u| dot(u, b.normal)))
        .sum()
}

/// Permeate volume flow per unit width, `int_membrane |u_y| ds` (m^2/s).
pub fn volumetric_flow_per_width(mesh: &Mesh, dofs: &DofMap, fields: &SolutionFields) -> f64 {
    mesh.boundary_edges_tagged(BoundaryTag::Membrane)
        .map(|b| edge_integral(mesh, dofs, fields, b, |u| u[1].abs()))
        .sum()
}

/// Permeate mass flow `rho W int_membrane |u_y| ds` (kg/s).
pub fn total_mass_flow(mesh: &Mesh, dofs: &DofMap, fields: &SolutionFields, params: &PhysicalParams, width: f64) -> f64 {
    params.rho * width * volumetric_flow_per_width(mesh, dofs, fields)
}

/// Net boundary fluxes of a flow solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassBalance {
    pub inlet: f64,
    pub outlet: f64,
    pub membrane: f64,
    pub wall: f64,
    /// `|sum of fluxes| / |inlet|`.
    pub relative_imbalance: f64,
}

pub fn mass_balance(mesh: &Mesh, dofs: &DofMap, fields: &SolutionFields) -> MassBalance {
    let f = |t| boundary_flux(mesh, dofs, fields, t);
    let (inlet, outlet, membrane, wall) = (
        f(BoundaryTag::Inlet),
        f(BoundaryTag::Outlet),
        f(BoundaryTag::Membrane),
        f(BoundaryTag::Wall),
    );
    MassBalance {
        inlet,
        outlet,
        membrane,
        wall,
        relative_imbalance: (inlet + outlet + membrane + wall).abs() / inlet.abs(),
    }
}

/// `u . n` and the mean concentration at each membrane edge midpoint, as
/// `(x, u_n, theta_w)`.
pub fn membrane_normal_velocities(mesh: &Mesh, dofs: &DofMap, fields: &SolutionFields) -> Vec<(f64, f64, f64)> {
    mesh.boundary_edges_tagged(BoundaryTag::Membrane)
        .map(|b| {
            let node = mesh.n_vertices() + b.edge;
            let [a, c] = b.vertices;
            let x = 0.5 * (mesh.vertices()[a][0] + mesh.vertices()[c][0]);
            let un = dot(fields.velocity(dofs, node), b.normal);
            (x, un, 0.5 * (fields.theta[a] + fields.theta[c]))
        })
        .collect()
}

/// Worst violation of `(dP - kappa theta_w)/I0 <= u.n <= dP/I0` over the
/// membrane edge midpoints, relative to `dP/I0` (absolute when `dP = 0`). Edges touching a strongly
/// constrained node (inlet corner, spacer foot) are left out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxBounds {
    pub below: f64,
    pub above: f64,
    pub edges: usize,
}

pub fn flux_bounds(mesh: &Mesh, dofs: &DofMap, fields: &SolutionFields, params: &PhysicalParams) -> FluxBounds {
    let scale = match params.drive_velocity() {
        v if v > 0.0 => v,
        _ => 1.0,
    };
    let mut out = FluxBounds {
        below: 0.0,
        above: 0.0,
        edges: 0,
    };
    for b in mesh.boundary_edges_tagged(BoundaryTag::Membrane) {
        let nodes = [b.vertices[0], b.vertices[1], mesh.n_vertices() + b.edge];
        if nodes.iter().any(|&n| dofs.flow.is_fixed(dofs.velocity(1, n))) {
            continue;
        }
        let un = dot(fields.velocity(dofs, nodes[2]), b.normal);
        let theta = 0.5 * (fields.theta[b.vertices[0]] + fields.theta[b.vertices[1]]);
        let lo = params.permeate_velocity(theta);
        out.below = out.below.max((lo - un) / scale);
        out.above = out.above.max((un - scale) / scale);
        out.edges += 1;
    }
    out
}
