//! Nonlinear residuals of a computed solution.

use serde::{Deserialize, Serialize};

use super::picard::{transport_system, FlowOperator, SourceTerms};
use super::{SolutionFields, SolverControl};
use crate::fem::assembly::pressure_coupling;
use crate::fem::{Constraints, DofMap, FemSpaces, SparseSystem};
use crate::mesh::{BoundaryTag, Mesh};
use crate::params::{NitscheParams, PhysicalParams};

/// Residual norms over the free dofs. Relative values divide by
/// `|| |A| |x| || + ||b||`, so that cancellation inside a row does not
/// make the scale vanish.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub flow_abs: f64,
    pub flow_rel: f64,
    pub transport_abs: f64,
    pub transport_rel: f64,
}

fn free_residual(sys: &SparseSystem, constraints: &Constraints, x: &[f64]) -> (f64, f64) {
    let a = &sys.matrix;
    let (mut r2, mut ax2, mut b2) = (0.0, 0.0, 0.0);
    for i in (0..x.len()).filter(|&i| !constraints.is_fixed(i)) {
        let (mut ax, mut mag) = (0.0, 0.0);
        for k in a.indptr[i]..a.indptr[i + 1] {
            let t = a.data[k] * x[a.indices[k]];
            ax += t;
            mag += t.abs();
        }
        r2 += (ax - sys.rhs[i]).powi(2);
        ax2 += mag * mag;
        b2 += sys.rhs[i] * sys.rhs[i];
    }
    let abs = f64::sqrt(r2);
    let scale = ax2.sqrt() + b2.sqrt();
    let rel = if abs == 0.0 { 0.0 } else { abs / scale };
    (abs, rel)
}

/// Evaluates both equations of the coupled system at `fields`, with the
/// convection and osmotic terms taken at `fields` itself.
pub fn compute_residuals(
    mesh: &Mesh,
    spaces: &FemSpaces,
    params: &PhysicalParams,
    nitsche: &NitscheParams,
    control: &SolverControl,
    fields: &SolutionFields,
) -> ResidualReport {
    let sources = SourceTerms::default();
    let dofs = &spaces.dofs;
    let flow = fields.flow_vector();
    let op = FlowOperator::new(mesh, spaces, params, nitsche, &sources);
    let fsys = op.system(Some(&flow), &fields.theta);
    let (flow_abs, flow_rel) = free_residual(&fsys, &dofs.flow, &flow);
    let tsys = transport_system(mesh, spaces, params, &fields.u, &fields.crosswind, control.supg, &sources);
    let (transport_abs, transport_rel) = free_residual(&tsys, &dofs.theta, &fields.theta);
    ResidualReport {
        flow_abs,
        flow_rel,
        transport_abs,
        transport_rel,
    }
}

/// Largest `|b(u_h, q_j)|` over pressure basis functions `q_j`. With
/// `interior_only`, basis functions that do not vanish on the membrane are
/// skipped, since their continuity equation also carries Nitsche terms.
pub fn divergence_residual(mesh: &Mesh, dofs: &DofMap, u: &[f64], interior_only: bool) -> f64 {
    let b = pressure_coupling(mesh, dofs).to_csr();
    let mut x = u.to_vec();
    x.resize(dofs.n_flow(), 0.0);
    let bx = b.mul_vec(&x);
    let mut skip = vec![false; dofs.n_pressure()];
    if interior_only {
        for e in mesh.boundary_edges_tagged(BoundaryTag::Membrane) {
            for v in e.vertices {
                skip[v] = true;
            }
        }
    }
    (0..dofs.n_pressure())
        .filter(|&v| !skip[v] && !dofs.flow.is_fixed(dofs.pressure(v)))
        .map(|v| bx[dofs.pressure(v)].abs())
        .fold(0.0, f64::max)
}
