//! Block Gauss-Seidel fixed point: Oseen flow solve with the osmotic load at
//! the previous concentration, then a transport solve with the new velocity.

use std::sync::Arc;

use log::{debug, info};

use super::linear::DirectLu;
use super::{ConvergenceTrace, SolutionFields, SolverControl};
use crate::error::{Error, Result};
use crate::fem::assembly::{self, nitsche_matrix};
use crate::fem::sparse::norm2;
use crate::fem::{apply_dirichlet, FemSpaces, SparseSystem, TripletMatrix};
use crate::mesh::{Mesh, Point};
use crate::params::{NitscheParams, PhysicalParams};

pub type VectorSource = Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>;
pub type ScalarSource = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

/// Optional volume sources, used by manufactured-solution tests.
#[derive(Clone, Default)]
pub struct SourceTerms {
    pub body_force: Option<VectorSource>,
    pub solute: Option<ScalarSource>,
}

impl std::fmt::Debug for SourceTerms {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SourceTerms")
            .field("body_force", &self.body_force.is_some())
            .field("solute", &self.solute.is_some())
            .finish()
    }
}

/// Parts of the flow system that do not change between outer iterations.
pub(crate) struct FlowOperator<'a> {
    mesh: &'a Mesh,
    spaces: &'a FemSpaces,
    params: &'a PhysicalParams,
    nitsche: &'a NitscheParams,
    fixed: TripletMatrix,
    load: Vec<f64>,
}

impl<'a> FlowOperator<'a> {
    pub(crate) fn new(
        mesh: &'a Mesh,
        spaces: &'a FemSpaces,
        params: &'a PhysicalParams,
        nitsche: &'a NitscheParams,
        sources: &SourceTerms,
    ) -> Self {
        let dofs = &spaces.dofs;
        let mut fixed = assembly::stokes(mesh, dofs, params);
        let mut load = match &sources.body_force {
            Some(f) => assembly::velocity_load(mesh, dofs, |p| f(p)),
            None => vec![0.0; dofs.n_flow()],
        };
        if spaces.nitsche_active() {
            fixed.append(nitsche_matrix(mesh, dofs, params, nitsche));
            for (l, f) in load.iter_mut().zip(assembly::assemble_f(mesh, dofs, params, nitsche)) {
                *l += f;
            }
        }
        FlowOperator {
            mesh,
            spaces,
            params,
            nitsche,
            fixed,
            load,
        }
    }

    /// Full (unreduced) system `A + a~(w) = F - B(theta)`.
    pub(crate) fn system(&self, w: Option<&[f64]>, theta: &[f64]) -> SparseSystem {
        let dofs = &self.spaces.dofs;
        let mut t = self.fixed.clone();
        if let Some(w) = w {
            t.append(assembly::oseen(self.mesh, dofs, self.params.rho, w));
        }
        let mut rhs = self.load.clone();
        if self.spaces.nitsche_active() && self.params.kappa != 0.0 {
            let b = assembly::assemble_b(self.mesh, dofs, self.params, self.nitsche, theta);
            for (r, bi) in rhs.iter_mut().zip(b) {
                *r -= bi;
            }
        }
        SparseSystem {
            matrix: t.to_csr(),
            rhs,
        }
    }
}

/// Transport system `d + c~(u) = source` before elimination.
pub(crate) fn transport_system(
    mesh: &Mesh,
    spaces: &FemSpaces,
    params: &PhysicalParams,
    u: &[f64],
    crosswind: &[f64],
    supg: bool,
    sources: &SourceTerms,
) -> SparseSystem {
    let dofs = &spaces.dofs;
    let d = params.diffusivity;
    let mut matrix = assembly::transport(mesh, dofs, d, u, supg);
    if !crosswind.is_empty() {
        matrix.append(assembly::crosswind_diffusion(mesh, dofs, u, crosswind));
    }
    let rhs = match &sources.solute {
        Some(s) => assembly::transport_load(mesh, dofs, d, u, supg, |p| s(p)),
        None => vec![0.0; dofs.n_theta()],
    };
    SparseSystem {
        matrix: matrix.to_csr(),
        rhs,
    }
}

fn solve_reduced(lu: &mut DirectLu, sys: &SparseSystem, c: &crate::fem::Constraints) -> Result<Vec<f64>> {
    let r = apply_dirichlet(sys, c);
    let x = lu.solve(&r.system)?;
    Ok(r.expand(&x))
}

fn relative_change(new: &[f64], old: &[f64]) -> f64 {
    let diff: f64 = new.iter().zip(old).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let n = norm2(new);
    if n == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff / n
    }
}

/// Relative undershoot of the boundary minimum that switches on crosswind
/// diffusion in a cell.
const UNDERSHOOT_TRIGGER: f64 = 5e-3;

/// Zeroes the crosswind coefficients except on cells with a vertex clearly
/// below the smallest boundary concentration, which bounds the exact solution
/// from below when there is no solute source.
fn keep_undershoot_cells(dofs: &crate::fem::DofMap, theta: &[f64], coefficients: &mut [f64]) {
    let lowest = (0..dofs.theta.len())
        .filter_map(|i| dofs.theta.get(i))
        .fold(f64::INFINITY, f64::min);
    let floor = lowest - UNDERSHOOT_TRIGGER * lowest.abs();
    for (c, k) in coefficients.iter_mut().enumerate() {
        if !dofs.cell_p1(c).iter().any(|&v| theta[v] < floor) {
            *k = 0.0;
        }
    }
}

/// Coupled steady solve. See [`picard_solve_with_sources`].
pub fn picard_solve(
    mesh: &Mesh,
    spaces: &FemSpaces,
    params: &PhysicalParams,
    nitsche: &NitscheParams,
    control: &SolverControl,
) -> Result<(SolutionFields, ConvergenceTrace)> {
    picard_solve_with_sources(mesh, spaces, params, nitsche, control, &SourceTerms::default())
}

/// Coupled steady solve by Picard iteration.
///
/// Starts from a Stokes solve with the osmotic load at the inlet concentration
/// and `theta = theta0`. Each iteration solves the Oseen problem linearised at
/// the previous velocity with the load at the previous concentration, then the
/// transport problem with the new velocity, and relaxes both.
///
/// With `control.crosswind`, the first converged state fixes per-cell
/// crosswind coefficients on cells that undershoot the boundary concentration,
/// and the iteration continues to a second fixed point that includes them. Both phases share the `max_outer` budget.
pub fn picard_solve_with_sources(
    mesh: &Mesh,
    spaces: &FemSpaces,
    params: &PhysicalParams,
    nitsche: &NitscheParams,
    control: &SolverControl,
    sources: &SourceTerms,
) -> Result<(SolutionFields, ConvergenceTrace)> {
    params.validate()?;
    nitsche.validate()?;
    control.validate()?;
    let dofs = &spaces.dofs;
    let flow_op = FlowOperator::new(mesh, spaces, params, nitsche, sources);
    let mut lu_flow = DirectLu::new();
    let mut lu_theta = DirectLu::new();
    let nu = dofs.n_velocity();
    let omega = control.relaxation;

    let mut theta = vec![params.theta0; dofs.n_theta()];
    dofs.theta.impose(&mut theta);
    let mut flow = solve_reduced(&mut lu_flow, &flow_op.system(None, &theta), &dofs.flow)?;

    let mut crosswind: Vec<f64> = Vec::new();
    let mut trace = ConvergenceTrace::default();
    for k in 1..=control.max_outer {
        let new_flow = solve_reduced(&mut lu_flow, &flow_op.system(Some(&flow), &theta), &dofs.flow)?;
        let du = relative_change(&new_flow[..nu], &flow[..nu]);
        for (f, n) in flow.iter_mut().zip(&new_flow) {
            *f = omega * n + (1.0 - omega) * *f;
        }
        let tsys = transport_system(mesh, spaces, params, &flow[..nu], &crosswind, control.supg, sources);
        let new_theta = solve_reduced(&mut lu_theta, &tsys, &dofs.theta)?;
        let dtheta = relative_change(&new_theta, &theta);
        for (t, n) in theta.iter_mut().zip(&new_theta) {
            *t = omega * n + (1.0 - omega) * *t;
        }
        trace.du.push(du);
        trace.dtheta.push(dtheta);
        trace.iterations = k;
        debug!("picard {k}: du = {du:.3e}, dtheta = {dtheta:.3e}");
        if !(du.is_finite() && dtheta.is_finite()) {
            return Err(Error::NotConverged { trace: Box::new(trace) });
        }
        if du.max(dtheta) < control.tol_rel {
            if control.crosswind && crosswind.is_empty() {
                let u = &flow[..nu];
                let d = params.diffusivity;
                crosswind = match &sources.solute {
                    Some(s) => assembly::crosswind_coefficients(mesh, dofs, d, u, &theta, |p| s(p)),
                    None => assembly::crosswind_coefficients(mesh, dofs, d, u, &theta, |_| 0.0),
                };
                keep_undershoot_cells(dofs, &theta, &mut crosswind);
                if crosswind.iter().any(|&c| c > 0.0) {
                    info!("picard reached the streamline-upwind state after {k} iterations");
                    continue;
                }
                crosswind.clear();
            }
            trace.converged = true;
            info!("picard converged in {k} iterations");
            let mut fields = SolutionFields::from_parts(dofs, &flow, theta);
            fields.crosswind = crosswind;
            return Ok((fields, trace));
        }
    }
    Err(Error::NotConverged { trace: Box::new(trace) })
}
