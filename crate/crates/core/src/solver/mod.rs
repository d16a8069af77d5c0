pub mod linear;
pub mod picard;
pub mod residual;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::DofMap;
use crate::mesh::{Mesh, Point};

pub use linear::{solve_linear, DirectLu};
pub use picard::{picard_solve, picard_solve_with_sources, SourceTerms};
pub use residual::{compute_residuals, divergence_residual, ResidualReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearSolverKind {
    #[default]
    DirectLu,
}

/// Outer fixed-point settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverControl {
    /// Stop when both relative increments fall below this.
    pub tol_rel: f64,
    pub max_outer: usize,
    /// Relaxation factor in (0, 1].
    pub relaxation: f64,
    /// Streamline-upwind stabilisation of the transport equation.
    pub supg: bool,
    /// Residual-based crosswind diffusion at sharp concentration layers,
    /// computed from the converged streamline-upwind solution and then held
    /// fixed while the iteration converges again.
    pub crosswind: bool,
    pub linear_solver: LinearSolverKind,
}

impl Default for SolverControl {
    fn default() -> Self {
        SolverControl {
            tol_rel: 1e-8,
            max_outer: 100,
            relaxation: 0.9,
            supg: true,
            crosswind: true,
            linear_solver: LinearSolverKind::DirectLu,
        }
    }
}

impl SolverControl {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_rel > 0.0) {
            return Err(Error::Params(format!("tol_rel must be positive, got {}", self.tol_rel)));
        }
        if self.max_outer < 1 {
            return Err(Error::Params("max_outer must be at least 1".into()));
        }
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return Err(Error::Params(format!(
                "relaxation must lie in (0, 1], got {}",
                self.relaxation
            )));
        }
        Ok(())
    }
}

/// Relative increments of every completed outer iteration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub du: Vec<f64>,
    pub dtheta: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl ConvergenceTrace {
    pub fn last_increment(&self) -> Option<f64> {
        Some(self.du.last()?.max(*self.dtheta.last()?))
    }
}

/// Velocity (m/s), gauge pressure (Pa) and concentration (mol/m^3) coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFields {
    /// `[u_x on P2 nodes, u_y on P2 nodes]`.
    pub u: Vec<f64>,
    /// Pressure at vertices.
    pub p: Vec<f64>,
    /// Concentration at vertices.
    pub theta: Vec<f64>,
    /// Frozen crosswind diffusivity per cell (m^2/s); empty when unused.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub crosswind: Vec<f64>,
}

impl SolutionFields {
    pub fn zeros(dofs: &DofMap) -> Self {
        SolutionFields {
            u: vec![0.0; dofs.n_velocity()],
            p: vec![0.0; dofs.n_pressure()],
            theta: vec![0.0; dofs.n_theta()],
            crosswind: Vec::new(),
        }
    }

    /// Nodal interpolant of the given functions.
    pub fn interpolate(
        mesh: &Mesh,
        dofs: &DofMap,
        u: impl Fn(Point) -> [f64; 2],
        p: impl Fn(Point) -> f64,
        theta: impl Fn(Point) -> f64,
    ) -> Self {
        let mut f = Self::zeros(dofs);
        for (node, &x) in dofs.p2_nodes().iter().enumerate() {
            let v = u(x);
            f.u[dofs.velocity(0, node)] = v[0];
            f.u[dofs.velocity(1, node)] = v[1];
        }
        for (v, &x) in mesh.vertices().iter().enumerate() {
            f.p[v] = p(x);
            f.theta[v] = theta(x);
        }
        f
    }

    /// Splits a flow vector laid out as in [`DofMap`].
    pub fn from_parts(dofs: &DofMap, flow: &[f64], theta: Vec<f64>) -> Self {
        assert_eq!(flow.len(), dofs.n_flow());
        SolutionFields {
            u: flow[..dofs.n_velocity()].to_vec(),
            p: flow[dofs.n_velocity()..].to_vec(),
            theta,
            crosswind: Vec::new(),
        }
    }

    pub fn flow_vector(&self) -> Vec<f64> {
        let mut v = self.u.clone();
        v.extend_from_slice(&self.p);
        v
    }

    /// Velocity at P2 node `node`.
    pub fn velocity(&self, dofs: &DofMap, node: usize) -> [f64; 2] {
        [self.u[dofs.velocity(0, node)], self.u[dofs.velocity(1, node)]]
    }

    /// Smallest concentration value.
    pub fn theta_min(&self) -> f64 {
        self.theta.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn theta_max(&self) -> f64 {
        self.theta.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}
