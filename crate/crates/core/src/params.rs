use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fluid, membrane and operating constants. SI units throughout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalParams {
    /// Density (kg/m^3).
    pub rho: f64,
    /// Dynamic viscosity (Pa s).
    pub mu: f64,
    /// Solute diffusivity (m^2/s).
    pub diffusivity: f64,
    /// Van't Hoff coefficient (Pa m^3/mol).
    pub kappa: f64,
    /// Membrane resistance (Pa s/m).
    pub resistance: f64,
    /// Transmembrane pressure (Pa).
    pub delta_p: f64,
    /// Mean inlet velocity (m/s).
    pub u0: f64,
    /// Inlet concentration (mol/m^3).
    pub theta0: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams {
            rho: 1027.2,
            mu: 8.9e-4,
            diffusivity: 1.5e-9,
            kappa: 4955.144,
            resistance: 8.41e10,
            delta_p: 4_053_000.0,
            u0: 0.129,
            theta0: 600.0,
        }
    }
}

impl PhysicalParams {
    /// Checks positivity and rejects forward-osmosis operating points.
    ///
    /// `kappa`, `theta0` and `delta_p` may be zero, which switches off the osmotic
    /// coupling (used by the analytic validation cases).
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rho", self.rho),
            ("mu", self.mu),
            ("diffusivity", self.diffusivity),
            ("resistance", self.resistance),
            ("u0", self.u0),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Params(format!("{name} must be positive and finite, got {v}")));
            }
        }
        for (name, v) in [("kappa", self.kappa), ("theta0", self.theta0), ("delta_p", self.delta_p)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Params(format!("{name} must be non-negative and finite, got {v}")));
            }
        }
        let osmotic = self.osmotic_pressure(self.theta0);
        if osmotic > 0.0 && self.delta_p <= osmotic {
            return Err(Error::ForwardOsmosis {
                delta_p: self.delta_p,
                osmotic,
            });
        }
        Ok(())
    }

    pub fn osmotic_pressure(&self, theta: f64) -> f64 {
        self.kappa * theta
    }

    /// Darcy-Starling permeate velocity `(dP - kappa theta) / I0`.
    pub fn permeate_velocity(&self, theta: f64) -> f64 {
        (self.delta_p - self.kappa * theta) / self.resistance
    }

    /// Pressure-driven part `dP / I0`.
    pub fn drive_velocity(&self) -> f64 {
        self.delta_p / self.resistance
    }

    /// Constant-flux variant: `kappa = 0` and `dP = v_w I0`.
    pub fn with_constant_flux(mut self, v_w: f64) -> Self {
        self.kappa = 0.0;
        self.delta_p = v_w * self.resistance;
        self
    }
}

/// Nitsche penalty constant. The edge size is taken per membrane edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NitscheParams {
    pub alpha: f64,
}

impl Default for NitscheParams {
    fn default() -> Self {
        NitscheParams { alpha: 1.0 }
    }
}

impl NitscheParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Params(format!("nitsche alpha must be positive, got {}", self.alpha)));
        }
        Ok(())
    }
}
