//! Closed-form reference models for channel flow and membrane transport.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ChannelGeometry;
use crate::params::PhysicalParams;

/// Dimensionless groups of the channel, on the half height `d~ = d/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowNumbers {
    /// Cross-flow Reynolds number `4 rho d~ u0 / mu`.
    pub re: f64,
    /// Wall Reynolds number `rho d~ v_w / mu`.
    pub re_n: f64,
    pub half_height: f64,
}

pub fn flow_numbers(params: &PhysicalParams, geom: &ChannelGeometry, v_w: f64) -> FlowNumbers {
    let dh = geom.half_height();
    FlowNumbers {
        re: 4.0 * params.rho * dh * params.u0 / params.mu,
        re_n: params.rho * dh * v_w / params.mu,
        half_height: dh,
    }
}

/// Osmotic pressure `kappa theta`.
pub fn vant_hoff(theta: f64, kappa: f64) -> Result<f64> {
    if theta < 0.0 {
        return Err(Error::Params(format!("concentration must be non-negative, got {theta}")));
    }
    Ok(kappa * theta)
}

/// Permeate velocity `(dP - kappa theta) / I0`. Negative values mean local
/// forward osmosis.
pub fn darcy_starling(theta: f64, params: &PhysicalParams) -> f64 {
    params.permeate_velocity(theta)
}

/// Impermeable-wall pressure drop `(rho u0^2 / 2)(24 / Re)(x / d~)`.
pub fn poiseuille_dp(x: f64, params: &PhysicalParams, geom: &ChannelGeometry) -> f64 {
    let n = flow_numbers(params, geom, 0.0);
    0.5 * params.rho * params.u0 * params.u0 * (24.0 / n.re) * (x / n.half_height)
}

/// Pressure drop with uniform wall suction `v_w` on both walls:
/// `(rho u0^2 / 2)(24/Re - 648/35 Re_n/Re)(1 - 2 Re_n/Re x/d~)(x/d~)`.
pub fn berman_dp(x: f64, params: &PhysicalParams, geom: &ChannelGeometry, v_w: f64) -> f64 {
    let n = flow_numbers(params, geom, v_w);
    let xi = x / n.half_height;
    0.5 * params.rho
        * params.u0
        * params.u0
        * (24.0 / n.re - 648.0 / 35.0 * n.re_n / n.re)
        * (1.0 - 2.0 * n.re_n / n.re * xi)
        * xi
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn base() -> (PhysicalParams, ChannelGeometry) {
        (PhysicalParams::default(), ChannelGeometry::default())
    }

    #[test]
    fn vant_hoff_examples() {
        assert_eq!(vant_hoff(0.0, 4955.144).unwrap(), 0.0);
        assert_relative_eq!(vant_hoff(600.0, 4955.144).unwrap(), 2.9731e6, max_relative = 1e-4);
        assert!(vant_hoff(-1.0, 1.0).is_err());
    }

    #[test]
    fn darcy_starling_examples() {
        let p = PhysicalParams::default();
        assert_relative_eq!(darcy_starling(0.0, &p), 4.8193e-5, max_relative = 1e-4);
        let hi = PhysicalParams {
            delta_p: 5_572_875.0,
            ..p
        };
        assert_relative_eq!(darcy_starling(0.0, &hi), 6.6265e-5, max_relative = 1e-4);
        assert_relative_eq!(darcy_starling(600.0, &p), 1.2841e-5, max_relative = 1e-4);
    }

    #[test]
    fn poiseuille_reference_value() {
        let (p, g) = base();
        assert_eq!(poiseuille_dp(0.0, &p, &g), 0.0);
        assert_relative_eq!(flow_numbers(&p, &g, 0.0).re, 220.35, max_relative = 1e-4);
        assert_relative_eq!(poiseuille_dp(g.length, &p, &g), 37.74, max_relative = 2e-4);
        // identity with 3 mu u0 x / d~^2
        let dh = g.half_height();
        assert_relative_eq!(
            poiseuille_dp(0.01, &p, &g),
            3.0 * p.mu * p.u0 * 0.01 / (dh * dh),
            max_relative = 1e-13
        );
    }

    #[test]
    fn berman_reference_values() {
        let (p, g) = base();
        assert_relative_eq!(flow_numbers(&p, &g, 4.8193e-5).re_n, 0.020582, max_relative = 1e-4);
        for x in [0.0, 0.003, 0.015] {
            assert_eq!(berman_dp(x, &p, &g, 0.0), poiseuille_dp(x, &p, &g));
        }
    }

    #[test]
    fn paper_pressures_barely_change_the_pressure_drop() {
        let (p, g) = base();
        let v1 = darcy_starling(0.0, &p);
        let v2 = darcy_starling(0.0, &PhysicalParams { delta_p: 5_572_875.0, ..p });
        for i in 1..=100 {
            let x = g.length * i as f64 / 100.0;
            let gap = (berman_dp(x, &p, &g, v1) - berman_dp(x, &p, &g, v2)).abs();
            assert!(gap < 0.01 * poiseuille_dp(x, &p, &g));
        }
    }

    #[test]
    fn viscous_loss_is_below_one_percent_of_dp() {
        let g = ChannelGeometry::default();
        for u0 in [0.0645, 0.129, 0.258] {
            for delta_p in [4_053_000.0, 5_572_875.0] {
                let p = PhysicalParams {
                    u0,
                    delta_p,
                    ..Default::default()
                };
                assert!(poiseuille_dp(g.length, &p, &g) < 0.01 * delta_p);
            }
        }
    }

    proptest! {
        #[test]
        fn poiseuille_is_linear_in_x_and_mu(x in 0.0f64..0.0075, mu in 1e-4f64..1e-2, s in 0.1f64..2.0) {
            let g = ChannelGeometry::default();
            let p = PhysicalParams { mu, ..Default::default() };
            let q = PhysicalParams { mu: s * mu, ..p };
            let a = poiseuille_dp(x, &p, &g);
            prop_assert!((poiseuille_dp(s * x, &p, &g) - s * a).abs() <= 1e-12 * s * a);
            prop_assert!((poiseuille_dp(x, &q, &g) - s * a).abs() <= 1e-12 * s * a);
        }

        #[test]
        fn vant_hoff_is_linear(theta in 0.0f64..2000.0, kappa in 0.0f64..1e4) {
            let a = vant_hoff(theta, kappa).unwrap();
            prop_assert!((vant_hoff(2.0 * theta, kappa).unwrap() - 2.0 * a).abs() <= 1e-12 * a.max(1e-300));
        }

        #[test]
        fn berman_is_monotone_over_the_paper_range(
            u0 in prop::sample::select(vec![0.0645, 0.129, 0.258]),
            delta_p in prop::sample::select(vec![4_053_000.0, 5_572_875.0]),
            x in 0.0f64..0.0149,
        ) {
            let g = ChannelGeometry::default();
            let p = PhysicalParams { u0, delta_p, ..Default::default() };
            let v = darcy_starling(0.0, &p);
            prop_assert!(berman_dp(x + 1e-4, &p, &g, v) > berman_dp(x, &p, &g, v));
        }
    }
}
