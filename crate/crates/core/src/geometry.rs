//! Channel and spacer geometry, plus the vertical grading used by the meshers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Placement of the cylindrical feed spacers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpacerConfig {
    NoSpacers,
    /// Half cylinders attached to the bottom membrane.
    Cavity,
    /// Half cylinders alternating between the bottom and top membranes.
    ZigZag,
    /// Full cylinders centred at mid-height.
    Submerged,
}

impl SpacerConfig {
    pub fn name(self) -> &'static str {
        match self {
            SpacerConfig::NoSpacers => "no_spacers",
            SpacerConfig::Cavity => "cavity",
            SpacerConfig::ZigZag => "zig_zag",
            SpacerConfig::Submerged => "submerged",
        }
    }
}

impl std::str::FromStr for SpacerConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "no_spacers" | "none" => Ok(SpacerConfig::NoSpacers),
            "cavity" => Ok(SpacerConfig::Cavity),
            "zig_zag" | "zigzag" => Ok(SpacerConfig::ZigZag),
            "submerged" => Ok(SpacerConfig::Submerged),
            other => Err(Error::Config(format!("unknown spacer configuration '{other}'"))),
        }
    }
}

/// Which wall a half-cylinder spacer is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpacerAnchor {
    Bottom,
    Top,
    Centre,
}

/// A single circular obstacle, as seen by the mesher.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spacer {
    pub centre: [f64; 2],
    pub radius: f64,
    pub anchor: SpacerAnchor,
}

/// Dimensions of the feed channel (all lengths in metres).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelGeometry {
    /// Channel length `L`.
    pub length: f64,
    /// Channel height `d`.
    pub height: f64,
    /// Out-of-plane width `W`; only used for mass-flow post-processing.
    pub width: f64,
    /// Spacer diameter `d_S`.
    pub spacer_diameter: f64,
    pub config: SpacerConfig,
    /// Spacer x-centres; strictly increasing.
    #[serde(default)]
    pub spacer_x: Vec<f64>,
}

impl Default for ChannelGeometry {
    fn default() -> Self {
        Self {
            length: 1.5e-2,
            height: 7.4e-4,
            width: 1.5e-2,
            spacer_diameter: 3.6e-4,
            config: SpacerConfig::NoSpacers,
            spacer_x: Vec::new(),
        }
    }
}

impl ChannelGeometry {
    /// The reference channel with `n` equally spaced spacers at `i·L/(n+1)`.
    pub fn with_spacers(config: SpacerConfig, n: usize) -> Self {
        let mut g = Self {
            config,
            ..Self::default()
        };
        if config != SpacerConfig::NoSpacers {
            g.spacer_x = Self::equally_spaced(g.length, n);
        }
        g
    }

    pub fn equally_spaced(length: f64, n: usize) -> Vec<f64> {
        (1..=n).map(|i| i as f64 * length / (n + 1) as f64).collect()
    }

    pub fn n_spacers(&self) -> usize {
        if self.config == SpacerConfig::NoSpacers {
            0
        } else {
            self.spacer_x.len()
        }
    }

    pub fn half_height(&self) -> f64 {
        0.5 * self.height
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Geometry(m));
        if !(self.length > 0.0 && self.height > 0.0 && self.width > 0.0) {
            return bad(format!(
                "L, d and W must be positive (got L={}, d={}, W={})",
                self.length, self.height, self.width
            ));
        }
        if self.config == SpacerConfig::NoSpacers {
            return Ok(());
        }
        let ds = self.spacer_diameter;
        if !(ds > 0.0 && ds < self.height) {
            return bad(format!(
                "spacer diameter {ds} must lie in (0, d={})",
                self.height
            ));
        }
        if self.spacer_x.is_empty() {
            return bad("spacer configuration requires at least one spacer".into());
        }
        for &x in &self.spacer_x {
            if !(x > 0.5 * ds && x < self.length - 0.5 * ds) {
                return bad(format!(
                    "spacer centre x={x} must lie in (d_S/2, L - d_S/2)"
                ));
            }
        }
        for w in self.spacer_x.windows(2) {
            if w[1] <= w[0] {
                return bad("spacer_x must be strictly increasing".into());
            }
            if w[1] - w[0] <= ds {
                return bad(format!(
                    "spacers at x={} and x={} overlap (d_S={ds})",
                    w[0], w[1]
                ));
            }
        }
        Ok(())
    }

    /// The obstacles in mesher terms.
    pub fn spacers(&self) -> Vec<Spacer> {
        let r = 0.5 * self.spacer_diameter;
        let d = self.height;
        self.spacer_x
            .iter()
            .enumerate()
            .filter_map(|(i, &x)| {
                let (y, anchor) = match self.config {
                    SpacerConfig::NoSpacers => return None,
                    SpacerConfig::Cavity => (0.0, SpacerAnchor::Bottom),
                    SpacerConfig::ZigZag if i % 2 == 0 => (0.0, SpacerAnchor::Bottom),
                    SpacerConfig::ZigZag => (d, SpacerAnchor::Top),
                    SpacerConfig::Submerged => (0.5 * d, SpacerAnchor::Centre),
                };
                Some(Spacer {
                    centre: [x, y],
                    radius: r,
                    anchor,
                })
            })
            .collect()
    }

    /// Exact area of the fluid region (rectangle minus the spacer footprints).
    pub fn fluid_area(&self) -> f64 {
        let rect = self.length * self.height;
        let removed: f64 = self
            .spacers()
            .iter()
            .map(|s| {
                let disc = std::f64::consts::PI * s.radius * s.radius;
                match s.anchor {
                    SpacerAnchor::Centre => disc,
                    _ => 0.5 * disc,
                }
            })
            .sum();
        rect - removed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradingMode {
    Uniform,
    TowardMembrane,
}

/// Vertical resolution of a channel mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradingSpec {
    pub mode: GradingMode,
    /// Cells across the channel height.
    pub n_y: usize,
    /// Geometric growth ratio between neighbouring rows, from the walls inward.
    #[serde(default = "one")]
    pub ratio: f64,
    /// Horizontal cells; defaults to `round((L/d)·n_y)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_x: Option<usize>,
}

fn one() -> f64 {
    1.0
}

impl GradingSpec {
    pub fn uniform(n_y: usize) -> Self {
        Self {
            mode: GradingMode::Uniform,
            n_y,
            ratio: 1.0,
            n_x: None,
        }
    }

    pub fn toward_membrane(n_y: usize, ratio: f64) -> Self {
        Self {
            mode: GradingMode::TowardMembrane,
            n_y,
            ratio,
            n_x: None,
        }
    }

    pub fn with_n_x(mut self, n_x: usize) -> Self {
        self.n_x = Some(n_x);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_y < 2 {
            return Err(Error::Geometry(format!(
                "n_y must be at least 2 (got {})",
                self.n_y
            )));
        }
        if !(self.ratio >= 1.0) || !self.ratio.is_finite() {
            return Err(Error::Geometry(format!(
                "grading ratio must be >= 1 (got {})",
                self.ratio
            )));
        }
        if self.n_x == Some(0) {
            return Err(Error::Geometry("n_x must be positive".into()));
        }
        Ok(())
    }

    pub fn effective_ratio(&self) -> f64 {
        match self.mode {
            GradingMode::Uniform => 1.0,
            GradingMode::TowardMembrane => self.ratio,
        }
    }

    pub fn columns(&self, geom: &ChannelGeometry) -> usize {
        self.n_x.unwrap_or_else(|| {
            ((geom.length / geom.height) * self.n_y as f64).round().max(1.0) as usize
        })
    }

    /// Row coordinates `0 = y_0 < ... < y_{n_y} = d`, symmetric about mid-height,
    /// with spacing growing by `ratio` away from each wall.
    pub fn row_coordinates(&self, height: f64) -> Vec<f64> {
        let n = self.n_y;
        let r = self.effective_ratio();
        let widths: Vec<f64> = (0..n)
            .map(|j| r.powi(j.min(n - 1 - j) as i32))
            .collect();
        let total: f64 = widths.iter().sum();
        let mut ys = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        ys.push(0.0);
        for w in &widths[..n - 1] {
            acc += w;
            ys.push(height * acc / total);
        }
        ys.push(height);
        ys
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_geometry_is_valid() {
        ChannelGeometry::default().validate().unwrap();
        for cfg in [SpacerConfig::Cavity, SpacerConfig::ZigZag, SpacerConfig::Submerged] {
            let g = ChannelGeometry::with_spacers(cfg, 3);
            g.validate().unwrap();
            assert_eq!(g.spacer_x.len(), 3);
            assert!((g.spacer_x[1] - g.length / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn overlapping_spacers_rejected() {
        let mut g = ChannelGeometry::with_spacers(SpacerConfig::Cavity, 2);
        g.spacer_x = vec![5.0e-3, 5.2e-3];
        assert!(matches!(g.validate(), Err(Error::Geometry(_))));
        g.spacer_x = vec![5.0e-3, 4.0e-3];
        assert!(g.validate().is_err());
        g.spacer_x = vec![1.0e-4];
        assert!(g.validate().is_err());
    }

    #[test]
    fn spacer_diameter_must_fit() {
        let mut g = ChannelGeometry::with_spacers(SpacerConfig::Submerged, 1);
        g.spacer_diameter = g.height;
        assert!(g.validate().is_err());
    }

    #[test]
    fn n_x_formula_for_reference_channel() {
        let g = ChannelGeometry::default();
        assert_eq!(GradingSpec::uniform(2).columns(&g), 41);
        assert_eq!(GradingSpec::uniform(2).with_n_x(7).columns(&g), 7);
    }

    #[test]
    fn grading_is_symmetric_and_finest_at_walls() {
        let g = GradingSpec::toward_membrane(8, 1.2);
        let ys = g.row_coordinates(1.0);
        assert_eq!(ys.len(), 9);
        let dy: Vec<f64> = ys.windows(2).map(|w| w[1] - w[0]).collect();
        for j in 0..4 {
            assert!((dy[j] - dy[7 - j]).abs() < 1e-14);
        }
        for j in 0..3 {
            assert!((dy[j + 1] / dy[j] - 1.2).abs() < 1e-12);
        }
        assert_eq!(ys[8], 1.0);
    }

    #[test]
    fn uniform_mode_ignores_ratio() {
        let mut g = GradingSpec::uniform(4);
        g.ratio = 3.0;
        let ys = g.row_coordinates(4.0);
        assert_eq!(ys, vec![0.0, 1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn rejects_small_n_y() {
        assert!(GradingSpec::uniform(1).validate().is_err());
        assert!(GradingSpec::toward_membrane(4, 0.9).validate().is_err());
    }
}
