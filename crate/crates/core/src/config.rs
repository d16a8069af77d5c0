//! JSON run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::MembraneCondition;
use crate::geometry::{ChannelGeometry, GradingSpec, SpacerConfig};
use crate::params::{NitscheParams, PhysicalParams};
use crate::solver::SolverControl;

/// Spacers placed when a spacer configuration is given without positions.
pub const DEFAULT_SPACER_COUNT: usize = 3;

/// Either a generated mesh (`grading`) or a Gmsh file (`msh`), never both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grading: Option<GradingSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub msh: Option<PathBuf>,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig {
            grading: Some(GradingSpec::toward_membrane(20, 1.3)),
            msh: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Vtk,
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: PathBuf::from("out"),
            formats: vec![OutputFormat::Vtk, OutputFormat::Csv, OutputFormat::Json],
        }
    }
}

impl OutputConfig {
    pub fn wants(&self, f: OutputFormat) -> bool {
        self.formats.contains(&f)
    }
}

/// Everything needed for one solve. Missing sections take the reference
/// channel values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Label written into CSV outputs.
    pub name: String,
    pub geometry: ChannelGeometry,
    pub physics: PhysicalParams,
    pub nitsche: NitscheParams,
    pub solver: SolverControl,
    pub membrane: MembraneCondition,
    pub mesh: MeshConfig,
    pub outputs: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            name: "run".into(),
            geometry: ChannelGeometry::default(),
            physics: PhysicalParams::default(),
            nitsche: NitscheParams::default(),
            solver: SolverControl::default(),
            membrane: MembraneCondition::default(),
            mesh: MeshConfig::default(),
            outputs: OutputConfig::default(),
        }
    }
}

fn config_err(e: Error) -> Error {
    match e {
        Error::Config(_) | Error::ForwardOsmosis { .. } => e,
        other => Error::Config(other.to_string()),
    }
}

impl RunConfig {
    /// Parses and validates. Relative `msh` paths are kept as given.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.normalize();
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path`; a relative `msh` path is resolved against the config's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if let Some(m) = cfg.mesh.msh.as_mut() {
            if m.is_relative() {
                if let Some(dir) = path.parent() {
                    *m = dir.join(&*m);
                }
            }
        }
        cfg.normalize();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Fills in default spacer positions and drops the default grading when a
    /// mesh file is given.
    pub fn normalize(&mut self) {
        let g = &mut self.geometry;
        if g.config != SpacerConfig::NoSpacers && g.spacer_x.is_empty() {
            g.spacer_x = ChannelGeometry::equally_spaced(g.length, DEFAULT_SPACER_COUNT);
        }
        if self.mesh.msh.is_some() && self.mesh.grading == MeshConfig::default().grading {
            self.mesh.grading = None;
        }
    }

    /// All checks that can run before meshing.
    pub fn validate(&self) -> Result<()> {
        self.geometry.validate().map_err(config_err)?;
        self.physics.validate().map_err(config_err)?;
        self.nitsche.validate().map_err(config_err)?;
        self.solver.validate().map_err(config_err)?;
        match (&self.mesh.grading, &self.mesh.msh) {
            (Some(g), None) => g.validate().map_err(config_err)?,
            (None, Some(p)) => {
                if !p.is_file() {
                    return Err(Error::Config(format!("mesh file {} does not exist", p.display())));
                }
            }
            (Some(_), Some(_)) => {
                return Err(Error::Config("mesh: give either grading or msh, not both".into()))
            }
            (None, None) => return Err(Error::Config("mesh: grading or msh is required".into())),
        }
        if self.outputs.directory.as_os_str().is_empty() {
            return Err(Error::Config("outputs.directory is empty".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_reference_run() {
        let cfg = RunConfig::from_json("{}").unwrap();
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn round_trips_through_json() {
        let mut cfg = RunConfig::default();
        cfg.geometry = ChannelGeometry::with_spacers(SpacerConfig::ZigZag, 4);
        cfg.physics.u0 = 0.258;
        let back = RunConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn spacer_positions_default_to_three() {
        let cfg = RunConfig::from_json(r#"{"geometry": {"length": 0.015, "height": 0.00074,
            "width": 0.015, "spacer_diameter": 0.00036, "config": "cavity"}}"#)
        .unwrap();
        assert_eq!(cfg.geometry.spacer_x.len(), DEFAULT_SPACER_COUNT);
        assert!((cfg.geometry.spacer_x[1] - 0.0075).abs() < 1e-15);
    }

    #[test]
    fn forward_osmosis_is_rejected_at_parse_time() {
        let e = RunConfig::from_json(r#"{"physics": {"delta_p": 1000000}}"#).unwrap_err();
        assert!(matches!(e, Error::ForwardOsmosis { .. }), "{e}");
    }

    #[test]
    fn unknown_fields_and_missing_mesh_files_fail() {
        assert!(matches!(RunConfig::from_json(r#"{"physic": {}}"#), Err(Error::Config(_))));
        let e = RunConfig::from_json(r#"{"mesh": {"msh": "/nonexistent/x.msh"}}"#).unwrap_err();
        assert!(e.to_string().contains("does not exist"), "{e}");
        let e = RunConfig::from_json(r#"{"mesh": {}}"#).unwrap_err();
        assert!(matches!(e, Error::Config(_)));
    }

    #[test]
    fn negative_viscosity_is_a_config_error() {
        let e = RunConfig::from_json(r#"{"physics": {"mu": -1.0}}"#).unwrap_err();
        assert!(matches!(e, Error::Config(_)));
    }
}
