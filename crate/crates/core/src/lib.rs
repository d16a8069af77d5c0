//! Steady reverse-osmosis channel flow: Navier-Stokes with a Darcy-Starling
//! membrane law imposed by Nitsche's method, coupled to solute transport.

pub mod config;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod mesh;
pub mod oracles;
pub mod params;
pub mod postproc;
pub mod runs;
pub mod solver;

pub use config::{MeshConfig, OutputConfig, OutputFormat, RunConfig};
pub use error::{Error, Result};
pub use fem::{FemSpaces, MembraneCondition};
pub use geometry::{ChannelGeometry, GradingMode, GradingSpec, SpacerConfig};
pub use mesh::{BoundaryTag, Mesh};
pub use params::{NitscheParams, PhysicalParams};
pub use solver::{ConvergenceTrace, SolutionFields, SolverControl};
