pub mod assembly;
pub mod basis;
pub mod dirichlet;
pub mod quadrature;
pub mod sparse;
pub mod spaces;

pub use dirichlet::{apply_dirichlet, ReducedSystem};
pub use sparse::{CsrMatrix, SparseSystem, TripletMatrix};
pub use spaces::{Constraints, DofMap, FemSpaces, MembraneCondition, VelocityBc};
