//! Quantities extracted from converged fields, and file export.

mod csv;
mod flow;
mod profiles;
mod vtk;

pub use self::csv::{export_csv, read_csv, write_table, CsvRow};
pub use flow::{
    boundary_flux, flux_bounds, mass_balance, membrane_normal_velocities, total_mass_flow,
    volumetric_flow_per_width, FluxBounds, MassBalance,
};
pub use profiles::{
    pressure_at, pressure_drop_at, pressure_drop_profile, permeate_profile, LineProfile, Wall,
};
pub use vtk::{export_vtk, read_vtk, write_vtk, VtkData};

#[cfg(test)]
pub(crate) mod testing {
    use crate::fem::DofMap;
    use crate::geometry::{ChannelGeometry, GradingSpec};
    use crate::mesh::{build_rectangle_mesh, Mesh};

    /// Reference channel, coarse and slightly graded.
    pub fn channel() -> (ChannelGeometry, Mesh, DofMap) {
        let g = ChannelGeometry::default();
        let m = build_rectangle_mesh(&g, &GradingSpec::toward_membrane(4, 1.3).with_n_x(30)).unwrap();
        let d = DofMap::new(&m);
        (g, m, d)
    }
}
