use super::{BoundaryTag, Mesh};
use crate::error::{Error, Result};
use crate::geometry::{ChannelGeometry, GradingSpec, SpacerConfig};

/// Structured triangulation of the plain channel `[0, L] x [0, d]`.
///
/// Each of the `n_x x n_y` quads is split along its rising diagonal. Bottom and
/// top are tagged as membrane, `x = 0` as inlet and `x = L` as outlet.
pub fn build_rectangle_mesh(geom: &ChannelGeometry, grading: &GradingSpec) -> Result<Mesh> {
    if geom.config != SpacerConfig::NoSpacers {
        return Err(Error::Geometry(format!(
            "rectangle mesher needs a channel without spacers (got {})",
            geom.config.name()
        )));
    }
    geom.validate()?;
    grading.validate()?;

    let nx = grading.columns(geom);
    let ny = grading.n_y;
    let ys = grading.row_coordinates(geom.height);
    let id = |i: usize, j: usize| j * (nx + 1) + i;

    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for &y in &ys {
        for i in 0..=nx {
            let x = if i == nx {
                geom.length
            } else {
                geom.length * i as f64 / nx as f64
            };
            vertices.push([x, y]);
        }
    }

    let mut cells = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            cells.push([a, b, c]);
            cells.push([a, c, d]);
        }
    }

    let mut tags = Vec::with_capacity(2 * (nx + ny));
    for i in 0..nx {
        tags.push(([id(i, 0), id(i + 1, 0)], BoundaryTag::Membrane));
        tags.push(([id(i, ny), id(i + 1, ny)], BoundaryTag::Membrane));
    }
    for j in 0..ny {
        tags.push(([id(0, j), id(0, j + 1)], BoundaryTag::Inlet));
        tags.push(([id(nx, j), id(nx, j + 1)], BoundaryTag::Outlet));
    }

    Mesh::from_parts(vertices, cells, &tags)
}
