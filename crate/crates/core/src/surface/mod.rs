//! Model surfaces and their discrete differential geometry.

mod generate;
mod geometry;

pub use generate::{generate_surface, FAMILIES};
pub use geometry::{compute_geometry, compute_geometry_with, decomposition_residual, free_boundary_angles, SurfaceGeometry, Stats};
