//! Discrete exterior calculus on immersed meshes and harmonic vector fields.
//!
//! Primal 0-forms live on vertices, 1-forms on oriented edges `(a, b)` with
//! `a < b`, 2-forms on faces. Hodge stars are diagonal: barycentric vertex
//! areas, cotan edge weights, inverse face areas.

mod dec;
mod harmonic;

pub use dec::DecOperators;
pub use harmonic::{
    coordinate_functions, harmonic_basis, harmonic_fields, star_rotate, tangential_harmonic_basis,
    HarmonicField,
};

use crate::error::Result;
use crate::mesh::{ImmersedMesh, Topology};
use crate::surface::{compute_geometry_with, SurfaceGeometry};

/// A mesh together with its topology, geometry and DEC operators.
#[derive(Debug, Clone)]
pub struct DiscreteSurface {
    pub mesh: ImmersedMesh,
    pub topo: Topology,
    pub geom: SurfaceGeometry,
    pub dec: DecOperators,
}

impl DiscreteSurface {
    pub fn new(mesh: ImmersedMesh) -> Result<Self> {
        let topo = mesh.validate()?;
        let geom = compute_geometry_with(&mesh, &topo)?;
        let dec = DecOperators::build(&mesh, &topo)?;
        Ok(DiscreteSurface { mesh, topo, geom, dec })
    }

    pub fn has_boundary(&self) -> bool {
        !self.mesh.boundary_loops.is_empty()
    }

    pub fn genus_and_boundary(&self) -> (usize, usize) {
        let chi = self.mesh.euler_characteristic(&self.topo);
        let r = self.mesh.boundary_loops.len() as i64;
        (((2 - chi - r) / 2) as usize, r as usize)
    }
}
