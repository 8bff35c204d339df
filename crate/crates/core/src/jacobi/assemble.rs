use serde::Serialize;

use crate::error::{Error, Result};
use crate::hodge::DiscreteSurface;
use crate::linalg::CsrMatrix;
use crate::par;

/// `Ric_M(N,N)` at the vertices by two independent routes.
#[derive(Debug, Clone, Serialize)]
pub struct RicNormal {
    /// From the ambient closed form.
    pub closed_form: Vec<f64>,
    /// `R_M/2 − |A|²/2 + H²/2 − K_Σ` with the angle-defect `K_Σ` where available.
    pub gauss: Vec<f64>,
    /// Relative `L²` distance between the two, scaled by the size of the terms
    /// (at least the curvature of a round sphere of equal area).
    pub discrepancy: f64,
}

pub fn ric_normal(s: &DiscreteSurface) -> Result<RicNormal> {
    let space = &s.mesh.space;
    if !space.has_embedding() {
        return Err(Error::ClosedFormOnly(space.name().into()));
    }
    let g = &s.geom;
    let r = space.scalar_curvature();
    let closed_form = par::try_map_range(s.mesh.n_vertices(), |v| space.ricci(&s.mesh.positions[v], &g.normal[v]))?;
    let mut gauss = Vec::with_capacity(closed_form.len());
    let (mut num, mut den) = (0.0, 0.0);
    for v in 0..closed_form.len() {
        let k = g.gauss_intrinsic[v].unwrap_or(g.gauss_curvature[v]);
        let (a2, h) = (g.sff_norm_sq[v], g.mean_curvature[v]);
        let val = 0.5 * r - 0.5 * a2 + 0.5 * h * h - k;
        let w = g.vertex_area[v];
        num += w * (val - closed_form[v]).powi(2);
        den += w * (0.5 * r.abs() + 0.5 * a2 + 0.5 * h * h + k.abs()).powi(2);
        gauss.push(val);
    }
    // Floor: curvature of the round sphere with the same area.
    let area = g.total_area();
    let floor = area * (4.0 * std::f64::consts::PI / area).powi(2);
    let discrepancy = (num / den.max(floor)).sqrt();
    Ok(RicNormal { closed_form, gauss, discrepancy })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiOptions {
    /// Diagonal (barycentric) mass and potential instead of the consistent forms.
    pub lumped: bool,
    /// Constant added to the potential; a deliberate perturbation for negative tests.
    pub potential_offset: f64,
}

impl Default for JacobiOptions {
    fn default() -> Self {
        JacobiOptions { lumped: false, potential_offset: 0.0 }
    }
}

/// Bilinear forms of the second variation on piecewise-linear functions.
#[derive(Debug, Clone)]
pub struct JacobiAssembly {
    pub mass: CsrMatrix,
    pub stiffness: CsrMatrix,
    pub potential: CsrMatrix,
    pub robin: CsrMatrix,
    /// `c` with `cᵀu = ∫_Σ u`.
    pub constraint: Vec<f64>,
    /// `Ric_M(N,N) + |A_Σ|²` at the vertices.
    pub potential_values: Vec<f64>,
    /// Boundary edges carrying the Robin term (both ends on `∂M`).
    pub robin_edges: usize,
    /// Boundary edges of `Σ` not lying on `∂M`; natural Neumann there.
    pub free_edges: usize,
    /// Longest edge.
    pub mesh_size: f64,
    pub area: f64,
    pub options: JacobiOptions,
}

impl JacobiAssembly {
    /// `K − V − B`.
    pub fn operator(&self) -> CsrMatrix {
        CsrMatrix::linear_combination(&[(1.0, &self.stiffness), (-1.0, &self.potential), (-1.0, &self.robin)])
    }

    pub fn q(&self, u: &[f64], w: &[f64]) -> f64 {
        self.stiffness.bilinear(u, w) - self.potential.bilinear(u, w) - self.robin.bilinear(u, w)
    }

    pub fn integral(&self, u: &[f64]) -> f64 {
        crate::linalg::dot(&self.constraint, u)
    }

    pub fn n(&self) -> usize {
        self.mass.dim()
    }
}

fn on_boundary(s: &DiscreteSurface, v: usize) -> bool {
    s.mesh.space.on_boundary(&s.mesh.positions[v], 1e-8)
}

pub fn assemble(s: &DiscreteSurface, opts: JacobiOptions) -> Result<JacobiAssembly> {
    let space = &s.mesh.space;
    if s.has_boundary() && !space.has_boundary() {
        return Err(Error::MissingBoundaryForm(space.name().into()));
    }
    let n = s.mesh.n_vertices();
    let g = &s.geom;
    let ric = par::try_map_range(n, |v| space.ricci(&s.mesh.positions[v], &g.normal[v]))?;
    let pot: Vec<f64> = (0..n).map(|v| ric[v] + g.sff_norm_sq[v] + opts.potential_offset).collect();

    let mut mt = Vec::with_capacity(9 * s.mesh.n_faces());
    let mut vt = Vec::with_capacity(9 * s.mesh.n_faces());
    for (f, t) in s.mesh.faces.iter().enumerate() {
        let a = g.face_area[f];
        if opts.lumped {
            for &i in t {
                mt.push((i, i, a / 3.0));
                vt.push((i, i, a / 3.0 * pot[i]));
            }
            continue;
        }
        let psum: f64 = t.iter().map(|&i| pot[i]).sum();
        for (ii, &i) in t.iter().enumerate() {
            for (jj, &j) in t.iter().enumerate() {
                if ii == jj {
                    mt.push((i, i, a / 6.0));
                    // ∫ p φᵢ² = A (3pᵢ + Σ_{k≠i} p_k) / 30
                    vt.push((i, i, a * (2.0 * pot[i] + psum) / 30.0));
                } else {
                    mt.push((i, j, a / 12.0));
                    // ∫ p φᵢ φⱼ = A (2pᵢ + 2pⱼ + p_k) / 60
                    vt.push((i, j, a * (pot[i] + pot[j] + psum) / 60.0));
                }
            }
        }
    }

    let mut bt = Vec::new();
    let (mut robin_edges, mut free_edges) = (0, 0);
    for (e, &[a, b]) in s.topo.edges.iter().enumerate() {
        if !s.topo.boundary_edge[e] {
            continue;
        }
        if !(on_boundary(s, a) && on_boundary(s, b)) {
            free_edges += 1;
            continue;
        }
        let h = |v: usize| {
            space
                .boundary_sff(&s.mesh.positions[v], &g.normal[v], &g.normal[v])
                .ok_or_else(|| Error::MissingBoundaryForm(space.name().into()))
        };
        let (ha, hb) = (h(a)?, h(b)?);
        let len = s.mesh.edge_vector(a, b).norm();
        robin_edges += 1;
        if opts.lumped {
            bt.push((a, a, len / 2.0 * ha));
            bt.push((b, b, len / 2.0 * hb));
        } else {
            bt.push((a, a, len * (3.0 * ha + hb) / 12.0));
            bt.push((b, b, len * (ha + 3.0 * hb) / 12.0));
            bt.push((a, b, len * (ha + hb) / 12.0));
            bt.push((b, a, len * (ha + hb) / 12.0));
        }
    }

    let mass = CsrMatrix::from_triplets(n, &mt);
    let constraint = mass.matvec(&vec![1.0; n]);
    Ok(JacobiAssembly {
        stiffness: s.dec.stiffness(),
        potential: CsrMatrix::from_triplets(n, &vt),
        robin: CsrMatrix::from_triplets(n, &bt),
        mass,
        constraint,
        potential_values: pot,
        robin_edges,
        free_edges,
        mesh_size: s.mesh.max_edge_length(&s.topo),
        area: g.total_area(),
        options: opts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::catalog_space;
    use crate::surface::generate_surface;
    use serde_json::json;

    fn surf(space: &str, sp: serde_json::Value, fam: &str, fp: serde_json::Value, res: usize) -> DiscreteSurface {
        let s = catalog_space(space, &sp).unwrap();
        DiscreteSurface::new(generate_surface(&s, fam, &fp, res).unwrap()).unwrap()
    }

    #[test]
    fn forms_are_symmetric_and_mass_integrates_area() {
        let s = surf("s3", json!({}), "clifford", json!({}), 12);
        let a = assemble(&s, JacobiOptions::default()).unwrap();
        for m in [&a.mass, &a.stiffness, &a.potential, &a.robin] {
            assert!(m.relative_asymmetry() < 1e-14);
        }
        let area: f64 = s.geom.face_area.iter().sum();
        assert!((a.integral(&vec![1.0; a.n()]) - area).abs() < 1e-12 * area);
        let ones = vec![1.0; a.n()];
        // ∫ p against the consistent form equals ∫ p for linear p.
        let direct: f64 = s
            .mesh
            .faces
            .iter()
            .enumerate()
            .map(|(f, t)| s.geom.face_area[f] * t.iter().map(|&i| a.potential_values[i]).sum::<f64>() / 3.0)
            .sum();
        assert!((a.potential.bilinear(&ones, &ones) - direct).abs() < 1e-12 * direct.abs());
    }

    #[test]
    fn slice_torus_has_pure_dirichlet_form() {
        let s = surf("t2xr-rect", json!({"beta": 1.0}), "slice-torus", json!({}), 8);
        let a = assemble(&s, JacobiOptions::default()).unwrap();
        assert!(a.potential_values.iter().all(|p| p.abs() < 1e-14));
        assert_eq!(a.robin.nnz(), 0);
    }

    #[test]
    fn ricci_two_ways_on_slice_sphere() {
        let s = surf("s2xr", json!({"r": 1.0}), "slice-sphere", json!({}), 32);
        let r = ric_normal(&s).unwrap();
        assert!(r.closed_form.iter().all(|x| x.abs() < 1e-12));
        assert!(r.discrepancy < 5e-2);
    }

    #[test]
    fn boundary_mesh_needs_a_boundary_form() {
        let s = surf("r3", json!({}), "annulus", json!({}), 12);
        assert!(matches!(assemble(&s, JacobiOptions::default()), Err(Error::MissingBoundaryForm(_))));
    }
}
