use serde::Serialize;

use crate::ambient::Point;
use crate::error::Result;
use crate::linalg::CsrMatrix;
use crate::mesh::{ImmersedMesh, Topology};
use crate::par;

/// Incidence maps and diagonal Hodge stars of a triangulated surface.
#[derive(Debug, Clone)]
pub struct DecOperators {
    pub n_vertices: usize,
    pub edges: Vec<[usize; 2]>,
    /// Edges of each face with the traversal sign (see [`Topology::face_edges`]).
    pub face_edges: Vec<[(usize, f64); 3]>,
    pub star0: Vec<f64>,
    /// `(cot α + cot β) / 2` over the opposite angles.
    pub star1: Vec<f64>,
    pub star2: Vec<f64>,
    pub boundary_edge: Vec<bool>,
    pub negative_cotan: usize,
}

/// Summary of operator quality, reported alongside results.
#[derive(Debug, Clone, Serialize)]
pub struct DecSummary {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub negative_cotan_weights: usize,
    pub min_cotan_weight: f64,
}

fn cot(u: &Point, v: &Point) -> f64 {
    let c = u.dot(v);
    let s = (u.norm_squared() * v.norm_squared() - c * c).max(0.0).sqrt();
    c / s
}

impl DecOperators {
    pub fn build(mesh: &ImmersedMesh, topo: &Topology) -> Result<Self> {
        mesh.check_aspect(1e6)?;
        let face_area: Vec<f64> = par::map_range(mesh.n_faces(), |f| mesh.face_area(f));
        let face_cots: Vec<[f64; 3]> = par::map_range(mesh.n_faces(), |f| {
            let t = mesh.faces[f];
            let mut c = [0.0; 3];
            for k in 0..3 {
                let o = t[k];
                let u = mesh.edge_vector(o, t[(k + 1) % 3]);
                let v = mesh.edge_vector(o, t[(k + 2) % 3]);
                c[k] = cot(&u, &v);
            }
            c
        });
        let mut star1 = vec![0.0; topo.n_edges()];
        let mut star0 = vec![0.0; mesh.n_vertices()];
        for (f, fe) in topo.face_edges.iter().enumerate() {
            for k in 0..3 {
                star1[fe[k].0] += 0.5 * face_cots[f][k];
                star0[mesh.faces[f][k]] += face_area[f] / 3.0;
            }
        }
        let negative_cotan = star1.iter().filter(|&&w| w < 0.0).count();
        Ok(DecOperators {
            n_vertices: mesh.n_vertices(),
            edges: topo.edges.clone(),
            face_edges: topo.face_edges.clone(),
            star0,
            star1,
            star2: face_area.iter().map(|a| 1.0 / a).collect(),
            boundary_edge: topo.boundary_edge.clone(),
            negative_cotan,
        })
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_faces(&self) -> usize {
        self.face_edges.len()
    }

    pub fn summary(&self) -> DecSummary {
        DecSummary {
            vertices: self.n_vertices,
            edges: self.n_edges(),
            faces: self.n_faces(),
            negative_cotan_weights: self.negative_cotan,
            min_cotan_weight: self.star1.iter().cloned().fold(f64::INFINITY, f64::min),
        }
    }

    pub fn d0(&self, f: &[f64]) -> Vec<f64> {
        self.edges.iter().map(|&[a, b]| f[b] - f[a]).collect()
    }

    pub fn d0t(&self, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_vertices];
        for (e, &[a, b]) in self.edges.iter().enumerate() {
            out[a] -= w[e];
            out[b] += w[e];
        }
        out
    }

    pub fn d1(&self, w: &[f64]) -> Vec<f64> {
        self.face_edges.iter().map(|fe| fe.iter().map(|&(e, s)| s * w[e]).sum()).collect()
    }

    pub fn d1t(&self, s: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_edges()];
        for (f, fe) in self.face_edges.iter().enumerate() {
            for &(e, sg) in fe {
                out[e] += sg * s[f];
            }
        }
        out
    }

    /// `d₀ᵀ ⋆₁ w`: integrated divergence of the vector field dual to `w`.
    pub fn codifferential_weak(&self, w: &[f64]) -> Vec<f64> {
        let sw: Vec<f64> = w.iter().zip(&self.star1).map(|(x, s)| x * s).collect();
        self.d0t(&sw)
    }

    /// The cotan stiffness matrix `d₀ᵀ ⋆₁ d₀`.
    pub fn stiffness(&self) -> CsrMatrix {
        let mut trip = Vec::with_capacity(4 * self.n_edges());
        for (e, &[a, b]) in self.edges.iter().enumerate() {
            let w = self.star1[e];
            trip.push((a, a, w));
            trip.push((b, b, w));
            trip.push((a, b, -w));
            trip.push((b, a, -w));
        }
        CsrMatrix::from_triplets(self.n_vertices, &trip)
    }

    /// `Δ⁽⁰⁾ f = ⋆₀⁻¹ d₀ᵀ ⋆₁ d₀ f` (positive semidefinite sign).
    pub fn laplacian0(&self, f: &[f64]) -> Vec<f64> {
        let df = self.d0(f);
        self.codifferential_weak(&df).iter().zip(&self.star0).map(|(x, a)| x / a).collect()
    }

    /// `‖w‖²` in the `⋆₁` inner product.
    pub fn form_norm_sq(&self, w: &[f64]) -> f64 {
        w.iter().zip(&self.star1).map(|(x, s)| s * x * x).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::catalog_space;
    use crate::surface::generate_surface;
    use serde_json::json;

    #[test]
    fn d1_d0_vanishes_and_constants_are_harmonic() {
        let s = catalog_space("r3", &json!({})).unwrap();
        let m = generate_surface(&s, "sphere", &json!({}), 16).unwrap();
        let t = m.topology().unwrap();
        let dec = DecOperators::build(&m, &t).unwrap();
        let f: Vec<f64> = (0..m.n_vertices()).map(|i| ((i * 7919) % 1009) as f64).collect();
        assert!(dec.d1(&dec.d0(&f)).iter().all(|&x| x == 0.0));
        let ones = vec![1.0; m.n_vertices()];
        assert!(dec.laplacian0(&ones).iter().all(|x| x.abs() < 1e-12));
        let total: f64 = dec.star0.iter().sum();
        assert!((total - m.faces.iter().enumerate().map(|(i, _)| m.face_area(i)).sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn stiffness_matches_weak_laplacian() {
        let s = catalog_space("s3", &json!({})).unwrap();
        let m = generate_surface(&s, "clifford", &json!({}), 8).unwrap();
        let t = m.topology().unwrap();
        let dec = DecOperators::build(&m, &t).unwrap();
        let f: Vec<f64> = (0..m.n_vertices()).map(|i| (i as f64).cos()).collect();
        let a = dec.stiffness().matvec(&f);
        let b = dec.codifferential_weak(&dec.d0(&f));
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
