use std::collections::VecDeque;

use nalgebra::DMatrix;

use super::{DecOperators, DiscreteSurface};
use crate::ambient::Point;
use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, EnvelopeCholesky};
use crate::mesh::Topology;
use crate::par;

/// A discrete harmonic vector field.
///
/// `form` is the source of truth for integrals. When `dual` is set the field
/// is `⋆` of the field whose primal form is stored; its own dual-edge form is
/// `⋆₁ form`.
#[derive(Debug, Clone)]
pub struct HarmonicField {
    /// Per-vertex components in the stored geometry frame.
    pub values: Vec<[f64; 2]>,
    pub form: Vec<f64>,
    /// Whitney vector of each face, in the face plane in `ℝᵈ`.
    pub face_vectors: Vec<Point>,
    /// `‖div ξ‖_{L²}`.
    pub residual_div: f64,
    /// `‖div ⋆ξ‖_{L²}`.
    pub residual_codiv: f64,
    pub tangential: bool,
    pub dual: bool,
}

impl HarmonicField {
    /// Ambient vector at vertex `v`.
    pub fn vertex_vector(&self, s: &DiscreteSurface, v: usize) -> Point {
        s.geom.from_frame(v, self.values[v])
    }

    /// `L²` norm from the face vectors.
    pub fn l2_norm(&self, s: &DiscreteSurface) -> f64 {
        self.face_vectors
            .iter()
            .zip(&s.geom.face_area)
            .map(|(x, a)| a * x.norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    /// `L²` inner product from the face vectors.
    pub fn l2_dot(&self, other: &HarmonicField, s: &DiscreteSurface) -> f64 {
        self.face_vectors
            .iter()
            .zip(&other.face_vectors)
            .zip(&s.geom.face_area)
            .map(|((x, y), a)| a * x.dot(y))
            .sum()
    }

    /// Largest `|⟨ξ, η⟩| / max|ξ|` over boundary vertices.
    pub fn tangency_residual(&self, s: &DiscreteSurface) -> f64 {
        let scale = self.values.iter().map(|c| c[0].hypot(c[1])).fold(0.0, f64::max);
        let mut worst: f64 = 0.0;
        for (v, eta) in boundary_conormals(s) {
            let c = self.values[v];
            worst = worst.max((c[0] * eta[0] + c[1] * eta[1]).abs());
        }
        if scale > 0.0 {
            worst / scale
        } else {
            worst
        }
    }
}

fn edge_lookup(topo: &Topology) -> Vec<Vec<(usize, usize)>> {
    let mut adj = vec![Vec::new(); topo.vertex_neighbors.len()];
    for (e, &[a, b]) in topo.edges.iter().enumerate() {
        adj[a].push((b, e));
        adj[b].push((a, e));
    }
    for l in &mut adj {
        l.sort_unstable_by_key(|&(_, e)| e);
    }
    adj
}

/// Closed 1-forms representing a basis of `H¹(Σ)`, one per tree–cotree
/// generator edge. Each vanishes on the primal spanning tree.
pub(crate) fn cohomology_generators(topo: &Topology, n_faces: usize) -> Result<Vec<Vec<f64>>> {
    let nv = topo.vertex_neighbors.len();
    let ne = topo.n_edges();
    let adj = edge_lookup(topo);
    let mut in_tree = vec![false; ne];
    let mut seen = vec![false; nv];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(u) = queue.pop_front() {
        for &(w, e) in &adj[u] {
            if !seen[w] {
                seen[w] = true;
                in_tree[e] = true;
                queue.push_back(w);
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::InvalidMesh("mesh is disconnected".into()));
    }

    // Dual graph over faces plus a virtual node collecting the boundary.
    let has_boundary = topo.boundary_edge.iter().any(|&b| b);
    let inf = n_faces;
    let n_nodes = n_faces + usize::from(has_boundary);
    let mut dual_adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_nodes];
    for e in 0..ne {
        if in_tree[e] {
            continue;
        }
        let inc = &topo.edge_faces[e];
        let (f, g) = if inc.len() == 2 { (inc[0].0, inc[1].0) } else { (inc[0].0, inf) };
        dual_adj[f].push((g, e));
        dual_adj[g].push((f, e));
    }
    let root = if has_boundary { inf } else { 0 };
    let mut parent_edge = vec![usize::MAX; n_nodes];
    let mut reached = vec![false; n_nodes];
    let mut order = Vec::with_capacity(n_nodes);
    let mut in_cotree = vec![false; ne];
    reached[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for &(w, e) in &dual_adj[u] {
            if !reached[w] {
                reached[w] = true;
                parent_edge[w] = e;
                in_cotree[e] = true;
                queue.push_back(w);
            }
        }
    }
    if reached.iter().any(|r| !r) {
        return Err(Error::InvalidMesh("dual graph is disconnected".into()));
    }

    let generators: Vec<usize> = (0..ne).filter(|&e| !in_tree[e] && !in_cotree[e]).collect();
    let forms = par::map_slice(&generators, |&g| {
        let mut w = vec![0.0; ne];
        w[g] = 1.0;
        for &f in order.iter().rev() {
            if f == root {
                continue;
            }
            let pe = parent_edge[f];
            let fe = &topo.face_edges[f];
            let mut rest = 0.0;
            let mut sign = 0.0;
            for &(e, s) in fe {
                if e == pe {
                    sign = s;
                } else {
                    rest += s * w[e];
                }
            }
            w[pe] = -rest / sign;
        }
        w
    });
    Ok(forms)
}

/// `A` with the row and column of `pin` replaced by the identity.
fn pinned(a: &CsrMatrix, pin: usize) -> CsrMatrix {
    let mut trip = Vec::with_capacity(a.nnz());
    for i in 0..a.dim() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if i != pin && j != pin {
                trip.push((i, j, v));
            }
        }
    }
    trip.push((pin, pin, 1.0));
    CsrMatrix::from_triplets(a.dim(), &trip)
}

/// Outward-or-inward conormal of each boundary vertex in frame components.
pub(crate) fn boundary_conormals(s: &DiscreteSurface) -> Vec<(usize, [f64; 2])> {
    let mut out = Vec::new();
    for lp in &s.mesh.boundary_loops {
        let n = lp.len();
        for i in 0..n {
            let v = lp[i];
            let t = s.mesh.edge_vector(lp[(i + n - 1) % n], lp[(i + 1) % n]);
            let c = s.geom.to_frame(v, &t);
            let len = c[0].hypot(c[1]);
            if len > 0.0 {
                out.push((v, [-c[1] / len, c[0] / len]));
            }
        }
    }
    out
}

/// Whitney vector of a closed form on each face.
fn face_vectors(s: &DiscreteSurface, w: &[f64]) -> Vec<Point> {
    par::map_range(s.mesh.n_faces(), |f| {
        let t = s.mesh.faces[f];
        let fe = &s.topo.face_edges[f];
        // fe[2] is edge (t0, t1); fe[1] is edge (t2, t0).
        let w01 = fe[2].1 * w[fe[2].0];
        let w02 = -fe[1].1 * w[fe[1].0];
        let e1 = s.mesh.edge_vector(t[0], t[1]);
        let e2 = s.mesh.edge_vector(t[0], t[2]);
        let (g11, g12, g22) = (e1.dot(&e1), e1.dot(&e2), e2.dot(&e2));
        let det = g11 * g22 - g12 * g12;
        let a = (g22 * w01 - g12 * w02) / det;
        let b = (g11 * w02 - g12 * w01) / det;
        e1 * a + e2 * b
    })
}

/// Rotation by a quarter turn in the oriented plane of face `f`.
fn face_rotate(s: &DiscreteSurface, f: usize, x: &Point) -> Point {
    let t = s.mesh.faces[f];
    let e1 = s.mesh.edge_vector(t[0], t[1]);
    let e2 = s.mesh.edge_vector(t[0], t[2]);
    let u1 = e1.normalize();
    let u2 = (&e2 - &u1 * u1.dot(&e2)).normalize();
    &u2 * x.dot(&u1) - &u1 * x.dot(&u2)
}

fn vertex_values(s: &DiscreteSurface, fv: &[Point]) -> Vec<[f64; 2]> {
    par::map_range(s.mesh.n_vertices(), |v| {
        let mut acc = Point::zeros(s.mesh.d());
        let mut area = 0.0;
        for &f in &s.topo.vertex_faces[v] {
            acc += &fv[f] * s.geom.face_area[f];
            area += s.geom.face_area[f];
        }
        s.geom.to_frame(v, &(acc / area))
    })
}

fn div_residuals(dec: &DecOperators, w: &[f64]) -> (f64, f64) {
    let div = dec.codifferential_weak(w);
    let rd = div.iter().zip(&dec.star0).map(|(x, a)| x * x / a).sum::<f64>().sqrt();
    let curl = dec.d1(w);
    let rc = curl.iter().zip(&dec.star2).map(|(x, s)| x * x * s).sum::<f64>().sqrt();
    (rd, rc)
}

fn field_from_form(s: &DiscreteSurface, w: Vec<f64>, tangential: bool) -> HarmonicField {
    let fv = face_vectors(s, &w);
    let mut values = vertex_values(s, &fv);
    if tangential {
        for (v, eta) in boundary_conormals(s) {
            let c = values[v];
            let k = c[0] * eta[0] + c[1] * eta[1];
            values[v] = [c[0] - k * eta[0], c[1] - k * eta[1]];
        }
    }
    let (residual_div, residual_codiv) = div_residuals(&s.dec, &w);
    HarmonicField {
        values,
        form: w,
        face_vectors: fv,
        residual_div,
        residual_codiv,
        tangential,
        dual: false,
    }
}

/// Harmonic representatives of `H¹(Σ)`, `L²`-orthonormal.
///
/// On a closed surface these span `𝓗¹(Σ)` (dimension `2g`); with boundary
/// they are the fields tangent along `∂Σ` (dimension `2g + r − 1`).
pub fn harmonic_fields(s: &DiscreteSurface) -> Result<Vec<HarmonicField>> {
    let gens = cohomology_generators(&s.topo, s.mesh.n_faces())?;
    if gens.is_empty() {
        return Ok(Vec::new());
    }
    let k = s.dec.stiffness();
    let kp = pinned(&k, 0);
    let chol = EnvelopeCholesky::factor(&kp)?;
    let tangential = s.has_boundary();
    let harmonic: Vec<Vec<f64>> = par::map_slice(&gens, |w| {
        let mut rhs = s.dec.codifferential_weak(w);
        rhs[0] = 0.0;
        let mut alpha = chol.solve_refined(&kp, &rhs);
        let rhs2 = {
            let mut r = s.dec.codifferential_weak(&sub(w, &s.dec.d0(&alpha)));
            r[0] = 0.0;
            r
        };
        let corr = chol.solve(&rhs2);
        for (a, c) in alpha.iter_mut().zip(&corr) {
            *a += c;
        }
        sub(w, &s.dec.d0(&alpha))
    });

    // Orthonormalize in the ⋆₁ inner product, which equals the face L² product
    // of the Whitney fields.
    let q = harmonic.len();
    let gram = DMatrix::from_fn(q, q, |i, j| {
        harmonic[i].iter().zip(&harmonic[j]).zip(&s.dec.star1).map(|((a, b), w)| a * b * w).sum::<f64>()
    });
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::Singular("harmonic Gram matrix is not positive definite".into()))?;
    let linv = chol
        .l()
        .try_inverse()
        .ok_or_else(|| Error::Singular("harmonic Gram factor".into()))?;
    let ne = s.dec.n_edges();
    let fields = (0..q)
        .map(|i| {
            let mut w = vec![0.0; ne];
            for j in 0..=i {
                let c = linv[(i, j)];
                for (x, h) in w.iter_mut().zip(&harmonic[j]) {
                    *x += c * h;
                }
            }
            field_from_form(s, w, tangential)
        })
        .collect();
    Ok(fields)
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Basis of `𝓗¹(Σ)` on a closed mesh.
pub fn harmonic_basis(s: &DiscreteSurface) -> Result<Vec<HarmonicField>> {
    if s.has_boundary() {
        return Err(Error::InvalidParameter("harmonic_basis needs a closed mesh".into()));
    }
    harmonic_fields(s)
}

/// Basis of harmonic fields tangent along `∂Σ`.
pub fn tangential_harmonic_basis(s: &DiscreteSurface) -> Result<Vec<HarmonicField>> {
    if !s.has_boundary() {
        return Err(Error::InvalidParameter("tangential_harmonic_basis needs a mesh with boundary".into()));
    }
    harmonic_fields(s)
}

/// Pointwise quarter-turn rotation `⋆ξ`.
pub fn star_rotate(s: &DiscreteSurface, xi: &HarmonicField) -> HarmonicField {
    let sign = if xi.dual { -1.0 } else { 1.0 };
    let form = xi.form.iter().map(|w| sign * w).collect();
    HarmonicField {
        values: xi.values.iter().map(|c| [-c[1], c[0]]).collect(),
        form,
        face_vectors: (0..xi.face_vectors.len()).map(|f| face_rotate(s, f, &xi.face_vectors[f])).collect(),
        residual_div: xi.residual_codiv,
        residual_codiv: xi.residual_div,
        tangential: false,
        dual: !xi.dual,
    }
}

/// Coordinate functions `u_j = ⟨ξ, E_j⟩` at the vertices, one per ambient axis.
pub fn coordinate_functions(s: &DiscreteSurface, xi: &HarmonicField) -> Result<Vec<Vec<f64>>> {
    if !s.mesh.space.has_embedding() {
        return Err(Error::ClosedFormOnly(s.mesh.space.name().into()));
    }
    let d = s.mesh.d();
    let vecs: Vec<Point> = (0..s.mesh.n_vertices()).map(|v| xi.vertex_vector(s, v)).collect();
    Ok((0..d).map(|j| vecs.iter().map(|x| x[j]).collect()).collect())
}
