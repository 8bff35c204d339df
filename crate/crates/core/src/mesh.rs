//! Triangulated surfaces immersed in a catalog space.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::ambient::{AmbientSpace, Point};
use crate::error::{Error, Result};

/// Generator identifier and parameters, recorded for reproducibility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyTag {
    pub family: String,
    pub params: serde_json::Value,
    pub resolution: usize,
    pub seed: u64,
}

/// A triangulated, consistently oriented surface in `M ⊂ ℝᵈ`.
#[derive(Debug, Clone)]
pub struct ImmersedMesh {
    pub space: AmbientSpace,
    /// Surface parameters of each vertex (generator-specific, informational).
    pub surface_params: Vec<[f64; 2]>,
    /// Chart coordinates in `M`.
    pub chart: Vec<[f64; 3]>,
    /// Ambient positions in `ℝᵈ`.
    pub positions: Vec<Point>,
    /// Counter-clockwise triangles.
    pub faces: Vec<[usize; 3]>,
    pub boundary_loops: Vec<Vec<usize>>,
    pub tag: FamilyTag,
}

/// Edge and incidence structure derived from the face list.
#[derive(Debug, Clone)]
pub struct Topology {
    /// Edges `(a, b)` with `a < b`, sorted lexicographically.
    pub edges: Vec<[usize; 2]>,
    /// For each face, its edges opposite vertices 0, 1, 2 with the sign of the
    /// face traversal relative to the stored edge direction.
    pub face_edges: Vec<[(usize, f64); 3]>,
    /// Faces incident to each edge with the traversal sign.
    pub edge_faces: Vec<Vec<(usize, f64)>>,
    pub vertex_faces: Vec<Vec<usize>>,
    pub vertex_neighbors: Vec<Vec<usize>>,
    pub boundary_edge: Vec<bool>,
    pub boundary_vertex: Vec<bool>,
}

impl Topology {
    pub fn build(n_vertices: usize, faces: &[[usize; 3]]) -> Result<Self> {
        let mut index: HashMap<[usize; 2], usize> = HashMap::new();
        let mut keys: Vec<[usize; 2]> = Vec::new();
        for f in faces {
            for k in 0..3 {
                let (a, b) = (f[(k + 1) % 3], f[(k + 2) % 3]);
                let key = [a.min(b), a.max(b)];
                if !index.contains_key(&key) {
                    index.insert(key, 0);
                    keys.push(key);
                }
            }
        }
        keys.sort_unstable();
        for (i, k) in keys.iter().enumerate() {
            index.insert(*k, i);
        }
        let mut face_edges = Vec::with_capacity(faces.len());
        let mut edge_faces: Vec<Vec<(usize, f64)>> = vec![Vec::new(); keys.len()];
        let mut vertex_faces = vec![Vec::new(); n_vertices];
        for (fi, f) in faces.iter().enumerate() {
            let mut fe = [(0, 0.0); 3];
            for k in 0..3 {
                let (a, b) = (f[(k + 1) % 3], f[(k + 2) % 3]);
                let e = index[&[a.min(b), a.max(b)]];
                let s = if a < b { 1.0 } else { -1.0 };
                fe[k] = (e, s);
                edge_faces[e].push((fi, s));
                vertex_faces[f[k]].push(fi);
            }
            face_edges.push(fe);
        }
        for (e, inc) in edge_faces.iter().enumerate() {
            match inc.len() {
                1 => {}
                2 if inc[0].1 != inc[1].1 => {}
                2 => {
                    return Err(Error::NonManifold(format!(
                        "edge {:?} has inconsistent orientation",
                        keys[e]
                    )))
                }
                k => {
                    return Err(Error::NonManifold(format!("edge {:?} is shared by {k} faces", keys[e])))
                }
            }
        }
        let mut vertex_neighbors = vec![Vec::new(); n_vertices];
        for &[a, b] in &keys {
            vertex_neighbors[a].push(b);
            vertex_neighbors[b].push(a);
        }
        for nb in &mut vertex_neighbors {
            nb.sort_unstable();
        }
        let boundary_edge: Vec<bool> = edge_faces.iter().map(|f| f.len() == 1).collect();
        let mut boundary_vertex = vec![false; n_vertices];
        for (e, &b) in boundary_edge.iter().enumerate() {
            if b {
                boundary_vertex[keys[e][0]] = true;
                boundary_vertex[keys[e][1]] = true;
            }
        }
        Ok(Self {
            edges: keys,
            face_edges,
            edge_faces,
            vertex_faces,
            vertex_neighbors,
            boundary_edge,
            boundary_vertex,
        })
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Boundary loops traced along the face orientation.
    pub fn trace_boundary_loops(&self, faces: &[[usize; 3]]) -> Result<Vec<Vec<usize>>> {
        let mut next: HashMap<usize, usize> = HashMap::new();
        for (e, &b) in self.boundary_edge.iter().enumerate() {
            if !b {
                continue;
            }
            let (f, _) = self.edge_faces[e][0];
            let face = faces[f];
            let k = self.face_edges[f].iter().position(|&(ei, _)| ei == e).expect("edge in face");
            let (a, b2) = (face[(k + 1) % 3], face[(k + 2) % 3]);
            if next.insert(a, b2).is_some() {
                return Err(Error::NonManifold(format!("boundary pinches at vertex {a}")));
            }
        }
        let mut starts: Vec<usize> = next.keys().copied().collect();
        starts.sort_unstable();
        let mut seen = std::collections::HashSet::new();
        let mut loops = Vec::new();
        for s in starts {
            if seen.contains(&s) {
                continue;
            }
            let mut lp = vec![s];
            seen.insert(s);
            let mut v = next[&s];
            while v != s {
                if !seen.insert(v) {
                    return Err(Error::NonManifold("boundary loops intersect".into()));
                }
                lp.push(v);
                v = *next
                    .get(&v)
                    .ok_or_else(|| Error::NonManifold("open boundary chain".into()))?;
            }
            loops.push(lp);
        }
        Ok(loops)
    }

    /// Vertices within `k` edge hops of `v`, excluding `v`, in BFS order.
    pub fn k_ring(&self, v: usize, k: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut seen = std::collections::HashSet::new();
        seen.insert(v);
        let mut frontier = vec![v];
        for _ in 0..k {
            let mut nf = Vec::new();
            for &u in &frontier {
                for &w in &self.vertex_neighbors[u] {
                    if seen.insert(w) {
                        nf.push(w);
                        out.push(w);
                    }
                }
            }
            frontier = nf;
        }
        out
    }
}

/// Canonical form of a loop: rotated to start at its smallest index.
fn canonical_loop(lp: &[usize]) -> Vec<usize> {
    let k = lp.iter().enumerate().min_by_key(|(_, &v)| v).map(|(i, _)| i).unwrap_or(0);
    lp[k..].iter().chain(lp[..k].iter()).copied().collect()
}

impl ImmersedMesh {
    pub fn n_vertices(&self) -> usize {
        self.positions.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn d(&self) -> usize {
        self.space.d()
    }

    pub fn topology(&self) -> Result<Topology> {
        Topology::build(self.n_vertices(), &self.faces)
    }

    /// Recomputes `boundary_loops` from the faces.
    pub fn refresh_boundary(&mut self) -> Result<()> {
        let t = self.topology()?;
        self.boundary_loops = t.trace_boundary_loops(&self.faces)?;
        Ok(())
    }

    pub fn euler_characteristic(&self, topo: &Topology) -> i64 {
        self.n_vertices() as i64 - topo.n_edges() as i64 + self.n_faces() as i64
    }

    /// Checks every structural invariant of the mesh.
    pub fn validate(&self) -> Result<Topology> {
        let n = self.n_vertices();
        if self.surface_params.len() != n || self.chart.len() != n {
            return Err(Error::InvalidMesh("per-vertex arrays have different lengths".into()));
        }
        if self.faces.is_empty() {
            return Err(Error::InvalidMesh("no faces".into()));
        }
        let d = self.d();
        for (i, p) in self.positions.iter().enumerate() {
            if p.len() != d || p.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidMesh(format!("vertex {i} has bad coordinates")));
            }
        }
        for (fi, f) in self.faces.iter().enumerate() {
            if f.iter().any(|&v| v >= n) || f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::InvalidMesh(format!("face {fi} has bad indices {f:?}")));
            }
        }
        let topo = self.topology()?;
        if let Some(v) = topo.vertex_faces.iter().position(|f| f.is_empty()) {
            return Err(Error::InvalidMesh(format!("vertex {v} is not used by any face")));
        }
        let traced = topo.trace_boundary_loops(&self.faces)?;
        let mut a: Vec<Vec<usize>> = traced.iter().map(|l| canonical_loop(l)).collect();
        let mut b: Vec<Vec<usize>> = self.boundary_loops.iter().map(|l| canonical_loop(l)).collect();
        a.sort();
        b.sort();
        if a != b {
            return Err(Error::InvalidMesh("boundary loops do not match boundary edges".into()));
        }
        if self.space.has_embedding() {
            for (i, p) in self.positions.iter().enumerate() {
                let def = self.space.membership_defect(p)?;
                if def > 1e-10 {
                    return Err(Error::InvalidMesh(format!(
                        "vertex {i} is off the ambient space by {def:.3e}"
                    )));
                }
            }
        }
        self.genus_from(&topo)?;
        Ok(topo)
    }

    fn genus_from(&self, topo: &Topology) -> Result<(usize, usize)> {
        let chi = self.euler_characteristic(topo);
        let r = self.boundary_loops.len() as i64;
        let twice_g = 2 - chi - r;
        if twice_g < 0 || twice_g % 2 != 0 {
            return Err(Error::NonManifold(format!(
                "Euler characteristic {chi} with {r} boundary loops gives no integer genus"
            )));
        }
        Ok(((twice_g / 2) as usize, r as usize))
    }

    /// `(genus, number of boundary components)`.
    pub fn genus_and_boundary(&self) -> Result<(usize, usize)> {
        let topo = self.topology()?;
        let traced = topo.trace_boundary_loops(&self.faces)?;
        if traced.len() != self.boundary_loops.len() {
            return Err(Error::InvalidMesh("stored boundary loops are stale".into()));
        }
        self.genus_from(&topo)
    }

    /// Removes every face incident to `v` (and `v` itself), opening a new boundary loop.
    pub fn punch_hole(&self, v: usize) -> Result<ImmersedMesh> {
        let topo = self.topology()?;
        if topo.boundary_vertex[v] {
            return Err(Error::InvalidParameter(format!("vertex {v} lies on the boundary")));
        }
        if topo.vertex_neighbors[v].iter().any(|&w| topo.boundary_vertex[w]) {
            return Err(Error::InvalidParameter(format!("vertex {v} is adjacent to the boundary")));
        }
        let keep = |i: usize| if i < v { i } else { i - 1 };
        let faces: Vec<[usize; 3]> = self
            .faces
            .iter()
            .filter(|f| !f.contains(&v))
            .map(|f| f.map(keep))
            .collect();
        let mut surface_params = self.surface_params.clone();
        surface_params.remove(v);
        let mut chart = self.chart.clone();
        chart.remove(v);
        let mut positions = self.positions.clone();
        positions.remove(v);
        let mut m = ImmersedMesh {
            space: self.space.clone(),
            surface_params,
            chart,
            positions,
            faces,
            boundary_loops: Vec::new(),
            tag: self.tag.clone(),
        };
        if let serde_json::Value::Object(ref mut map) = m.tag.params {
            let holes = map.entry("punched").or_insert_with(|| serde_json::json!([]));
            if let serde_json::Value::Array(a) = holes {
                a.push(serde_json::json!(v));
            }
        }
        m.refresh_boundary()?;
        Ok(m)
    }

    /// Ambient edge vector `p_b - p_a`.
    pub fn edge_vector(&self, a: usize, b: usize) -> Point {
        &self.positions[b] - &self.positions[a]
    }

    /// Area of face `f` as a flat triangle in `ℝᵈ`.
    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.faces[f];
        triangle_area(&self.edge_vector(a, b), &self.edge_vector(a, c))
    }

    /// Mean edge length.
    pub fn mean_edge_length(&self, topo: &Topology) -> f64 {
        let s: f64 = topo.edges.iter().map(|&[a, b]| self.edge_vector(a, b).norm()).sum();
        s / topo.n_edges().max(1) as f64
    }

    pub fn max_edge_length(&self, topo: &Topology) -> f64 {
        topo.edges
            .iter()
            .map(|&[a, b]| self.edge_vector(a, b).norm())
            .fold(0.0, f64::max)
    }

    /// Rejects triangles whose aspect ratio (longest edge / inradius-type height) exceeds `limit`.
    pub fn check_aspect(&self, limit: f64) -> Result<()> {
        for f in 0..self.n_faces() {
            let [a, b, c] = self.faces[f];
            let l = [
                self.edge_vector(b, c).norm(),
                self.edge_vector(c, a).norm(),
                self.edge_vector(a, b).norm(),
            ];
            let lmax = l.iter().cloned().fold(0.0, f64::max);
            let area = self.face_area(f);
            let aspect = if area > 0.0 { lmax * lmax / (2.0 * area) } else { f64::INFINITY };
            if !(aspect <= limit) {
                return Err(Error::DegenerateTriangle { face: f, aspect });
            }
        }
        Ok(())
    }
}

/// Area of the triangle spanned by `u`, `v` in any dimension.
pub fn triangle_area(u: &Point, v: &Point) -> f64 {
    let uu = u.norm_squared();
    let vv = v.norm_squared();
    let uv = u.dot(v);
    0.5 * (uu * vv - uv * uv).max(0.0).sqrt()
}
