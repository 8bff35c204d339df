//! Per-vertex normals and second fundamental forms by local polynomial fits.
//!
//! Neighbours are projected onto `T_pM`, which gives coordinates whose metric
//! agrees with the Euclidean one to second order at `p`. In those coordinates
//! the surface is a height graph over its tangent plane; the Hessian of the
//! fitted height is the shape operator of `Σ` in `M`.

use nalgebra::{DMatrix, DVector, Matrix2, Vector3};
use serde::Serialize;

use crate::ambient::Point;
use crate::error::{Error, Result};
use crate::mesh::{ImmersedMesh, Topology};
use crate::par;

/// Discrete geometry of an immersed mesh.
#[derive(Debug, Clone)]
pub struct SurfaceGeometry {
    /// Unit normal `N` in `ℝᵈ`, tangent to `M`.
    pub normal: Vec<Point>,
    /// Orthonormal tangent frame, positively oriented for the face orientation.
    pub frame: Vec<[Point; 2]>,
    /// Shape operator with respect to `N` in the stored frame.
    pub shape: Vec<Matrix2<f64>>,
    /// `H = tr S`.
    pub mean_curvature: Vec<f64>,
    /// `|A|² = tr S²`.
    pub sff_norm_sq: Vec<f64>,
    /// `K_Σ = det S + sec_M(TΣ)` by the Gauss equation.
    pub gauss_curvature: Vec<f64>,
    /// Angle-defect curvature, smoothed over one ring (interior vertices only).
    /// Independent of the fit; converges in `L²` but not pointwise at
    /// irregular vertices.
    pub gauss_intrinsic: Vec<Option<f64>>,
    pub face_area: Vec<f64>,
    /// Barycentric vertex areas.
    pub vertex_area: Vec<f64>,
    /// `+1` if `N` agrees with the face orientation, `-1` otherwise.
    pub orientation: f64,
    pub orientation_rule: String,
}

#[derive(Debug, Clone, Copy, Serialize, serde::Deserialize)]
pub struct Stats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl SurfaceGeometry {
    /// Components of an ambient vector in the frame at `v`.
    pub fn to_frame(&self, v: usize, x: &Point) -> [f64; 2] {
        [self.frame[v][0].dot(x), self.frame[v][1].dot(x)]
    }

    pub fn from_frame(&self, v: usize, c: [f64; 2]) -> Point {
        &self.frame[v][0] * c[0] + &self.frame[v][1] * c[1]
    }

    /// `A_Σ(X,Y)` at vertex `v` for frame components.
    pub fn sff(&self, v: usize, x: [f64; 2], y: [f64; 2]) -> f64 {
        let s = &self.shape[v];
        x[0] * (s[(0, 0)] * y[0] + s[(0, 1)] * y[1]) + x[1] * (s[(1, 0)] * y[0] + s[(1, 1)] * y[1])
    }

    pub fn total_area(&self) -> f64 {
        self.face_area.iter().sum()
    }

    /// Area-weighted statistics of `H`.
    pub fn h_stats(&self) -> Stats {
        let total = self.vertex_area.iter().sum::<f64>();
        let mean = self.mean_curvature.iter().zip(&self.vertex_area).map(|(h, a)| h * a).sum::<f64>() / total;
        Stats {
            min: self.mean_curvature.iter().cloned().fold(f64::INFINITY, f64::min),
            max: self.mean_curvature.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            mean,
        }
    }
}

struct VertexFit {
    normal: Point,
    frame: [Point; 2],
    shape: Matrix2<f64>,
    sec_m: f64,
}

/// Computes normals, frames and curvature of `mesh`.
pub fn compute_geometry(mesh: &ImmersedMesh) -> Result<SurfaceGeometry> {
    let topo = mesh.topology()?;
    compute_geometry_with(mesh, &topo)
}

pub fn compute_geometry_with(mesh: &ImmersedMesh, topo: &Topology) -> Result<SurfaceGeometry> {
    if !mesh.space.has_embedding() {
        return Err(Error::ClosedFormOnly(mesh.space.name().into()));
    }
    mesh.check_aspect(1e6)?;
    let face_area: Vec<f64> = par::map_range(mesh.n_faces(), |f| mesh.face_area(f));
    let mut vertex_area = vec![0.0; mesh.n_vertices()];
    for (f, face) in mesh.faces.iter().enumerate() {
        for &v in face {
            vertex_area[v] += face_area[f] / 3.0;
        }
    }
    let fits = par::try_map_range(mesh.n_vertices(), |v| fit_vertex(mesh, topo, v))?;
    let gauss_intrinsic = smoothed_angle_defect(mesh, topo, &face_area, &vertex_area);

    let mut normal = Vec::with_capacity(fits.len());
    let mut frame = Vec::with_capacity(fits.len());
    let mut shape = Vec::with_capacity(fits.len());
    let mut sec = Vec::with_capacity(fits.len());
    for f in fits {
        normal.push(f.normal);
        frame.push(f.frame);
        shape.push(f.shape);
        sec.push(f.sec_m);
    }
    let total: f64 = vertex_area.iter().sum();
    let mean_h: f64 = shape.iter().zip(&vertex_area).map(|(s, a)| s.trace() * a).sum::<f64>() / total;
    let rms_a = (shape.iter().zip(&vertex_area).map(|(s, a)| (s * s).trace() * a).sum::<f64>() / total).sqrt();
    let (orientation, orientation_rule) = if mean_h.abs() <= 1e-3 * rms_a || mean_h == 0.0 {
        (1.0, "minimal: normal follows the face orientation".to_string())
    } else if mean_h > 0.0 {
        (1.0, "mean curvature positive with the face orientation".to_string())
    } else {
        (-1.0, "normal reversed so that mean curvature is positive".to_string())
    };
    for (n, s) in normal.iter_mut().zip(shape.iter_mut()) {
        *n *= orientation;
        *s *= orientation;
    }
    let mean_curvature: Vec<f64> = shape.iter().map(|s| s.trace()).collect();
    let sff_norm_sq: Vec<f64> = shape.iter().map(|s| (s * s).trace()).collect();
    let gauss_curvature: Vec<f64> = shape.iter().zip(&sec).map(|(s, k)| s.determinant() + k).collect();
    Ok(SurfaceGeometry {
        normal,
        frame,
        shape,
        mean_curvature,
        sff_norm_sq,
        gauss_curvature,
        gauss_intrinsic,
        face_area,
        vertex_area,
        orientation,
        orientation_rule,
    })
}

fn angle_between(u: &Point, v: &Point) -> f64 {
    let c = u.dot(v);
    let s = (u.norm_squared() * v.norm_squared() - c * c).max(0.0).sqrt();
    s.atan2(c)
}

fn angle_defect(mesh: &ImmersedMesh, topo: &Topology, v: usize) -> f64 {
    let mut sum = 0.0;
    for &f in &topo.vertex_faces[v] {
        let face = mesh.faces[f];
        let k = face.iter().position(|&w| w == v).expect("vertex in face");
        let a = mesh.edge_vector(v, face[(k + 1) % 3]);
        let b = mesh.edge_vector(v, face[(k + 2) % 3]);
        sum += angle_between(&a, &b);
    }
    2.0 * std::f64::consts::PI - sum
}

/// Angle defect per barycentric area, averaged to faces and back to vertices.
/// The pointwise ratio oscillates on meshes with mixed valence; the face
/// average over its three corners does not.
fn smoothed_angle_defect(
    mesh: &ImmersedMesh,
    topo: &Topology,
    face_area: &[f64],
    vertex_area: &[f64],
) -> Vec<Option<f64>> {
    let raw: Vec<f64> = par::map_range(mesh.n_vertices(), |v| angle_defect(mesh, topo, v) / vertex_area[v]);
    let face_k: Vec<Option<f64>> = mesh
        .faces
        .iter()
        .map(|f| {
            if f.iter().any(|&v| topo.boundary_vertex[v]) {
                None
            } else {
                Some(f.iter().map(|&v| raw[v]).sum::<f64>() / 3.0)
            }
        })
        .collect();
    par::map_range(mesh.n_vertices(), |v| {
        if topo.boundary_vertex[v] {
            return None;
        }
        let (mut num, mut den) = (0.0, 0.0);
        for &f in &topo.vertex_faces[v] {
            if let Some(k) = face_k[f] {
                num += k * face_area[f];
                den += face_area[f];
            }
        }
        Some(if den > 0.0 { num / den } else { raw[v] })
    })
}

fn monomials(deg: usize) -> Vec<(i32, i32)> {
    let mut m = Vec::new();
    for t in 1..=deg as i32 {
        for i in (0..=t).rev() {
            m.push((i, t - i));
        }
    }
    m
}

fn perp_basis(n: &Vector3<f64>, hint: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let mut f1 = hint - n * n.dot(hint);
    if f1.norm() < 1e-6 {
        let alt = if n.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
        f1 = alt - n * n.dot(&alt);
    }
    let f1 = f1.normalize();
    let f2 = n.cross(&f1);
    (f1, f2)
}

fn fit_vertex(mesh: &ImmersedMesh, topo: &Topology, v: usize) -> Result<VertexFit> {
    let space = &mesh.space;
    let p = &mesh.positions[v];
    let t = space.tangent_basis(p)?;
    let local = |q: &Point| -> Vector3<f64> {
        let y = t.transpose() * (q - p);
        Vector3::new(y[0], y[1], y[2])
    };

    let mut n0 = Vector3::zeros();
    for &f in &topo.vertex_faces[v] {
        let face = mesh.faces[f];
        let k = face.iter().position(|&w| w == v).expect("vertex in face");
        let a = local(&mesh.positions[face[(k + 1) % 3]]);
        let b = local(&mesh.positions[face[(k + 2) % 3]]);
        n0 += a.cross(&b);
    }
    if n0.norm() == 0.0 || !n0.norm().is_finite() {
        return Err(Error::NormalUndefined(v));
    }
    let mut n = n0.normalize();

    let base_rings = if topo.boundary_vertex[v] { 3 } else { 2 };
    let mut ring = topo.k_ring(v, base_rings);
    let mut k = base_rings;
    while ring.len() < 18 && k < 6 {
        k += 1;
        ring = topo.k_ring(v, k);
    }
    let ys: Vec<Vector3<f64>> = ring.iter().map(|&q| local(&mesh.positions[q])).collect();
    let deg = if ys.len() >= 18 {
        4
    } else if ys.len() >= 14 {
        3
    } else if ys.len() >= 7 {
        2
    } else {
        return Err(Error::NormalUndefined(v));
    };
    let mons = monomials(deg);
    let scale = (ys.iter().map(|y| y.norm_squared()).sum::<f64>() / ys.len() as f64).sqrt();
    let hint = Vector3::new(1.0, 0.0, 0.0);
    let mut frame = perp_basis(&n, &hint);
    let mut coef = DVector::zeros(mons.len());
    for _ in 0..4 {
        frame = perp_basis(&n, &hint);
        let (f1, f2) = frame;
        let mut a = DMatrix::zeros(ys.len(), mons.len());
        let mut rhs = DVector::zeros(ys.len());
        for (r, y) in ys.iter().enumerate() {
            let s1 = f1.dot(y) / scale;
            let s2 = f2.dot(y) / scale;
            for (c, &(i, j)) in mons.iter().enumerate() {
                a[(r, c)] = s1.powi(i) * s2.powi(j);
            }
            rhs[r] = n.dot(y) / scale;
        }
        let svd = a.svd(true, true);
        coef = svd.solve(&rhs, 1e-12).map_err(|_| Error::NormalUndefined(v))?;
        let (g1, g2) = (coef[0], coef[1]);
        let nn = (n - f1 * g1 - f2 * g2).normalize();
        let done = (nn - n).norm() < 1e-14;
        n = nn;
        if done {
            frame = perp_basis(&n, &hint);
            break;
        }
    }
    // Quadratic coefficients of s1², s1 s2, s2² in scaled coordinates.
    let (c20, c11, c02) = (coef[2], coef[3], coef[4]);
    let (g1, g2) = (coef[0], coef[1]);
    let w = (1.0 + g1 * g1 + g2 * g2).sqrt();
    let shape = Matrix2::new(2.0 * c20, c11, c11, 2.0 * c02) / (scale * w);

    let (f1, f2) = frame;
    let lift = |x: &Vector3<f64>| -> Point { &t * DVector::from_column_slice(x.as_slice()) };
    let e1 = lift(&f1);
    let e2 = lift(&f2);
    let b11 = space.sff(p, &e1, &e1)?;
    let b22 = space.sff(p, &e2, &e2)?;
    let b12 = space.sff(p, &e1, &e2)?;
    let sec_m = b11.dot(&b22) - b12.norm_squared();
    Ok(VertexFit { normal: lift(&n), frame: [e1, e2], shape, sec_m })
}

/// Relative `L²` size of `D_X Y − ∇^Σ_X Y − A(X,Y)N − B_M(X,Y)` over the stored
/// frames at interior vertices.
///
/// `D` comes from a cubic fit of the immersion in `ℝᵈ` over tangent-plane
/// coordinates of `Σ`, where `∇^Σ` vanishes at the base point; `A` is the stored
/// shape operator and `B_M` the closed form.
pub fn decomposition_residual(mesh: &ImmersedMesh, topo: &Topology, geom: &SurfaceGeometry) -> Result<f64> {
    let space = &mesh.space;
    let terms = par::try_map_range(mesh.n_vertices(), |v| -> Result<Option<(f64, f64)>> {
        if topo.boundary_vertex[v] {
            return Ok(None);
        }
        let p = &mesh.positions[v];
        let mut ring = topo.k_ring(v, 2);
        let mut k = 2;
        while ring.len() < 14 && k < 5 {
            k += 1;
            ring = topo.k_ring(v, k);
        }
        let [e1, e2] = &geom.frame[v];
        let ys: Vec<Point> = ring.iter().filter(|&&q| q != v).map(|&q| &mesh.positions[q] - p).collect();
        let scale = (ys.iter().map(|y| y.norm_squared()).sum::<f64>() / ys.len() as f64).sqrt();
        let mons = [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3)];
        let mut a = DMatrix::zeros(ys.len(), mons.len());
        let mut rhs = DMatrix::zeros(ys.len(), p.len());
        for (r, y) in ys.iter().enumerate() {
            let (s1, s2) = (e1.dot(y) / scale, e2.dot(y) / scale);
            for (c, &(i, j)) in mons.iter().enumerate() {
                a[(r, c)] = s1.powi(i) * s2.powi(j);
            }
            for (c, x) in y.iter().enumerate() {
                rhs[(r, c)] = x / scale;
            }
        }
        let coef = a.svd(true, true).solve(&rhs, 1e-12).map_err(|_| Error::NormalUndefined(v))?;
        let d2 = |row: usize, factor: f64| -> Point { coef.row(row).transpose() * (factor / scale) };
        let fitted = [d2(2, 2.0), d2(3, 1.0), d2(4, 2.0)];
        let n = &geom.normal[v];
        let sh = geom.shape[v];
        let predicted = [
            n * sh[(0, 0)] + space.sff(p, e1, e1)?,
            n * sh[(0, 1)] + space.sff(p, e1, e2)?,
            n * sh[(1, 1)] + space.sff(p, e2, e2)?,
        ];
        // The mixed term appears twice in the sum over a frame.
        let weights = [1.0, 2.0, 1.0];
        let mut num = 0.0;
        let mut den = 0.0;
        for ((f, q), w) in fitted.iter().zip(&predicted).zip(weights) {
            num += w * (f - q).norm_squared();
            den += w * q.norm_squared();
        }
        Ok(Some((geom.vertex_area[v] * num, geom.vertex_area[v] * den)))
    })?;
    let (num, den) = terms.into_iter().flatten().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    Ok(if den > 0.0 { (num / den).sqrt() } else { num.sqrt() })
}

/// Angle deviation from orthogonality between `Σ` and `∂M` at boundary
/// vertices lying on `∂M`, as `(vertex, |angle − π/2|)`.
pub fn free_boundary_angles(mesh: &ImmersedMesh, geom: &SurfaceGeometry) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for lp in &mesh.boundary_loops {
        for &v in lp {
            if let Some(nu) = mesh.space.boundary_inward_normal(&mesh.positions[v]) {
                let c = geom.normal[v].dot(&nu).clamp(-1.0, 1.0);
                out.push((v, c.asin().abs()));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::catalog_space;
    use crate::surface::generate_surface;
    use serde_json::json;

    fn max_err(xs: &[f64], target: f64) -> f64 {
        xs.iter().map(|x| (x - target).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn unit_sphere_curvatures() {
        let s = catalog_space("r3", &json!({})).unwrap();
        let m = generate_surface(&s, "sphere", &json!({}), 64).unwrap();
        let g = compute_geometry(&m).unwrap();
        assert_eq!(g.orientation, -1.0);
        assert!(max_err(&g.mean_curvature, 2.0) < 2e-3, "{}", max_err(&g.mean_curvature, 2.0));
        assert!(max_err(&g.sff_norm_sq, 2.0) < 2e-3);
        assert!(max_err(&g.gauss_curvature, 1.0) < 1e-3);
        for (v, n) in g.normal.iter().enumerate() {
            assert!((n + &m.positions[v]).norm() < 1e-2);
        }
    }

    #[test]
    fn slice_torus_is_totally_geodesic() {
        let s = catalog_space("t2xr-rect", &json!({"beta": 1.0})).unwrap();
        let m = generate_surface(&s, "slice-torus", &json!({}), 12).unwrap();
        let g = compute_geometry(&m).unwrap();
        assert!(g.sff_norm_sq.iter().all(|&a| a < 1e-16));
        for n in &g.normal {
            assert!((n[4].abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn frames_are_orthonormal_and_normal_tangent_to_m() {
        let s = catalog_space("s3", &json!({})).unwrap();
        let m = generate_surface(&s, "clifford", &json!({}), 16).unwrap();
        let g = compute_geometry(&m).unwrap();
        for v in 0..m.n_vertices() {
            let p = &m.positions[v];
            let n = &g.normal[v];
            let [e1, e2] = &g.frame[v];
            assert!((n.norm() - 1.0).abs() < 1e-12);
            assert!(n.dot(e1).abs() < 1e-12 && n.dot(e2).abs() < 1e-12 && e1.dot(e2).abs() < 1e-12);
            assert!(n.dot(p).abs() < 1e-12);
            assert!(g.mean_curvature[v].abs() < 1e-3);
        }
    }
}
