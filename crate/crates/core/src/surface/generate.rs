//! Model surfaces in the catalog spaces.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{DVector, Vector3};

use crate::ambient::{AmbientSpace, SpaceSpec};
use crate::error::{Error, Result};
use crate::mesh::{FamilyTag, ImmersedMesh};

/// Known surface families.
pub const FAMILIES: &[&str] = &[
    "round-sphere",
    "slice-sphere",
    "slice-torus",
    "subtorus-cylinder",
    "clifford-torus",
    "spherical-cap",
    "flat-disk",
    "annulus",
    "torus",
    "genus2",
];

fn canonical_family(name: &str) -> &str {
    match name {
        "sphere" => "round-sphere",
        "clifford" => "clifford-torus",
        "cap" => "spherical-cap",
        "disk" => "flat-disk",
        "subtorus" | "cylinder" => "subtorus-cylinder",
        other => other,
    }
}

fn allowed(family: &str, space: &SpaceSpec) -> bool {
    use SpaceSpec::*;
    match family {
        "round-sphere" => matches!(space, R3 | UnitBall | T2xR { .. } | RectT2xR { .. } | T3 { .. }),
        "slice-sphere" => matches!(space, S2xR { .. }),
        "slice-torus" => matches!(space, T2xR { .. } | RectT2xR { .. }),
        "subtorus-cylinder" => matches!(space, T3 { .. }),
        "clifford-torus" => matches!(space, S3),
        "spherical-cap" => matches!(space, UnitBall),
        "flat-disk" | "annulus" => matches!(space, UnitBall | R3),
        "torus" | "genus2" => matches!(space, R3),
        _ => false,
    }
}

fn get(params: &serde_json::Value, key: &str, default: f64) -> Result<f64> {
    match params.get(key) {
        None | Some(serde_json::Value::Null) => Ok(default),
        Some(v) => v
            .as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| Error::InvalidParameter(format!("'{key}' must be a number"))),
    }
}

fn get3(params: &serde_json::Value, key: &str) -> Result<[f64; 3]> {
    match params.get(key) {
        None | Some(serde_json::Value::Null) => Ok([0.0; 3]),
        Some(serde_json::Value::Array(a)) if a.len() == 3 => {
            let mut out = [0.0; 3];
            for (o, v) in out.iter_mut().zip(a) {
                *o = v
                    .as_f64()
                    .ok_or_else(|| Error::InvalidParameter(format!("'{key}' must hold numbers")))?;
            }
            Ok(out)
        }
        _ => Err(Error::InvalidParameter(format!("'{key}' must be a 3-vector"))),
    }
}

/// Intermediate triangulation in chart coordinates.
struct ChartMesh {
    params: Vec<[f64; 2]>,
    chart: Vec<[f64; 3]>,
    faces: Vec<[usize; 3]>,
}

/// Builds a model surface of `family` in `space`.
pub fn generate_surface(
    space: &AmbientSpace,
    family: &str,
    params: &serde_json::Value,
    resolution: usize,
) -> Result<ImmersedMesh> {
    if !space.has_embedding() {
        return Err(Error::ClosedFormOnly(space.name().into()));
    }
    let family = canonical_family(family);
    if !FAMILIES.contains(&family) || !allowed(family, space.spec()) {
        return Err(Error::FamilySpaceMismatch { family: family.into(), space: space.name().into() });
    }
    if resolution < 4 {
        return Err(Error::InvalidParameter("resolution must be at least 4".into()));
    }
    let mut recorded = serde_json::Map::new();
    let mut rec = |k: &str, v: f64| {
        recorded.insert(k.into(), serde_json::json!(v));
        v
    };
    let cm = match family {
        "round-sphere" => {
            let radius = rec("radius", get(params, "radius", 1.0)?);
            let center = get3(params, "center")?;
            recorded.insert("center".into(), serde_json::json!(center));
            check_sphere_fits(space, radius, center)?;
            let mut cm = cube_sphere(resolution);
            for c in cm.chart.iter_mut() {
                *c = [0, 1, 2].map(|a| center[a] + radius * c[a]);
            }
            cm
        }
        "slice-sphere" => {
            let t = rec("t", get(params, "t", 0.0)?);
            let mut cm = cube_sphere(resolution);
            for c in cm.chart.iter_mut() {
                let theta = c[2].clamp(-1.0, 1.0).acos();
                let phi = c[1].atan2(c[0]);
                *c = [theta, phi, t];
            }
            cm
        }
        "slice-torus" => {
            let t = rec("t", get(params, "t", 0.0)?);
            let lat = space.torus().expect("torus space").lattice;
            lattice_grid(lat[0], lat[1], resolution, t)
        }
        "subtorus-cylinder" => {
            let SpaceSpec::T3 { r1, r2 } = *space.spec() else { unreachable!() };
            let radius = rec("radius", get(params, "radius", 0.0)?);
            let y0 = rec("y0", get(params, "y0", 0.0)?);
            let z0 = rec("z0", get(params, "z0", 0.0)?);
            if radius < 0.0 {
                return Err(Error::InvalidParameter("radius must be nonnegative".into()));
            }
            if radius == 0.0 {
                let mut cm = lattice_grid([2.0 * PI, 0.0], [0.0, 2.0 * PI * r1], resolution, z0);
                for c in cm.chart.iter_mut() {
                    c[1] += y0;
                }
                cm
            } else {
                if radius >= PI * r1.min(r2) {
                    return Err(Error::RadiusTooLarge(format!(
                        "tube radius {radius} needs to be below {}",
                        PI * r1.min(r2)
                    )));
                }
                let mut cm = lattice_grid([2.0 * PI, 0.0], [0.0, 2.0 * PI * radius], resolution, 0.0);
                for (c, p) in cm.chart.iter_mut().zip(&cm.params) {
                    let th = p[1] / radius;
                    *c = [p[0], y0 + radius * th.cos(), z0 + radius * th.sin()];
                }
                cm
            }
        }
        "clifford-torus" => {
            let mut cm = lattice_grid([2.0 * PI, 0.0], [0.0, 2.0 * PI], resolution, 0.0);
            for (c, p) in cm.chart.iter_mut().zip(&cm.params) {
                *c = [PI / 4.0, p[0], p[1]];
            }
            cm
        }
        "spherical-cap" => {
            let h = rec("H", get(params, "H", 1.0)?);
            if !(h > 0.0) {
                return Err(Error::InvalidParameter("cap mean curvature must be positive".into()));
            }
            let big = 2.0 / h;
            let c = (1.0 + big * big).sqrt();
            let phi_max = (big / c).acos();
            let mut cm = polar_disk(resolution);
            for (ch, p) in cm.chart.iter_mut().zip(&cm.params) {
                let phi = p[0] * phi_max;
                let th = p[1];
                *ch = [
                    big * phi.sin() * th.cos(),
                    big * phi.sin() * th.sin(),
                    c - big * phi.cos(),
                ];
            }
            cm
        }
        "flat-disk" => {
            let radius = rec("radius", get(params, "radius", 1.0)?);
            if matches!(space.spec(), SpaceSpec::UnitBall) && radius > 1.0 {
                return Err(Error::RadiusTooLarge("disk leaves the unit ball".into()));
            }
            let mut cm = polar_disk(resolution);
            for (ch, p) in cm.chart.iter_mut().zip(&cm.params) {
                *ch = [radius * p[0] * p[1].cos(), radius * p[0] * p[1].sin(), 0.0];
            }
            cm
        }
        "annulus" => {
            let inner = rec("inner", get(params, "inner", 0.5)?);
            let outer = rec("outer", get(params, "outer", 1.0)?);
            if !(0.0 < inner && inner < outer) {
                return Err(Error::InvalidParameter("annulus needs 0 < inner < outer".into()));
            }
            if matches!(space.spec(), SpaceSpec::UnitBall) && outer > 1.0 {
                return Err(Error::RadiusTooLarge("annulus leaves the unit ball".into()));
            }
            annulus(resolution, inner, outer)
        }
        "torus" => {
            let major = rec("major", get(params, "major", 1.0)?);
            let minor = rec("minor", get(params, "minor", 0.4)?);
            if !(0.0 < minor && minor < major) {
                return Err(Error::InvalidParameter("torus needs 0 < minor < major".into()));
            }
            let mut cm = lattice_grid([2.0 * PI * major, 0.0], [0.0, 2.0 * PI * minor], resolution, 0.0);
            for (ch, p) in cm.chart.iter_mut().zip(&cm.params) {
                let (u, v) = (p[0] / major, p[1] / minor);
                let rr = major + minor * v.cos();
                *ch = [rr * u.cos(), rr * u.sin(), minor * v.sin()];
            }
            cm
        }
        "genus2" => genus_two(resolution),
        _ => unreachable!(),
    };
    for (k, v) in params.as_object().into_iter().flatten() {
        recorded.entry(k.clone()).or_insert_with(|| v.clone());
    }
    let positions = cm.chart.iter().map(|&c| space.embed(c)).collect::<Result<Vec<DVector<f64>>>>()?;
    let mut mesh = ImmersedMesh {
        space: space.clone(),
        surface_params: cm.params,
        chart: cm.chart,
        positions,
        faces: cm.faces,
        boundary_loops: Vec::new(),
        tag: FamilyTag {
            family: family.into(),
            params: serde_json::Value::Object(recorded),
            resolution,
            seed: 0,
        },
    };
    orient_outward_if_closed_in_r3(&mut mesh);
    mesh.refresh_boundary()?;
    mesh.validate()?;
    Ok(mesh)
}

fn check_sphere_fits(space: &AmbientSpace, radius: f64, center: [f64; 3]) -> Result<()> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter("radius must be positive".into()));
    }
    let limit = match space.spec() {
        SpaceSpec::R3 => f64::INFINITY,
        SpaceSpec::UnitBall => 1.0 - Vector3::from(center).norm(),
        SpaceSpec::T3 { r1, r2 } => PI * 1f64.min(*r1).min(*r2),
        SpaceSpec::T2xR { .. } | SpaceSpec::RectT2xR { .. } => {
            let l = space.torus().expect("torus").lattice;
            let mut shortest = f64::INFINITY;
            for i in -2i32..=2 {
                for j in -2i32..=2 {
                    if i != 0 || j != 0 {
                        let x = i as f64 * l[0][0] + j as f64 * l[1][0];
                        let y = i as f64 * l[0][1] + j as f64 * l[1][1];
                        shortest = shortest.min(x.hypot(y));
                    }
                }
            }
            0.5 * shortest
        }
        _ => unreachable!(),
    };
    if radius >= limit {
        return Err(Error::RadiusTooLarge(format!("radius {radius} must be below {limit}")));
    }
    Ok(())
}

/// Flips all faces of a closed surface in `ℝ³` if its signed volume is negative,
/// so that the face orientation induces the outward normal.
fn orient_outward_if_closed_in_r3(mesh: &mut ImmersedMesh) {
    if mesh.d() != 3 {
        return;
    }
    let mut vol = 0.0;
    for f in &mesh.faces {
        let p = |i: usize| Vector3::new(mesh.positions[f[i]][0], mesh.positions[f[i]][1], mesh.positions[f[i]][2]);
        vol += p(0).dot(&p(1).cross(&p(2)));
    }
    if vol < 0.0 {
        for f in mesh.faces.iter_mut() {
            f.swap(1, 2);
        }
    }
}

/// Equiangular cube-sphere on the unit sphere with `res/4` cells per cube edge.
/// Faces are oriented by the outward normal.
/// Cube-sphere with `resolution` edges along half a great circle through the poles.
fn cube_sphere(resolution: usize) -> ChartMesh {
    let n = (resolution / 2).max(2) as i64;
    let mut index: HashMap<[i64; 3], usize> = HashMap::new();
    let mut pts: Vec<Vector3<f64>> = Vec::new();
    let warp = |k: i64| (PI / 4.0 * (2.0 * k as f64 / n as f64 - 1.0)).tan();
    let mut vid = |key: [i64; 3], pts: &mut Vec<Vector3<f64>>| -> usize {
        *index.entry(key).or_insert_with(|| {
            pts.push(Vector3::new(warp(key[0]), warp(key[1]), warp(key[2])).normalize());
            pts.len() - 1
        })
    };
    let mut faces = Vec::new();
    for axis in 0..3 {
        for side in [0, n] {
            let (a1, a2) = ((axis + 1) % 3, (axis + 2) % 3);
            for i in 0..n {
                for j in 0..n {
                    let key = |di: i64, dj: i64| {
                        let mut k = [0; 3];
                        k[axis] = side;
                        k[a1] = i + di;
                        k[a2] = j + dj;
                        k
                    };
                    let q = [key(0, 0), key(1, 0), key(1, 1), key(0, 1)].map(|k| vid(k, &mut pts));
                    // Alternate the diagonal to keep the mesh symmetric about cell centres.
                    let tris = if (i + j) % 2 == 0 {
                        [[q[0], q[1], q[2]], [q[0], q[2], q[3]]]
                    } else {
                        [[q[0], q[1], q[3]], [q[1], q[2], q[3]]]
                    };
                    for mut t in tris {
                        let nrm = (pts[t[1]] - pts[t[0]]).cross(&(pts[t[2]] - pts[t[0]]));
                        if nrm.dot(&(pts[t[0]] + pts[t[1]] + pts[t[2]])) < 0.0 {
                            t.swap(1, 2);
                        }
                        faces.push(t);
                    }
                }
            }
        }
    }
    let params = pts.iter().map(|p| [p[2].clamp(-1.0, 1.0).acos(), p[1].atan2(p[0])]).collect();
    let chart = pts.iter().map(|p| [p[0], p[1], p[2]]).collect();
    ChartMesh { params, chart, faces }
}

/// Periodic grid over the lattice spanned by `l1`, `l2`; `res` cells along `l1`.
/// Quads are split along their shorter diagonal. Chart is `(u, v, t)`.
fn lattice_grid(l1: [f64; 2], l2: [f64; 2], resolution: usize, t: f64) -> ChartMesh {
    let len = |v: [f64; 2]| v[0].hypot(v[1]);
    let n1 = resolution.max(3);
    let n2 = ((resolution as f64 * len(l2) / len(l1)).round() as usize).max(3);
    let id = |i: usize, j: usize| (i % n1) * n2 + (j % n2);
    let mut params = Vec::with_capacity(n1 * n2);
    for i in 0..n1 {
        for j in 0..n2 {
            let (s, r) = (i as f64 / n1 as f64, j as f64 / n2 as f64);
            params.push([s * l1[0] + r * l2[0], s * l1[1] + r * l2[1]]);
        }
    }
    let d1 = [l1[0] / n1 as f64, l1[1] / n1 as f64];
    let d2 = [l2[0] / n2 as f64, l2[1] / n2 as f64];
    let main = len([d1[0] + d2[0], d1[1] + d2[1]]) <= len([d1[0] - d2[0], d1[1] - d2[1]]) + 1e-12;
    // CCW in (u,v) when l1 × l2 > 0.
    let ccw = l1[0] * l2[1] - l1[1] * l2[0] > 0.0;
    let mut faces = Vec::with_capacity(2 * n1 * n2);
    for i in 0..n1 {
        for j in 0..n2 {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            let tris = if main { [[a, b, c], [a, c, d]] } else { [[a, b, d], [b, c, d]] };
            for mut tr in tris {
                if !ccw {
                    tr.swap(1, 2);
                }
                faces.push(tr);
            }
        }
    }
    let chart = params.iter().map(|p| [p[0], p[1], t]).collect();
    ChartMesh { params, chart, faces }
}

/// Stitches two concentric rings (angles ascending from near 0) with triangles,
/// counter-clockwise in the plane when `inner` lies inside `outer`.
fn stitch_rings(inner: &[(usize, f64)], outer: &[(usize, f64)], faces: &mut Vec<[usize; 3]>) {
    let (na, nb) = (inner.len(), outer.len());
    let ang = |ring: &[(usize, f64)], k: usize| {
        let n = ring.len();
        ring[k % n].1 + 2.0 * PI * (k / n) as f64
    };
    let (mut i, mut j) = (0usize, 0usize);
    // Start both rings at their first vertex; unwrap angles so the walk is monotone.
    let shift_b = if outer[0].1 < inner[0].1 - PI { 2.0 * PI } else { 0.0 };
    let angb = |k: usize| ang(outer, k) + shift_b;
    while i < na || j < nb {
        let advance_inner = if i == na {
            false
        } else if j == nb {
            true
        } else {
            ang(inner, i + 1) < angb(j + 1)
        };
        if advance_inner {
            faces.push([inner[i % na].0, outer[j % nb].0, inner[(i + 1) % na].0]);
            i += 1;
        } else {
            faces.push([inner[i % na].0, outer[j % nb].0, outer[(j + 1) % nb].0]);
            j += 1;
        }
    }
}

/// Disk with `ceil(res/6)` rings; ring `j` carries `6j` vertices. Params are
/// `(radial fraction, angle)`.
fn polar_disk(resolution: usize) -> ChartMesh {
    let m = resolution.div_ceil(6).max(2);
    let mut params = vec![[0.0, 0.0]];
    let mut rings: Vec<Vec<(usize, f64)>> = vec![vec![(0, 0.0)]];
    for j in 1..=m {
        let k = 6 * j;
        let off = if j % 2 == 0 { PI / k as f64 } else { 0.0 };
        let mut ring = Vec::with_capacity(k);
        for i in 0..k {
            let th = off + 2.0 * PI * i as f64 / k as f64;
            ring.push((params.len(), th));
            params.push([j as f64 / m as f64, th]);
        }
        rings.push(ring);
    }
    let mut faces = Vec::new();
    let centre = 0usize;
    for i in 0..6 {
        let r = &rings[1];
        faces.push([centre, r[i].0, r[(i + 1) % 6].0]);
    }
    for j in 1..m {
        stitch_rings(&rings[j], &rings[j + 1], &mut faces);
    }
    let chart = params.iter().map(|_| [0.0; 3]).collect();
    ChartMesh { params, chart, faces }
}

/// Planar annulus in `z = 0` with `res` vertices per ring, staggered rings.
fn annulus(resolution: usize, inner: f64, outer: f64) -> ChartMesh {
    let k = resolution.max(6);
    let mid = 0.5 * (inner + outer);
    let spacing = 2.0 * PI * mid / k as f64;
    let m = (((outer - inner) / (spacing * 3f64.sqrt() / 2.0)).round() as usize).max(1);
    let mut params = Vec::new();
    let mut rings: Vec<Vec<(usize, f64)>> = Vec::new();
    for j in 0..=m {
        let r = inner + (outer - inner) * j as f64 / m as f64;
        let off = if j % 2 == 1 { PI / k as f64 } else { 0.0 };
        let mut ring = Vec::with_capacity(k);
        for i in 0..k {
            let th = off + 2.0 * PI * i as f64 / k as f64;
            ring.push((params.len(), th));
            params.push([r, th]);
        }
        rings.push(ring);
    }
    let mut faces = Vec::new();
    for j in 0..m {
        stitch_rings(&rings[j], &rings[j + 1], &mut faces);
    }
    let chart = params.iter().map(|p| [p[0] * p[1].cos(), p[0] * p[1].sin(), 0.0]).collect();
    ChartMesh { params, chart, faces }
}

/// Boundary of a one-voxel-thick 5×3 plate with two holes: a closed genus-2
/// polyhedral surface. Each unit square is split into `max(1, res/16)`² cells.
fn genus_two(resolution: usize) -> ChartMesh {
    let s = (resolution / 16).max(1) as i64;
    let filled = |x: i64, y: i64, z: i64| {
        (0..5).contains(&x) && (0..3).contains(&y) && z == 0 && !((x == 1 || x == 3) && y == 1)
    };
    let mut index: HashMap<[i64; 3], usize> = HashMap::new();
    let mut pts: Vec<[i64; 3]> = Vec::new();
    let mut vid = |k: [i64; 3], pts: &mut Vec<[i64; 3]>| -> usize {
        *index.entry(k).or_insert_with(|| {
            pts.push(k);
            pts.len() - 1
        })
    };
    let mut faces = Vec::new();
    for x in 0..5 {
        for y in 0..3 {
            if !filled(x, y, 0) {
                continue;
            }
            let cell = [x, y, 0];
            for axis in 0..3 {
                for dir in [-1i64, 1] {
                    let mut nb = cell;
                    nb[axis] += dir;
                    if filled(nb[0], nb[1], nb[2]) {
                        continue;
                    }
                    let (a1, a2) = ((axis + 1) % 3, (axis + 2) % 3);
                    let mut base = cell.map(|c| c * s);
                    if dir == 1 {
                        base[axis] += s;
                    }
                    for i in 0..s {
                        for j in 0..s {
                            let key = |di: i64, dj: i64| {
                                let mut k = base;
                                k[a1] += i + di;
                                k[a2] += j + dj;
                                k
                            };
                            let q = [key(0, 0), key(1, 0), key(1, 1), key(0, 1)].map(|k| vid(k, &mut pts));
                            // (a1, a2, axis) is right-handed, so (0,0)->(1,0)->(1,1) points along +axis.
                            for mut t in [[q[0], q[1], q[2]], [q[0], q[2], q[3]]] {
                                if dir == -1 {
                                    t.swap(1, 2);
                                }
                                faces.push(t);
                            }
                        }
                    }
                }
            }
        }
    }
    let chart: Vec<[f64; 3]> = pts.iter().map(|k| k.map(|c| c as f64 / s as f64)).collect();
    let params = chart.iter().map(|c| [c[0], c[1]]).collect();
    ChartMesh { params, chart, faces }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::catalog_space;
    use serde_json::json;

    fn gb(space: &str, sp: serde_json::Value, fam: &str, fp: serde_json::Value, res: usize) -> (usize, usize) {
        let s = catalog_space(space, &sp).unwrap();
        let m = generate_surface(&s, fam, &fp, res).unwrap();
        m.genus_and_boundary().unwrap()
    }

    #[test]
    fn topologies() {
        assert_eq!(gb("r3", json!({}), "sphere", json!({}), 32), (0, 0));
        assert_eq!(gb("s3", json!({}), "clifford", json!({}), 16), (1, 0));
        assert_eq!(gb("unit-ball", json!({}), "cap", json!({"H": 1.0}), 24), (0, 1));
        assert_eq!(gb("unit-ball", json!({}), "disk", json!({}), 24), (0, 1));
        assert_eq!(gb("r3", json!({}), "annulus", json!({}), 24), (0, 2));
        assert_eq!(gb("r3", json!({}), "torus", json!({}), 16), (1, 0));
        assert_eq!(gb("r3", json!({}), "genus2", json!({}), 16), (2, 0));
        assert_eq!(gb("r3", json!({}), "genus2", json!({}), 32), (2, 0));
        assert_eq!(gb("t2xr-rect", json!({"beta": 1.0}), "slice-torus", json!({}), 12), (1, 0));
        let hex = json!({"alpha": 0.5, "beta": 0.8660254037844386, "k1": 1, "l1": 1, "k2": 2, "l2": 1});
        assert_eq!(gb("t2xr", hex.clone(), "slice-torus", json!({}), 12), (1, 0));
        assert_eq!(gb("t2xr", hex, "sphere", json!({"radius": 0.2}), 16), (0, 0));
        assert_eq!(gb("t3", json!({"r1": 1.0, "r2": 1.0}), "subtorus-cylinder", json!({}), 12), (1, 0));
        assert_eq!(
            gb("t3", json!({"r1": 1.0, "r2": 1.0}), "subtorus-cylinder", json!({"radius": 0.5}), 12),
            (1, 0)
        );
        assert_eq!(gb("s2xr", json!({"r": 1.0}), "slice-sphere", json!({}), 16), (0, 0));
    }

    #[test]
    fn sphere_vertex_count() {
        let s = catalog_space("r3", &json!({})).unwrap();
        let m = generate_surface(&s, "round-sphere", &json!({}), 64).unwrap();
        assert_eq!(m.n_vertices(), 6 * 32 * 32 + 2);
    }

    #[test]
    fn mismatches_and_radius_limits() {
        let s3 = catalog_space("s3", &json!({})).unwrap();
        assert!(matches!(
            generate_surface(&s3, "sphere", &json!({}), 16),
            Err(Error::FamilySpaceMismatch { .. })
        ));
        let t3 = catalog_space("t3", &json!({"r1": 0.5, "r2": 1.0})).unwrap();
        assert!(matches!(
            generate_surface(&t3, "sphere", &json!({"radius": 2.0}), 16),
            Err(Error::RadiusTooLarge(_))
        ));
    }

    #[test]
    fn punched_torus_has_one_boundary() {
        let s = catalog_space("r3", &json!({})).unwrap();
        let m = generate_surface(&s, "torus", &json!({}), 16).unwrap();
        let p = m.punch_hole(0).unwrap();
        p.validate().unwrap();
        assert_eq!(p.genus_and_boundary().unwrap(), (1, 1));
    }

    #[test]
    fn cap_boundary_on_unit_sphere() {
        let s = catalog_space("unit-ball", &json!({})).unwrap();
        let m = generate_surface(&s, "cap", &json!({"H": 1.0}), 24).unwrap();
        for &v in &m.boundary_loops[0] {
            assert!((m.positions[v].norm() - 1.0).abs() < 1e-12);
        }
    }
}
