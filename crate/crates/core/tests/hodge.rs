use std::f64::consts::PI;

use cmc_index_lab::ambient::{catalog_space, Point};
use cmc_index_lab::hodge::{
    coordinate_functions, harmonic_basis, harmonic_fields, star_rotate, tangential_harmonic_basis, DiscreteSurface,
    HarmonicField,
};
use cmc_index_lab::surface::generate_surface;
use serde_json::{json, Value};

fn surf(space: &str, sp: Value, fam: &str, fp: Value, res: usize) -> DiscreteSurface {
    let s = catalog_space(space, &sp).unwrap();
    DiscreteSurface::new(generate_surface(&s, fam, &fp, res).unwrap()).unwrap()
}

fn flat_torus(res: usize) -> DiscreteSurface {
    surf("t2xr-rect", json!({"beta": 1.0}), "slice-torus", json!({}), res)
}

/// Unit coordinate fields `∂u`, `∂v` of the flat chart at each vertex.
fn chart_fields(s: &DiscreteSurface) -> [Vec<Point>; 2] {
    let mut du = Vec::new();
    let mut dv = Vec::new();
    for x in &s.mesh.chart {
        let j = s.mesh.space.jacobian(*x).unwrap();
        du.push(j.column(0).into_owned());
        dv.push(j.column(1).into_owned());
    }
    [du, dv]
}

fn vertex_dot(s: &DiscreteSurface, a: &[Point], b: &[Point]) -> f64 {
    a.iter().zip(b).zip(&s.dec.star0).map(|((x, y), w)| w * x.dot(y)).sum()
}

fn vectors(s: &DiscreteSurface, xi: &HarmonicField) -> Vec<Point> {
    (0..s.mesh.n_vertices()).map(|v| xi.vertex_vector(s, v)).collect()
}

/// Coefficients of `ξ` on the chart fields and the relative norm of the remainder.
fn decompose(s: &DiscreteSurface, xi: &HarmonicField, fields: &[Vec<Point>; 2]) -> ([f64; 2], f64) {
    let x = vectors(s, xi);
    let g = [
        [vertex_dot(s, &fields[0], &fields[0]), vertex_dot(s, &fields[0], &fields[1])],
        [vertex_dot(s, &fields[1], &fields[0]), vertex_dot(s, &fields[1], &fields[1])],
    ];
    let r = [vertex_dot(s, &x, &fields[0]), vertex_dot(s, &x, &fields[1])];
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    let c = [(g[1][1] * r[0] - g[0][1] * r[1]) / det, (g[0][0] * r[1] - g[1][0] * r[0]) / det];
    let rest: Vec<Point> = x
        .iter()
        .zip(&fields[0])
        .zip(&fields[1])
        .map(|((x, a), b)| x - a * c[0] - b * c[1])
        .collect();
    (c, (vertex_dot(s, &rest, &rest) / vertex_dot(s, &x, &x)).sqrt())
}

#[test]
fn laplacian_reproduces_flat_torus_fourier_mode() {
    let s = flat_torus(64);
    for (m, n) in [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (2.0, 1.0)] {
        let f: Vec<f64> = s.mesh.chart.iter().map(|c| (2.0 * PI * (m * c[0] + n * c[1])).cos()).collect();
        let lf = s.dec.laplacian0(&f);
        let lambda = 4.0 * PI * PI * (m * m + n * n);
        let err = lf.iter().zip(&f).map(|(a, b)| (a - lambda * b).abs()).fold(0.0, f64::max);
        assert!(err / lambda < 1e-2, "mode ({m},{n}): {}", err / lambda);
    }
}

#[test]
fn dimension_counts_match_topology() {
    let hex = json!({"alpha": 0.5, "beta": 0.75f64.sqrt(), "k1": 1, "l1": 1, "k2": 2, "l2": 1});
    let cases: Vec<(DiscreteSurface, usize)> = vec![
        (surf("r3", json!({}), "sphere", json!({}), 16), 0),
        (flat_torus(8), 2),
        (surf("t2xr", hex, "slice-torus", json!({}), 8), 2),
        (surf("s3", json!({}), "clifford", json!({}), 12), 2),
        (surf("t3", json!({"r1": 1.0, "r2": 1.0}), "subtorus-cylinder", json!({"radius": 0.4}), 16), 2),
        (surf("r3", json!({}), "torus", json!({}), 16), 2),
        (surf("r3", json!({}), "genus2", json!({}), 16), 4),
        (surf("r3", json!({}), "disk", json!({}), 12), 0),
        (surf("r3", json!({}), "annulus", json!({}), 24), 1),
        (surf("unit-ball", json!({}), "cap", json!({"h": 1.0}), 24), 0),
    ];
    for (s, q) in &cases {
        let (g, r) = s.genus_and_boundary();
        let expect = if r == 0 { 2 * g } else { 2 * g + r - 1 };
        assert_eq!(expect, *q, "{}", s.mesh.tag.family);
        let basis = harmonic_fields(s).unwrap();
        assert_eq!(basis.len(), *q, "{}", s.mesh.tag.family);
        for xi in &basis {
            let norm = xi.l2_norm(s);
            assert!((norm - 1.0).abs() < 1e-10);
            assert!(xi.residual_div < 1e-8 * norm, "{} div {}", s.mesh.tag.family, xi.residual_div);
            assert!(xi.residual_codiv < 1e-8 * norm);
            if r > 0 {
                assert!(xi.tangential);
                assert!(xi.tangency_residual(s) < 1e-8);
            }
        }
    }
    let t = surf("r3", json!({}), "torus", json!({}), 16);
    let punched = DiscreteSurface::new(t.mesh.punch_hole(0).unwrap()).unwrap();
    assert_eq!(punched.genus_and_boundary(), (1, 1));
    assert_eq!(tangential_harmonic_basis(&punched).unwrap().len(), 2);
    assert!(harmonic_basis(&punched).is_err());
    assert!(tangential_harmonic_basis(&t).is_err());
}

#[test]
fn flat_torus_fields_are_parallel() {
    let s = flat_torus(32);
    let fields = chart_fields(&s);
    let basis = harmonic_basis(&s).unwrap();
    for xi in &basis {
        let (c, rest) = decompose(&s, xi, &fields);
        assert!(rest < 1e-3, "{rest}");
        let (cr, rest_r) = decompose(&s, &star_rotate(&s, xi), &fields);
        assert!(rest_r < 1e-3);
        // ⋆∂u = ±∂v on the square torus.
        let sign = if (cr[0] + c[1]).abs() < (cr[0] - c[1]).abs() { 1.0 } else { -1.0 };
        assert!((cr[0] + sign * c[1]).abs() < 1e-6 && (cr[1] - sign * c[0]).abs() < 1e-6);
    }
}

#[test]
fn coordinate_functions_match_embedding_derivatives() {
    let s = flat_torus(32);
    let fields = chart_fields(&s);
    let basis = harmonic_basis(&s).unwrap();
    let co: Vec<[f64; 2]> = basis.iter().map(|xi| decompose(&s, xi, &fields).0).collect();
    // Combination of the basis equal to ∂u.
    let det = co[0][0] * co[1][1] - co[0][1] * co[1][0];
    let (a, b) = (co[1][1] / det, -co[1][0] / det);
    let mut xi = basis[0].clone();
    for (v, val) in xi.values.iter_mut().enumerate() {
        *val = [a * basis[0].values[v][0] + b * basis[1].values[v][0], a * basis[0].values[v][1] + b * basis[1].values[v][1]];
    }
    let u = coordinate_functions(&s, &xi).unwrap();
    for v in 0..s.mesh.n_vertices() {
        let norm_sq: f64 = u.iter().map(|uj| uj[v] * uj[v]).sum();
        let direct = xi.vertex_vector(&s, v).norm_squared();
        assert!((norm_sq - direct).abs() < 1e-12);
        for (j, uj) in u.iter().enumerate() {
            assert!((uj[v] - fields[0][v][j]).abs() < 1e-3, "{} vs {}", uj[v], fields[0][v][j]);
        }
    }
}

/// Relative `L²` distance of the annulus field to the span of `dθ♯`.
fn annulus_defect(res: usize) -> f64 {
    let s = surf("r3", json!({}), "annulus", json!({}), res);
    let basis = tangential_harmonic_basis(&s).unwrap();
    assert_eq!(basis.len(), 1);
    let xi = &basis[0];
    let x = vectors(&s, xi);
    let exact: Vec<Point> = s
        .mesh
        .positions
        .iter()
        .map(|p| {
            let r2 = p[0] * p[0] + p[1] * p[1];
            Point::from_vec(vec![-p[1] / r2, p[0] / r2, 0.0])
        })
        .collect();
    let c = vertex_dot(&s, &x, &exact) / vertex_dot(&s, &exact, &exact);
    let rest: Vec<Point> = x.iter().zip(&exact).map(|(a, b)| a - b * c).collect();
    let u = coordinate_functions(&s, xi).unwrap();
    assert!(u[2].iter().all(|z| z.abs() < 1e-12));
    assert!(!star_rotate(&s, xi).tangential);
    (vertex_dot(&s, &rest, &rest) / vertex_dot(&s, &x, &x)).sqrt()
}

#[test]
fn annulus_field_converges_to_the_angular_form() {
    let e: Vec<f64> = [32, 64, 128].iter().map(|&r| annulus_defect(r)).collect();
    assert!(e[1] < e[0] / 2.0 && e[2] < e[1] / 2.0, "{e:?}");
    assert!(e[2] < 1e-2, "{e:?}");
}

#[test]
fn rotation_preserves_norms_and_squares_to_minus_one() {
    let s = surf("s3", json!({}), "clifford", json!({}), 16);
    for xi in harmonic_basis(&s).unwrap() {
        let r = star_rotate(&s, &xi);
        assert!((r.l2_norm(&s) - xi.l2_norm(&s)).abs() < 1e-10);
        for (a, b) in xi.values.iter().zip(&r.values) {
            assert!((a[0].hypot(a[1]) - b[0].hypot(b[1])).abs() < 1e-12);
        }
        let rr = star_rotate(&s, &r);
        for (a, b) in xi.values.iter().zip(&rr.values) {
            assert!((a[0] + b[0]).abs() < 1e-12 && (a[1] + b[1]).abs() < 1e-12);
        }
    }
}

#[test]
fn harmonic_subspace_is_stable_under_refinement() {
    let proj = |res: usize| {
        let s = flat_torus(res);
        let fields = chart_fields(&s);
        let basis = harmonic_basis(&s).unwrap();
        let c: Vec<[f64; 2]> = basis.iter().map(|xi| decompose(&s, xi, &fields).0).collect();
        // Orthogonal projector onto the coefficient span.
        let m = nalgebra::Matrix2::new(c[0][0], c[1][0], c[0][1], c[1][1]);
        let g = m.transpose() * m;
        m * g.try_inverse().unwrap() * m.transpose()
    };
    let p64 = proj(64);
    let p128 = proj(128);
    assert!((p64 - p128).norm() < 1e-2);
}
