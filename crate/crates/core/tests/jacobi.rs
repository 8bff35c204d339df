use std::f64::consts::PI;

use cmc_index_lab::ambient::catalog_space;
use cmc_index_lab::hodge::DiscreteSurface;
use cmc_index_lab::jacobi::{
    assemble, cmc_index, complete_spectrum, ric_normal, twisted_spectrum, JacobiAssembly, JacobiOptions,
    SpectrumOptions, TwistedSpectrum,
};
use cmc_index_lab::surface::generate_surface;
use serde_json::{json, Value};

fn surf(space: &str, sp: Value, fam: &str, fp: Value, res: usize) -> DiscreteSurface {
    let s = catalog_space(space, &sp).unwrap();
    DiscreteSurface::new(generate_surface(&s, fam, &fp, res).unwrap()).unwrap()
}

fn sphere(res: usize) -> DiscreteSurface {
    surf("r3", json!({}), "round-sphere", json!({}), res)
}

fn clifford(res: usize) -> DiscreteSurface {
    surf("s3", json!({}), "clifford-torus", json!({}), res)
}

fn cap(res: usize) -> DiscreteSurface {
    surf("unit-ball", json!({}), "spherical-cap", json!({}), res)
}

fn spectrum(s: &DiscreteSurface, k: usize) -> (JacobiAssembly, TwistedSpectrum) {
    let a = assemble(s, JacobiOptions::default()).unwrap();
    let sp = twisted_spectrum(&a, &SpectrumOptions { k, ..Default::default() }).unwrap();
    (a, sp)
}

fn close(x: f64, exact: f64, rel: f64) -> bool {
    (x - exact).abs() <= rel * exact.abs().max(1.0)
}

#[test]
fn sphere_constant_gives_minus_total_curvature() {
    let s = sphere(64);
    let a = assemble(&s, JacobiOptions::default()).unwrap();
    let one = vec![1.0; a.n()];
    let q = a.q(&one, &one);
    assert!((q + 8.0 * PI).abs() < 1e-3 * 8.0 * PI, "Q(1,1) = {q}");
}

#[test]
fn cap_boundary_form_on_constants_is_boundary_length() {
    let s = cap(64);
    let a = assemble(&s, JacobiOptions::default()).unwrap();
    let one = vec![1.0; a.n()];
    let b = a.robin.bilinear(&one, &one);
    let len: f64 = s.mesh.boundary_loops[0]
        .iter()
        .zip(s.mesh.boundary_loops[0].iter().cycle().skip(1))
        .map(|(&i, &j)| s.mesh.edge_vector(i, j).norm())
        .sum();
    assert_eq!(a.free_edges, 0);
    assert!(a.robin_edges > 0);
    assert!((b - len).abs() < 1e-3 * len, "B(1,1) = {b}, length {len}");
}

#[test]
fn sphere_spectrum_matches_spherical_harmonics() {
    let (_, sp) = spectrum(&sphere(96), 9);
    let exact = [0.0, 0.0, 0.0, 4.0, 4.0, 4.0, 4.0, 4.0];
    for (l, e) in sp.eigenvalues.iter().zip(exact) {
        assert!(close(*l, e, 0.02), "{:?}", sp.eigenvalues);
    }
    assert_eq!((sp.index, sp.nullity), (0, 3));
    assert_eq!(cmc_index(&sp).unwrap(), (0, 3));
}

#[test]
fn clifford_spectrum_matches_fourier_modes() {
    let (_, sp) = spectrum(&clifford(96), 8);
    assert_eq!(sp.index, 4);
    for l in &sp.eigenvalues[..4] {
        assert!(close(*l, -2.0, 0.02), "{:?}", sp.eigenvalues);
    }
    for l in &sp.eigenvalues[4..8] {
        assert!(close(*l, 0.0, 0.02), "{:?}", sp.eigenvalues);
    }
}

#[test]
fn stable_families_have_index_zero() {
    let (_, st) = spectrum(&surf("t2xr-rect", json!({"beta": 1.0}), "slice-torus", json!({}), 48), 6);
    assert_eq!(st.index, 0);
    // First nonzero mode of the flat unit square torus is 4π².
    assert!(close(st.eigenvalues[0], 4.0 * PI * PI, 0.02), "{:?}", st.eigenvalues);
    let (a, cp) = spectrum(&cap(64), 6);
    assert_eq!(cp.index, 0);
    assert!(a.robin_edges > 0);
}

#[test]
fn eigenpairs_are_accurate_and_constrained() {
    for s in [sphere(48), clifford(48), cap(48)] {
        let (a, sp) = spectrum(&s, 10);
        assert!(sp.complete);
        for (l, u) in sp.eigenvalues.iter().zip(&sp.eigenfunctions) {
            let m = a.mass.bilinear(u, u);
            assert!((m - 1.0).abs() < 1e-8);
            assert!((a.q(u, u) / m - l).abs() < 1e-8 * l.abs().max(1.0));
            assert!(a.integral(u).abs() < 1e-8 * a.area.sqrt());
        }
        assert!(sp.residuals.iter().all(|r| *r < 1e-6), "{:?}", sp.residuals);
    }
}

#[test]
fn min_max_lower_bound_on_smooth_trial_functions() {
    let s = sphere(32);
    let (a, sp) = spectrum(&s, 4);
    let lambda1 = sp.eigenvalues[0];
    let area = a.integral(&vec![1.0; a.n()]);
    for (i, j) in [(0, 1), (1, 2), (0, 2), (2, 2)] {
        let mut u: Vec<f64> = s.mesh.positions.iter().map(|p| p[i] * p[j] + p[(i + 1) % 3]).collect();
        let mean = a.integral(&u) / area;
        u.iter_mut().for_each(|x| *x -= mean);
        let rq = a.q(&u, &u) / a.mass.bilinear(&u, &u);
        assert!(rq >= lambda1 - 1e-8, "{rq} < {lambda1}");
    }
}

#[test]
fn spectra_converge_between_96_and_128() {
    for (coarse, fine) in [(sphere(96), sphere(128)), (clifford(96), clifford(128))] {
        let (_, a) = spectrum(&coarse, 8);
        let (_, b) = spectrum(&fine, 8);
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            // Null modes are compared on the scale of the first nonzero level.
            assert!((x - y).abs() < 0.01 * y.abs().max(1.0), "{:?} vs {:?}", a.eigenvalues, b.eigenvalues);
        }
    }
}

#[test]
fn ricci_two_ways() {
    let c = ric_normal(&clifford(64)).unwrap();
    assert!(c.closed_form.iter().all(|r| (r - 2.0).abs() < 1e-2));
    let mean_gauss = c.gauss.iter().sum::<f64>() / c.gauss.len() as f64;
    assert!((mean_gauss - 2.0).abs() < 1e-2, "{mean_gauss}");
    for s in [clifford(128), surf("s2xr", json!({"r": 1.0}), "slice-sphere", json!({}), 128)] {
        let r = ric_normal(&s).unwrap();
        assert!(r.discrepancy < 0.02, "{} {}", s.mesh.tag.family, r.discrepancy);
    }
}

#[test]
fn lumped_mass_agrees_with_consistent_mass() {
    let s = clifford(64);
    let sc = twisted_spectrum(&assemble(&s, JacobiOptions::default()).unwrap(), &SpectrumOptions::default()).unwrap();
    let sl = twisted_spectrum(
        &assemble(&s, JacobiOptions { lumped: true, ..Default::default() }).unwrap(),
        &SpectrumOptions::default(),
    )
    .unwrap();
    assert_eq!(sc.index, sl.index);
    for (x, y) in sc.eigenvalues.iter().zip(&sl.eigenvalues).take(4) {
        assert!((x - y).abs() < 0.02 * x.abs().max(1.0));
    }
}

#[test]
fn complete_spectrum_reaches_the_positive_part() {
    let s = clifford(32);
    let a = assemble(&s, JacobiOptions::default()).unwrap();
    let sp = complete_spectrum(&a, &SpectrumOptions { k: 2, ..Default::default() }).unwrap();
    assert!(sp.complete);
    assert_eq!(sp.index, 4);
    assert!(sp.eigenvalues.len() > 4);
}

#[test]
fn unconstrained_spectrum_contains_the_constant_mode() {
    let s = clifford(32);
    let a = assemble(&s, JacobiOptions::default()).unwrap();
    let sp = twisted_spectrum(&a, &SpectrumOptions { twisted: false, ..Default::default() }).unwrap();
    assert!(close(sp.eigenvalues[0], -4.0, 0.02), "{:?}", sp.eigenvalues);
    assert_eq!(sp.index, 5);
}
