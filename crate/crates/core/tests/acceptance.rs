//! Acceptance criteria 1 to 11, one line each.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use cmc_index_lab::ambient::{catalog_space, AmbientSpace};
use cmc_index_lab::hodge::{harmonic_fields, DiscreteSurface};
use cmc_index_lab::jacobi::{assemble, complete_spectrum, twisted_spectrum, JacobiOptions, SpectrumOptions};
use cmc_index_lab::surface::{free_boundary_angles, generate_surface};
use cmc_index_lab::verify::{
    check_admissibility, check_coordinate_identity, check_pointwise_identity, threshold_report,
    verify_surface, zero_boundary_mean_subspace, ThresholdTarget, Verdict, VerifyOptions, COORDINATE_TOL,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn surf(space: &str, sp: Value, fam: &str, fp: Value, res: usize) -> DiscreteSurface {
    let s = catalog_space(space, &sp).unwrap();
    DiscreteSurface::new(generate_surface(&s, fam, &fp, res).unwrap()).unwrap()
}

fn clifford(res: usize) -> DiscreteSurface {
    surf("s3", json!({}), "clifford-torus", json!({}), res)
}

fn torus_in_t3(res: usize) -> DiscreteSurface {
    surf("t3", json!({"r1": 1.0, "r2": 1.0}), "subtorus-cylinder", json!({}), res)
}

fn slice_torus(res: usize) -> DiscreteSurface {
    surf("t2xr-rect", json!({"beta": 1.0}), "slice-torus", json!({}), res)
}

fn harmonic_dimensions() -> Outcome {
    let cases = [
        ("r3", "round-sphere", 0),
        ("r3", "torus", 2),
        ("r3", "genus2", 4),
        ("unit-ball", "flat-disk", 0),
        ("unit-ball", "annulus", 1),
    ];
    let mut worst: f64 = 0.0;
    for (space, fam, want) in cases {
        let s = surf(space, json!({}), fam, json!({}), 32);
        let basis = harmonic_fields(&s).map_err(|e| e.to_string())?;
        ensure(basis.len() == want, format!("{fam}: {} fields, expected {want}", basis.len()))?;
        for xi in &basis {
            let n = xi.l2_norm(&s);
            worst = worst.max(xi.residual_div / n).max(xi.residual_codiv / n);
        }
    }
    ensure(worst < 1e-8, format!("divergence residual {worst:.2e}"))?;
    Ok(format!("dims 0,2,4,0,1; divergence residual {worst:.2e}"))
}

fn admissibility() -> Outcome {
    let mut out = Vec::new();
    for (name, s) in [("torus in T3", torus_in_t3(64)), ("Clifford", clifford(64))] {
        let item = check_admissibility(&s, &harmonic_fields(&s).unwrap());
        ensure(item.verdict == Verdict::Pass && item.residual < 1e-8, format!("{name}: {:.2e}", item.residual))?;
        out.push(format!("{name} {:.2e}", item.residual));
    }
    Ok(out.join(", "))
}

fn keystep() -> Outcome {
    let mut out = Vec::new();
    for (name, s) in [
        ("Clifford", clifford(64)),
        ("torus in R3", surf("r3", json!({}), "torus", json!({}), 48)),
        ("genus2", surf("r3", json!({}), "genus2", json!({}), 24)),
    ] {
        let item = check_pointwise_identity(&s, &harmonic_fields(&s).unwrap());
        ensure(item.residual < 1e-10, format!("{name}: {:.2e}", item.residual))?;
        out.push(format!("{name} {:.2e}", item.residual));
    }
    Ok(out.join(", "))
}

fn coordinate_error(s: &DiscreteSurface) -> f64 {
    let a = assemble(s, JacobiOptions::default()).unwrap();
    let basis = harmonic_fields(s).unwrap();
    check_coordinate_identity(s, &a, &basis, s.has_boundary()).unwrap().residual
}

fn coordinate_identity() -> Outcome {
    let families: [(&str, fn(usize) -> DiscreteSurface); 3] =
        [("torus in T3", torus_in_t3), ("slice torus", slice_torus), ("Clifford", clifford)];
    let mut out = Vec::new();
    for (name, make) in families {
        let e64 = coordinate_error(&make(64));
        let e96 = coordinate_error(&make(96));
        let e128 = coordinate_error(&make(128));
        ensure(e96 < COORDINATE_TOL, format!("{name}: {e96:.2e} at res 96"))?;
        // Flat families agree to round-off at every resolution.
        ensure(e128 <= 1.2 * e64 || e128 < 1e-10, format!("{name}: {e64:.2e} -> {e128:.2e}"))?;
        out.push(format!("{name} {e64:.1e}/{e96:.1e}/{e128:.1e}"));
    }
    Ok(out.join(", "))
}

fn sphere_spectrum() -> Outcome {
    let s = surf("r3", json!({}), "round-sphere", json!({}), 96);
    let a = assemble(&s, JacobiOptions::default()).unwrap();
    let sp = twisted_spectrum(&a, &SpectrumOptions { k: 9, ..Default::default() }).unwrap();
    let exact = [0.0, 0.0, 0.0, 4.0, 4.0, 4.0, 4.0, 4.0];
    for (l, e) in sp.eigenvalues.iter().zip(exact) {
        ensure((l - e).abs() <= 0.02 * e.max(1.0), format!("{:?}", sp.eigenvalues))?;
    }
    ensure((sp.index, sp.nullity) == (0, 3), format!("index {} nullity {}", sp.index, sp.nullity))?;
    Ok(format!("index 0, nullity 3, lambda_4..8 in [{:.4}, {:.4}]", sp.eigenvalues[3], sp.eigenvalues[7]))
}

fn clifford_index() -> Outcome {
    let s = clifford(96);
    let r = verify_surface(&s, &VerifyOptions::default()).unwrap();
    let sp = r.spectrum.as_ref().unwrap();
    ensure(sp.index == 4, format!("index {}", sp.index))?;
    for l in &sp.eigenvalues[..4] {
        ensure((l + 2.0).abs() < 0.04, format!("{:?}", sp.eigenvalues))?;
    }
    let by = |n: &str| r.checks.iter().find(|c| c.name == n).unwrap();
    let eta_star = by("pencil").residual;
    ensure((eta_star + 2.0).abs() < 0.04, format!("eta_star {eta_star}"))?;
    let bound = by("bound");
    ensure(bound.verdict == Verdict::Pass && bound.threshold == 1.0, format!("bound {:?}", bound.verdict))?;
    Ok(format!("index 4, eta_star {eta_star:.4}, bound 1 <= 4"))
}

fn concentration() -> Outcome {
    let s = clifford(64);
    let r = verify_surface(&s, &VerifyOptions { etas: vec![-1.0, 0.0], ..Default::default() }).unwrap();
    let items: Vec<_> = r.checks.iter().filter(|c| c.name == "concentration").collect();
    ensure(items.len() == 2, "two concentration items")?;
    let mut out = Vec::new();
    for (item, eta) in items.iter().zip([-1.0, 0.0]) {
        ensure(item.verdict == Verdict::Pass && item.residual >= 1.0, format!("eta {eta}: count {}", item.residual))?;
        out.push(format!("eta {eta}: {} below", item.residual));
    }
    Ok(out.join(", "))
}

fn negative_control() -> Outcome {
    let s = slice_torus(48);
    let r = verify_surface(&s, &VerifyOptions::default()).unwrap();
    let by = |n: &str| r.checks.iter().find(|c| c.name == n).unwrap();
    let eta_star = by("pencil").residual;
    ensure(eta_star >= 0.0, format!("eta_star {eta_star}"))?;
    ensure(r.geometry.genus == 1, "genus")?;
    let index = r.spectrum.as_ref().unwrap().index;
    ensure(index == 0, format!("index {index}"))?;
    ensure(by("bound").verdict == Verdict::NotApplicable, "bound verdict")?;
    ensure(r.summary != Verdict::Fail, "summary fails")?;
    Ok(format!("eta_star {eta_star:.3}, index 0, bound not-applicable"))
}

fn thresholds() -> Outcome {
    let space = |name: &str, p: Value| ThresholdTarget::Space(catalog_space(name, &p).unwrap());
    let t3 = threshold_report(&space("t3", json!({"r1": 1.0, "r2": 1.0})), None).unwrap();
    ensure(t3.threshold_h2 == Some(3.0), format!("T3 {:?}", t3.threshold_h2))?;
    let rect = threshold_report(&space("t2xr-rect", json!({"beta": 1.0})), None).unwrap();
    let r = rect.threshold_h2.unwrap_or(f64::NAN);
    ensure((r - 8.0 * PI * PI).abs() < 1e-12 * 8.0 * PI * PI, format!("rect {r}"))?;
    let berger = threshold_report(&space("berger", json!({"kappa": 8.0, "tau": 1.0})), None).unwrap();
    ensure(
        berger.threshold_h2.is_none() && berger.note.as_deref().map_or(false, |n| n.starts_with("none required")),
        "Berger",
    )?;
    let hex = threshold_report(&ThresholdTarget::Hexagonal, None).unwrap();
    let residual = hex.candidate.as_ref().map(|c| c.residual).ok_or("no hexagonal residual")?;
    ensure(residual.is_finite(), "hexagonal residual not finite")?;
    Ok(format!("T3 3, rect 8pi^2, Berger none required, hexagonal residual {residual:.3}"))
}

fn free_boundary() -> Outcome {
    let cap = surf("unit-ball", json!({}), "spherical-cap", json!({"H": 1.0}), 128);
    let angle = free_boundary_angles(&cap.mesh, &cap.geom).iter().map(|a| a.1).fold(0.0, f64::max);
    ensure(angle < 1e-4, format!("angle {angle:.2e}"))?;

    let coarse = surf("unit-ball", json!({}), "spherical-cap", json!({"H": 1.0}), 64);
    let a = assemble(&coarse, JacobiOptions::default()).unwrap();
    let sp = complete_spectrum(&a, &SpectrumOptions::default()).unwrap();
    ensure(sp.index == 0 && a.robin_edges > 0, format!("Robin index {}", sp.index))?;
    let r = verify_surface(&coarse, &VerifyOptions::default()).unwrap();
    let conc = r.checks.iter().find(|c| c.name == "concentration").unwrap();
    ensure(conc.verdict == Verdict::Pass && conc.witness["q"] == 0, "cap not vacuous")?;

    let annulus = surf("unit-ball", json!({}), "annulus", json!({}), 48);
    let z = zero_boundary_mean_subspace(&annulus, &harmonic_fields(&annulus).unwrap());
    ensure(z.constraint_residual < 1e-8, format!("annulus constraint {:.2e}", z.constraint_residual))?;
    Ok(format!(
        "angle {angle:.1e}, Robin index 0, vacuous pass, annulus constraint {:.1e}",
        z.constraint_residual
    ))
}

fn embedded_spaces() -> Vec<AmbientSpace> {
    [
        ("r3", json!({})),
        ("unit-ball", json!({})),
        ("s3", json!({})),
        ("s2xr", json!({"r": 1.0})),
        ("t3", json!({"r1": 1.0, "r2": 1.0})),
        ("t2xr-rect", json!({"beta": 1.0})),
        ("t2xr", json!({"alpha": 0.5, "beta": 0.8660254037844386, "k1": 1, "l1": 1, "k2": 2, "l2": 1})),
    ]
    .into_iter()
    .map(|(n, p)| catalog_space(n, &p).unwrap())
    .collect()
}

fn ambient_consistency() -> Outcome {
    let mut worst_pb: f64 = 0.0;
    let mut worst_gauss: f64 = 0.0;
    let spaces = embedded_spaces();
    for space in &spaces {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let x = space.sample_chart(&mut rng);
            let g = space.chart_metric(x).unwrap();
            let pb = space.pullback_metric_fd(x).unwrap();
            worst_pb = worst_pb.max((pb - g).norm() / g.norm());
            let c = space.curvature_at(&space.embed(x).unwrap()).unwrap();
            let scale = c.mean_vec_norm_sq.max(c.sff_norm_sq).max(1.0);
            worst_gauss = worst_gauss.max((c.scalar - (c.mean_vec_norm_sq - c.sff_norm_sq)).abs() / scale);
        }
    }
    ensure(worst_pb < 1e-8, format!("pullback {worst_pb:.2e}"))?;
    ensure(worst_gauss < 1e-8, format!("Gauss trace {worst_gauss:.2e}"))?;
    Ok(format!("{} spaces, pullback {worst_pb:.1e}, Gauss trace {worst_gauss:.1e}", spaces.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("harmonic dimensions", harmonic_dimensions),
        ("admissibility", admissibility),
        ("pointwise identity", keystep),
        ("coordinate-sum identity", coordinate_identity),
        ("sphere spectrum", sphere_spectrum),
        ("Clifford torus index", clifford_index),
        ("concentration", concentration),
        ("negative control", negative_control),
        ("thresholds", thresholds),
        ("free boundary", free_boundary),
        ("ambient self-consistency", ambient_consistency),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
