use nalgebra::{DMatrix, SymmetricEigen};
use serde_json::json;

use super::checks::{b_pairing, boundary_pairing, coordinate_integrals, vectors};
use super::{CheckItem, Verdict};
use crate::ambient::Point;
use crate::error::{Error, Result};
use crate::hodge::{star_rotate, DiscreteSurface, HarmonicField};
use crate::jacobi::TwistedSpectrum;

/// Curvature functional and `2∫⟨ξ,ζ⟩` on a span of harmonic fields.
#[derive(Debug, Clone)]
pub struct HypothesisPencil {
    pub l_mat: DMatrix<f64>,
    pub r_mat: DMatrix<f64>,
    /// Largest `η` with `L ξ = η R ξ`; `None` for an empty span.
    pub eta_star: Option<f64>,
    pub with_boundary: bool,
}

impl HypothesisPencil {
    pub fn q(&self) -> usize {
        self.l_mat.nrows()
    }

    /// Whether `ℓ(ξ) < 2η ∫|ξ|²` for every nonzero `ξ` in the span.
    pub fn holds_at(&self, eta: f64) -> bool {
        self.eta_star.map_or(true, |e| e < eta)
    }
}

/// Largest generalized eigenvalue of `(l, r)` with `r` positive definite.
pub fn max_generalized_eigenvalue(l: &DMatrix<f64>, r: &DMatrix<f64>) -> Result<f64> {
    let chol = r
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Singular("pencil mass matrix is not positive definite".into()))?;
    let lo = chol.l();
    let x = lo
        .solve_lower_triangular(l)
        .ok_or_else(|| Error::Singular("pencil factor".into()))?;
    let c = lo
        .solve_lower_triangular(&x.transpose())
        .ok_or_else(|| Error::Singular("pencil factor".into()))?;
    let c = (&c + c.transpose()) * 0.5;
    Ok(SymmetricEigen::new(c).eigenvalues.max())
}

pub fn hypothesis_pencil(s: &DiscreteSurface, basis: &[HarmonicField], with_boundary: bool) -> Result<HypothesisPencil> {
    let space = &s.mesh.space;
    if !space.has_embedding() {
        return Err(Error::ClosedFormOnly(space.name().into()));
    }
    let q = basis.len();
    let r_m = space.scalar_curvature();
    let x: Vec<Vec<Point>> = basis.iter().map(|xi| vectors(s, xi)).collect();
    let jx: Vec<Vec<Point>> = basis.iter().map(|xi| vectors(s, &star_rotate(s, xi))).collect();
    let mut l = DMatrix::zeros(q, q);
    let mut r = DMatrix::zeros(q, q);
    for a in 0..q {
        for b in a..q {
            let (mut lab, mut rab) = (0.0, 0.0);
            for v in 0..s.mesh.n_vertices() {
                let w = s.geom.vertex_area[v];
                let h = s.geom.mean_curvature[v];
                let dot = x[a][v].dot(&x[b][v]);
                let bb = b_pairing(s, v, &x[a][v], &x[b][v])? + b_pairing(s, v, &jx[a][v], &jx[b][v])?;
                lab += w * (bb - (r_m + h * h) * dot);
                rab += w * 2.0 * dot;
            }
            if with_boundary {
                lab -= 2.0 * boundary_pairing(s, &x[a], &x[b]);
            }
            l[(a, b)] = lab;
            l[(b, a)] = lab;
            r[(a, b)] = rab;
            r[(b, a)] = rab;
        }
    }
    let eta_star = if q == 0 { None } else { Some(max_generalized_eigenvalue(&l, &r)?) };
    Ok(HypothesisPencil { l_mat: l, r_mat: r, eta_star, with_boundary })
}

pub fn check_pencil(p: &HypothesisPencil) -> CheckItem {
    let Some(eta) = p.eta_star else {
        return CheckItem::new("pencil", "curvature hypothesis on harmonic fields", 0.0, 0.0, Verdict::NotApplicable)
            .with_witness(json!({ "q": 0 }))
            .with_note(Some("empty basis".into()));
    };
    let hypothesis = if p.holds_at(0.0) { "holds" } else { "fail-hypothesis" };
    CheckItem::new("pencil", "curvature hypothesis on harmonic fields", eta, 0.0, Verdict::Pass).with_witness(json!({
        "q": p.q(),
        "eta_star": eta,
        "hypothesis_at_zero": hypothesis,
        "with_boundary": p.with_boundary,
    }))
}

/// Fields of a tangential basis whose rotations have zero coordinate means.
#[derive(Debug, Clone)]
pub struct ZeroMeanSubspace {
    pub fields: Vec<HarmonicField>,
    /// Largest `|∫⟨⋆ξ, E_j⟩| / (area^{1/2} ‖ξ‖)` over the returned fields.
    pub constraint_residual: f64,
    /// `max(0, q − d)`.
    pub lower_bound: usize,
}

fn combine(s: &DiscreteSurface, basis: &[HarmonicField], c: &[f64]) -> HarmonicField {
    let mut out = basis[0].clone();
    let n = s.mesh.n_vertices();
    out.values = (0..n)
        .map(|v| {
            let mut acc = [0.0; 2];
            for (xi, w) in basis.iter().zip(c) {
                acc[0] += w * xi.values[v][0];
                acc[1] += w * xi.values[v][1];
            }
            acc
        })
        .collect();
    out.form = (0..out.form.len()).map(|e| basis.iter().zip(c).map(|(xi, w)| w * xi.form[e]).sum()).collect();
    out.face_vectors = (0..out.face_vectors.len())
        .map(|f| basis.iter().zip(c).fold(Point::zeros(s.mesh.d()), |acc, (xi, w)| acc + &xi.face_vectors[f] * *w))
        .collect();
    let norm: f64 = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    out.residual_div = basis.iter().map(|x| x.residual_div).fold(0.0, f64::max) * norm;
    out.residual_codiv = basis.iter().map(|x| x.residual_codiv).fold(0.0, f64::max) * norm;
    out
}

/// Null space of `ξ ↦ (∫⟨⋆ξ, E_j⟩)_j` inside the span of `basis`.
pub fn zero_boundary_mean_subspace(s: &DiscreteSurface, basis: &[HarmonicField]) -> ZeroMeanSubspace {
    let q = basis.len();
    let d = s.mesh.d();
    if !s.has_boundary() || q == 0 {
        return ZeroMeanSubspace { fields: basis.to_vec(), constraint_residual: 0.0, lower_bound: q };
    }
    let sqrt_area = s.geom.total_area().sqrt();
    let norms: Vec<f64> = basis.iter().map(|xi| xi.l2_norm(s)).collect();
    let mut cmat = DMatrix::zeros(d, q);
    for (k, xi) in basis.iter().enumerate() {
        for (j, c) in coordinate_integrals(s, &star_rotate(s, xi)).into_iter().enumerate() {
            cmat[(j, k)] = c / (sqrt_area * norms[k]);
        }
    }
    let gram = cmat.transpose() * &cmat;
    let eig = SymmetricEigen::new(gram);
    let mut fields = Vec::new();
    let mut residual: f64 = 0.0;
    for i in 0..q {
        // Singular values below 1e-8 relative to an O(1) constraint scale.
        if eig.eigenvalues[i].max(0.0).sqrt() < 1e-9 {
            let c: Vec<f64> = (0..q).map(|k| eig.eigenvectors[(k, i)] / norms[k]).collect();
            let xi = combine(s, basis, &c);
            let scale = sqrt_area * xi.l2_norm(s);
            let r = coordinate_integrals(s, &star_rotate(s, &xi)).iter().fold(0.0f64, |m, x| m.max(x.abs())) / scale;
            residual = residual.max(r);
            fields.push(xi);
        }
    }
    ZeroMeanSubspace { fields, constraint_residual: residual, lower_bound: q.saturating_sub(d) }
}

fn ceil_nonneg(x: f64) -> usize {
    x.max(0.0).ceil() as usize
}

/// Index lower bound from the harmonic-field count, when the hypothesis holds at `η = 0`.
pub fn verify_index_bound(
    s: &DiscreteSurface,
    spectrum: &TwistedSpectrum,
    pencil: &HypothesisPencil,
) -> CheckItem {
    let (g, r) = s.genus_and_boundary();
    let d = s.mesh.d() as f64;
    let boundary = s.has_boundary();
    let q = pencil.q();
    let real_bound = if boundary { (q as f64 - d) / (2.0 * d) } else { q as f64 / (2.0 * d) };
    let bound = ceil_nonneg(real_bound);
    let mut witness = json!({
        "genus": g,
        "boundary_components": r,
        "q": q,
        "d": d,
        "real_bound": real_bound,
        "integer_bound": bound,
        "index": spectrum.index,
        "spectrum_complete": spectrum.complete,
        "eta_star": pencil.eta_star,
    });
    if boundary && s.mesh.space.boundary_mean_curvature().map_or(false, |h| h >= 0.0) && s.mesh.d() == 3 {
        witness["mean_convex_bound"] = json!(ceil_nonneg((2.0 * g as f64 + r as f64 - 4.0) / 6.0));
    }
    if !pencil.holds_at(0.0) {
        return CheckItem::new("bound", "index lower bound from harmonic fields", spectrum.index as f64, bound as f64, Verdict::NotApplicable)
            .with_witness(witness)
            .with_note(Some("hypothesis fails at eta = 0".into()));
    }
    let verdict = if spectrum.index >= bound { Verdict::Pass } else { Verdict::Fail };
    let note = match (verdict, spectrum.complete) {
        (Verdict::Fail, false) => Some("spectrum incomplete: computed index is only a lower bound".into()),
        _ if q == 0 => Some("no harmonic fields: bound 0".into()),
        _ => None,
    };
    CheckItem::new("bound", "index lower bound from harmonic fields", spectrum.index as f64, bound as f64, verdict)
        .with_witness(witness)
        .with_note(note)
}

/// Eigenvalues strictly below `eta` (with the `ε` margin) against the count
/// forced by the harmonic fields.
pub fn concentration_count(
    s: &DiscreteSurface,
    spectrum: &TwistedSpectrum,
    pencil: &HypothesisPencil,
    eta: f64,
    subspace_dim: Option<usize>,
) -> CheckItem {
    let d = s.mesh.d() as f64;
    let q = pencil.q();
    let boundary = s.has_boundary();
    let real_bound = if boundary { (q as f64 - d) / (2.0 * d) } else { q as f64 / (2.0 * d) };
    let bound = ceil_nonneg(real_bound);
    let count = spectrum.count_below(eta);
    let witness = json!({
        "eta": eta,
        "eta_star": pencil.eta_star,
        "q": q,
        "d": d,
        "zero_mean_subspace": subspace_dim,
        "real_bound": real_bound,
        "integer_bound": bound,
        "count": count,
        "epsilon": spectrum.epsilon,
        "strict": true,
    });
    let name = "concentration";
    let anchor = "eigenvalues below eta forced by harmonic fields";
    if q == 0 {
        return CheckItem::new(name, anchor, count as f64, 0.0, Verdict::Pass)
            .with_witness(witness)
            .with_note(Some("no harmonic fields: vacuous".into()));
    }
    if !pencil.holds_at(eta) {
        return CheckItem::new(name, anchor, count as f64, bound as f64, Verdict::NotApplicable)
            .with_witness(witness)
            .with_note(Some("eta does not exceed eta_star".into()));
    }
    let complete = spectrum.eigenvalues.last().map_or(false, |&l| l >= eta - spectrum.epsilon);
    let verdict = if count >= bound { Verdict::Pass } else { Verdict::Fail };
    let note = (verdict == Verdict::Fail && !complete).then(|| "too few modes computed to reach eta".to_string());
    CheckItem::new(name, anchor, count as f64, bound as f64, verdict).with_witness(witness).with_note(note)
}
