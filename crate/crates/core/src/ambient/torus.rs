//! Flat 2-tori embedded in ℝ⁶ by three circles with linear phases.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Frequencies and radii of the map
/// `f(u,v) = (C₁ e^{i(a₁u+b₁v)}, C₂ e^{i(a₂u+b₂v)}, C₃ e^{i b₃ v})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusEmbeddingData {
    pub alpha: f64,
    pub beta: f64,
    pub k: [u32; 2],
    pub l: [u32; 2],
    pub a: [f64; 3],
    pub b: [f64; 3],
    /// Squared radii `Cᵢ²`.
    pub radii_sq: [f64; 3],
    /// Max-norm residual of the isometry system.
    pub residual: f64,
    /// Dimension of the solution set of the isometry system.
    pub solution_dim: usize,
    /// Whether the window inequalities hold when both are read on `l₁/k₁`.
    pub printed_window_satisfied: bool,
    /// Generators of the period lattice of `f` in the (u,v) chart.
    pub lattice: [[f64; 2]; 2],
    pub rectangular: bool,
}

/// Outcome of plugging candidate radii into the isometry system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateCheck {
    pub candidate: [f64; 3],
    /// `(g_uu, g_uv, g_vv)` produced by the candidate.
    pub metric: [f64; 3],
    pub residual: f64,
    /// Best uniform dilation `λ` with metric ≈ λ·identity.
    pub dilation: f64,
    pub residual_after_dilation: f64,
    pub sff_norm_sq: f64,
}

const TARGET: [f64; 3] = [1.0, 0.0, 1.0];

fn system(a: &[f64; 3], b: &[f64; 3]) -> Matrix3<f64> {
    let mut g = Matrix3::zeros();
    for i in 0..3 {
        g[(0, i)] = a[i] * a[i];
        g[(1, i)] = a[i] * b[i];
        g[(2, i)] = b[i] * b[i];
    }
    g
}

fn validate_lattice(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha.is_finite() && beta.is_finite()) || !(0.0..=0.5).contains(&alpha) || beta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= alpha <= 1/2 and beta > 0, got alpha={alpha}, beta={beta}"
        )));
    }
    if alpha * alpha + beta * beta < 1.0 - 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "need alpha^2 + beta^2 >= 1, got {}",
            alpha * alpha + beta * beta
        )));
    }
    Ok(())
}

impl TorusEmbeddingData {
    /// Solves for the radii given the lattice integers.
    pub fn solve(alpha: f64, beta: f64, k1: u32, l1: u32, k2: u32, l2: u32) -> Result<Self> {
        validate_lattice(alpha, beta)?;
        if alpha == 0.0 {
            return Self::rectangular(beta);
        }
        if k1 == 0 || l1 == 0 || k2 == 0 || l2 == 0 {
            return Err(Error::InvalidParameter("k1, l1, k2, l2 must be positive integers".into()));
        }
        let s = (alpha * alpha + beta * beta).sqrt();
        let rho = alpha / beta * s;
        let q1 = l1 as f64 / k1 as f64;
        let q2 = l2 as f64 / k2 as f64;
        let upper_ok = rho < q1 && q1 < (alpha / beta + 1.0) * s;
        let lower_ok = (alpha / beta - 1.0) * s < q2 && q2 < rho;
        if !upper_ok {
            return Err(Error::WindowViolation(format!(
                "l1/k1 = {q1} outside ({rho}, {})",
                (alpha / beta + 1.0) * s
            )));
        }
        if !lower_ok {
            return Err(Error::WindowViolation(format!(
                "l2/k2 = {q2} outside ({}, {rho})",
                (alpha / beta - 1.0) * s
            )));
        }
        let printed_window_satisfied = upper_ok && (alpha / beta - 1.0) * s < q1 && q1 < rho;

        let a = [2.0 * PI * k1 as f64, 2.0 * PI * k2 as f64, 0.0];
        let freq = |k: u32, l: u32| 2.0 * PI / s * (l as f64 - k as f64 * rho);
        let b = [freq(k1, l1), freq(k2, l2), 2.0 * PI / s];
        let g = system(&a, &b);
        let (radii_sq, solution_dim) = least_norm_nonnegative(&g, &Vector3::from(TARGET))?;
        if radii_sq.iter().any(|&c| c <= 0.0) {
            return Err(Error::NoPositiveSolution(format!("radii^2 = {radii_sq:?}")));
        }
        let residual = (g * Vector3::from(radii_sq) - Vector3::from(TARGET)).amax();
        Ok(Self {
            alpha,
            beta,
            k: [k1, k2],
            l: [l1, l2],
            a,
            b,
            radii_sq,
            residual,
            solution_dim,
            printed_window_satisfied,
            lattice: [[1.0, 0.0], [rho, s]],
            rectangular: false,
        })
    }

    /// The two-circle embedding of `ℝ²/⟨(1,0),(0,β)⟩`.
    pub fn rectangular(beta: f64) -> Result<Self> {
        validate_lattice(0.0, beta)?;
        let a = [2.0 * PI, 0.0, 0.0];
        let b = [0.0, 2.0 * PI / beta, 0.0];
        let radii_sq = [1.0 / (4.0 * PI * PI), beta * beta / (4.0 * PI * PI), 0.0];
        let g = system(&a, &b);
        let residual = (g * Vector3::from(radii_sq) - Vector3::from(TARGET)).amax();
        Ok(Self {
            alpha: 0.0,
            beta,
            k: [1, 0],
            l: [0, 1],
            a,
            b,
            radii_sq,
            residual,
            solution_dim: 0,
            printed_window_satisfied: true,
            lattice: [[1.0, 0.0], [0.0, beta]],
            rectangular: true,
        })
    }

    /// Hexagonal torus with the smallest admissible integers.
    pub fn hexagonal() -> Result<Self> {
        Self::solve(0.5, 3f64.sqrt() / 2.0, 1, 1, 2, 1)
    }

    pub fn radii(&self) -> [f64; 3] {
        self.radii_sq.map(f64::sqrt)
    }

    /// Number of circle factors with nonzero radius.
    pub fn circles(&self) -> usize {
        if self.rectangular {
            2
        } else {
            3
        }
    }

    /// Ambient dimension of `f × id`.
    pub fn ambient_dim(&self) -> usize {
        2 * self.circles() + 1
    }

    pub fn phases(&self, u: f64, v: f64) -> [f64; 3] {
        [0, 1, 2].map(|i| self.a[i] * u + self.b[i] * v)
    }

    /// `Σ Cᵢ²(aᵢ²+bᵢ²)²` for the given squared radii.
    pub fn sff_norm_sq_with(&self, radii_sq: &[f64; 3]) -> f64 {
        (0..3)
            .map(|i| {
                let w = self.a[i] * self.a[i] + self.b[i] * self.b[i];
                radii_sq[i] * w * w
            })
            .sum()
    }

    pub fn sff_norm_sq(&self) -> f64 {
        self.sff_norm_sq_with(&self.radii_sq)
    }

    /// Plugs candidate squared radii into the isometry system.
    pub fn check_candidate(&self, candidate: [f64; 3]) -> CandidateCheck {
        let g = system(&self.a, &self.b) * Vector3::from(candidate);
        let residual = (g - Vector3::from(TARGET)).amax();
        let dilation = 0.5 * (g[0] + g[2]);
        let residual_after_dilation =
            (g - dilation * Vector3::from(TARGET)).amax() / dilation.abs().max(f64::MIN_POSITIVE);
        CandidateCheck {
            candidate,
            metric: [g[0], g[1], g[2]],
            residual,
            dilation,
            residual_after_dilation,
            sff_norm_sq: self.sff_norm_sq_with(&candidate),
        }
    }
}

/// Squared radii quoted for the hexagonal torus.
pub fn hexagonal_candidate() -> [f64; 3] {
    let r3 = 3f64.sqrt();
    [1.0, 0.5 * (r3 - 1.0), (11.0 + 2.0 * r3) / 6.0]
}

/// Least-norm nonnegative solution of `g x = t` and the dimension of its solution set.
fn least_norm_nonnegative(g: &Matrix3<f64>, t: &Vector3<f64>) -> Result<([f64; 3], usize)> {
    let svd = g.svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.max();
    let tol = smax * 1e-12;
    let mut x = Vector3::zeros();
    let mut null = Vec::new();
    for i in 0..3 {
        let s = svd.singular_values[i];
        let vi = vt.row(i).transpose();
        if s > tol {
            x += vi * (u.column(i).dot(t) / s);
        } else {
            null.push(vi);
        }
    }
    if (g * x - t).amax() > 1e-9 * t.amax().max(1.0) {
        return Err(Error::NoPositiveSolution("isometry system is inconsistent".into()));
    }
    if x.iter().all(|&v| v >= 0.0) || null.is_empty() {
        return Ok(([x[0], x[1], x[2]], null.len()));
    }
    if null.len() > 1 {
        return Err(Error::NoPositiveSolution(
            "solution set of dimension > 1 has no nonnegative least-norm point".into(),
        ));
    }
    // x(t) = x + t n; the feasible t form an interval, |x(t)|² is minimal at t = 0.
    let n = &null[0];
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..3 {
        if n[i].abs() < 1e-15 {
            if x[i] < 0.0 {
                return Err(Error::NoPositiveSolution("no nonnegative radii".into()));
            }
        } else if n[i] > 0.0 {
            lo = lo.max(-x[i] / n[i]);
        } else {
            hi = hi.min(-x[i] / n[i]);
        }
    }
    if lo > hi {
        return Err(Error::NoPositiveSolution("no nonnegative radii".into()));
    }
    let tt = 0.0f64.clamp(lo, hi);
    let y = x + n * tt;
    Ok(([y[0], y[1], y[2]], 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hexagonal_frequencies() {
        let t = TorusEmbeddingData::hexagonal().unwrap();
        let r3 = 3f64.sqrt();
        assert_eq!(t.a[0], 2.0 * PI);
        assert_eq!(t.a[1], 4.0 * PI);
        assert!((t.b[0] - 2.0 * PI * (1.0 - 1.0 / r3)).abs() < 1e-12);
        assert!((t.b[1] - 2.0 * PI * (1.0 - 2.0 / r3)).abs() < 1e-12);
        assert!((t.b[2] - 2.0 * PI).abs() < 1e-12);
        assert!(t.residual < 1e-10);
        assert!(!t.printed_window_satisfied);
    }

    #[test]
    fn rectangular_radii() {
        let t = TorusEmbeddingData::rectangular(1.0).unwrap();
        assert!((t.radii()[0] - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert!((t.sff_norm_sq() - 8.0 * PI * PI).abs() < 1e-9);
        assert_eq!(t.ambient_dim(), 5);
    }

    #[test]
    fn window_is_enforced() {
        assert!(matches!(
            TorusEmbeddingData::solve(0.5, 3f64.sqrt() / 2.0, 1, 2, 2, 1),
            Err(Error::WindowViolation(_))
        ));
        assert!(matches!(
            TorusEmbeddingData::solve(0.6, 1.0, 1, 1, 1, 1),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn rank_deficient_picks_nonnegative_least_norm() {
        // x₁ + x₂ = 1 twice, x₃ = 0 free direction removed.
        let g = Matrix3::new(1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        let (x, dim) = least_norm_nonnegative(&g, &Vector3::new(1.0, 1.0, 0.5)).unwrap();
        assert_eq!(dim, 1);
        assert!((x[0] - 0.5).abs() < 1e-12 && (x[1] - 0.5).abs() < 1e-12);
    }
}
