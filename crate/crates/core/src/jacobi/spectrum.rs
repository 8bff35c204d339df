use serde::{Deserialize, Serialize};

use super::JacobiAssembly;
use crate::error::{Error, Result};
use crate::linalg::{lowest_eigenpairs, EigenOptions, SolverPath};

/// How the zero band `|λ| ≤ ε` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EpsilonRule {
    /// `ε = c · mean |λ|` over the first eight computed modes.
    RelativeMean(f64),
    /// The larger of `RelativeMean(c)` and the expected discretization error
    /// of a null mode, `h² (max|V| + 4π/area)²` with `h` the longest edge.
    Discretization(f64),
    Absolute(f64),
}

#[derive(Debug, Clone)]
pub struct SpectrumOptions {
    pub k: usize,
    /// Restrict to `∫u = 0`. Without it the minimal-surface (unconstrained) spectrum is returned.
    pub twisted: bool,
    pub epsilon: EpsilonRule,
    pub eigen: EigenOptions,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            k: 8,
            twisted: true,
            epsilon: EpsilonRule::Discretization(1e-6),
            eigen: EigenOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TwistedSpectrum {
    pub eigenvalues: Vec<f64>,
    /// Mass-orthonormal.
    pub eigenfunctions: Vec<Vec<f64>>,
    pub index: usize,
    pub nullity: usize,
    pub epsilon: f64,
    pub epsilon_rule: EpsilonRule,
    pub residuals: Vec<f64>,
    /// `|∫u| / ∫|u|` for each eigenfunction.
    pub mean_residuals: Vec<f64>,
    /// `|Q(u,u)/M(u,u) − λ| / max(1, |λ|)`.
    pub rayleigh_residuals: Vec<f64>,
    pub twisted: bool,
    pub path: SolverPath,
    /// Whether every mode below the zero band was captured (the largest
    /// computed eigenvalue is above `−ε`).
    pub complete: bool,
}

/// JSON export of a spectrum.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SpectrumRecord {
    pub eigenvalues: Vec<f64>,
    pub index: usize,
    pub nullity: usize,
    pub epsilon: f64,
    pub residuals: Vec<f64>,
    pub twisted: bool,
    pub complete: bool,
}

impl TwistedSpectrum {
    pub fn record(&self) -> SpectrumRecord {
        SpectrumRecord {
            eigenvalues: self.eigenvalues.clone(),
            index: self.index,
            nullity: self.nullity,
            epsilon: self.epsilon,
            residuals: self.residuals.clone(),
            twisted: self.twisted,
            complete: self.complete,
        }
    }

    /// Number of eigenvalues strictly below `eta − ε`.
    pub fn count_below(&self, eta: f64) -> usize {
        self.eigenvalues.iter().filter(|&&l| l < eta - self.epsilon).count()
    }
}

/// Lowest eigenpairs of the pencil `(K − V − B, M)` on `∫u = 0`.
pub fn twisted_spectrum(asm: &JacobiAssembly, opts: &SpectrumOptions) -> Result<TwistedSpectrum> {
    if opts.k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let a = asm.operator();
    let constraint = opts.twisted.then_some(asm.constraint.as_slice());
    let eo = EigenOptions { k: opts.k, ..opts.eigen.clone() };
    let sol = lowest_eigenpairs(&a, &asm.mass, constraint, &eo)?;
    let relative = |c: f64| {
        let m = sol.values.len().min(8);
        c * sol.values[..m].iter().map(|l| l.abs()).sum::<f64>() / m as f64
    };
    let epsilon = match opts.epsilon {
        EpsilonRule::RelativeMean(c) => relative(c),
        EpsilonRule::Discretization(c) => {
            let vmax = asm.potential_values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let scale = vmax + 4.0 * std::f64::consts::PI / asm.area;
            relative(c).max(asm.mesh_size.powi(2) * scale * scale)
        }
        EpsilonRule::Absolute(e) => e,
    };
    let mut mean_residuals = Vec::with_capacity(sol.values.len());
    let mut rayleigh_residuals = Vec::with_capacity(sol.values.len());
    for (u, &lam) in sol.vectors.iter().zip(&sol.values) {
        let l1: f64 = u.iter().zip(&asm.constraint).map(|(x, c)| x.abs() * c).sum();
        mean_residuals.push(asm.integral(u).abs() / l1.max(f64::MIN_POSITIVE));
        let rq = asm.q(u, u) / asm.mass.bilinear(u, u);
        rayleigh_residuals.push((rq - lam).abs() / lam.abs().max(1.0));
    }
    let index = sol.values.iter().filter(|&&l| l < -epsilon).count();
    let nullity = sol.values.iter().filter(|&&l| l.abs() <= epsilon).count();
    let complete = sol.values.last().map_or(false, |&l| l > epsilon) || sol.values.len() == asm.n() - usize::from(opts.twisted);
    Ok(TwistedSpectrum {
        eigenvalues: sol.values,
        eigenfunctions: sol.vectors,
        index,
        nullity,
        epsilon,
        epsilon_rule: opts.epsilon,
        residuals: sol.residuals,
        mean_residuals,
        rayleigh_residuals,
        twisted: opts.twisted,
        path: sol.path,
        complete,
    })
}

/// Like [`twisted_spectrum`], doubling `k` until the largest computed
/// eigenvalue clears the zero band (at most 256 modes).
pub fn complete_spectrum(asm: &JacobiAssembly, opts: &SpectrumOptions) -> Result<TwistedSpectrum> {
    let cap = 256.min(asm.n() - usize::from(opts.twisted)).max(opts.k);
    let mut o = opts.clone();
    loop {
        let spec = twisted_spectrum(asm, &o)?;
        if spec.complete || o.k >= cap {
            return Ok(spec);
        }
        o.k = (2 * o.k).min(cap);
    }
}

/// `(index, nullity)`; errors when the computed modes may not contain the whole
/// negative and null spectrum.
pub fn cmc_index(spec: &TwistedSpectrum) -> Result<(usize, usize)> {
    if !spec.complete {
        return Err(Error::NoConvergence(format!(
            "largest of {} computed eigenvalues is not above the zero band; request more modes",
            spec.eigenvalues.len()
        )));
    }
    Ok((spec.index, spec.nullity))
}
