use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{axpy, dot, norm, CsrMatrix, EnvelopeCholesky};
use crate::error::{Error, Result};
use crate::par;

/// Which algorithm produced an [`EigenSolution`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverPath {
    Dense,
    ShiftInvert,
}

#[derive(Clone, Debug)]
pub struct EigenOptions {
    /// Number of wanted eigenpairs (algebraically smallest).
    pub k: usize,
    /// Problems with fewer unknowns are solved densely.
    pub dense_threshold: usize,
    /// Relative residual tolerance for the iterative path.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// A value believed to lie below the spectrum; lowered automatically
    /// until `A - shift M` factors.
    pub shift: Option<f64>,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            k: 8,
            dense_threshold: 500,
            tol: 1e-10,
            max_iter: 2000,
            seed: 0x5eed,
            shift: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigenSolution {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Mass-orthonormal eigenvectors, one per value.
    pub vectors: Vec<Vec<f64>>,
    /// Residual of each pair relative to `|A||u| + |λ||M||u|` (constraint multiplier removed).
    pub residuals: Vec<f64>,
    pub path: SolverPath,
    pub iterations: usize,
    pub shift: f64,
}

/// Lowest eigenpairs of `A u = lambda M u` subject to `c^T u = 0` when a
/// constraint vector is supplied.
///
/// `A` must be symmetric and `M` symmetric positive definite. The constraint
/// is eliminated by projection so the reduced pencil stays symmetric definite.
pub fn lowest_eigenpairs(
    a: &CsrMatrix,
    m: &CsrMatrix,
    constraint: Option<&[f64]>,
    opts: &EigenOptions,
) -> Result<EigenSolution> {
    let n = a.dim();
    if m.dim() != n {
        return Err(Error::InvalidParameter("pencil dimension mismatch".into()));
    }
    let n_eff = n - usize::from(constraint.is_some());
    let k = opts.k.min(n_eff);
    if k == 0 {
        return Err(Error::InvalidParameter("no eigenpairs requested".into()));
    }
    let block = (k + (k / 2).max(8)).min(n_eff);
    if n < opts.dense_threshold || 3 * block >= n_eff {
        dense(a, m, constraint, k)
    } else {
        shift_invert(a, m, constraint, k, block, opts)
    }
}

fn residual(a: &CsrMatrix, m: &CsrMatrix, c: Option<&[f64]>, lam: f64, u: &[f64]) -> f64 {
    let au = a.matvec(u);
    let mu = m.matvec(u);
    let mut r: Vec<f64> = au.iter().zip(&mu).map(|(x, y)| x - lam * y).collect();
    if let Some(c) = c {
        let coef = dot(c, &r) / dot(c, c);
        axpy(-coef, c, &mut r);
    }
    let scale = norm(&a.abs_matvec(u)) + lam.abs() * norm(&m.abs_matvec(u));
    norm(&r) / scale.max(f64::MIN_POSITIVE)
}

fn dense(a: &CsrMatrix, m: &CsrMatrix, c: Option<&[f64]>, k: usize) -> Result<EigenSolution> {
    let n = a.dim();
    let md = m.to_dense();
    let chol = md
        .cholesky()
        .ok_or_else(|| Error::Singular("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(&a.to_dense())
        .ok_or_else(|| Error::Singular("triangular solve failed".into()))?;
    let mut cmat = l
        .solve_lower_triangular(&x.transpose())
        .ok_or_else(|| Error::Singular("triangular solve failed".into()))?;
    cmat = (&cmat + cmat.transpose()) * 0.5;

    // Householder reflector whose first column spans the transformed constraint.
    let reflector = match c {
        Some(c) => {
            let g = l
                .solve_lower_triangular(&DVector::from_column_slice(c))
                .ok_or_else(|| Error::Singular("triangular solve failed".into()))?;
            let gn = g.norm();
            if gn == 0.0 {
                return Err(Error::InvalidParameter("zero constraint vector".into()));
            }
            let mut v = g.clone();
            v[0] += if g[0] >= 0.0 { gn } else { -gn };
            let vv = v.dot(&v);
            Some((v, vv))
        }
        None => None,
    };
    let reduced = match &reflector {
        Some((v, vv)) => {
            let cv = &cmat * v;
            let vcv = v.dot(&cv);
            let mut h = cmat.clone();
            h -= (v * cv.transpose() + &cv * v.transpose()) * (2.0 / vv);
            h += (v * v.transpose()) * (4.0 * vcv / (vv * vv));
            h.view((1, 1), (n - 1, n - 1)).into_owned()
        }
        None => cmat,
    };
    let eig = SymmetricEigen::new(reduced);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let lt = l.transpose();
    let mut values = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    for &idx in order.iter().take(k) {
        let y = eig.eigenvectors.column(idx);
        let w = match &reflector {
            Some((v, vv)) => {
                let mut w = DVector::zeros(n);
                w.rows_mut(1, n - 1).copy_from(&y);
                let coef = 2.0 * v.dot(&w) / vv;
                w - v * coef
            }
            None => y.into_owned(),
        };
        let u = lt
            .solve_upper_triangular(&w)
            .ok_or_else(|| Error::Singular("triangular solve failed".into()))?;
        values.push(eig.eigenvalues[idx]);
        vectors.push(u.as_slice().to_vec());
    }
    let residuals = vectors
        .iter()
        .zip(&values)
        .map(|(u, &lam)| residual(a, m, c, lam, u))
        .collect();
    Ok(EigenSolution {
        values,
        vectors,
        residuals,
        path: SolverPath::Dense,
        iterations: 0,
        shift: 0.0,
    })
}

struct ShiftedOperator<'a> {
    m: &'a CsrMatrix,
    factor: EnvelopeCholesky,
    c: Option<&'a [f64]>,
    z: Vec<f64>,
    cz: f64,
}

impl<'a> ShiftedOperator<'a> {
    fn new(a: &CsrMatrix, m: &'a CsrMatrix, c: Option<&'a [f64]>, shift: f64) -> Result<Self> {
        let s = CsrMatrix::linear_combination(&[(1.0, a), (-shift, m)]);
        let factor = EnvelopeCholesky::factor(&s)?;
        let (z, cz) = match c {
            Some(c) => {
                let z = factor.solve(c);
                let cz = dot(c, &z);
                (z, cz)
            }
            None => (Vec::new(), 1.0),
        };
        Ok(ShiftedOperator { m, factor, c, z, cz })
    }

    /// `(A - shift M)^{-1} M x`, restricted to the constraint hyperplane.
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.factor.solve(&self.m.matvec(x));
        if let Some(c) = self.c {
            let coef = dot(c, &y) / self.cz;
            axpy(-coef, &self.z, &mut y);
        }
        y
    }
}

fn project(c: Option<&[f64]>, x: &mut [f64]) {
    if let Some(c) = c {
        let coef = dot(c, x) / dot(c, c);
        axpy(-coef, c, x);
    }
}

/// Two-pass modified Gram-Schmidt in the `M` inner product. Columns that
/// collapse are replaced by fresh random directions.
fn m_orthonormalize(m: &CsrMatrix, c: Option<&[f64]>, cols: &mut [Vec<f64>], rng: &mut ChaCha8Rng) {
    let mut mcols: Vec<Vec<f64>> = Vec::with_capacity(cols.len());
    for j in 0..cols.len() {
        let mut attempts = 0;
        loop {
            let before = {
                let mx = m.matvec(&cols[j]);
                dot(&cols[j], &mx).sqrt()
            };
            for _pass in 0..2 {
                for i in 0..j {
                    let coef = dot(&mcols[i], &cols[j]);
                    let (head, tail) = cols.split_at_mut(j);
                    axpy(-coef, &head[i], &mut tail[0]);
                }
            }
            let mx = m.matvec(&cols[j]);
            let nrm = dot(&cols[j], &mx).sqrt();
            if nrm > 1e-10 * before && nrm > 0.0 {
                cols[j].iter_mut().for_each(|v| *v /= nrm);
                mcols.push(mx.into_iter().map(|v| v / nrm).collect());
                break;
            }
            attempts += 1;
            assert!(attempts < 20, "cannot complete an M-orthonormal basis");
            let len = cols[j].len();
            cols[j] = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
            project(c, &mut cols[j]);
        }
    }
}

fn shift_invert(
    a: &CsrMatrix,
    m: &CsrMatrix,
    c: Option<&[f64]>,
    k: usize,
    block: usize,
    opts: &EigenOptions,
) -> Result<EigenSolution> {
    let n = a.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut shift = opts.shift.unwrap_or(-1.0);
    let mut op = None;
    for attempt in 0..64 {
        match ShiftedOperator::new(a, m, c, shift) {
            Ok(o) => {
                op = Some(o);
                break;
            }
            Err(_) => shift -= shift.abs().max(1.0) * if attempt < 8 { 0.5 } else { 2.0 },
        }
    }
    let mut op = op.ok_or_else(|| Error::NoConvergence("no shift below the spectrum found".into()))?;

    let mut x: Vec<Vec<f64>> = (0..block)
        .map(|_| {
            let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            project(c, &mut v);
            v
        })
        .collect();
    m_orthonormalize(m, c, &mut x, &mut rng);

    let mut reshifted = false;
    let mut values = vec![0.0; block];
    let mut residuals = vec![f64::INFINITY; k];
    for it in 1..=opts.max_iter {
        let mut y = par::map_slice(&x, |col| op.apply(col));
        for col in y.iter_mut() {
            project(c, col);
        }
        m_orthonormalize(m, c, &mut y, &mut rng);
        let ay: Vec<Vec<f64>> = y.iter().map(|col| a.matvec(col)).collect();
        let small = DMatrix::from_fn(block, block, |i, j| 0.5 * (dot(&y[i], &ay[j]) + dot(&y[j], &ay[i])));
        let eig = SymmetricEigen::new(small);
        let mut order: Vec<usize> = (0..block).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        x = order
            .iter()
            .map(|&col| {
                let mut v = vec![0.0; n];
                for (i, yi) in y.iter().enumerate() {
                    axpy(eig.eigenvectors[(i, col)], yi, &mut v);
                }
                v
            })
            .collect();
        values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        residuals = par::map_range(k, |j| residual(a, m, c, values[j], &x[j]));
        let worst = residuals.iter().cloned().fold(0.0, f64::max);
        if worst < opts.tol {
            return Ok(EigenSolution {
                values: values[..k].to_vec(),
                vectors: x.into_iter().take(k).collect(),
                residuals,
                path: SolverPath::ShiftInvert,
                iterations: it,
                shift,
            });
        }
        // Move the pole closer once rough Ritz values are available.
        if !reshifted && it == 4 {
            reshifted = true;
            let spread = (values[k - 1] - values[0]).abs().max(1e-3 * values[0].abs()).max(1e-6);
            let target = values[0] - 0.5 * spread;
            if target > shift {
                if let Ok(o) = ShiftedOperator::new(a, m, c, target) {
                    op = o;
                    shift = target;
                }
            }
        }
    }
    let _ = values;
    Err(Error::NoConvergence(format!(
        "subspace iteration stalled; residuals {residuals:?}"
    )))
}
