use std::collections::VecDeque;

use super::CsrMatrix;
use crate::error::{Error, Result};

/// Reverse Cuthill-McKee ordering. Returns `perm` with `perm[new] = old`.
///
/// Each connected component is started from a pseudo-peripheral vertex found
/// by repeated breadth-first sweeps; ties are broken by vertex index.
pub fn reverse_cuthill_mckee(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut level = vec![usize::MAX; n];

    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        // pseudo-peripheral start
        let mut start = seed;
        let mut ecc = 0;
        for _ in 0..4 {
            let (last, depth) = bfs_last_level(adj, start, &degree, &mut level);
            if depth <= ecc {
                break;
            }
            ecc = depth;
            start = last;
        }
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            nbrs.sort_by_key(|&w| (degree[w], w));
            nbrs.dedup();
            for w in nbrs {
                if !visited[w] {
                    visited[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    order.reverse();
    order
}

fn bfs_last_level(adj: &[Vec<usize>], start: usize, degree: &[usize], level: &mut [usize]) -> (usize, usize) {
    let mut touched = vec![start];
    level[start] = 0;
    let mut queue = VecDeque::from([start]);
    let mut depth = 0;
    while let Some(v) = queue.pop_front() {
        depth = depth.max(level[v]);
        for &w in &adj[v] {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                touched.push(w);
                queue.push_back(w);
            }
        }
    }
    let last = touched
        .iter()
        .copied()
        .filter(|&v| level[v] == depth)
        .min_by_key(|&v| (degree[v], v))
        .unwrap_or(start);
    for v in touched {
        level[v] = usize::MAX;
    }
    (last, depth)
}

/// Cholesky factor `P A P^T = L L^T` stored in a row envelope.
#[derive(Clone, Debug)]
pub struct EnvelopeCholesky {
    n: usize,
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    /// Factors a symmetric positive definite matrix with an RCM ordering.
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let perm = reverse_cuthill_mckee(&a.adjacency());
        Self::factor_with_ordering(a, perm)
    }

    pub fn factor_with_ordering(a: &CsrMatrix, perm: Vec<usize>) -> Result<Self> {
        let n = a.dim();
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first = vec![0usize; n];
        for (i, f) in first.iter_mut().enumerate() {
            let (cols, _) = a.row(perm[i]);
            *f = cols.iter().map(|&c| inv[c]).filter(|&j| j <= i).min().unwrap_or(i).min(i);
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + (i - first[i] + 1));
        }
        let mut data = vec![0.0; start[n]];
        for i in 0..n {
            let (cols, vals) = a.row(perm[i]);
            for (&c, &v) in cols.iter().zip(vals) {
                let j = inv[c];
                if j <= i {
                    data[start[i] + j - first[i]] += v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            let row_i = start[i];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let mut s = data[row_i + j - fi];
                let (li, lj) = (row_i + k0 - fi, start[j] + k0 - fj);
                let len = j - k0;
                s -= super::dot(&data[li..li + len], &data[lj..lj + len]);
                let ljj = data[start[j] + j - fj];
                data[row_i + j - fi] = s / ljj;
            }
            let diag_pos = row_i + i - fi;
            let a_ii = data[diag_pos];
            let d = a_ii - data[row_i..diag_pos].iter().map(|x| x * x).sum::<f64>();
            if !(d > 1e-14 * a_ii.abs().max(f64::MIN_POSITIVE)) {
                return Err(Error::Singular(format!(
                    "non-positive pivot {d:.3e} at row {i} of {n}"
                )));
            }
            data[diag_pos] = d.sqrt();
        }
        Ok(EnvelopeCholesky {
            n,
            perm,
            first,
            start,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored factor entries.
    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = self.start[i];
            let s = super::dot(&self.data[row..row + i - fi], &y[fi..i]);
            y[i] = (y[i] - s) / self.data[row + i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = self.start[i];
            y[i] /= self.data[row + i - fi];
            let yi = y[i];
            for (k, l) in self.data[row..row + i - fi].iter().enumerate() {
                y[fi + k] -= l * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }

    /// Solve followed by one step of iterative refinement against `a`.
    pub fn solve_refined(&self, a: &CsrMatrix, b: &[f64]) -> Vec<f64> {
        let mut x = self.solve(b);
        let ax = a.matvec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let dx = self.solve(&r);
        super::axpy(1.0, &dx, &mut x);
        x
    }
}
