use crate::par;

/// Compressed sparse row matrix with sorted, duplicate-free column indices.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds an `n x n` matrix from triplets, summing duplicates.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(i, _, _) in triplets {
            counts[i + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        let mut fill = counts.clone();
        for &(i, j, v) in triplets {
            cols[fill[i]] = j;
            vals[fill[i]] = v;
            fill[i] += 1;
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for i in 0..n {
            scratch.clear();
            scratch.extend((counts[i]..counts[i + 1]).map(|k| (cols[k], vals[k])));
            scratch.sort_by_key(|e| e.0);
            for &(j, v) in &scratch {
                if col_idx.len() > row_ptr[i] && *col_idx.last().unwrap() == j {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn zeros(n: usize) -> Self {
        CsrMatrix {
            n,
            row_ptr: vec![0; n + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map(|k| vals[k]).unwrap_or(0.0)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        par::map_range(self.n, |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(|(&j, v)| v * x[j]).sum()
        })
    }

    /// `|A| |x|`, entrywise absolute values; a scale for rounding errors of `A x`.
    pub fn abs_matvec(&self, x: &[f64]) -> Vec<f64> {
        par::map_range(self.n, |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(|(&j, v)| (v * x[j]).abs()).sum()
        })
    }

    /// `u^T A v`
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        let av = self.matvec(v);
        super::dot(u, &av)
    }

    /// `sum_k c_k A_k` over matrices of equal dimension.
    pub fn linear_combination(terms: &[(f64, &CsrMatrix)]) -> CsrMatrix {
        let n = terms.first().map(|t| t.1.n).unwrap_or(0);
        let mut trip = Vec::new();
        for &(c, m) in terms {
            assert_eq!(m.n, n, "dimension mismatch");
            for i in 0..n {
                let (cols, vals) = m.row(i);
                trip.extend(cols.iter().zip(vals).map(|(&j, &v)| (i, j, c * v)));
            }
        }
        CsrMatrix::from_triplets(n, &trip)
    }

    /// Largest `|A_ij - A_ji|` relative to `max |A_ij|`.
    pub fn relative_asymmetry(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst / scale
    }

    /// Adjacency lists (off-diagonal pattern) for ordering heuristics.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        (0..self.n)
            .map(|i| self.row(i).0.iter().copied().filter(|&j| j != i).collect())
            .collect()
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut d = nalgebra::DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                d[(i, j)] += v;
            }
        }
        d
    }

    /// Drops row and column `k`, renumbering the rest.
    pub fn remove_index(&self, k: usize) -> CsrMatrix {
        let mut trip = Vec::with_capacity(self.nnz());
        let map = |i: usize| if i < k { i } else { i - 1 };
        for i in (0..self.n).filter(|&i| i != k) {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if j != k {
                    trip.push((map(i), map(j), v));
                }
            }
        }
        CsrMatrix::from_triplets(self.n - 1, &trip)
    }
}
