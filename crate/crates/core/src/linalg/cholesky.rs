//! Sparse Cholesky (LLᵀ) with a reusable symbolic analysis: a fill-reducing
//! permutation, the elimination tree, and the factor pattern are computed
//! once; numeric refactorization on the same pattern is then a values-only
//! pass. The τ-scan of the fourth-order solver leans on this reuse.

use super::ordering::{min_degree_order, permute_symmetric};
use super::sparse::SparseMatrix;
use crate::error::{Error, Result};

/// Pattern-level analysis of a symmetric positive definite matrix.
pub struct CholeskySymbolic {
    n: usize,
    perm: Vec<usize>,
    /// permuted pattern of the analyzed matrix
    ap_indptr: Vec<usize>,
    ap_indices: Vec<usize>,
    /// map from original nnz position to permuted nnz position
    value_map: Vec<usize>,
    /// row-major pattern of the strictly lower factor (ereach sets)
    row_ptr: Vec<usize>,
    row_cols: Vec<usize>,
    /// the same pattern stored by columns (rows ascending per column)
    col_ptr: Vec<usize>,
    col_rows: Vec<usize>,
}

/// Numeric factor: strictly lower entries by column + diagonal.
pub struct CholeskyFactor<'a> {
    sym: &'a CholeskySymbolic,
    col_vals: Vec<f64>,
    diag: Vec<f64>,
}

impl CholeskySymbolic {
    /// Analyze the pattern of a symmetric matrix.
    pub fn analyze(a: &SparseMatrix) -> Result<CholeskySymbolic> {
        if a.rows != a.cols {
            return Err(Error::InvalidParameter(
                "Cholesky needs a square matrix".into(),
            ));
        }
        let n = a.rows;
        let perm = min_degree_order(a);
        let mut inv_perm = vec![0usize; n];
        for (k, &p) in perm.iter().enumerate() {
            inv_perm[p] = k;
        }
        let ap = permute_symmetric(a, &perm);
        // map original entry positions to permuted positions
        let mut value_map = vec![usize::MAX; a.nnz()];
        for i in 0..n {
            for p in a.indptr[i]..a.indptr[i + 1] {
                let (pi, pj) = (inv_perm[i], inv_perm[a.indices[p]]);
                let lo = ap.indptr[pi];
                let hi = ap.indptr[pi + 1];
                let pos = ap.indices[lo..hi]
                    .binary_search(&pj)
                    .expect("permuted pattern consistent")
                    + lo;
                value_map[p] = pos;
            }
        }
        // elimination tree (Liu) on the permuted pattern
        let mut parent = vec![usize::MAX; n];
        let mut ancestor = vec![usize::MAX; n];
        for k in 0..n {
            for p in ap.indptr[k]..ap.indptr[k + 1] {
                let mut i = ap.indices[p];
                if i >= k {
                    continue;
                }
                while i != usize::MAX && i != k {
                    let next = ancestor[i];
                    ancestor[i] = k;
                    if next == usize::MAX {
                        parent[i] = k;
                    }
                    i = next;
                }
            }
        }
        // row pattern of L via etree reach, ascending per row
        let mut row_ptr = vec![0usize; n + 1];
        let mut row_cols: Vec<usize> = Vec::new();
        let mut mark = vec![usize::MAX; n];
        let mut stack: Vec<usize> = Vec::new();
        for k in 0..n {
            mark[k] = k;
            stack.clear();
            for p in ap.indptr[k]..ap.indptr[k + 1] {
                let mut i = ap.indices[p];
                if i >= k {
                    continue;
                }
                while i != usize::MAX && mark[i] != k {
                    mark[i] = k;
                    stack.push(i);
                    i = parent[i];
                }
            }
            stack.sort_unstable();
            row_cols.extend_from_slice(&stack);
            row_ptr[k + 1] = row_cols.len();
        }
        // column view of the same pattern
        let mut col_ptr = vec![0usize; n + 1];
        for &j in &row_cols {
            col_ptr[j + 1] += 1;
        }
        for j in 0..n {
            col_ptr[j + 1] += col_ptr[j];
        }
        let mut cursor = col_ptr.clone();
        let mut col_rows = vec![0usize; row_cols.len()];
        for k in 0..n {
            for p in row_ptr[k]..row_ptr[k + 1] {
                let j = row_cols[p];
                col_rows[cursor[j]] = k;
                cursor[j] += 1;
            }
        }
        Ok(CholeskySymbolic {
            n,
            perm,
            ap_indptr: ap.indptr,
            ap_indices: ap.indices,
            value_map,
            row_ptr,
            row_cols,
            col_ptr,
            col_rows,
        })
    }

    pub fn fill_nnz(&self) -> usize {
        self.col_rows.len() + self.n
    }

    /// Numeric factorization of a matrix sharing the analyzed pattern.
    pub fn factor(&self, a: &SparseMatrix) -> Result<CholeskyFactor<'_>> {
        if a.nnz() != self.value_map.len() {
            return Err(Error::FactorizationFailure(
                "matrix pattern differs from the analyzed one".into(),
            ));
        }
        let n = self.n;
        let mut ap_vals = vec![0.0f64; self.ap_indices.len()];
        for (p, &dst) in self.value_map.iter().enumerate() {
            ap_vals[dst] += a.values[p];
        }
        let mut col_vals = vec![0.0f64; self.col_rows.len()];
        let mut diag = vec![0.0f64; n];
        let mut cur = self.col_ptr.clone();
        let mut x = vec![0.0f64; n];
        let mut xstamp = vec![usize::MAX; n];
        for k in 0..n {
            let mut akk = 0.0;
            for p in self.ap_indptr[k]..self.ap_indptr[k + 1] {
                let j = self.ap_indices[p];
                if j < k {
                    x[j] = ap_vals[p];
                    xstamp[j] = k;
                } else if j == k {
                    akk = ap_vals[p];
                }
            }
            let mut sq = 0.0;
            for rp in self.row_ptr[k]..self.row_ptr[k + 1] {
                let j = self.row_cols[rp];
                let xj = if xstamp[j] == k { x[j] } else { 0.0 };
                let lkj = xj / diag[j];
                sq += lkj * lkj;
                // push updates along column j (entries with rows in (j, k))
                for p in self.col_ptr[j]..cur[j] {
                    let i = self.col_rows[p];
                    if xstamp[i] != k {
                        x[i] = 0.0;
                        xstamp[i] = k;
                    }
                    x[i] -= col_vals[p] * lkj;
                }
                debug_assert_eq!(self.col_rows[cur[j]], k);
                col_vals[cur[j]] = lkj;
                cur[j] += 1;
            }
            let d = akk - sq;
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::FactorizationFailure(format!(
                    "non-positive pivot {d} at column {k}"
                )));
            }
            diag[k] = d.sqrt();
        }
        Ok(CholeskyFactor {
            sym: self,
            col_vals,
            diag,
        })
    }
}

impl CholeskyFactor<'_> {
    /// Solve A x = b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0f64; self.sym.n];
        self.solve_into(b, &mut x);
        x
    }

    /// Solve A x = b without allocating the result.
    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) {
        let s = self.sym;
        let n = s.n;
        debug_assert_eq!(b.len(), n);
        let mut y = vec![0.0f64; n];
        for k in 0..n {
            y[k] = b[s.perm[k]];
        }
        // forward: (L + D) z = y, column-oriented
        for j in 0..n {
            let zj = y[j] / self.diag[j];
            y[j] = zj;
            for p in s.col_ptr[j]..s.col_ptr[j + 1] {
                y[s.col_rows[p]] -= self.col_vals[p] * zj;
            }
        }
        // backward: (L + D)ᵀ x = z
        for j in (0..n).rev() {
            let mut acc = y[j];
            for p in s.col_ptr[j]..s.col_ptr[j + 1] {
                acc -= self.col_vals[p] * y[s.col_rows[p]];
            }
            y[j] = acc / self.diag[j];
        }
        for k in 0..n {
            x[s.perm[k]] = y[k];
        }
    }
}
