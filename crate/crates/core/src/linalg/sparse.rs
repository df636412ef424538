//! Compressed sparse row matrices with a triplet builder.

use crate::error::{Error, Result};

/// CSR matrix. Entries within a row are sorted by column and unique after
/// `finalize`.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
    /// Hint that the matrix is structurally and numerically symmetric.
    pub symmetric: bool,
}

/// Accumulates (i, j, v) triplets; duplicates are summed on finalize.
#[derive(Debug, Clone)]
pub struct TripletBuilder {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(rows: usize, cols: usize) -> Self {
        TripletBuilder {
            rows,
            cols,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols, "triplet ({i},{j}) out of range");
        if v != 0.0 {
            self.entries.push((i, j, v));
        }
    }

    pub fn finalize(mut self, symmetric: bool) -> Result<SparseMatrix> {
        for &(i, j, _) in &self.entries {
            if i >= self.rows || j >= self.cols {
                return Err(Error::InvalidParameter(format!(
                    "triplet index ({i},{j}) outside {}x{}",
                    self.rows, self.cols
                )));
            }
        }
        self.entries.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indices = Vec::with_capacity(self.entries.len());
        let mut values = Vec::with_capacity(self.entries.len());
        let mut row_of = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for &(i, j, v) in &self.entries {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(j);
                values.push(v);
                row_of.push(i);
                last = Some((i, j));
            }
        }
        let mut indptr = vec![0usize; self.rows + 1];
        for &i in &row_of {
            indptr[i + 1] += 1;
        }
        for r in 0..self.rows {
            indptr[r + 1] += indptr[r];
        }
        Ok(SparseMatrix {
            rows: self.rows,
            cols: self.cols,
            indptr,
            indices,
            values,
            symmetric,
        })
    }
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            cols,
            indptr: vec![0; rows + 1],
            indices: Vec::new(),
            values: Vec::new(),
            symmetric: false,
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            rows: n,
            cols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
            symmetric: true,
        }
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    /// y = A x.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for i in 0..self.rows {
            let mut s = 0.0;
            for p in self.indptr[i]..self.indptr[i + 1] {
                s += self.values[p] * x[self.indices[p]];
            }
            y[i] = s;
        }
    }

    pub fn matvec_alloc(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        self.matvec(x, &mut y);
        y
    }

    /// y = Aᵀ x.
    pub fn matvec_transpose(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(y.len(), self.cols);
        y.fill(0.0);
        for i in 0..self.rows {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            for p in self.indptr[i]..self.indptr[i + 1] {
                y[self.indices[p]] += self.values[p] * xi;
            }
        }
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.cols + 1];
        for &j in &self.indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.cols {
            counts[j + 1] += counts[j];
        }
        let mut indptr = counts.clone();
        let mut indices = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.rows {
            for p in self.indptr[i]..self.indptr[i + 1] {
                let j = self.indices[p];
                let dst = indptr[j];
                indices[dst] = i;
                values[dst] = self.values[p];
                indptr[j] += 1;
            }
        }
        SparseMatrix {
            rows: self.cols,
            cols: self.rows,
            indptr: counts,
            indices,
            values,
            symmetric: self.symmetric,
        }
    }

    /// C = A·B (CSR × CSR).
    pub fn matmul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.cols, other.rows);
        let rows = self.rows;
        let cols = other.cols;
        let mut indptr = vec![0usize; rows + 1];
        let mut indices: Vec<usize> = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut accum = vec![0.0f64; cols];
        let mut mark = vec![usize::MAX; cols];
        let mut row_cols: Vec<usize> = Vec::new();
        for i in 0..rows {
            row_cols.clear();
            for p in self.indptr[i]..self.indptr[i + 1] {
                let k = self.indices[p];
                let av = self.values[p];
                for q in other.indptr[k]..other.indptr[k + 1] {
                    let j = other.indices[q];
                    if mark[j] != i {
                        mark[j] = i;
                        accum[j] = 0.0;
                        row_cols.push(j);
                    }
                    accum[j] += av * other.values[q];
                }
            }
            row_cols.sort_unstable();
            for &j in &row_cols {
                indices.push(j);
                values.push(accum[j]);
            }
            indptr[i + 1] = indices.len();
        }
        SparseMatrix {
            rows,
            cols,
            indptr,
            indices,
            values,
            symmetric: false,
        }
    }

    /// Scale all values by s (in place).
    pub fn scale(&mut self, s: f64) {
        for v in &mut self.values {
            *v *= s;
        }
    }

    /// Left-multiply by a diagonal: A ← diag(d)·A.
    pub fn scale_rows(&mut self, d: &[f64]) {
        for i in 0..self.rows {
            for p in self.indptr[i]..self.indptr[i + 1] {
                self.values[p] *= d[i];
            }
        }
    }

    /// Frobenius-type max-abs norm.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut d = nalgebra::DMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for p in self.indptr[i]..self.indptr[i + 1] {
                d[(i, self.indices[p])] = self.values[p];
            }
        }
        d
    }
}

/// Linear combination on the union pattern: Σ cᵢ·Aᵢ. All matrices must
/// share dimensions. Used to form τ-dependent pencils with a fixed
/// sparsity pattern.
pub struct PatternCombination {
    pub pattern: SparseMatrix,
    /// maps[m][p] = position in matrix m's value array contributing to
    /// union position p, or usize::MAX
    maps: Vec<Vec<usize>>,
}

impl PatternCombination {
    pub fn new(mats: &[&SparseMatrix]) -> Self {
        assert!(!mats.is_empty());
        let rows = mats[0].rows;
        let cols = mats[0].cols;
        for m in mats {
            assert_eq!((m.rows, m.cols), (rows, cols));
        }
        // union pattern row by row
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::new();
        let mut seen = vec![usize::MAX; cols];
        let mut row_cols: Vec<usize> = Vec::new();
        for i in 0..rows {
            row_cols.clear();
            for m in mats {
                for p in m.indptr[i]..m.indptr[i + 1] {
                    let j = m.indices[p];
                    if seen[j] != i {
                        seen[j] = i;
                        row_cols.push(j);
                    }
                }
            }
            row_cols.sort_unstable();
            indices.extend_from_slice(&row_cols);
            indptr[i + 1] = indices.len();
        }
        let pattern = SparseMatrix {
            rows,
            cols,
            indptr,
            indices,
            values: vec![0.0; 0],
            symmetric: false,
        };
        let nnz = pattern.indices.len();
        let mut maps = Vec::with_capacity(mats.len());
        for m in mats {
            let mut map = vec![usize::MAX; nnz];
            for i in 0..rows {
                let (u_lo, u_hi) = (pattern.indptr[i], pattern.indptr[i + 1]);
                for p in m.indptr[i]..m.indptr[i + 1] {
                    let j = m.indices[p];
                    let pos = pattern.indices[u_lo..u_hi].binary_search(&j).unwrap() + u_lo;
                    map[pos] = p;
                }
            }
            // invert: we want per-union-position source
            maps.push(map);
        }
        PatternCombination { pattern, maps }
    }

    /// values(out) = Σ coeff[m] · mats[m], on the union pattern.
    pub fn combine(&self, mats: &[&SparseMatrix], coeffs: &[f64]) -> SparseMatrix {
        assert_eq!(mats.len(), self.maps.len());
        assert_eq!(coeffs.len(), mats.len());
        let nnz = self.pattern.indices.len();
        let mut values = vec![0.0f64; nnz];
        for (m, (&c, mat)) in coeffs.iter().zip(mats).enumerate() {
            if c == 0.0 {
                continue;
            }
            let map = &self.maps[m];
            for p in 0..nnz {
                let src = map[p];
                if src != usize::MAX {
                    values[p] += c * mat.values[src];
                }
            }
        }
        SparseMatrix {
            rows: self.pattern.rows,
            cols: self.pattern.cols,
            indptr: self.pattern.indptr.clone(),
            indices: self.pattern.indices.clone(),
            values,
            symmetric: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplet_build_sums_duplicates() {
        let mut b = TripletBuilder::new(3, 3);
        b.push(0, 0, 1.0);
        b.push(0, 0, 2.0);
        b.push(2, 1, 5.0);
        b.push(1, 2, -1.0);
        let m = b.finalize(false).unwrap();
        assert_eq!(m.nnz(), 3);
        let (cols, vals) = m.row(0);
        assert_eq!(cols, &[0]);
        assert_eq!(vals, &[3.0]);
        let y = m.matvec_alloc(&[1.0, 1.0, 1.0]);
        assert_eq!(y, vec![3.0, -1.0, 5.0]);
    }

    #[test]
    fn transpose_and_matmul() {
        let mut b = TripletBuilder::new(2, 3);
        b.push(0, 0, 1.0);
        b.push(0, 2, 2.0);
        b.push(1, 1, 3.0);
        let m = b.finalize(false).unwrap();
        let t = m.transpose();
        assert_eq!(t.rows, 3);
        assert_eq!(t.matvec_alloc(&[1.0, 1.0]), vec![1.0, 3.0, 2.0]);
        let p = m.matmul(&t); // 2x2: [[5, 0], [0, 9]]
        let d = p.to_dense();
        assert_eq!(d[(0, 0)], 5.0);
        assert_eq!(d[(1, 1)], 9.0);
        assert_eq!(d[(0, 1)], 0.0);
    }

    #[test]
    fn pattern_combination() {
        let mut b1 = TripletBuilder::new(2, 2);
        b1.push(0, 0, 1.0);
        b1.push(1, 1, 1.0);
        let a = b1.finalize(true).unwrap();
        let mut b2 = TripletBuilder::new(2, 2);
        b2.push(0, 1, 2.0);
        b2.push(1, 1, 4.0);
        let b = b2.finalize(false).unwrap();
        let comb = PatternCombination::new(&[&a, &b]);
        let c = comb.combine(&[&a, &b], &[3.0, -1.0]);
        let d = c.to_dense();
        assert_eq!(d[(0, 0)], 3.0);
        assert_eq!(d[(0, 1)], -2.0);
        assert_eq!(d[(1, 1)], -1.0);
    }
}
