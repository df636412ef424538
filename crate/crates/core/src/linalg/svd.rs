//! Dense complex SVD by one-sided Jacobi, sized for far-field operators
//! (≤ 512 columns).

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Column-major dense complex matrix.
#[derive(Debug, Clone)]
pub struct DenseComplex {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl DenseComplex {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseComplex {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut m = DenseComplex::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn col(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// y = A x.
    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.rows];
        for j in 0..self.cols {
            let xj = x[j];
            if xj == Complex64::new(0.0, 0.0) {
                continue;
            }
            for i in 0..self.rows {
                y[i] += self[(i, j)] * xj;
            }
        }
        y
    }

    /// y = A^H x.
    pub fn matvec_adjoint(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.cols];
        for j in 0..self.cols {
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..self.rows {
                s += self[(i, j)].conj() * x[i];
            }
            y[j] = s;
        }
        y
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl std::ops::Index<(usize, usize)> for DenseComplex {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[j * self.rows + i]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseComplex {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[j * self.rows + i]
    }
}

/// Singular value decomposition A = U Σ V^H with descending σ.
#[derive(Debug, Clone)]
pub struct DenseSVD {
    pub u: DenseComplex,
    pub singular_values: Vec<f64>,
    pub v: DenseComplex,
}

/// One-sided Jacobi SVD: unitary right rotations orthogonalize the columns
/// of A; the rotations accumulate into V, the surviving columns normalize
/// into U.
pub fn svd_dense(a: &DenseComplex) -> Result<DenseSVD> {
    let (m, n) = (a.rows, a.cols);
    if m > 512 || n > 512 {
        return Err(Error::InvalidParameter(format!(
            "svd_dense supports up to 512x512, got {m}x{n}"
        )));
    }
    if m < n {
        return Err(Error::InvalidParameter(
            "svd_dense expects rows >= cols".into(),
        ));
    }
    if a.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidParameter("non-finite entry".into()));
    }
    let mut w = a.clone();
    let mut v = DenseComplex::zeros(n, n);
    for j in 0..n {
        v[(j, j)] = Complex64::new(1.0, 0.0);
    }
    let eps = 1e-14;
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = Complex64::new(0.0, 0.0);
                for i in 0..m {
                    let ap = w[(i, p)];
                    let aq = w[(i, q)];
                    app += ap.norm_sqr();
                    aqq += aq.norm_sqr();
                    apq += ap.conj() * aq;
                }
                let off = apq.norm();
                if off <= eps * (app * aqq).sqrt() || off == 0.0 {
                    continue;
                }
                rotated = true;
                let phi = apq / off; // e^{i arg(apq)}
                let zeta = (aqq - app) / (2.0 * off);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                // J = [[c, s], [-s conj(phi)... ]] derived from diag(1, phi^-1) * R
                let phid = phi.conj();
                for i in 0..m {
                    let ap = w[(i, p)];
                    let aq = w[(i, q)];
                    w[(i, p)] = c * ap - (s * phid) * aq;
                    w[(i, q)] = s * ap + (c * phid) * aq;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = c * vp - (s * phid) * vq;
                    v[(i, q)] = s * vp + (c * phid) * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    // singular values = column norms; sort descending
    let mut svals: Vec<(f64, usize)> = (0..n)
        .map(|j| (w.col(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(), j))
        .collect();
    svals.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut u = DenseComplex::zeros(m, n);
    let mut vs = DenseComplex::zeros(n, n);
    let mut singular_values = Vec::with_capacity(n);
    let smax = svals.first().map(|x| x.0).unwrap_or(0.0);
    for (dst, &(s, src)) in svals.iter().enumerate() {
        singular_values.push(s);
        for i in 0..n {
            vs[(i, dst)] = v[(i, src)];
        }
        if s > 1e-300 && s > 1e-15 * smax.max(1.0) {
            for i in 0..m {
                u[(i, dst)] = w[(i, src)] / s;
            }
        }
    }
    // orthonormal completion of U for (near-)zero singular values
    for j in 0..n {
        let nrm: f64 = u.col(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm > 0.5 {
            continue;
        }
        // try unit vectors, Gram-Schmidt against existing columns
        'cands: for cand in 0..m {
            let mut col: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); m];
            col[cand] = Complex64::new(1.0, 0.0);
            for jj in 0..n {
                if jj == j {
                    continue;
                }
                let proj: Complex64 = (0..m).map(|i| u[(i, jj)].conj() * col[i]).sum();
                for i in 0..m {
                    let correction = proj * u[(i, jj)];
                    col[i] -= correction;
                }
            }
            let nrm: f64 = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if nrm > 1e-3 {
                for i in 0..m {
                    u[(i, j)] = col[i] / nrm;
                }
                break 'cands;
            }
        }
    }
    Ok(DenseSVD {
        u,
        singular_values,
        v: vs,
    })
}

impl DenseSVD {
    /// ‖A − U Σ V^H‖_F.
    pub fn reconstruction_error(&self, a: &DenseComplex) -> f64 {
        let (m, n) = (a.rows, a.cols);
        let mut err = 0.0;
        for j in 0..n {
            for i in 0..m {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    s += self.u[(i, k)] * self.singular_values[k] * self.v[(j, k)].conj();
                }
                err += (a[(i, j)] - s).norm_sqr();
            }
        }
        err.sqrt()
    }
}
