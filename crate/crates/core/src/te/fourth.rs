//! Transmission eigenvalues for A ≡ I via the fourth-order formulation.
//!
//! For each τ = k² the symmetric pencil A_τ u = λ B u is assembled with
//! A_τ the fourth-order form carrying the weight 1/(n−1) (or n/(1−n) with
//! an extra Δu·Δφ term when n < 1) and B = ∫∇u·∇ū. Real transmission
//! eigenvalues are the fixed points λ_j(τ) = τ, located by a τ-scan and
//! polished by a safeguarded secant iteration.
//!
//! The discretization is the mixed two-field P1 splitting σ ≈ Δu: u
//! vanishes on the boundary strongly, the natural condition ∂u/∂ν = 0 is
//! absorbed by testing the σ-equation over the full space, and σ is
//! eliminated through the lumped mass. The τ-dependence collapses onto a
//! fixed sparsity pattern A_τ = P0 − τ·P1 + τ²·P2, so one symbolic
//! Cholesky analysis serves the whole scan.
//!
//! Media with voids (n ≥ 1 touching 1 on part of the cell) fall outside
//! the weight's domain; for those the solver switches to the linear
//! two-field pencil in (u, ω) with ω = (Δu + τu)/(n−1) assembled with the
//! weight n−1, which stays finite, and searches it like the X(D) pencil.

use crate::coeffs::CoefficientField;
use crate::error::{Error, Result};
use crate::fem::{self, BoundarySplit};
use crate::linalg::arnoldi::{arnoldi, deterministic_start, hess_eigvec_real};
use crate::linalg::{CholeskySymbolic, PatternCombination, SparseMatrix, TripletBuilder};
use crate::mesh::TriangleMesh;
use crate::te::pencil_x::{query_mesh, sweep_real_eigenvalues};
use crate::te::{Method, TEQuery, TEResult};

/// Number of eigenvalue curves λ_j(τ) tracked during the scan.
const TRACKED_CURVES: usize = 8;
/// Subdivisions of the τ-window in the scan phase.
const TAU_STEPS: usize = 200;
/// Secant iteration cap per fixed point.
const SECANT_MAX_ITERS: usize = 50;

enum WeightBranch {
    /// n > 1: weight 1/(n−1).
    Above,
    /// 0 < n < 1: weight n/(1−n) plus the Δu·Δφ term.
    Below,
}

/// τ-parameterized fourth-order pencil with reusable factorization data.
pub struct FourthOrderPencil {
    parts: [SparseMatrix; 3],
    comb: PatternCombination,
    chol: CholeskySymbolic,
    b: SparseMatrix,
    pub n_dofs: usize,
    pub mesh_h: f64,
}

impl FourthOrderPencil {
    /// Assemble the τ-independent component matrices on a mesh.
    pub fn assemble(mesh: &TriangleMesh, field: &CoefficientField) -> Result<Self> {
        let branch = classify_regime(field)?;
        let split = BoundarySplit::new(mesh);
        let ni = split.num_interior();
        if ni < 3 {
            return Err(Error::InvalidParameter(
                "mesh too coarse for the fourth-order pencil".into(),
            ));
        }
        let (dof, nv) = fem::identity_dofs(mesh);
        let g_full = fem::stiffness(mesh, &dof, nv, |_| crate::coeffs::IDENTITY);
        let lumped = fem::lumped_mass(mesh, &dof, nv);
        let weight = |p: [f64; 2]| -> f64 {
            let n = field.n_at(p);
            match branch {
                WeightBranch::Above => 1.0 / (n - 1.0),
                WeightBranch::Below => n / (1.0 - n),
            }
        };
        let w_full = fem::weighted_mass(mesh, &dof, nv, weight);
        let m_full = fem::weighted_mass(mesh, &dof, nv, |_| 1.0);

        // G: full stiffness with interior columns only (N x I)
        let g_ni = fem::map_cols(&g_full, &split.interior_of, ni);
        // DG with D = M_L^{-1}
        let dinv: Vec<f64> = lumped.iter().map(|&v| 1.0 / v).collect();
        let mut dg = g_ni.clone();
        dg.scale_rows(&dinv);
        // W D G (N x I); its interior rows form C (I x I)
        let wdg = w_full.matmul(&dg);
        let c = fem::select_rows(&wdg, &split.interior_vertices);
        let c_t = c.transpose();
        // P0 = (DG)^T W (DG) [plus (DG)^T M (DG) on the n < 1 branch]
        let dg_t = dg.transpose();
        let mut p0 = dg_t.matmul(&wdg);
        if matches!(branch, WeightBranch::Below) {
            let mdg = m_full.matmul(&dg);
            let extra = dg_t.matmul(&mdg);
            let comb = PatternCombination::new(&[&p0, &extra]);
            p0 = comb.combine(&[&p0, &extra], &[1.0, 1.0]);
        }
        // P1 = C + C^T
        let comb_c = PatternCombination::new(&[&c, &c_t]);
        let p1 = comb_c.combine(&[&c, &c_t], &[1.0, 1.0]);
        // P2 = W_II (+ M_II on the n > 1 branch)
        let w_ii = fem::map_cols(
            &fem::select_rows(&w_full, &split.interior_vertices),
            &split.interior_of,
            ni,
        );
        let m_ii = fem::map_cols(
            &fem::select_rows(&m_full, &split.interior_vertices),
            &split.interior_of,
            ni,
        );
        let p2 = match branch {
            WeightBranch::Above => {
                let comb = PatternCombination::new(&[&w_ii, &m_ii]);
                comb.combine(&[&w_ii, &m_ii], &[1.0, 1.0])
            }
            WeightBranch::Below => w_ii,
        };
        let b = fem::map_cols(
            &fem::select_rows(&g_full, &split.interior_vertices),
            &split.interior_of,
            ni,
        );
        let comb = PatternCombination::new(&[&p0, &p1, &p2]);
        let union = comb.combine(&[&p0, &p1, &p2], &[1.0, 1.0, 1.0]);
        let chol = CholeskySymbolic::analyze(&union)?;
        Ok(FourthOrderPencil {
            parts: [p0, p1, p2],
            comb,
            chol,
            b,
            n_dofs: ni,
            mesh_h: mesh.h,
        })
    }

    fn a_tau(&self, tau: f64) -> SparseMatrix {
        self.comb.combine(
            &[&self.parts[0], &self.parts[1], &self.parts[2]],
            &[1.0, -tau, tau * tau],
        )
    }

    /// Smallest eigenvalues λ_1 ≤ … of A_τ u = λ B u with Ritz vectors and
    /// residuals. `krylov` controls effort.
    pub fn lambdas(
        &self,
        tau: f64,
        count: usize,
        krylov: usize,
    ) -> Result<Vec<(f64, Vec<f64>, f64)>> {
        let a = self.a_tau(tau);
        let f = self
            .chol
            .factor(&a)
            .map_err(|e| Error::FactorizationFailure(format!("A_tau at tau={tau}: {e}")))?;
        let n = self.n_dofs;
        let mut work = vec![0.0; n];
        let op = |x: &[f64], y: &mut [f64], work: &mut Vec<f64>| {
            self.b.matvec(x, work);
            f.solve_into(work, y);
        };
        let dim = krylov.min(n);
        let start = deterministic_start(n);
        let (v, h, m_eff) = arnoldi(&op, &mut work, n, dim, &start);
        if m_eff == 0 {
            return Err(Error::FactorizationFailure("Arnoldi breakdown".into()));
        }
        let hm = nalgebra::DMatrix::from_fn(m_eff, m_eff, |i, j| h[(i, j)]);
        let thetas = hm.clone().complex_eigenvalues();
        let mut th: Vec<f64> = thetas
            .iter()
            .filter(|t| t.im.abs() <= 1e-8 * t.norm().max(1e-300) && t.re > 0.0)
            .map(|t| t.re)
            .collect();
        th.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let mut out = Vec::new();
        for &theta in th.iter().take(count) {
            let lambda = 1.0 / theta;
            let y = hess_eigvec_real(&hm, theta);
            let mut x = vec![0.0; n];
            for (j, &yj) in y.iter().enumerate() {
                for i in 0..n {
                    x[i] += v[j][i] * yj;
                }
            }
            let nx = x.iter().map(|t| t * t).sum::<f64>().sqrt();
            if nx == 0.0 {
                continue;
            }
            for t in &mut x {
                *t /= nx;
            }
            let ax = a.matvec_alloc(&x);
            let bx = self.b.matvec_alloc(&x);
            let res = ax
                .iter()
                .zip(&bx)
                .map(|(ai, bi)| (ai - lambda * bi) * (ai - lambda * bi))
                .sum::<f64>()
                .sqrt();
            out.push((lambda, x, res));
        }
        out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Ok(out)
    }
}

fn classify_regime(field: &CoefficientField) -> Result<WeightBranch> {
    let b = field.bounds;
    if b.n_min > 1.0 {
        Ok(WeightBranch::Above)
    } else if b.n_max < 1.0 {
        Ok(WeightBranch::Below)
    } else {
        Err(Error::RegimeError(format!(
            "fourth-order form needs n_min > 1 or n_max < 1 (got [{}, {}])",
            b.n_min, b.n_max
        )))
    }
}

/// True when n ≥ 1 everywhere with equality on part of the cell (voids).
fn has_void_profile(field: &CoefficientField) -> bool {
    let b = field.bounds;
    (b.n_min - 1.0).abs() < 1e-12 && b.n_max > 1.0
}

/// Solve the A ≡ I transmission eigenvalue problem on the query window.
pub fn solve_te_4th(query: &TEQuery) -> Result<TEResult> {
    query.validate()?;
    if !query.field.a_is_identity() {
        return Err(Error::RegimeError(
            "fourth-order solver requires A = I".into(),
        ));
    }
    if has_void_profile(&query.field) {
        return solve_te_void_pencil(query);
    }
    classify_regime(&query.field)?;
    let mesh = query_mesh(query)?;
    let pencil = FourthOrderPencil::assemble(&mesh, &query.field)?;
    solve_fixed_point(&pencil, query, TAU_STEPS)
}

/// Fixed-point search on an assembled pencil (exposed so pipelines can
/// reuse one assembly across windows).
pub fn solve_fixed_point(
    pencil: &FourthOrderPencil,
    query: &TEQuery,
    tau_steps: usize,
) -> Result<TEResult> {
    let (k_lo, k_hi) = query.k_window;
    let (tau_lo, tau_hi) = (k_lo * k_lo, k_hi * k_hi);
    let count = TRACKED_CURVES.min(pencil.n_dofs.saturating_sub(2)).max(1);
    let krylov_scan = (2 * count + 14).max(26);

    let steps = tau_steps.max(8);
    let dtau = (tau_hi - tau_lo) / steps as f64;
    let mut grid: Vec<(f64, Vec<f64>)> = Vec::with_capacity(steps + 1);
    for s in 0..=steps {
        let tau = tau_lo + s as f64 * dtau;
        let lams = pencil.lambdas(tau, count, krylov_scan)?;
        grid.push((tau, lams.iter().map(|l| l.0).collect()));
    }
    let mut warnings = Vec::new();
    let mut roots: Vec<(f64, f64)> = Vec::new(); // (tau*, residual)
    for j in 0..count {
        for s in 0..steps {
            let (ta, la) = (&grid[s].0, &grid[s].1);
            let (tb, lb) = (&grid[s + 1].0, &grid[s + 1].1);
            if la.len() <= j || lb.len() <= j {
                continue;
            }
            let ga = la[j] - ta;
            let gb = lb[j] - tb;
            if ga == 0.0 {
                roots.push((*ta, 0.0));
                continue;
            }
            if ga * gb < 0.0 {
                match secant_fixed_point(pencil, j, count, krylov_scan, *ta, *tb, ga, gb) {
                    Ok(Some((tau_star, res))) => roots.push((tau_star, res)),
                    Ok(None) => warnings.push(format!(
                        "fixed point in ({ta:.6}, {tb:.6}) on curve {j} dropped after {SECANT_MAX_ITERS} iterations"
                    )),
                    Err(e) => return Err(e),
                }
            }
        }
    }
    roots.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut eigenvalues: Vec<f64> = Vec::new();
    let mut residuals = Vec::new();
    for (tau, res) in roots {
        let k = tau.sqrt();
        if eigenvalues.iter().any(|&e| (e - k).abs() <= 1e-6 * k) {
            continue;
        }
        if k >= k_lo && k <= k_hi {
            eigenvalues.push(k);
            residuals.push(res);
        }
        if eigenvalues.len() >= query.count {
            break;
        }
    }
    Ok(TEResult {
        shortfall: eigenvalues.len() < query.count,
        eigenvalues,
        method: Method::FixedPoint4th,
        residuals,
        mesh_h: Some(pencil.mesh_h),
        warnings,
    })
}

/// Safeguarded secant (with bisection fallback) on g_j(τ) = λ_j(τ) − τ.
#[allow(clippy::too_many_arguments)]
fn secant_fixed_point(
    pencil: &FourthOrderPencil,
    j: usize,
    count: usize,
    krylov: usize,
    mut ta: f64,
    mut tb: f64,
    mut ga: f64,
    mut gb: f64,
) -> Result<Option<(f64, f64)>> {
    let mut last_res = f64::INFINITY;
    for _ in 0..SECANT_MAX_ITERS {
        let mut t = tb - gb * (tb - ta) / (gb - ga);
        if !t.is_finite() || t <= ta || t >= tb {
            t = 0.5 * (ta + tb);
        }
        let lams = pencil.lambdas(t, count, krylov)?;
        if lams.len() <= j {
            return Ok(None);
        }
        let g = lams[j].0 - t;
        last_res = lams[j].2;
        if g.abs() <= 1e-10 * t.max(1.0) || (tb - ta) <= 1e-12 * t.max(1.0) {
            return Ok(Some((t, last_res)));
        }
        if ga * g < 0.0 {
            tb = t;
            gb = g;
        } else {
            ta = t;
            ga = g;
        }
    }
    if (tb - ta) <= 1e-8 * tb.max(1.0) {
        return Ok(Some((0.5 * (ta + tb), last_res)));
    }
    Ok(None)
}

/// Linear (u, ω) pencil for media with voids: the ω-definition is tested
/// over the full space (absorbing ∂u/∂ν = 0), the Helmholtz equation for
/// ω over the interior; K x = τ M x with x = [u | ω].
pub fn assemble_void_pencil(
    mesh: &TriangleMesh,
    field: &CoefficientField,
) -> Result<(SparseMatrix, SparseMatrix)> {
    let split = BoundarySplit::new(mesh);
    let ni = split.num_interior();
    let (dof, nv) = fem::identity_dofs(mesh);
    let g_full = fem::stiffness(mesh, &dof, nv, |_| crate::coeffs::IDENTITY);
    let m_nm1 = fem::weighted_mass(mesh, &dof, nv, |p| field.n_at(p) - 1.0);
    let m_n = fem::weighted_mass(mesh, &dof, nv, |p| field.n_at(p));
    let m_1 = fem::weighted_mass(mesh, &dof, nv, |_| 1.0);
    let dim = nv + ni;
    let mut kt = TripletBuilder::new(dim, dim);
    let mut mt = TripletBuilder::new(dim, dim);
    // rows 0..nv: (∇u, ∇φ) + ((n−1)ω, φ) = τ(u, φ) for all φ
    for r in 0..nv {
        for p in g_full.indptr[r]..g_full.indptr[r + 1] {
            let cvt = split.interior_of[g_full.indices[p]];
            if cvt != usize::MAX {
                kt.push(r, cvt, g_full.values[p]);
            }
        }
        for p in m_nm1.indptr[r]..m_nm1.indptr[r + 1] {
            kt.push(r, ni + m_nm1.indices[p], m_nm1.values[p]);
        }
        for p in m_1.indptr[r]..m_1.indptr[r + 1] {
            let cvt = split.interior_of[m_1.indices[p]];
            if cvt != usize::MAX {
                mt.push(r, cvt, m_1.values[p]);
            }
        }
    }
    // rows nv..nv+ni: (∇ω, ∇ψ) = τ(nω, ψ) for interior ψ
    for (rr, &vtx) in split.interior_vertices.iter().enumerate() {
        let r = nv + rr;
        for p in g_full.indptr[vtx]..g_full.indptr[vtx + 1] {
            kt.push(r, ni + g_full.indices[p], g_full.values[p]);
        }
        for p in m_n.indptr[vtx]..m_n.indptr[vtx + 1] {
            mt.push(r, ni + m_n.indices[p], m_n.values[p]);
        }
    }
    Ok((kt.finalize(false)?, mt.finalize(false)?))
}

fn solve_te_void_pencil(query: &TEQuery) -> Result<TEResult> {
    let mesh = query_mesh(query)?;
    let (k_mat, m_mat) = assemble_void_pencil(&mesh, &query.field)?;
    let (k_lo, k_hi) = query.k_window;
    let eig = sweep_real_eigenvalues(&k_mat, &m_mat, (k_lo, k_hi), 0.05, 6)?;
    let mut eigenvalues = Vec::new();
    let mut residuals = Vec::new();
    for e in eig {
        let k = e.eigenvalue.sqrt();
        if k >= k_lo && k <= k_hi {
            eigenvalues.push(k);
            residuals.push(e.residual);
        }
        if eigenvalues.len() >= query.count {
            break;
        }
    }
    Ok(TEResult {
        shortfall: eigenvalues.len() < query.count,
        eigenvalues,
        method: Method::FixedPoint4th,
        residuals,
        mesh_h: Some(mesh.h),
        warnings: vec!["void profile: linear two-field pencil route".into()],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::te::analytic::first_root_adaptive;
    use crate::te::Domain;

    #[test]
    fn constant_index_disk_matches_analytic() {
        // n = 3 on the disk of radius 2: first TE at 2.0796...
        let field = CoefficientField::constant(1.0, 3.0).unwrap();
        let query = TEQuery {
            domain: Domain::Disk { radius: 2.0 },
            field,
            k_window: (1.95, 2.2),
            count: 2,
            h_max: Some(0.11),
        };
        let r = solve_te_4th(&query).unwrap();
        assert!(!r.eigenvalues.is_empty(), "no fixed point found");
        let exact = first_root_adaptive(2.0, 1.0, 3.0).unwrap();
        let got = r.eigenvalues[0];
        assert!(
            (got - exact).abs() / exact < 0.02,
            "k1 = {got} vs analytic {exact}"
        );
    }

    #[test]
    fn wrong_regime_rejected() {
        let field = CoefficientField::constant(0.5, 2.0).unwrap();
        let query = TEQuery {
            domain: Domain::Disk { radius: 1.0 },
            field,
            k_window: (1.0, 2.0),
            count: 1,
            h_max: Some(0.2),
        };
        assert!(matches!(solve_te_4th(&query), Err(Error::RegimeError(_))));
    }

    #[test]
    fn below_one_branch_matches_analytic() {
        // n = 0.1 < 1 on the unit disk: hat form, k1 ~ 4.1 so kh stays small
        let field = CoefficientField::constant(1.0, 0.1).unwrap();
        let exact = first_root_adaptive(1.0, 1.0, 0.1).unwrap();
        let query = TEQuery {
            domain: Domain::Disk { radius: 1.0 },
            field,
            k_window: (0.9 * exact, 1.1 * exact),
            count: 1,
            h_max: Some(0.05),
        };
        let r = solve_te_4th(&query).unwrap();
        assert!(!r.eigenvalues.is_empty(), "no fixed point for n < 1");
        assert!(
            (r.eigenvalues[0] - exact).abs() / exact < 0.02,
            "k1 = {} vs {exact}",
            r.eigenvalues[0]
        );
    }
}
