//! Transmission eigenvalues for A ≠ I via the two-field pencil on
//! X(D) = {(w, v) ∈ H¹×H¹ : w − v ∈ H¹₀(D)}.
//!
//! The discrete basis couples boundary degrees of freedom of w and v
//! (enforcing w − v ∈ H¹₀ by elimination), so the unknown vector stacks
//! w on all vertices and v on interior vertices. Real eigenvalues λ = k²
//! of K x = λ M x approximate transmission eigenvalues; the pencil is
//! non-self-adjoint, so a shift sweep with Arnoldi and an explicit
//! realness filter does the searching.

use crate::coeffs::CoefficientField;
use crate::error::{Error, Result};
use crate::fem::{self, BoundarySplit};
use crate::linalg::{
    eig_shift_invert_opts, EigenResult, ShiftInvertOptions, SparseMatrix, TripletBuilder,
};
use crate::mesh::{self, TriangleMesh};
use crate::te::{Domain, Method, TEQuery, TEResult};

/// Checks the T-coercivity contrast regime: a_min > 1 or a_max < 1.
pub fn check_regime(field: &CoefficientField) -> Result<()> {
    let b = field.bounds;
    if b.a_min > 1.0 || b.a_max < 1.0 {
        Ok(())
    } else {
        Err(Error::RegimeError(format!(
            "pencil-X needs a_min > 1 or a_max < 1 (got [{}, {}])",
            b.a_min, b.a_max
        )))
    }
}

/// Assembled pencil plus the dof layout needed to interpret eigenvectors.
pub struct PencilX {
    pub k: SparseMatrix,
    pub m: SparseMatrix,
    /// vertices in the mesh
    pub num_vertices: usize,
    /// interior vertices (v-field dof count)
    pub num_interior: usize,
}

/// Assemble K and M of the generalized pencil K x = k² M x on a mesh.
///
/// Row/column layout: [w at interior (I) | v at interior (I) | coupled
/// boundary (B)], total V + I where V = I + B.
pub fn assemble_pencil_x(mesh: &TriangleMesh, field: &CoefficientField) -> Result<PencilX> {
    check_regime(field)?;
    assemble_pencil_x_unchecked(mesh, field)
}

/// Assembly without the regime guard, for best-effort runs outside the
/// T-coercivity assumptions (results are flagged by the caller).
pub fn assemble_pencil_x_unchecked(
    mesh: &TriangleMesh,
    field: &CoefficientField,
) -> Result<PencilX> {
    let nv = mesh.num_vertices();
    let split = BoundarySplit::new(mesh);
    let ni = split.num_interior();
    let dim = nv + ni;
    let (dof, ndof) = fem::identity_dofs(mesh);
    let sa = fem::stiffness(mesh, &dof, ndof, |p| field.a_at(p));
    let s1 = fem::stiffness(mesh, &dof, ndof, |_| crate::coeffs::IDENTITY);
    let mn = fem::weighted_mass(mesh, &dof, ndof, |p| field.n_at(p));
    let m1 = fem::weighted_mass(mesh, &dof, ndof, |_| 1.0);

    // dof maps: w-dof and v-dof per vertex
    let wdof = |v: usize| -> usize {
        if mesh.is_boundary(v) {
            2 * ni + split.boundary_of[v]
        } else {
            split.interior_of[v]
        }
    };
    let vdof = |v: usize| -> usize {
        if mesh.is_boundary(v) {
            2 * ni + split.boundary_of[v]
        } else {
            ni + split.interior_of[v]
        }
    };

    let mut kt = TripletBuilder::new(dim, dim);
    let mut mt = TripletBuilder::new(dim, dim);
    for vtx in 0..nv {
        // test function (φ, 0) at interior vertices contributes the w-row;
        // (0, φ) the v-row; at boundary vertices the coupled test (φ, φ)
        // receives both, which the shared dof index realizes automatically.
        let row_w = wdof(vtx);
        for p in sa.indptr[vtx]..sa.indptr[vtx + 1] {
            kt.push(row_w, wdof(sa.indices[p]), sa.values[p]);
        }
        for p in mn.indptr[vtx]..mn.indptr[vtx + 1] {
            mt.push(row_w, wdof(mn.indices[p]), mn.values[p]);
        }
        let row_v = vdof(vtx);
        for p in s1.indptr[vtx]..s1.indptr[vtx + 1] {
            kt.push(row_v, vdof(s1.indices[p]), -s1.values[p]);
        }
        for p in m1.indptr[vtx]..m1.indptr[vtx + 1] {
            mt.push(row_v, vdof(m1.indices[p]), -m1.values[p]);
        }
    }
    Ok(PencilX {
        k: kt.finalize(false)?,
        m: mt.finalize(false)?,
        num_vertices: nv,
        num_interior: ni,
    })
}

/// Mesh for a TE query: disk or square at the query's mesh-size policy.
pub fn query_mesh(query: &TEQuery) -> Result<TriangleMesh> {
    let h = query.mesh_h();
    match query.domain {
        Domain::Disk { radius } => mesh::disk_mesh_max_h(radius, h),
        Domain::Square { lo, hi } => mesh::square_mesh_max_h(lo, hi, h),
    }
}

/// Shift sweep over the k-window: shifts at λ = k² for k on a 0.05-grid,
/// six Ritz values per shift, deduplication at 1e-6 relative.
pub fn solve_te_pencil(query: &TEQuery) -> Result<TEResult> {
    query.validate()?;
    check_regime(&query.field)?;
    solve_te_pencil_unchecked(query)
}

/// The sweep without the regime guard (used by the paper-table pipeline
/// for best-effort columns outside the guaranteed contrast regimes).
pub fn solve_te_pencil_unchecked(query: &TEQuery) -> Result<TEResult> {
    query.validate()?;
    let mesh = query_mesh(query)?;
    let pencil = assemble_pencil_x_unchecked(&mesh, &query.field)?;
    let (k_lo, k_hi) = query.k_window;
    let eig = sweep_real_eigenvalues(&pencil.k, &pencil.m, (k_lo, k_hi), 0.05, 6)?;
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
        method: Method::PencilX,
        residuals,
        mesh_h: Some(mesh.h),
        warnings: Vec::new(),
    })
}

/// Sweep shifts σ = k² over a k-grid, collect real eigenvalues of
/// K x = λ M x with λ in the window, dedupe, sort ascending.
pub fn sweep_real_eigenvalues(
    k_mat: &SparseMatrix,
    m_mat: &SparseMatrix,
    (k_lo, k_hi): (f64, f64),
    k_step: f64,
    per_shift: usize,
) -> Result<Vec<EigenResult>> {
    let mut found: Vec<EigenResult> = Vec::new();
    let steps = (((k_hi - k_lo) / k_step).ceil() as usize).max(1);
    let opts = ShiftInvertOptions::for_count(per_shift);
    for s in 0..=steps {
        let kk = (k_lo + s as f64 * k_step).min(k_hi);
        let mut shift = kk * kk;
        let mut attempt = 0;
        loop {
            match eig_shift_invert_opts(k_mat, m_mat, shift, per_shift, &opts) {
                Ok(results) => {
                    for e in results {
                        if !e.is_real() {
                            continue;
                        }
                        let lam = e.eigenvalue;
                        if lam <= 0.0 {
                            continue;
                        }
                        if !(k_lo * k_lo..=k_hi * k_hi).contains(&lam) {
                            continue;
                        }
                        if e.residual > 1e-8 {
                            continue;
                        }
                        if found
                            .iter()
                            .any(|f| (f.eigenvalue - lam).abs() <= 1e-6 * lam.abs())
                        {
                            continue;
                        }
                        found.push(e);
                    }
                    break;
                }
                Err(Error::FactorizationFailure(_)) if attempt < 3 => {
                    // shift hit an eigenvalue; perturb and retry
                    attempt += 1;
                    shift *= 1.0 + 1e-7 * attempt as f64;
                }
                Err(e) => return Err(e),
            }
        }
    }
    found.sort_by(|a, b| a.eigenvalue.partial_cmp(&b.eigenvalue).unwrap());
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::Preset;
    use crate::te::analytic::first_root_adaptive;

    #[test]
    fn pencil_dimensions() {
        let mesh = mesh::square_mesh(0.0, 1.0, 4).unwrap();
        let field = CoefficientField::constant(0.5, 1.5).unwrap();
        let p = assemble_pencil_x(&mesh, &field).unwrap();
        let v = mesh.num_vertices();
        let i = v - mesh.boundary.len();
        assert_eq!(p.k.rows, v + i);
        assert_eq!(p.m.rows, v + i);
    }

    #[test]
    fn regime_enforced() {
        let field = CoefficientField::constant(1.0, 2.0).unwrap();
        let mesh = mesh::square_mesh(0.0, 1.0, 4).unwrap();
        assert!(matches!(
            assemble_pencil_x(&mesh, &field),
            Err(Error::RegimeError(_))
        ));
    }

    #[test]
    fn constant_disk_matches_analytic() {
        // a = 0.5, n = 2.5 on the unit disk: first TE 2.533976...
        let field = CoefficientField::constant(0.5, 2.5).unwrap();
        let query = TEQuery {
            domain: Domain::Disk { radius: 1.0 },
            field,
            k_window: (2.2, 2.9),
            count: 1,
            h_max: Some(0.055),
        };
        let r = solve_te_pencil(&query).unwrap();
        assert!(!r.eigenvalues.is_empty(), "no eigenvalue found");
        let exact = first_root_adaptive(1.0, 0.5, 2.5).unwrap();
        let got = r.eigenvalues[0];
        assert!(
            (got - exact).abs() / exact < 0.02,
            "k1 = {got} vs analytic {exact}"
        );
    }

    #[test]
    fn oscillating_square_runs() {
        // rotated-A with layered-n at eps = 1 on a small square, smoke-level
        let field = Preset::RotatedA.field().unwrap();
        let query = TEQuery {
            domain: Domain::Square { lo: 0.0, hi: 2.0 },
            field,
            k_window: (1.8, 2.6),
            count: 1,
            h_max: Some(0.125),
        };
        let r = solve_te_pencil(&query).unwrap();
        assert!(!r.eigenvalues.is_empty());
        assert!(r.residuals.iter().all(|&x| x <= 1e-8));
    }
}
