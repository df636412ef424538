//! P1 finite element assembly on triangle meshes.
//!
//! Coefficient integrals use the 3-point edge-midpoint rule (exact for
//! quadratics), so P1 stiffness terms are integrated exactly against
//! piecewise-smooth coefficients and P1 mass terms pick up the coefficient
//! at the same points. Periodic variants assemble over vertex classes.

use crate::coeffs::Mat2;
use crate::linalg::{SparseMatrix, TripletBuilder};
use crate::mesh::TriangleMesh;

/// Geometry of one P1 triangle: area and the constant gradients of its
/// three hat functions.
pub fn tri_geometry(mesh: &TriangleMesh, t: usize) -> (f64, [[f64; 2]; 3]) {
    let [a, b, c] = mesh.triangles[t];
    let pa = mesh.vertices[a];
    let pb = mesh.vertices[b];
    let pc = mesh.vertices[c];
    let det = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]);
    let area = 0.5 * det;
    let g = [
        [(pb[1] - pc[1]) / det, (pc[0] - pb[0]) / det],
        [(pc[1] - pa[1]) / det, (pa[0] - pc[0]) / det],
        [(pa[1] - pb[1]) / det, (pb[0] - pa[0]) / det],
    ];
    (area, g)
}

/// Edge midpoints of triangle `t`: midpoint `q` is opposite vertex `q`
/// (midpoint of the edge joining the other two vertices).
pub fn edge_midpoints(mesh: &TriangleMesh, t: usize) -> [[f64; 2]; 3] {
    let [a, b, c] = mesh.triangles[t];
    let pa = mesh.vertices[a];
    let pb = mesh.vertices[b];
    let pc = mesh.vertices[c];
    [
        [(pb[0] + pc[0]) / 2.0, (pb[1] + pc[1]) / 2.0],
        [(pa[0] + pc[0]) / 2.0, (pa[1] + pc[1]) / 2.0],
        [(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0],
    ]
}

/// Value of hat function `local` at edge midpoint `q` (1/2 unless the
/// midpoint is opposite the vertex).
#[inline]
fn hat_at_midpoint(local: usize, q: usize) -> f64 {
    if local == q {
        0.0
    } else {
        0.5
    }
}

/// Points where coefficients are sampled: the edge midpoints pulled
/// toward the centroid by a relative 1e-7. On meshes aligned with a
/// piecewise coefficient the raw midpoints can sit exactly on the
/// interface; the pull resolves them to the triangle's own side without
/// perturbing the rule's accuracy for smooth coefficients.
pub fn coefficient_points(mesh: &TriangleMesh, t: usize) -> [[f64; 2]; 3] {
    const PULL: f64 = 1e-7;
    let mids = edge_midpoints(mesh, t);
    let c = mesh.centroid(t);
    let mut pts = [[0.0; 2]; 3];
    for q in 0..3 {
        pts[q] = [
            mids[q][0] + PULL * (c[0] - mids[q][0]),
            mids[q][1] + PULL * (c[1] - mids[q][1]),
        ];
    }
    pts
}

/// ∫ A ∇φ_i · ∇φ_j over the mesh, A sampled at edge midpoints.
/// `dof[v]` maps a vertex to its (class) index; `ndof` is the dof count.
pub fn stiffness(
    mesh: &TriangleMesh,
    dof: &[usize],
    ndof: usize,
    a_at: impl Fn([f64; 2]) -> Mat2,
) -> SparseMatrix {
    let mut tb = TripletBuilder::new(ndof, ndof);
    for t in 0..mesh.num_triangles() {
        let (area, g) = tri_geometry(mesh, t);
        let mids = coefficient_points(mesh, t);
        // average A over the three midpoints (gradients are constant)
        let mut abar = [[0.0; 2]; 2];
        for mid in mids {
            let am = a_at(mid);
            for r in 0..2 {
                for c in 0..2 {
                    abar[r][c] += am[r][c] / 3.0;
                }
            }
        }
        let tri = mesh.triangles[t];
        for li in 0..3 {
            for lj in 0..3 {
                let gi = g[li];
                let gj = g[lj];
                let v = area
                    * (abar[0][0] * gi[0] * gj[0]
                        + abar[0][1] * gi[0] * gj[1]
                        + abar[1][0] * gi[1] * gj[0]
                        + abar[1][1] * gi[1] * gj[1]);
                tb.push(dof[tri[li]], dof[tri[lj]], v);
            }
        }
    }
    let mut m = tb.finalize(true).expect("assembly indices in range");
    m.symmetric = true;
    m
}

/// ∫ w φ_i φ_j with the scalar weight sampled at edge midpoints.
pub fn weighted_mass(
    mesh: &TriangleMesh,
    dof: &[usize],
    ndof: usize,
    w_at: impl Fn([f64; 2]) -> f64,
) -> SparseMatrix {
    let mut tb = TripletBuilder::new(ndof, ndof);
    for t in 0..mesh.num_triangles() {
        let (area, _) = tri_geometry(mesh, t);
        let mids = coefficient_points(mesh, t);
        let wq = [w_at(mids[0]), w_at(mids[1]), w_at(mids[2])];
        let tri = mesh.triangles[t];
        for li in 0..3 {
            for lj in 0..3 {
                let mut v = 0.0;
                for q in 0..3 {
                    v += wq[q] * hat_at_midpoint(li, q) * hat_at_midpoint(lj, q);
                }
                tb.push(dof[tri[li]], dof[tri[lj]], v * area / 3.0);
            }
        }
    }
    let mut m = tb.finalize(true).expect("assembly indices in range");
    m.symmetric = true;
    m
}

/// Row-sum lumped plain mass: lumped[i] = ∫ φ_i = Σ area/3.
pub fn lumped_mass(mesh: &TriangleMesh, dof: &[usize], ndof: usize) -> Vec<f64> {
    let mut l = vec![0.0; ndof];
    for t in 0..mesh.num_triangles() {
        let (area, _) = tri_geometry(mesh, t);
        for &v in &mesh.triangles[t] {
            l[dof[v]] += area / 3.0;
        }
    }
    l
}

/// ∫ (A e_dir) · ∇φ_i — the right side of the periodic cell problem.
pub fn cell_rhs(
    mesh: &TriangleMesh,
    dof: &[usize],
    ndof: usize,
    a_at: impl Fn([f64; 2]) -> Mat2,
    dir: usize,
) -> Vec<f64> {
    let mut rhs = vec![0.0; ndof];
    for t in 0..mesh.num_triangles() {
        let (area, g) = tri_geometry(mesh, t);
        let mids = coefficient_points(mesh, t);
        let mut abar = [[0.0; 2]; 2];
        for mid in mids {
            let am = a_at(mid);
            for r in 0..2 {
                for c in 0..2 {
                    abar[r][c] += am[r][c] / 3.0;
                }
            }
        }
        let ae = [abar[0][dir], abar[1][dir]];
        let tri = mesh.triangles[t];
        for li in 0..3 {
            rhs[dof[tri[li]]] += area * (ae[0] * g[li][0] + ae[1] * g[li][1]);
        }
    }
    rhs
}

/// Identity dof map for a plain mesh.
pub fn identity_dofs(mesh: &TriangleMesh) -> (Vec<usize>, usize) {
    ((0..mesh.num_vertices()).collect(), mesh.num_vertices())
}

/// Interior/boundary split of the vertex set.
pub struct BoundarySplit {
    /// reduced interior index per vertex, usize::MAX on the boundary
    pub interior_of: Vec<usize>,
    /// vertex index per reduced interior index
    pub interior_vertices: Vec<usize>,
    /// reduced boundary index per vertex, usize::MAX in the interior
    pub boundary_of: Vec<usize>,
    pub boundary_vertices: Vec<usize>,
}

impl BoundarySplit {
    pub fn new(mesh: &TriangleMesh) -> Self {
        let n = mesh.num_vertices();
        let mut interior_of = vec![usize::MAX; n];
        let mut boundary_of = vec![usize::MAX; n];
        let mut interior_vertices = Vec::new();
        let mut boundary_vertices = Vec::new();
        for v in 0..n {
            if mesh.is_boundary(v) {
                boundary_of[v] = boundary_vertices.len();
                boundary_vertices.push(v);
            } else {
                interior_of[v] = interior_vertices.len();
                interior_vertices.push(v);
            }
        }
        BoundarySplit {
            interior_of,
            interior_vertices,
            boundary_of,
            boundary_vertices,
        }
    }

    pub fn num_interior(&self) -> usize {
        self.interior_vertices.len()
    }

    pub fn num_boundary(&self) -> usize {
        self.boundary_vertices.len()
    }
}

/// New matrix from selected rows of `m` (new row r = old `rows[r]`).
pub fn select_rows(m: &SparseMatrix, rows: &[usize]) -> SparseMatrix {
    let mut indptr = vec![0usize; rows.len() + 1];
    let mut indices = Vec::new();
    let mut values = Vec::new();
    for (r, &old) in rows.iter().enumerate() {
        for p in m.indptr[old]..m.indptr[old + 1] {
            indices.push(m.indices[p]);
            values.push(m.values[p]);
        }
        indptr[r + 1] = indices.len();
    }
    SparseMatrix {
        rows: rows.len(),
        cols: m.cols,
        indptr,
        indices,
        values,
        symmetric: false,
    }
}

/// New matrix with columns remapped through `col_map` (usize::MAX drops
/// the entry).
pub fn map_cols(m: &SparseMatrix, col_map: &[usize], new_cols: usize) -> SparseMatrix {
    let mut tb = TripletBuilder::new(m.rows, new_cols);
    for i in 0..m.rows {
        for p in m.indptr[i]..m.indptr[i + 1] {
            let j = col_map[m.indices[p]];
            if j != usize::MAX {
                tb.push(i, j, m.values[p]);
            }
        }
    }
    tb.finalize(false).expect("mapped indices in range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::IDENTITY;
    use crate::linalg::eig_shift_invert;
    use crate::mesh::square_mesh;

    #[test]
    fn stiffness_rows_sum_to_zero() {
        let mesh = square_mesh(0.0, 1.0, 6).unwrap();
        let (dof, ndof) = identity_dofs(&mesh);
        let k = stiffness(&mesh, &dof, ndof, |_| IDENTITY);
        for i in 0..ndof {
            let (_, vals) = k.row(i);
            let s: f64 = vals.iter().sum();
            assert!(s.abs() < 1e-12, "row {i} sums to {s}");
        }
    }

    #[test]
    fn mass_total_equals_area() {
        let mesh = square_mesh(-1.0, 3.0, 5).unwrap();
        let (dof, ndof) = identity_dofs(&mesh);
        let m = weighted_mass(&mesh, &dof, ndof, |_| 1.0);
        let total: f64 = m.values.iter().sum();
        assert!((total - 16.0).abs() < 1e-12);
        let l = lumped_mass(&mesh, &dof, ndof);
        assert!((l.iter().sum::<f64>() - 16.0).abs() < 1e-12);
    }

    #[test]
    fn dirichlet_laplacian_eigenvalue_converges() {
        // first Dirichlet eigenvalue of the unit square: 2 pi^2
        let mesh = square_mesh(0.0, 1.0, 24).unwrap();
        let split = BoundarySplit::new(&mesh);
        let (dof, ndof) = identity_dofs(&mesh);
        let k_full = stiffness(&mesh, &dof, ndof, |_| IDENTITY);
        let m_full = weighted_mass(&mesh, &dof, ndof, |_| 1.0);
        let rows = &split.interior_vertices;
        let k = map_cols(&select_rows(&k_full, rows), &split.interior_of, rows.len());
        let m = map_cols(&select_rows(&m_full, rows), &split.interior_of, rows.len());
        let eig = eig_shift_invert(&k, &m, 18.0, 1).unwrap();
        let exact = 2.0 * std::f64::consts::PI * std::f64::consts::PI;
        let got = eig[0].eigenvalue;
        assert!(
            (got - exact).abs() / exact < 5e-3,
            "lambda1 {got} vs {exact}"
        );
        assert!(eig[0].residual < 1e-8);
    }
}
