//! Structured triangulations of the unit cell, axis-aligned squares, and
//! disks, with P1 bookkeeping.
//!
//! All constructions are deterministic. Disk meshes use a concentric-ring
//! layout (ring j carries 6j vertices) so that one refinement level exactly
//! quadruples the triangle count and boundary vertices sit on the circle to
//! machine precision. Square and unit-cell meshes are uniform diagonal
//! splits; the unit-cell variant optionally identifies opposite faces for
//! periodic assembly.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Structured-grid metadata kept for O(1) point location on square meshes.
#[derive(Debug, Clone, Copy)]
pub struct GridInfo {
    pub lo: f64,
    pub hi: f64,
    pub divisions: usize,
}

/// A conforming triangulation with counterclockwise triangles.
#[derive(Debug, Clone)]
pub struct TriangleMesh {
    /// Vertex coordinates.
    pub vertices: Vec<[f64; 2]>,
    /// Vertex index triples, counterclockwise.
    pub triangles: Vec<[usize; 3]>,
    /// Sorted indices of vertices on the domain boundary.
    pub boundary: Vec<usize>,
    /// For periodic meshes: `map[i]` is the master (class representative)
    /// of vertex `i`; identity for masters. `None` for plain meshes.
    pub periodic_map: Option<Vec<usize>>,
    /// Maximum triangle diameter (longest edge).
    pub h: f64,
    /// Present for structured square/cell meshes; enables fast locate().
    pub grid: Option<GridInfo>,
}

impl TriangleMesh {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Signed area of triangle `t` (positive for counterclockwise).
    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let pa = self.vertices[a];
        let pb = self.vertices[b];
        let pc = self.vertices[c];
        0.5 * ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]))
    }

    /// Sum of triangle areas.
    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.signed_area(t)).sum()
    }

    /// Triangle centroid.
    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangles[t];
        let pa = self.vertices[a];
        let pb = self.vertices[b];
        let pc = self.vertices[c];
        [
            (pa[0] + pb[0] + pc[0]) / 3.0,
            (pa[1] + pb[1] + pc[1]) / 3.0,
        ]
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary.binary_search(&v).is_ok()
    }

    /// Number of distinct vertex classes under the periodic identification
    /// (equals `num_vertices` for plain meshes).
    pub fn num_classes(&self) -> usize {
        match &self.periodic_map {
            None => self.vertices.len(),
            Some(map) => map.iter().enumerate().filter(|(i, m)| i == *m as &usize).count(),
        }
    }

    /// Dense renumbering of classes: returns (class index per vertex, class count).
    pub fn class_ids(&self) -> (Vec<usize>, usize) {
        match &self.periodic_map {
            None => ((0..self.vertices.len()).collect(), self.vertices.len()),
            Some(map) => {
                let mut id = vec![usize::MAX; self.vertices.len()];
                let mut next = 0;
                for (i, &m) in map.iter().enumerate() {
                    if m == i {
                        id[i] = next;
                        next += 1;
                    }
                }
                for (i, &m) in map.iter().enumerate() {
                    if m != i {
                        id[i] = id[m];
                    }
                }
                (id, next)
            }
        }
    }

    /// Conformity check: every interior edge shared by exactly two
    /// triangles, every boundary edge by exactly one, all areas positive.
    pub fn check_conformity(&self) -> Result<()> {
        let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            if self.signed_area(t) <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "triangle {t} has non-positive area"
                )));
            }
            for e in 0..3 {
                let a = tri[e];
                let b = tri[(e + 1) % 3];
                let key = (a.min(b), a.max(b));
                *edges.entry(key).or_insert(0) += 1;
            }
        }
        for (&(a, b), &count) in &edges {
            match count {
                1 => {
                    if !(self.is_boundary(a) && self.is_boundary(b)) {
                        return Err(Error::InvalidParameter(format!(
                            "edge ({a},{b}) is on the boundary but its vertices are not marked"
                        )));
                    }
                }
                2 => {}
                n => {
                    return Err(Error::InvalidParameter(format!(
                        "edge ({a},{b}) shared by {n} triangles"
                    )))
                }
            }
        }
        Ok(())
    }

    /// Locate `p` on a structured square mesh; returns the triangle index
    /// and barycentric coordinates. `None` if outside or unstructured.
    pub fn locate(&self, p: [f64; 2]) -> Option<(usize, [f64; 3])> {
        let g = self.grid?;
        let n = g.divisions;
        let delta = (g.hi - g.lo) / n as f64;
        let fx = (p[0] - g.lo) / delta;
        let fy = (p[1] - g.lo) / delta;
        if !(-1e-12..=n as f64 + 1e-12).contains(&fx) || !(-1e-12..=n as f64 + 1e-12).contains(&fy)
        {
            return None;
        }
        let ix = (fx.floor() as isize).clamp(0, n as isize - 1) as usize;
        let iy = (fy.floor() as isize).clamp(0, n as isize - 1) as usize;
        let u = fx - ix as f64;
        let v = fy - iy as f64;
        // cell (ix, iy) holds triangles 2*(iy*n+ix) (lower, u >= v) and +1 (upper)
        let t = 2 * (iy * n + ix) + if u >= v { 0 } else { 1 };
        let [a, b, c] = self.triangles[t];
        let pa = self.vertices[a];
        let pb = self.vertices[b];
        let pc = self.vertices[c];
        let det = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]);
        let l1 = ((pb[0] - p[0]) * (pc[1] - p[1]) - (pc[0] - p[0]) * (pb[1] - p[1])) / det;
        let l2 = ((pc[0] - p[0]) * (pa[1] - p[1]) - (pa[0] - p[0]) * (pc[1] - p[1])) / det;
        Some((t, [l1, l2, 1.0 - l1 - l2]))
    }

    /// Plain-text dump: header "nv nt", one vertex per line "x y", one
    /// triangle per line "i j k" (zero-based).
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {}", self.num_vertices(), self.num_triangles());
        for v in &self.vertices {
            let _ = writeln!(s, "{:.17e} {:.17e}", v[0], v[1]);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
        }
        s
    }

    fn compute_h(vertices: &[[f64; 2]], triangles: &[[usize; 3]]) -> f64 {
        let mut h: f64 = 0.0;
        for tri in triangles {
            for e in 0..3 {
                let a = vertices[tri[e]];
                let b = vertices[tri[(e + 1) % 3]];
                h = h.max(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
            }
        }
        h
    }

    fn boundary_from_edges(triangles: &[[usize; 3]]) -> Vec<usize> {
        let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in triangles {
            for e in 0..3 {
                let a = tri[e];
                let b = tri[(e + 1) % 3];
                let key = (a.min(b), a.max(b));
                *edges.entry(key).or_insert(0) += 1;
            }
        }
        let mut set: Vec<usize> = edges
            .iter()
            .filter(|(_, &c)| c == 1)
            .flat_map(|(&(a, b), _)| [a, b])
            .collect();
        set.sort_unstable();
        set.dedup();
        set
    }
}

/// Uniform diagonal-split triangulation of `[lo, hi]²` with `divisions`
/// cells per side: `(divisions+1)²` vertices, `2·divisions²` triangles.
pub fn square_mesh(lo: f64, hi: f64, divisions: usize) -> Result<TriangleMesh> {
    if hi <= lo {
        return Err(Error::InvalidParameter(format!(
            "square_mesh needs hi > lo, got [{lo}, {hi}]"
        )));
    }
    if divisions < 2 {
        return Err(Error::InvalidParameter(format!(
            "square_mesh needs divisions >= 2, got {divisions}"
        )));
    }
    let n = divisions;
    let delta = (hi - lo) / n as f64;
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            // exact endpoints to keep periodic identification crisp
            let x = if i == n { hi } else { lo + i as f64 * delta };
            let y = if j == n { hi } else { lo + j as f64 * delta };
            vertices.push([x, y]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let v00 = idx(i, j);
            let v10 = idx(i + 1, j);
            let v01 = idx(i, j + 1);
            let v11 = idx(i + 1, j + 1);
            triangles.push([v00, v10, v11]); // lower (u >= v)
            triangles.push([v00, v11, v01]); // upper
        }
    }
    let boundary = TriangleMesh::boundary_from_edges(&triangles);
    let h = TriangleMesh::compute_h(&vertices, &triangles);
    Ok(TriangleMesh {
        vertices,
        triangles,
        boundary,
        periodic_map: None,
        h,
        grid: Some(GridInfo {
            lo,
            hi,
            divisions: n,
        }),
    })
}

/// Triangulation of the unit cell Y = (0,1)². With `periodic`, opposite
/// faces are identified (corners collapse to one class), leaving
/// `divisions²` vertex classes.
pub fn unit_cell_mesh(divisions: usize, periodic: bool) -> Result<TriangleMesh> {
    let mut mesh = square_mesh(0.0, 1.0, divisions)?;
    if periodic {
        let n = divisions;
        let idx = |i: usize, j: usize| j * (n + 1) + i;
        let mut map: Vec<usize> = (0..mesh.vertices.len()).collect();
        for j in 0..=n {
            for i in 0..=n {
                let mi = i % n;
                let mj = j % n;
                map[idx(i, j)] = idx(mi, mj);
            }
        }
        mesh.periodic_map = Some(map);
    }
    Ok(mesh)
}

/// Concentric-ring disk mesh with `rings` rings: ring j carries 6j
/// vertices at radius `radius·j/rings`; `6·rings²` triangles total.
pub fn disk_mesh_rings(radius: f64, rings: usize) -> Result<TriangleMesh> {
    if radius <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "disk mesh needs radius > 0, got {radius}"
        )));
    }
    if rings < 1 {
        return Err(Error::InvalidParameter("disk mesh needs rings >= 1".into()));
    }
    let m = rings;
    let tau = 2.0 * std::f64::consts::PI;
    // Each ring may be rotated by a fraction of its slot; the offset per
    // ring is chosen greedily to minimize the longest zipper edge against
    // the ring below. Deterministic candidate grid.
    let mut offsets = vec![0.0f64; m + 1];
    let ring_angle = |j: usize, l: f64, offs: &[f64]| -> f64 { tau * (l + offs[j]) / (6 * j) as f64 };
    // zipper walk for rings (j-1, j) returning (triangles in local slots, max edge)
    let zip = |j: usize, offs: &[f64], rj: f64, rjm1: f64| -> (Vec<(bool, usize, usize)>, f64) {
        let no = 6 * j;
        let ni = 6 * (j - 1);
        let mut events: Vec<(bool, usize, usize)> = Vec::with_capacity(no + ni);
        let mut po = 0usize;
        let mut pi = 0usize;
        let mut worst = 0.0f64;
        let point = |j: usize, l: usize, r: f64, offs: &[f64]| -> [f64; 2] {
            let th = ring_angle(j, (l % (6 * j)) as f64, offs);
            [r * th.cos(), r * th.sin()]
        };
        let mut edge = |a: [f64; 2], b: [f64; 2], worst: &mut f64| {
            let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
            if d > *worst {
                *worst = d;
            }
        };
        while po < no || pi < ni {
            let next_outer = ring_angle(j, (po + 1) as f64, offs);
            let next_inner = ring_angle(j - 1, (pi + 1) as f64, offs);
            let advance_outer = if pi == ni {
                true
            } else if po == no {
                false
            } else {
                next_outer < next_inner
            };
            if advance_outer {
                events.push((true, po, pi));
                edge(
                    point(j, po + 1, rj, offs),
                    point(j - 1, pi, rjm1, offs),
                    &mut worst,
                );
                po += 1;
            } else {
                events.push((false, po, pi));
                edge(
                    point(j, po, rj, offs),
                    point(j - 1, pi + 1, rjm1, offs),
                    &mut worst,
                );
                pi += 1;
            }
        }
        (events, worst)
    };
    for j in 2..=m {
        let rj = radius * j as f64 / m as f64;
        let rjm1 = radius * (j - 1) as f64 / m as f64;
        let mut best = (0.0f64, f64::INFINITY);
        for c in 0..10 {
            let cand = c as f64 * 0.1;
            let mut offs = offsets.clone();
            offs[j] = cand;
            let (_, worst) = zip(j, &offs, rj, rjm1);
            if worst < best.1 {
                best = (cand, worst);
            }
        }
        offsets[j] = best.0;
    }
    let mut vertices = vec![[0.0, 0.0]];
    let mut ring_start = vec![0usize; m + 1]; // index of first vertex of ring j
    for j in 1..=m {
        ring_start[j] = vertices.len();
        let r = radius * j as f64 / m as f64;
        for l in 0..6 * j {
            let theta = ring_angle(j, l as f64, &offsets);
            vertices.push([r * theta.cos(), r * theta.sin()]);
        }
    }
    let mut triangles = Vec::with_capacity(6 * m * m);
    // ring 1 against the center: a fan of 6 triangles
    for l in 0..6 {
        triangles.push([0, ring_start[1] + l, ring_start[1] + (l + 1) % 6]);
    }
    for j in 2..=m {
        let rj = radius * j as f64 / m as f64;
        let rjm1 = radius * (j - 1) as f64 / m as f64;
        let (events, _) = zip(j, &offsets, rj, rjm1);
        let outer = ring_start[j];
        let inner = ring_start[j - 1];
        let no = 6 * j;
        let ni = 6 * (j - 1);
        for (is_outer, po, pi) in events {
            if is_outer {
                triangles.push([inner + pi % ni, outer + po % no, outer + (po + 1) % no]);
            } else {
                triangles.push([inner + pi % ni, outer + po % no, inner + (pi + 1) % ni]);
            }
        }
    }
    // orientation fix: ensure counterclockwise
    for t in 0..triangles.len() {
        let [a, b, c] = triangles[t];
        let pa = vertices[a];
        let pb = vertices[b];
        let pc = vertices[c];
        let area2 = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]);
        if area2 < 0.0 {
            triangles[t] = [a, c, b];
        }
    }
    let boundary = TriangleMesh::boundary_from_edges(&triangles);
    let h = TriangleMesh::compute_h(&vertices, &triangles);
    Ok(TriangleMesh {
        vertices,
        triangles,
        boundary,
        periodic_map: None,
        h,
        grid: None,
    })
}

/// Disk mesh where each refinement level halves h: `4·2^(refinement-1)` rings.
pub fn disk_mesh(radius: f64, refinement: usize) -> Result<TriangleMesh> {
    if refinement < 1 {
        return Err(Error::InvalidParameter(
            "disk_mesh needs refinement >= 1".into(),
        ));
    }
    disk_mesh_rings(radius, 4usize << (refinement - 1))
}

/// Smallest ring count whose mesh satisfies `h <= h_target`.
pub fn disk_mesh_max_h(radius: f64, h_target: f64) -> Result<TriangleMesh> {
    if h_target <= 0.0 {
        return Err(Error::InvalidParameter("h_target must be positive".into()));
    }
    let mut rings = ((1.1 * radius / h_target).ceil() as usize).max(2);
    loop {
        let mesh = disk_mesh_rings(radius, rings)?;
        if mesh.h <= h_target {
            return Ok(mesh);
        }
        rings = (rings + 1).max((rings as f64 * 1.1) as usize);
    }
}

/// Smallest division count whose square mesh satisfies `h <= h_target`.
pub fn square_mesh_max_h(lo: f64, hi: f64, h_target: f64) -> Result<TriangleMesh> {
    if h_target <= 0.0 {
        return Err(Error::InvalidParameter("h_target must be positive".into()));
    }
    let div = ((std::f64::consts::SQRT_2 * (hi - lo) / h_target).ceil() as usize).max(2);
    square_mesh(lo, hi, div)
}
