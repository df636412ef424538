//! Fill-reducing minimum-degree ordering on a symmetric sparsity pattern,
//! using the quotient-graph (element) representation.

use super::sparse::SparseMatrix;
use std::collections::BinaryHeap;
use std::cmp::Reverse;

/// Minimum-degree permutation for the pattern of A + Aᵀ.
/// Returns `perm` such that eliminating nodes in the order
/// `perm[0], perm[1], ...` keeps fill moderate. `perm[k]` is the original
/// index of the k-th eliminated node.
pub fn min_degree_order(a: &SparseMatrix) -> Vec<usize> {
    let n = a.rows;
    assert_eq!(a.rows, a.cols);
    // symmetrized adjacency (no diagonal)
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    for i in 0..n {
        for p in a.indptr[i]..a.indptr[i + 1] {
            let j = a.indices[p];
            if i != j {
                adj[i].push(j as u32);
                adj[j].push(i as u32);
            }
        }
    }
    for l in &mut adj {
        l.sort_unstable();
        l.dedup();
    }

    // quotient graph: per node, adjacent uneliminated nodes + element ids
    let mut elems_of: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut elem_nodes: Vec<Vec<u32>> = Vec::new();
    let mut eliminated = vec![false; n];
    let mut stamp = vec![u32::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut heap: BinaryHeap<Reverse<(u32, u32)>> = BinaryHeap::new();
    let mut degree = vec![0u32; n];

    for v in 0..n {
        degree[v] = adj[v].len() as u32;
        heap.push(Reverse((degree[v], v as u32)));
    }

    let mut tick: u32 = 0;
    let mut scratch: Vec<u32> = Vec::new();

    while let Some(Reverse((d, v))) = heap.pop() {
        let v = v as usize;
        if eliminated[v] {
            continue;
        }
        // lazy heap: recompute the exact degree; requeue if stale
        tick += 1;
        scratch.clear();
        for &u in &adj[v] {
            let u = u as usize;
            if !eliminated[u] && stamp[u] != tick {
                stamp[u] = tick;
                scratch.push(u as u32);
            }
        }
        for &e in &elems_of[v] {
            for &u in &elem_nodes[e as usize] {
                let u = u as usize;
                if u != v && !eliminated[u] && stamp[u] != tick {
                    stamp[u] = tick;
                    scratch.push(u as u32);
                }
            }
        }
        let exact = scratch.len() as u32;
        if exact > d {
            heap.push(Reverse((exact, v as u32)));
            continue;
        }
        // eliminate v: its neighborhood becomes a new element
        eliminated[v] = true;
        order.push(v);
        let new_elem = elem_nodes.len() as u32;
        let members = scratch.clone();
        // absorb v's old elements into the new one
        let old_elems = std::mem::take(&mut elems_of[v]);
        elem_nodes.push(members.clone());
        for &u in &members {
            let u = u as usize;
            // prune element lists: drop absorbed elements
            elems_of[u].retain(|e| !old_elems.contains(e));
            elems_of[u].push(new_elem);
            // prune direct adjacency of eliminated nodes lazily
            adj[u].retain(|&w| !eliminated[w as usize]);
            // approximate degree update (exact is recomputed at pop)
            let approx = (adj[u].len() + members.len().saturating_sub(1)) as u32;
            degree[u] = approx;
            heap.push(Reverse((approx, u as u32)));
        }
        for e in old_elems {
            elem_nodes[e as usize].clear();
        }
    }
    order
}

/// Symmetric permutation B = P A Pᵀ with B(k, l) = A(perm[k], perm[l]).
pub fn permute_symmetric(a: &SparseMatrix, perm: &[usize]) -> SparseMatrix {
    let n = a.rows;
    let mut inv = vec![0usize; n];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }
    let mut b = super::sparse::TripletBuilder::new(n, n);
    for i in 0..n {
        for p in a.indptr[i]..a.indptr[i + 1] {
            b.push(inv[i], inv[a.indices[p]], a.values[p]);
        }
    }
    let mut m = b.finalize(a.symmetric).expect("permutation in range");
    m.symmetric = a.symmetric;
    m
}
