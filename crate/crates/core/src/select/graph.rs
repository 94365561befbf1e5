//! Spanning-tree searches over weighted candidate edges.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::structure::ConstraintEntry;

/// A candidate edge between two nodes of the next tree.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedEdge {
    pub nodes: (usize, usize),
    /// Absolute empirical Kendall's tau.
    pub weight: f64,
    /// The pair-copula slot the edge would create; breaks weight ties.
    pub key: ConstraintEntry,
}

/// Heavier first; on equal weight the lexicographically smaller key first.
fn better(a: &WeightedEdge, b: &WeightedEdge) -> bool {
    match a.weight.total_cmp(&b.weight) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => a.key < b.key,
    }
}

fn disconnected(what: &str) -> Error {
    Error::InvalidTrees(format!("candidate graph admits no spanning {what}"))
}

/// Maximum spanning tree by Prim's algorithm, grown from node 0.
///
/// Returns indices into `edges`, in the order they were added.
pub fn mst(node_count: usize, edges: &[WeightedEdge]) -> Result<Vec<usize>> {
    if node_count <= 1 {
        return Ok(Vec::new());
    }
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); node_count];
    for (i, e) in edges.iter().enumerate() {
        incident[e.nodes.0].push(i);
        incident[e.nodes.1].push(i);
    }
    let mut in_tree = vec![false; node_count];
    // best crossing edge per outside node
    let mut best: Vec<Option<usize>> = vec![None; node_count];
    let mut chosen = Vec::with_capacity(node_count - 1);
    let add = |node: usize, in_tree: &mut Vec<bool>, best: &mut Vec<Option<usize>>| {
        in_tree[node] = true;
        for &i in &incident[node] {
            let e = &edges[i];
            let other = if e.nodes.0 == node {
                e.nodes.1
            } else {
                e.nodes.0
            };
            if !in_tree[other] && best[other].is_none_or(|b| better(e, &edges[b])) {
                best[other] = Some(i);
            }
        }
    };
    add(0, &mut in_tree, &mut best);
    for _ in 1..node_count {
        let next = (0..node_count)
            .filter(|&v| !in_tree[v])
            .filter_map(|v| best[v].map(|i| (v, i)))
            .reduce(|x, y| {
                if better(&edges[y.1], &edges[x.1]) {
                    y
                } else {
                    x
                }
            });
        let Some((v, i)) = next else {
            return Err(disconnected("tree"));
        };
        chosen.push(i);
        add(v, &mut in_tree, &mut best);
    }
    Ok(chosen)
}

/// The star with the largest total weight; ties go to the lowest root index.
/// Only roots adjacent to every other node qualify.
pub fn select_cvine_tree(node_count: usize, edges: &[WeightedEdge]) -> Result<Vec<usize>> {
    if node_count <= 1 {
        return Ok(Vec::new());
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for root in 0..node_count {
        let mut spokes: Vec<Option<usize>> = vec![None; node_count];
        for (i, e) in edges.iter().enumerate() {
            let other = match e.nodes {
                (a, b) if a == root => b,
                (a, b) if b == root => a,
                _ => continue,
            };
            if spokes[other].is_none_or(|j| better(e, &edges[j])) {
                spokes[other] = Some(i);
            }
        }
        let picked: Option<Vec<usize>> = (0..node_count)
            .filter(|&v| v != root)
            .map(|v| spokes[v])
            .collect();
        let Some(picked) = picked else { continue };
        let total: f64 = picked.iter().map(|&i| edges[i].weight).sum();
        if best.as_ref().is_none_or(|(w, _)| total > *w) {
            best = Some((total, picked));
        }
    }
    best.map(|(_, p)| p).ok_or_else(|| disconnected("star"))
}

/// A heavy Hamiltonian path: cheapest insertion on negated weights, then
/// 2-opt reversals until no reversal helps. Needs the complete graph.
pub fn select_dvine_path(node_count: usize, edges: &[WeightedEdge]) -> Result<Vec<usize>> {
    if node_count <= 1 {
        return Ok(Vec::new());
    }
    let mut index = vec![vec![None; node_count]; node_count];
    for (i, e) in edges.iter().enumerate() {
        let (a, b) = e.nodes;
        for (x, y) in [(a, b), (b, a)] {
            if index[x][y].is_none_or(|j: usize| better(e, &edges[j])) {
                index[x][y] = Some(i);
            }
        }
    }
    for (a, row) in index.iter().enumerate() {
        if row.iter().enumerate().any(|(b, e)| a != b && e.is_none()) {
            return Err(disconnected("path"));
        }
    }
    let w = |a: usize, b: usize| edges[index[a][b].expect("complete graph")].weight;
    let path = if node_count <= EXACT_PATH_MAX {
        best_path(node_count, &w)
    } else {
        path_heuristic(node_count, &w)
    };
    Ok(path
        .windows(2)
        .map(|p| index[p[0]][p[1]].expect("complete graph"))
        .collect())
}

/// Largest node count solved exactly; the subset table has `n * 2^n` cells.
const EXACT_PATH_MAX: usize = 12;

/// Maximum-weight Hamiltonian path by dynamic programming over subsets.
fn best_path(n: usize, w: &dyn Fn(usize, usize) -> f64) -> Vec<usize> {
    let full = 1usize << n;
    // best[set * n + end]: heaviest path through `set` ending at `end`
    let mut best = vec![f64::NEG_INFINITY; full * n];
    let mut prev = vec![usize::MAX; full * n];
    for v in 0..n {
        best[(1 << v) * n + v] = 0.0;
    }
    for set in 1..full {
        for end in (0..n).filter(|&e| set & (1 << e) != 0) {
            let here = best[set * n + end];
            if here == f64::NEG_INFINITY {
                continue;
            }
            for next in (0..n).filter(|&x| set & (1 << x) == 0) {
                let cell = (set | 1 << next) * n + next;
                let cand = here + w(end, next);
                if cand > best[cell] {
                    best[cell] = cand;
                    prev[cell] = end;
                }
            }
        }
    }
    let mut set = full - 1;
    let mut end = (0..n)
        .max_by(|&a, &b| {
            best[set * n + a]
                .total_cmp(&best[set * n + b])
                .then(b.cmp(&a))
        })
        .expect("n >= 1");
    let mut path = Vec::with_capacity(n);
    loop {
        path.push(end);
        let p = prev[set * n + end];
        set &= !(1 << end);
        if p == usize::MAX {
            break;
        }
        end = p;
    }
    path.reverse();
    path
}

/// Node order of the heuristic path for weights `w`.
fn path_heuristic(n: usize, w: &dyn Fn(usize, usize) -> f64) -> Vec<usize> {
    if n == 1 {
        return vec![0];
    }
    // start from the heaviest edge
    let (mut a0, mut b0) = (0, 1);
    for a in 0..n {
        for b in a + 1..n {
            if w(a, b) > w(a0, b0) {
                (a0, b0) = (a, b);
            }
        }
    }
    let mut path = vec![a0, b0];
    let mut placed = vec![false; n];
    placed[a0] = true;
    placed[b0] = true;
    while path.len() < n {
        // (gain, node, position)
        let mut best: Option<(f64, usize, usize)> = None;
        for v in (0..n).filter(|&v| !placed[v]) {
            for pos in 0..=path.len() {
                let gain = if pos == 0 {
                    w(v, path[0])
                } else if pos == path.len() {
                    w(path[pos - 1], v)
                } else {
                    w(path[pos - 1], v) + w(v, path[pos]) - w(path[pos - 1], path[pos])
                };
                if best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, v, pos));
                }
            }
        }
        let (_, v, pos) = best.expect("an unplaced node exists");
        path.insert(pos, v);
        placed[v] = true;
    }
    two_opt(&mut path, w);
    path
}

/// Reverses sub-paths while that increases the total weight.
fn two_opt(path: &mut [usize], w: &dyn Fn(usize, usize) -> f64) {
    let n = path.len();
    let mut improved = true;
    while improved {
        improved = false;
        for i in 0..n - 1 {
            for j in i + 1..n {
                // reversing path[i..=j] swaps the edges at its two ends
                let before = if i > 0 { w(path[i - 1], path[i]) } else { 0.0 }
                    + if j + 1 < n {
                        w(path[j], path[j + 1])
                    } else {
                        0.0
                    };
                let after = if i > 0 { w(path[i - 1], path[j]) } else { 0.0 }
                    + if j + 1 < n {
                        w(path[i], path[j + 1])
                    } else {
                        0.0
                    };
                if after > before + 1e-12 {
                    path[i..=j].reverse();
                    improved = true;
                }
            }
        }
    }
}
