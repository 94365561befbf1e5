use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;

use super::{ConstraintEntry, RVineStructure};
use crate::bicop::PairCopula;
use crate::error::{Error, Result};
use crate::matrix::TriMatrix;

/// An edge of tree `T_t`, with the pair copula attached to it.
#[derive(Debug, Clone, PartialEq)]
pub struct VineEdge {
    /// Endpoints: variable labels in the first tree, indices into the
    /// previous tree's edge list afterwards.
    pub nodes: (usize, usize),
    /// Oriented: `conditioned.0` comes from `nodes.0`, and is the first argument of `copula`.
    pub conditioned: (usize, usize),
    /// Sorted ascending.
    pub conditioning: Vec<usize>,
    pub copula: PairCopula,
}

impl VineEdge {
    pub fn entry(&self) -> ConstraintEntry {
        ConstraintEntry::new(
            self.conditioned.0,
            self.conditioned.1,
            self.conditioning.iter().copied(),
        )
    }

    /// Conditioned and conditioning labels together.
    pub fn complete_union(&self) -> BTreeSet<usize> {
        let mut u: BTreeSet<usize> = self.conditioning.iter().copied().collect();
        u.insert(self.conditioned.0);
        u.insert(self.conditioned.1);
        u
    }

    /// The same edge with its endpoints (and copula arguments) swapped.
    pub fn flipped(&self) -> VineEdge {
        VineEdge {
            nodes: (self.nodes.1, self.nodes.0),
            conditioned: (self.conditioned.1, self.conditioned.0),
            conditioning: self.conditioning.clone(),
            copula: self.copula.transposed(),
        }
    }
}

/// An explicit nested tree sequence `T_1, .., T_{n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeSequence {
    dim: usize,
    trees: Vec<Vec<VineEdge>>,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidTrees(msg.into())
}

/// Whether `edges` over `nodes` vertices form a spanning tree.
fn is_spanning_tree(nodes: usize, edges: impl Iterator<Item = (usize, usize)>) -> bool {
    let mut parent: Vec<usize> = (0..nodes).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut count = 0;
    for (a, b) in edges {
        if a >= nodes || b >= nodes {
            return false;
        }
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra == rb {
            return false;
        }
        parent[ra] = rb;
        count += 1;
    }
    count + 1 == nodes
}

impl TreeSequence {
    /// Builds the sequence from endpoint pairs only, deriving conditioned and
    /// conditioning sets; all copulas start as independence.
    ///
    /// `trees[0]` holds label pairs, `trees[t]` index pairs into `trees[t-1]`.
    pub fn from_node_pairs(dim: usize, trees: &[Vec<(usize, usize)>]) -> Result<Self> {
        let mut built: Vec<Vec<VineEdge>> = Vec::with_capacity(trees.len());
        for (t, pairs) in trees.iter().enumerate() {
            let mut level = Vec::with_capacity(pairs.len());
            for &(a, b) in pairs {
                let edge = if t == 0 {
                    VineEdge {
                        nodes: (a, b),
                        conditioned: (a, b),
                        conditioning: Vec::new(),
                        copula: PairCopula::independence(),
                    }
                } else {
                    let prev = &built[t - 1];
                    let (na, nb) = match (prev.get(a), prev.get(b)) {
                        (Some(x), Some(y)) => (x, y),
                        _ => {
                            return Err(invalid(format!("tree {}: node index out of range", t + 1)))
                        }
                    };
                    join(na, nb, (a, b)).ok_or_else(|| {
                        invalid(format!(
                            "tree {}: nodes {a} and {b} do not share exactly one node",
                            t + 1
                        ))
                    })?
                };
                level.push(edge);
            }
            built.push(level);
        }
        TreeSequence::new(dim, built)
    }

    /// Checks tree shape, the proximity condition and the stored
    /// conditioned/conditioning sets.
    pub fn new(dim: usize, trees: Vec<Vec<VineEdge>>) -> Result<Self> {
        if dim < 2 {
            return Err(invalid("need at least two variables"));
        }
        if trees.len() != dim - 1 {
            return Err(invalid(format!(
                "expected {} trees, got {}",
                dim - 1,
                trees.len()
            )));
        }
        for (t, level) in trees.iter().enumerate() {
            let nodes = dim - t;
            if level.len() != nodes - 1 {
                return Err(invalid(format!(
                    "tree {} has {} edges, expected {}",
                    t + 1,
                    level.len(),
                    nodes - 1
                )));
            }
            let shift = usize::from(t == 0);
            let pairs = level
                .iter()
                .map(|e| (e.nodes.0.wrapping_sub(shift), e.nodes.1.wrapping_sub(shift)));
            if !is_spanning_tree(nodes, pairs) {
                return Err(invalid(format!("tree {} is not a spanning tree", t + 1)));
            }
            for e in level {
                let expected = if t == 0 {
                    Some(VineEdge {
                        nodes: e.nodes,
                        conditioned: e.nodes,
                        conditioning: Vec::new(),
                        copula: e.copula,
                    })
                } else {
                    let prev = &trees[t - 1];
                    join(&prev[e.nodes.0], &prev[e.nodes.1], e.nodes).map(|mut j| {
                        j.copula = e.copula;
                        j
                    })
                };
                match expected {
                    Some(x) if x == *e => {}
                    Some(_) => {
                        return Err(invalid(format!(
                            "tree {}: edge {} has inconsistent conditioned/conditioning sets",
                            t + 1,
                            e.entry()
                        )))
                    }
                    None => {
                        return Err(invalid(format!(
                            "tree {}: edge {:?} violates the proximity condition",
                            t + 1,
                            e.nodes
                        )))
                    }
                }
            }
        }
        Ok(TreeSequence { dim, trees })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Tree `t` (0-based: `tree(0)` is `T_1`).
    pub fn tree(&self, t: usize) -> &[VineEdge] {
        &self.trees[t]
    }

    pub fn trees(&self) -> &[Vec<VineEdge>] {
        &self.trees
    }

    pub fn set_copula(&mut self, tree: usize, edge: usize, copula: PairCopula) {
        self.trees[tree][edge].copula = copula;
    }

    pub fn constraint_set_sorted(&self) -> BTreeSet<ConstraintEntry> {
        self.trees.iter().flatten().map(VineEdge::entry).collect()
    }

    /// A random vine: tree 1 is a random labelled tree, each later tree a
    /// random spanning tree of the admissible edges. All copulas are independence.
    pub fn random(dim: usize, rng: &mut impl Rng) -> Self {
        assert!(dim >= 2, "a vine needs at least two variables");
        let mut order: Vec<usize> = (1..=dim).collect();
        order.shuffle(rng);
        let first: Vec<VineEdge> = (1..dim)
            .map(|i| {
                let (a, b) = (order[rng.random_range(0..i)], order[i]);
                VineEdge {
                    nodes: (a, b),
                    conditioned: (a, b),
                    conditioning: Vec::new(),
                    copula: PairCopula::independence(),
                }
            })
            .collect();
        let mut trees = vec![first];
        for t in 1..dim - 1 {
            let prev = &trees[t - 1];
            let mut cands = candidate_pairs(prev);
            cands.shuffle(rng);
            // Kruskal over a shuffled candidate list
            let mut parent: Vec<usize> = (0..prev.len()).collect();
            fn find(p: &[usize], mut x: usize) -> usize {
                while p[x] != x {
                    x = p[x];
                }
                x
            }
            let mut level = Vec::with_capacity(prev.len() - 1);
            for (a, b) in cands {
                let (ra, rb) = (find(&parent, a), find(&parent, b));
                if ra != rb {
                    parent[ra] = rb;
                    let nodes = if rng.random() { (a, b) } else { (b, a) };
                    level.push(
                        join(&prev[nodes.0], &prev[nodes.1], nodes).expect("candidate pairs join"),
                    );
                }
            }
            trees.push(level);
        }
        TreeSequence::new(dim, trees).expect("random construction yields a vine")
    }

    /// Reads the trees off a matrix; `copulas[r][c]` is attached to the edge of
    /// `(r, c)` with the diagonal label as its first argument.
    pub fn from_matrix(
        s: &RVineStructure,
        copulas: Option<&TriMatrix<PairCopula>>,
    ) -> Result<Self> {
        let n = s.dim();
        let mut trees: Vec<Vec<VineEdge>> = Vec::with_capacity(n.saturating_sub(1));
        for t in 0..n.saturating_sub(1) {
            let row = n - 1 - t;
            let mut level = Vec::with_capacity(n - 1 - t);
            // complete union -> edge index in the previous tree
            let lookup: HashMap<BTreeSet<usize>, usize> = if t == 0 {
                HashMap::new()
            } else {
                trees[t - 1]
                    .iter()
                    .enumerate()
                    .map(|(i, e)| (e.complete_union(), i))
                    .collect()
            };
            for c in 0..row {
                let a = s.get(c, c);
                let b = s.get(row, c);
                let d: Vec<usize> = (row + 1..n).map(|r| s.get(r, c)).collect();
                let copula = copulas.map_or(PairCopula::independence(), |m| *m.get(row, c));
                let nodes = if t == 0 {
                    (a, b)
                } else {
                    let union_with = |x: usize| {
                        let mut u: BTreeSet<usize> = d.iter().copied().collect();
                        u.insert(x);
                        lookup.get(&u).copied()
                    };
                    match (union_with(a), union_with(b)) {
                        (Some(na), Some(nb)) => (na, nb),
                        _ => {
                            return Err(invalid(format!(
                                "matrix entry ({},{}) has no parent nodes in tree {t}",
                                row + 1,
                                c + 1
                            )))
                        }
                    }
                };
                let mut conditioning = d;
                conditioning.sort_unstable();
                level.push(VineEdge {
                    nodes,
                    conditioned: (a, b),
                    conditioning,
                    copula,
                });
            }
            trees.push(level);
        }
        TreeSequence::new(n, trees)
    }

    /// Builds an R-vine matrix with the same constraint set, column by column
    /// from the left: each column follows the single remaining edge of the top
    /// remaining tree down to the first tree. Returned copulas are oriented with
    /// the diagonal label as first argument.
    pub fn to_matrix(&self) -> Result<(RVineStructure, TriMatrix<PairCopula>)> {
        let n = self.dim;
        let mut m = TriMatrix::new(n);
        let mut cops = TriMatrix::new(n);
        let mut alive: Vec<Vec<bool>> = self.trees.iter().map(|t| vec![true; t.len()]).collect();
        let mut used = vec![false; n + 1];
        for c in 0..n - 1 {
            let top = n - 2 - c;
            let mut live = (0..self.trees[top].len()).filter(|&i| alive[top][i]);
            let (Some(mut idx), None) = (live.next(), live.next()) else {
                return Err(invalid(format!(
                    "tree {} does not reduce to a single edge",
                    top + 1
                )));
            };
            let a = self.trees[top][idx].conditioned.0;
            m.set(c, c, a);
            used[a] = true;
            for t in (0..=top).rev() {
                let e = &self.trees[t][idx];
                if !alive[t][idx] {
                    return Err(invalid(format!(
                        "tree {}: edge {} used twice",
                        t + 1,
                        e.entry()
                    )));
                }
                alive[t][idx] = false;
                let (partner, copula) = if e.conditioned.0 == a {
                    (e.conditioned.1, e.copula)
                } else if e.conditioned.1 == a {
                    (e.conditioned.0, e.copula.transposed())
                } else {
                    return Err(invalid(format!(
                        "tree {}: edge {} does not condition on {a}",
                        t + 1,
                        e.entry()
                    )));
                };
                let row = n - 1 - t;
                m.set(row, c, partner);
                cops.set(row, c, copula);
                if t > 0 {
                    let prev = &self.trees[t - 1];
                    let contains = |i: usize| prev[i].complete_union().contains(&a);
                    idx = match (contains(e.nodes.0), contains(e.nodes.1)) {
                        (true, false) => e.nodes.0,
                        (false, true) => e.nodes.1,
                        _ => {
                            return Err(invalid(format!(
                                "tree {}: edge {} has no unique child holding {a}",
                                t + 1,
                                e.entry()
                            )))
                        }
                    };
                }
            }
        }
        let last = (1..=n)
            .find(|&l| !used[l])
            .ok_or_else(|| invalid("no label left for the last column"))?;
        m.set(n - 1, n - 1, last);
        let s = RVineStructure::validate(m)?;
        Ok((s, cops))
    }
}

/// Index pairs of edges in `prev` that may be joined in the next tree
/// (they share exactly one node), in lexicographic order.
pub fn candidate_pairs(prev: &[VineEdge]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..prev.len() {
        for j in i + 1..prev.len() {
            if shares_one_node(&prev[i], &prev[j]) {
                out.push((i, j));
            }
        }
    }
    out
}

/// The tree-`t+1` edge joining two tree-`t` edges, if they share exactly one node.
pub(crate) fn join(a: &VineEdge, b: &VineEdge, nodes: (usize, usize)) -> Option<VineEdge> {
    let (ua, ub) = (a.complete_union(), b.complete_union());
    if !shares_one_node(a, b) {
        return None;
    }
    let conditioning: Vec<usize> = ua.intersection(&ub).copied().collect();
    let mut only_a = ua.difference(&ub);
    let mut only_b = ub.difference(&ua);
    let (Some(&x), None, Some(&y), None) =
        (only_a.next(), only_a.next(), only_b.next(), only_b.next())
    else {
        return None;
    };
    Some(VineEdge {
        nodes,
        conditioned: (x, y),
        conditioning,
        copula: PairCopula::independence(),
    })
}

/// Whether two edges of the same tree have exactly one endpoint in common.
pub(crate) fn shares_one_node(a: &VineEdge, b: &VineEdge) -> bool {
    let (a0, a1, b0, b1) = (a.nodes.0, a.nodes.1, b.nodes.0, b.nodes.1);
    let common = [a0 == b0, a0 == b1, a1 == b0, a1 == b1]
        .iter()
        .filter(|&&x| x)
        .count();
    common == 1
}
