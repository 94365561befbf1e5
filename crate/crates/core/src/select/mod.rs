//! Sequential tree-by-tree selection driven by empirical Kendall's taus.

mod graph;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::bicop::{select_family, FamilyTag, PairFit, PairSample, MIN_PAIR_OBS};
use crate::error::{Error, Result};
use crate::kendall::kendall_tau;
use crate::matrix::TriMatrix;
use crate::model::RVineModel;
use crate::sample::CopulaSample;
use crate::structure::{
    candidate_pairs, join, ConstraintEntry, RVineStructure, TreeSequence, VineEdge,
};

pub use graph::{mst, select_cvine_tree, select_dvine_path, WeightedEdge};

/// Which tree shapes the selection may produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StructureKind {
    #[default]
    RVine,
    CVine,
    DVine,
}

impl FromStr for StructureKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "rvine" | "r" => Ok(StructureKind::RVine),
            "cvine" | "c" => Ok(StructureKind::CVine),
            "dvine" | "d" => Ok(StructureKind::DVine),
            other => Err(format!(
                "unknown structure kind '{other}' (rvine, cvine, dvine)"
            )),
        }
    }
}

impl fmt::Display for StructureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StructureKind::RVine => "rvine",
            StructureKind::CVine => "cvine",
            StructureKind::DVine => "dvine",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionOptions {
    pub kind: StructureKind,
    /// Families to choose from by AIC.
    pub families: Vec<FamilyTag>,
    /// Pick independence when the Kendall's tau test does not reject at `alpha`.
    pub use_indep_test: bool,
    pub alpha: f64,
}

impl Default for SelectionOptions {
    fn default() -> Self {
        SelectionOptions {
            kind: StructureKind::RVine,
            families: FamilyTag::PARAMETRIC.to_vec(),
            use_indep_test: false,
            alpha: 0.05,
        }
    }
}

/// A selected edge with its empirical tau and fitted copula.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFit {
    pub entry: ConstraintEntry,
    /// Conditioned labels in copula argument order.
    pub conditioned: (usize, usize),
    pub tau: f64,
    pub fit: PairFit,
}

#[derive(Debug, Clone)]
pub struct SequentialFit {
    pub model: RVineModel,
    pub trees: TreeSequence,
    /// Per tree, per edge (in tree order).
    pub edges: Vec<Vec<EdgeFit>>,
    /// Sum of the per-edge log-likelihoods on the transformed data.
    pub loglik: f64,
}

impl SequentialFit {
    pub fn n_params(&self) -> usize {
        self.model.n_params()
    }
}

/// Symmetric matrix of pairwise empirical Kendall's taus, unit diagonal.
pub fn pairwise_tau(sample: &CopulaSample) -> Result<Vec<Vec<f64>>> {
    if sample.n_obs() < MIN_PAIR_OBS {
        return Err(Error::InsufficientData {
            needed: MIN_PAIR_OBS,
            got: sample.n_obs(),
        });
    }
    let n = sample.dim();
    let cols: Vec<Vec<f64>> = (0..n).map(|j| sample.column(j)).collect();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let taus: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| kendall_tau(&cols[i], &cols[j]))
        .collect();
    let mut out = vec![vec![1.0; n]; n];
    for (&(i, j), &t) in pairs.iter().zip(&taus) {
        out[i][j] = t;
        out[j][i] = t;
    }
    Ok(out)
}

/// Corner of the unit square for exceedance Kendall's tau.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tail {
    Lower,
    Upper,
}

/// Kendall's tau on the observations with both coordinates `<= delta`
/// (lower) or both `> 1 - delta` (upper).
pub fn exceedance_tau(u: &[f64], v: &[f64], delta: f64, tail: Tail) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Dimension {
            expected: u.len(),
            got: v.len(),
        });
    }
    let inside = |x: f64| match tail {
        Tail::Lower => x <= delta,
        Tail::Upper => x > 1.0 - delta,
    };
    let (cu, cv): (Vec<f64>, Vec<f64>) = u
        .iter()
        .zip(v)
        .filter(|&(&a, &b)| inside(a) && inside(b))
        .map(|(&a, &b)| (a, b))
        .unzip();
    if cu.len() < MIN_PAIR_OBS {
        return Err(Error::InsufficientData {
            needed: MIN_PAIR_OBS,
            got: cu.len(),
        });
    }
    Ok(kendall_tau(&cu, &cv))
}

/// A node of the current tree with the pseudo-observations of its two
/// conditioned variables, `F(a | rest)` and `F(b | rest)`.
struct Node {
    edge: VineEdge,
    first: Vec<f64>,
    second: Vec<f64>,
}

impl Node {
    /// Pseudo-observations of `label`, one of the conditioned variables.
    fn data_of(&self, label: usize) -> &[f64] {
        if self.edge.conditioned.0 == label {
            &self.first
        } else {
            &self.second
        }
    }
}

/// Sequential selection: each tree maximizes the summed absolute tau over the
/// admissible edges, every selected edge gets a family by AIC, and the fitted
/// h-functions produce the data for the next tree.
pub fn sequential_select(sample: &CopulaSample, opts: &SelectionOptions) -> Result<SequentialFit> {
    let n = sample.dim();
    if n < 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: n,
        });
    }
    if sample.n_obs() < MIN_PAIR_OBS {
        return Err(Error::InsufficientData {
            needed: MIN_PAIR_OBS,
            got: sample.n_obs(),
        });
    }
    let columns: Vec<Vec<f64>> = (0..n).map(|j| sample.column(j)).collect();
    let mut trees: Vec<Vec<VineEdge>> = Vec::with_capacity(n - 1);
    let mut fits: Vec<Vec<EdgeFit>> = Vec::with_capacity(n - 1);
    let mut nodes: Vec<Node> = Vec::new();
    for t in 0..n - 1 {
        // candidate edges of tree t+1 with their data
        let candidates: Vec<(VineEdge, &[f64], &[f64])> = if t == 0 {
            (1..=n)
                .flat_map(|a| (a + 1..=n).map(move |b| (a, b)))
                .map(|(a, b)| {
                    let edge = VineEdge {
                        nodes: (a - 1, b - 1),
                        conditioned: (a, b),
                        conditioning: Vec::new(),
                        copula: Default::default(),
                    };
                    (edge, &columns[a - 1][..], &columns[b - 1][..])
                })
                .collect()
        } else {
            let prev: Vec<VineEdge> = nodes.iter().map(|nd| nd.edge.clone()).collect();
            candidate_pairs(&prev)
                .into_iter()
                .map(|(i, j)| {
                    let edge = join(&prev[i], &prev[j], (i, j)).expect("candidate pairs join");
                    let (x, y) = edge.conditioned;
                    (edge, nodes[i].data_of(x), nodes[j].data_of(y))
                })
                .collect()
        };
        let weighted: Vec<WeightedEdge> = candidates
            .par_iter()
            .map(|(e, x, y)| WeightedEdge {
                nodes: e.nodes,
                weight: kendall_tau(x, y).abs(),
                key: e.entry(),
            })
            .collect();
        let node_count = n - t;
        let chosen = match (opts.kind, t) {
            (StructureKind::CVine, _) => select_cvine_tree(node_count, &weighted)?,
            (StructureKind::DVine, 0) => select_dvine_path(node_count, &weighted)?,
            _ => mst(node_count, &weighted)?,
        };
        let fitted: Vec<Result<(Node, EdgeFit)>> = chosen
            .par_iter()
            .map(|&i| {
                let (edge, x, y) = &candidates[i];
                fit_edge(edge, x, y, opts).map_err(|e| e.at_edge(t + 1, edge.entry().to_string()))
            })
            .collect();
        let mut level_nodes = Vec::with_capacity(chosen.len());
        let mut level_fits = Vec::with_capacity(chosen.len());
        for r in fitted {
            let (node, fit) = r?;
            level_nodes.push(node);
            level_fits.push(fit);
        }
        // tree 1 edges reference labels; later trees index the previous tree
        if t == 0 {
            for nd in &mut level_nodes {
                nd.edge.nodes = nd.edge.conditioned;
            }
        }
        trees.push(level_nodes.iter().map(|nd| nd.edge.clone()).collect());
        fits.push(level_fits);
        nodes = level_nodes;
    }
    let trees = TreeSequence::new(n, trees)?;
    let model = RVineModel::from_trees(&trees)?;
    let loglik = fits.iter().flatten().map(|f| f.fit.loglik).sum();
    Ok(SequentialFit {
        model,
        trees,
        edges: fits,
        loglik,
    })
}

/// Sequential estimation on a given structure: families by AIC and
/// parameters edge by edge, tree by tree. `opts.kind` is ignored.
pub fn sequential_estimate(
    structure: &RVineStructure,
    sample: &CopulaSample,
    opts: &SelectionOptions,
) -> Result<SequentialFit> {
    let n = structure.dim();
    if sample.dim() != n {
        return Err(Error::Dimension {
            expected: n,
            got: sample.dim(),
        });
    }
    if sample.n_obs() < MIN_PAIR_OBS {
        return Err(Error::InsufficientData {
            needed: MIN_PAIR_OBS,
            got: sample.n_obs(),
        });
    }
    let skeleton = TreeSequence::from_matrix(structure, None)?;
    let columns: Vec<Vec<f64>> = (0..n).map(|j| sample.column(j)).collect();
    let mut copulas = TriMatrix::new(n);
    let mut fits: Vec<Vec<EdgeFit>> = Vec::with_capacity(n - 1);
    let mut trees: Vec<Vec<VineEdge>> = Vec::with_capacity(n - 1);
    let mut nodes: Vec<Node> = Vec::new();
    for (t, level) in skeleton.trees().iter().enumerate() {
        let fitted: Vec<Result<(Node, EdgeFit)>> = level
            .par_iter()
            .map(|edge| {
                let (a, b) = edge.conditioned;
                let (x, y) = if t == 0 {
                    (&columns[a - 1][..], &columns[b - 1][..])
                } else {
                    (
                        nodes[edge.nodes.0].data_of(a),
                        nodes[edge.nodes.1].data_of(b),
                    )
                };
                fit_edge(edge, x, y, opts).map_err(|e| e.at_edge(t + 1, edge.entry().to_string()))
            })
            .collect();
        let mut level_nodes = Vec::with_capacity(level.len());
        let mut level_fits = Vec::with_capacity(level.len());
        for (c, r) in fitted.into_iter().enumerate() {
            let (node, fit) = r?;
            // edge c of tree t sits at matrix position (n - 1 - t, c)
            copulas.set(n - 1 - t, c, fit.fit.copula);
            level_nodes.push(node);
            level_fits.push(fit);
        }
        trees.push(level_nodes.iter().map(|nd| nd.edge.clone()).collect());
        fits.push(level_fits);
        nodes = level_nodes;
    }
    let model = RVineModel::new(structure.clone(), copulas)?;
    let loglik = fits.iter().flatten().map(|f| f.fit.loglik).sum();
    Ok(SequentialFit {
        model,
        trees: TreeSequence::new(n, trees)?,
        edges: fits,
        loglik,
    })
}

fn fit_edge(
    edge: &VineEdge,
    x: &[f64],
    y: &[f64],
    opts: &SelectionOptions,
) -> Result<(Node, EdgeFit)> {
    let data = PairSample::from_clamped(x.to_vec(), y.to_vec());
    let tau = data.kendall_tau();
    let mut fit = select_family(&data, &opts.families, opts.use_indep_test, opts.alpha)?;
    // the log-likelihood on exactly the values the density recursion will see
    fit.loglik = data.loglik(&fit.copula);
    let c = fit.copula;
    let first: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| c.hfunc_clamped(a, b))
        .collect();
    let second: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| c.hfunc_first_clamped(a, b))
        .collect();
    let mut edge = edge.clone();
    edge.copula = c;
    let fit = EdgeFit {
        entry: edge.entry(),
        conditioned: edge.conditioned,
        tau,
        fit,
    };
    Ok((
        Node {
            edge,
            first,
            second,
        },
        fit,
    ))
}
