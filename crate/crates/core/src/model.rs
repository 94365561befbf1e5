//! A full R-vine copula: structure matrix plus one pair copula per edge.

use std::collections::BTreeMap;
use std::fmt;

use crate::bicop::{FamilyTag, PairCopula};
use crate::error::{Error, Result};
use crate::matrix::TriMatrix;
use crate::structure::{ConstraintEntry, LabelMap, RVineStructure, TreeSequence};

/// One step of the density recursion at matrix position `(row, col)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Step {
    pub row: usize,
    pub col: usize,
    /// Column holding the second copula argument.
    pub src: usize,
    /// Second argument comes from the direct (not the indirect) matrix.
    pub direct: bool,
    /// Whether the direct / indirect value one row up is read later on.
    pub store_direct: bool,
    pub store_indirect: bool,
}

/// R-vine copula specification in matrix form.
///
/// `copulas[r][c]` belongs to the edge at structure position `(r, c)`, `r > c`,
/// and takes the diagonal variable `m[c][c]` as its first argument. Any valid
/// structure is accepted; evaluation works on the diagonal-normalized labels
/// internally.
#[derive(Clone)]
pub struct RVineModel {
    structure: RVineStructure,
    copulas: TriMatrix<PairCopula>,
    plan: Vec<Step>,
}

impl PartialEq for RVineModel {
    fn eq(&self, other: &Self) -> bool {
        self.structure == other.structure && self.copulas == other.copulas
    }
}

impl fmt::Debug for RVineModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RVineModel")
            .field("structure", &self.structure)
            .field("copulas", &self.copulas)
            .finish()
    }
}

impl fmt::Display for RVineModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (row, col, entry, copula) in self.edges() {
            writeln!(
                f,
                "tree {}: {entry} {copula}  [{},{}]",
                entry.tree(),
                row + 1,
                col + 1
            )?;
        }
        Ok(())
    }
}

impl RVineModel {
    /// Entries of `copulas` on or above the diagonal are ignored.
    pub fn new(structure: RVineStructure, mut copulas: TriMatrix<PairCopula>) -> Result<Self> {
        let n = structure.dim();
        if copulas.dim() != n {
            return Err(Error::Dimension {
                expected: n,
                got: copulas.dim(),
            });
        }
        for c in 0..n {
            copulas.set(c, c, PairCopula::independence());
        }
        let plan = build_plan(&structure);
        Ok(RVineModel {
            structure,
            copulas,
            plan,
        })
    }

    pub fn independence(structure: RVineStructure) -> Self {
        let n = structure.dim();
        Self::new(structure, TriMatrix::new(n)).expect("dimensions agree")
    }

    pub fn from_trees(trees: &TreeSequence) -> Result<Self> {
        let (s, cops) = trees.to_matrix()?;
        Self::new(s, cops)
    }

    pub fn to_trees(&self) -> TreeSequence {
        TreeSequence::from_matrix(&self.structure, Some(&self.copulas))
            .expect("a validated structure always has a tree sequence")
    }

    pub fn dim(&self) -> usize {
        self.structure.dim()
    }

    pub fn structure(&self) -> &RVineStructure {
        &self.structure
    }

    pub fn copulas(&self) -> &TriMatrix<PairCopula> {
        &self.copulas
    }

    pub fn copula(&self, row: usize, col: usize) -> &PairCopula {
        self.copulas.get(row, col)
    }

    pub fn set_copula(&mut self, row: usize, col: usize, copula: PairCopula) {
        assert!(
            row > col && row < self.dim(),
            "({row},{col}) is not an edge position"
        );
        self.copulas.set(row, col, copula);
    }

    pub fn families(&self) -> TriMatrix<FamilyTag> {
        self.copulas.map(PairCopula::family)
    }

    /// First parameters; 0 for independence.
    pub fn thetas(&self) -> TriMatrix<f64> {
        self.copulas.map(PairCopula::theta)
    }

    /// Second parameters; 0 where a family has none.
    pub fn nus(&self) -> TriMatrix<f64> {
        self.copulas.map(|c| c.nu().unwrap_or(0.0))
    }

    /// Number of scalar parameters, counting Student-t degrees of freedom.
    pub fn n_params(&self) -> usize {
        self.edges().map(|(_, _, _, c)| c.n_params()).sum()
    }

    pub fn family_counts(&self) -> BTreeMap<FamilyTag, usize> {
        let mut counts = BTreeMap::new();
        for (_, _, _, c) in self.edges() {
            *counts.entry(c.family()).or_insert(0) += 1;
        }
        counts
    }

    /// All edges as `(row, col, entry, copula)`, column by column.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, ConstraintEntry, PairCopula)> + '_ {
        let n = self.dim();
        (0..n).flat_map(move |c| {
            (c + 1..n).map(move |r| (r, c, self.structure.entry(r, c), *self.copulas.get(r, c)))
        })
    }

    /// The same copula on relabeled variables.
    pub fn relabel(&self, map: &LabelMap) -> RVineModel {
        Self::new(self.structure.relabel(map), self.copulas.clone()).expect("dimensions agree")
    }

    /// Relabels so that `m[k][k] = n - k`; returns the map from old to new labels.
    pub fn normalize_diagonal(&self) -> (RVineModel, LabelMap) {
        let map = self.structure.normalizing_map();
        (self.relabel(&map), map)
    }

    pub(crate) fn plan(&self) -> &[Step] {
        &self.plan
    }
}

/// Precomputes the argument bookkeeping of the density recursion, with
/// labels taken through the diagonal-normalizing map.
fn build_plan(s: &RVineStructure) -> Vec<Step> {
    let n = s.dim();
    let map = s.normalizing_map();
    let norm = |r: usize, c: usize| map.apply(s.get(r, c));
    let mut steps = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    let mut read_direct = vec![false; n * n];
    let mut read_indirect = vec![false; n * n];
    for c in (0..n.saturating_sub(1)).rev() {
        let mut running_max = 0;
        for r in (c + 1..n).rev() {
            let label = norm(r, c);
            running_max = running_max.max(label);
            let src = n - running_max;
            let direct = running_max == label;
            if direct {
                read_direct[r * n + src] = true;
            } else {
                read_indirect[r * n + src] = true;
            }
            steps.push(Step {
                row: r,
                col: c,
                src,
                direct,
                store_direct: false,
                store_indirect: false,
            });
        }
    }
    for st in &mut steps {
        let up = (st.row - 1) * n + st.col;
        st.store_direct = st.row - 1 > st.col || read_direct[up];
        st.store_indirect = read_indirect[up];
    }
    steps
}
