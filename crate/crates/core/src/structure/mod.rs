//! The R-vine matrix: a lower-triangular label matrix whose columns, read from
//! the diagonal down, spell out one edge per tree.
//!
//! Column `c` (0-based) with diagonal `a = m[c][c]` contributes the edges
//! `{a, m[r][c]} | {m[r+1][c], .., m[n-1][c]}` for `r = c+1 .. n-1`; row `r`
//! sits in tree `n - r`, so the bottom row is the first tree.

mod trees;

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;

pub(crate) use trees::join;
pub use trees::{candidate_pairs, TreeSequence, VineEdge};

use crate::error::{Error, Result, StructureViolation};
use crate::matrix::TriMatrix;

/// One pair-copula slot: conditioned pair given a conditioning set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConstraintEntry {
    /// Sorted so that entries compare independently of orientation.
    pub conditioned: (usize, usize),
    /// Sorted ascending.
    pub conditioning: Vec<usize>,
}

impl ConstraintEntry {
    pub fn new(a: usize, b: usize, conditioning: impl IntoIterator<Item = usize>) -> Self {
        let mut conditioning: Vec<usize> = conditioning.into_iter().collect();
        conditioning.sort_unstable();
        ConstraintEntry {
            conditioned: (a.min(b), a.max(b)),
            conditioning,
        }
    }

    /// Tree level (1-based) the entry belongs to.
    pub fn tree(&self) -> usize {
        self.conditioning.len() + 1
    }

    pub fn relabel(&self, map: &LabelMap) -> Self {
        ConstraintEntry::new(
            map.apply(self.conditioned.0),
            map.apply(self.conditioned.1),
            self.conditioning.iter().map(|&l| map.apply(l)),
        )
    }
}

impl fmt::Display for ConstraintEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.conditioned;
        if self.conditioning.is_empty() {
            return write!(f, "{a},{b}");
        }
        let d: Vec<String> = self.conditioning.iter().map(|l| l.to_string()).collect();
        write!(f, "{a},{b}|{}", d.join(","))
    }
}

/// A bijection of variable labels `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    /// `forward[old - 1] = new`
    forward: Vec<usize>,
}

impl LabelMap {
    pub fn identity(n: usize) -> Self {
        LabelMap {
            forward: (1..=n).collect(),
        }
    }

    /// From `forward[old - 1] = new`; must be a permutation of `1..=n`.
    pub fn from_forward(forward: Vec<usize>) -> Option<Self> {
        let n = forward.len();
        let mut seen = vec![false; n];
        for &l in &forward {
            if l == 0 || l > n || std::mem::replace(&mut seen[l - 1], true) {
                return None;
            }
        }
        Some(LabelMap { forward })
    }

    pub fn apply(&self, old: usize) -> usize {
        self.forward[old - 1]
    }

    pub fn inverse(&self) -> LabelMap {
        let mut inv = vec![0; self.forward.len()];
        for (i, &new) in self.forward.iter().enumerate() {
            inv[new - 1] = i + 1;
        }
        LabelMap { forward: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.forward.iter().enumerate().all(|(i, &l)| l == i + 1)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.forward
    }
}

/// A validated R-vine matrix with labels `1..=n`.
#[derive(Clone, PartialEq, Eq)]
pub struct RVineStructure {
    m: TriMatrix<usize>,
}

impl fmt::Debug for RVineStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RVineStructure {:?}", self.rows())
    }
}

impl fmt::Display for RVineStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.rows() {
            let s: Vec<String> = row.iter().map(|l| l.to_string()).collect();
            writeln!(f, "{}", s.join(" "))?;
        }
        Ok(())
    }
}

fn violation(v: StructureViolation) -> Error {
    Error::InvalidStructure(v)
}

impl RVineStructure {
    /// Builds from rows given top to bottom. Row `r` (1-based) may hold either
    /// its `r` lower-triangular entries or all `n` entries with zeros above the diagonal.
    pub fn from_rows(rows: &[Vec<usize>]) -> Result<Self> {
        let n = rows.len();
        let mut m = TriMatrix::new(n);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != r + 1 && row.len() != n {
                return Err(violation(StructureViolation::NotSquare {
                    row: r + 1,
                    len: row.len(),
                    dim: n,
                }));
            }
            if let Some(c) = row.iter().skip(r + 1).position(|&x| x != 0) {
                return Err(violation(StructureViolation::UpperEntry {
                    row: r + 1,
                    col: r + c + 2,
                }));
            }
            for (c, &label) in row.iter().take(r + 1).enumerate() {
                m.set(r, c, label);
            }
        }
        Self::validate(m)
    }

    /// Checks labels, column distinctness, nesting (i), new diagonals (ii) and
    /// the proximity membership condition, reporting the first violation.
    pub fn validate(m: TriMatrix<usize>) -> Result<Self> {
        let n = m.dim();
        for c in 0..n {
            let mut seen = vec![false; n + 1];
            for r in c..n {
                let label = *m.get(r, c);
                if label == 0 || label > n {
                    return Err(violation(StructureViolation::LabelOutOfRange {
                        row: r + 1,
                        col: c + 1,
                        label,
                    }));
                }
                if std::mem::replace(&mut seen[label], true) {
                    return Err(violation(StructureViolation::RepeatedLabel {
                        row: r + 1,
                        col: c + 1,
                        label,
                    }));
                }
            }
        }
        for c in 0..n.saturating_sub(1) {
            let here: BTreeSet<usize> = m.column(c).copied().collect();
            let right: BTreeSet<usize> = m.column(c + 1).copied().collect();
            if !right.is_subset(&here) {
                return Err(violation(StructureViolation::NotNested { col: c + 1 }));
            }
            if right.contains(m.get(c, c)) {
                return Err(violation(StructureViolation::DiagonalNotNew { col: c + 1 }));
            }
        }
        let s = RVineStructure { m };
        s.check_proximity()?;
        Ok(s)
    }

    /// For every column `i` and row `k` strictly between the diagonal and the
    /// bottom row, `(m[k][i], tail below k)` must lie in `B(j)` or `B~(j)` for a
    /// column `j` right of `i` (excluding the last column).
    fn check_proximity(&self) -> Result<()> {
        let n = self.dim();
        let tail = |col: usize, from: usize| -> BTreeSet<usize> {
            (from..n).map(|r| self.get(r, col)).collect()
        };
        for i in 0..n.saturating_sub(1) {
            for k in i + 1..n - 1 {
                let x = self.get(k, i);
                let d = tail(i, k + 1);
                // a member of B(j) or B~(j) with |d| conditioning labels comes from row k + 1 of column j
                let found = (i + 1..=k.min(n - 2)).any(|j| {
                    let in_b = self.get(j, j) == x && tail(j, k + 1) == d;
                    let in_bt = self.get(k + 1, j) == x && {
                        let mut dt = tail(j, k + 2);
                        dt.insert(self.get(j, j));
                        dt == d
                    };
                    in_b || in_bt
                });
                if !found {
                    return Err(violation(StructureViolation::Proximity {
                        row: k + 1,
                        col: i + 1,
                    }));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    /// Entry at 0-based `(row, col)`, `col <= row`.
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> usize {
        *self.m.get(row, col)
    }

    pub fn matrix(&self) -> &TriMatrix<usize> {
        &self.m
    }

    /// Full rows, zeros above the diagonal.
    pub fn rows(&self) -> Vec<Vec<usize>> {
        let n = self.dim();
        (0..n)
            .map(|r| {
                (0..n)
                    .map(|c| if c <= r { self.get(r, c) } else { 0 })
                    .collect()
            })
            .collect()
    }

    /// The edge generated at 0-based `(row, col)`, `row > col`.
    pub fn entry(&self, row: usize, col: usize) -> ConstraintEntry {
        ConstraintEntry::new(
            self.get(col, col),
            self.get(row, col),
            (row + 1..self.dim()).map(|r| self.get(r, col)),
        )
    }

    /// All `n(n-1)/2` edges, column by column from the top.
    pub fn constraint_set(&self) -> Vec<ConstraintEntry> {
        let n = self.dim();
        (0..n)
            .flat_map(|c| (c + 1..n).map(move |r| (r, c)))
            .map(|(r, c)| self.entry(r, c))
            .collect()
    }

    /// The constraint set as an order-free set, for comparing vines.
    pub fn constraint_set_sorted(&self) -> BTreeSet<ConstraintEntry> {
        self.constraint_set().into_iter().collect()
    }

    /// Column-wise running maxima from the bottom: `M[r][c] = max(m[r..n][c])`.
    pub fn max_matrix(&self) -> TriMatrix<usize> {
        let n = self.dim();
        let mut out = TriMatrix::new(n);
        for c in 0..n {
            let mut run = 0;
            for r in (c..n).rev() {
                run = run.max(self.get(r, c));
                out.set(r, c, run);
            }
        }
        out
    }

    /// Whether the diagonal reads `n, n-1, .., 1` from the top.
    pub fn is_normalized(&self) -> bool {
        let n = self.dim();
        (0..n).all(|k| self.get(k, k) == n - k)
    }

    /// The map sending the diagonal to `n, n-1, .., 1`.
    pub fn normalizing_map(&self) -> LabelMap {
        let n = self.dim();
        let mut forward = vec![0; n];
        for k in 0..n {
            forward[self.get(k, k) - 1] = n - k;
        }
        LabelMap { forward }
    }

    pub fn relabel(&self, map: &LabelMap) -> RVineStructure {
        RVineStructure {
            m: self.m.map(|&l| map.apply(l)),
        }
    }

    /// The same vine with a normalized diagonal, and the old-to-new label map.
    pub fn normalize_diagonal(&self) -> (RVineStructure, LabelMap) {
        let map = self.normalizing_map();
        (self.relabel(&map), map)
    }

    /// The `(n-1)`-dimensional matrix left after deleting the first row and
    /// column, with labels compacted to `1..=n-1` (the returned map is old-to-new
    /// for the surviving labels; the deleted label maps to nothing).
    pub fn without_first(&self) -> Result<(RVineStructure, Vec<Option<usize>>)> {
        let n = self.dim();
        let gone = self.get(0, 0);
        let compact: Vec<Option<usize>> = (1..=n)
            .map(|l| match l.cmp(&gone) {
                std::cmp::Ordering::Less => Some(l),
                std::cmp::Ordering::Equal => None,
                std::cmp::Ordering::Greater => Some(l - 1),
            })
            .collect();
        let m = TriMatrix::from_fn(n - 1, |r, c| {
            compact[self.get(r + 1, c + 1) - 1].expect("first diagonal label only in column 1")
        });
        Ok((RVineStructure::validate(m)?, compact))
    }

    /// D-vine along the given variable order (a path in the first tree).
    pub fn dvine(order: &[usize]) -> Result<RVineStructure> {
        let n = order.len();
        // column c: diagonal order[c], then order[n-1], order[n-2], .., order[c+1]
        let m = TriMatrix::from_fn(n, |r, c| if r == c { order[c] } else { order[n - r + c] });
        RVineStructure::validate(m)
    }

    /// C-vine whose `t`-th tree is a star around `order[t - 1]`.
    pub fn cvine(order: &[usize]) -> Result<RVineStructure> {
        let n = order.len();
        // column c: diagonal order[n-1-c]; row r below it holds root order[n-1-r]
        let m = TriMatrix::from_fn(n, |r, c| {
            if r == c {
                order[n - 1 - c]
            } else {
                order[n - 1 - r]
            }
        });
        RVineStructure::validate(m)
    }
}

/// Number of distinct R-vines on `n` labelled variables: `n!/2 · 2^C(n-2, 2)`.
pub fn count_rvines(n: usize) -> BigUint {
    if n < 2 {
        return BigUint::from(1u32);
    }
    let fact: BigUint = (1..=n).map(BigUint::from).product();
    let k = (n - 2) * (n.saturating_sub(3)) / 2;
    (fact >> 1u32) << k
}

#[cfg(test)]
mod tests;
