use thiserror::Error;

use crate::bicop::FamilyTag;

pub type Result<T> = std::result::Result<T, Error>;

/// Which R-vine matrix condition a label matrix violates.
///
/// Positions are 1-based `(row, column)`, matching the usual `m_{k,i}` notation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StructureViolation {
    NotSquare {
        row: usize,
        len: usize,
        dim: usize,
    },
    UpperEntry {
        row: usize,
        col: usize,
    },
    LabelOutOfRange {
        row: usize,
        col: usize,
        label: usize,
    },
    /// A label repeats inside one column.
    RepeatedLabel {
        row: usize,
        col: usize,
        label: usize,
    },
    /// Column `col` does not contain every entry of column `col + 1`.
    NotNested {
        col: usize,
    },
    /// The diagonal entry of column `col` also appears in column `col + 1`.
    DiagonalNotNew {
        col: usize,
    },
    /// No `B_M(j)` / `B~_M(j)` contains the pair generated at `(row, col)`.
    Proximity {
        row: usize,
        col: usize,
    },
}

impl std::fmt::Display for StructureViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::NotSquare { row, len, dim } => {
                write!(f, "row {row} has {len} entries, expected {row} or {dim}")
            }
            Self::UpperEntry { row, col } => {
                write!(f, "entry ({row},{col}) above the diagonal must be 0")
            }
            Self::LabelOutOfRange { row, col, label } => {
                write!(f, "entry ({row},{col}) = {label} is not a label in 1..n")
            }
            Self::RepeatedLabel { row, col, label } => {
                write!(f, "label {label} repeats in column {col} (row {row}); all elements in a column must differ")
            }
            Self::NotNested { col } => {
                write!(
                    f,
                    "column {col} does not contain all entries of column {}",
                    col + 1
                )
            }
            Self::DiagonalNotNew { col } => {
                write!(
                    f,
                    "diagonal entry of column {col} already occurs in column {}",
                    col + 1
                )
            }
            Self::Proximity { row, col } => write!(
                f,
                "entry ({row},{col}) with its lower column tail is in no B_M(j) or B~_M(j)"
            ),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} is outside the unit interval")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid {family:?} parameters: {reason}")]
    InvalidParameter { family: FamilyTag, reason: String },

    #[error("{family:?} cannot represent Kendall's tau {tau}")]
    IncompatibleSign { family: FamilyTag, tau: f64 },

    #[error("need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("{what} did not converge within {iterations} iterations")]
    Convergence { what: String, iterations: usize },

    #[error("invalid R-vine matrix: {0}")]
    InvalidStructure(StructureViolation),

    #[error("invalid tree sequence: {0}")]
    InvalidTrees(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("no candidate family is compatible with tau {tau}")]
    NoCandidate { tau: f64 },

    #[error("ill-posed comparison: {0}")]
    IllPosed(String),

    #[error("tree {tree}, edge {edge}: {source}")]
    AtEdge {
        tree: usize,
        edge: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_edge(self, tree: usize, edge: impl Into<String>) -> Self {
        Error::AtEdge {
            tree,
            edge: edge.into(),
            source: Box::new(self),
        }
    }

    /// True for failures of a numerical routine rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Convergence { .. } => true,
            Error::AtEdge { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
