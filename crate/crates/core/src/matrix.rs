use std::fmt;

/// Square matrix of which only the lower triangle (diagonal included) carries data.
///
/// Indices are 0-based `(row, col)`; entries above the diagonal hold `T::default()`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TriMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Clone + Default> TriMatrix<T> {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            data: vec![T::default(); dim * dim],
        }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::new(dim);
        for r in 0..dim {
            for c in 0..=r {
                m.data[r * dim + c] = f(r, c);
            }
        }
        m
    }

    pub fn map<U: Clone + Default>(&self, mut f: impl FnMut(&T) -> U) -> TriMatrix<U> {
        TriMatrix::from_fn(self.dim, |r, c| f(self.get(r, c)))
    }
}

impl<T> TriMatrix<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> &T {
        debug_assert!(col <= row && row < self.dim);
        &self.data[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: T) {
        debug_assert!(col <= row && row < self.dim);
        self.data[row * self.dim + col] = value;
    }

    /// Entries of column `col` from the diagonal down.
    pub fn column(&self, col: usize) -> impl Iterator<Item = &T> + '_ {
        (col..self.dim).map(move |r| self.get(r, col))
    }
}

impl<T: fmt::Debug> fmt::Debug for TriMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "TriMatrix({})", self.dim)?;
        for r in 0..self.dim {
            let row: Vec<_> = (0..=r).map(|c| self.get(r, c)).collect();
            writeln!(f, "  {row:?}")?;
        }
        Ok(())
    }
}
