use rand::RngCore;

use crate::encoding::{Canonical, Decoder, Encoder};
use crate::error::DecodeError;
use crate::permutation::Permutation;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QaPair {
    pub question: Vec<u8>,
    pub answer: Vec<u8>,
}

impl QaPair {
    pub fn new(question: impl Into<Vec<u8>>, answer: impl Into<Vec<u8>>) -> Self {
        QaPair { question: question.into(), answer: answer.into() }
    }
}

impl Canonical for QaPair {
    fn encode(&self, enc: &mut Encoder<'_>) {
        enc.bytes(&self.question).bytes(&self.answer);
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(QaPair { question: dec.bytes()?.to_vec(), answer: dec.bytes()?.to_vec() })
    }
}

/// Mark tokens are opaque bytes.
impl Canonical for Vec<u8> {
    fn encode(&self, enc: &mut Encoder<'_>) {
        enc.bytes(self);
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(dec.bytes()?.to_vec())
    }
}

/// A rectangular `k x n` grid stored row-major. Column `j` belongs to
/// candidate `j` (or to shuffled test `j` after a shuffle).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid<T> {
    rows: Vec<Vec<T>>,
}

pub type AnswerMatrix = Grid<QaPair>;

impl<T: Clone> Grid<T> {
    /// `None` if the rows are ragged or empty.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Option<Self> {
        let n = rows.first()?.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return None;
        }
        Some(Grid { rows })
    }

    /// Builds the grid from per-column vectors, all of the same length.
    pub fn from_columns(columns: &[Vec<T>]) -> Option<Self> {
        let k = columns.first()?.len();
        if k == 0 || columns.iter().any(|c| c.len() != k) {
            return None;
        }
        Some(Grid { rows: (0..k).map(|i| columns.iter().map(|c| c[i].clone()).collect()).collect() })
    }

    pub fn k(&self) -> usize {
        self.rows.len()
    }

    pub fn n(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    pub fn cell(&self, i: usize, j: usize) -> &T {
        &self.rows[i][j]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        self.rows.iter().map(|r| r[j].clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<T>> {
        (0..self.n()).map(|j| self.column(j)).collect()
    }
}

impl<T: Canonical + Clone> Canonical for Grid<T> {
    fn encode(&self, enc: &mut Encoder<'_>) {
        enc.list(&self.rows, |e, row| {
            e.list(row, |e, x| {
                e.record(x);
            });
        });
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        let start = dec.offset();
        let rows = dec.list(|d| d.list(|d| d.record::<T>()))?;
        Grid::from_rows(rows).ok_or_else(|| DecodeError::new(start, "grid is empty or ragged"))
    }
}

/// One independent permutation per row. Shuffled cell `(i, j)` holds the
/// original cell `(i, rows[i](j))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationSet {
    rows: Vec<Permutation>,
}

impl PermutationSet {
    pub fn identity(k: usize, n: usize) -> Self {
        PermutationSet { rows: vec![Permutation::identity(n); k] }
    }

    pub fn random<R: RngCore + ?Sized>(k: usize, n: usize, rng: &mut R) -> Self {
        PermutationSet { rows: (0..k).map(|_| Permutation::random(n, rng)).collect() }
    }

    pub fn from_rows(rows: Vec<Permutation>) -> Option<Self> {
        let n = rows.first()?.len();
        rows.iter().all(|p| p.len() == n).then_some(PermutationSet { rows })
    }

    pub fn k(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &Permutation {
        &self.rows[i]
    }

    /// Original column feeding shuffled column `j` in row `i`.
    pub fn source(&self, i: usize, j: usize) -> usize {
        self.rows[i].image(j)
    }

    /// Shuffled column that holds original column `c` in row `i`.
    pub fn shuffled_position(&self, i: usize, c: usize) -> usize {
        self.rows[i].as_slice().iter().position(|&x| x == c).expect("bijection")
    }

    pub fn inverse(&self) -> Self {
        PermutationSet { rows: self.rows.iter().map(Permutation::inverse).collect() }
    }

    pub fn apply<T: Clone>(&self, grid: &Grid<T>) -> Grid<T> {
        assert_eq!(self.k(), grid.k(), "row count mismatch");
        Grid { rows: self.rows.iter().zip(&grid.rows).map(|(p, r)| p.gather(r)).collect() }
    }

    pub fn unapply<T: Clone>(&self, grid: &Grid<T>) -> Grid<T> {
        assert_eq!(self.k(), grid.k(), "row count mismatch");
        Grid { rows: self.rows.iter().zip(&grid.rows).map(|(p, r)| p.scatter(r)).collect() }
    }
}

/// Marks on shuffled columns and their unshuffled counterparts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkMatrices {
    pub shuffled: Grid<Vec<u8>>,
    pub marks: Grid<Vec<u8>>,
}

impl MarkMatrices {
    pub fn from_shuffled(shuffled: Grid<Vec<u8>>, perms: &PermutationSet) -> Self {
        let marks = perms.unapply(&shuffled);
        MarkMatrices { shuffled, marks }
    }
}
