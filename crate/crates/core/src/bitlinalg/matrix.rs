//! Small dense GF(2) matrices, used for public linear maps on shares.

use rand::Rng;

use super::{BitBlock, BitError};

/// Dense `rows x cols` matrix; row `i` is an `cols`-bit block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitBlock>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BitMatrix {
            cols,
            rows: vec![BitBlock::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        BitMatrix {
            cols: n,
            rows: (0..n).map(|i| BitBlock::unit(n, i)).collect(),
        }
    }

    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        BitMatrix {
            cols,
            rows: (0..rows).map(|_| BitBlock::random(cols, rng)).collect(),
        }
    }

    pub fn from_rows(cols: usize, rows: Vec<BitBlock>) -> Result<Self, BitError> {
        if let Some(r) = rows.iter().find(|r| r.len() != cols) {
            return Err(BitError::Dimension {
                expected: cols,
                actual: r.len(),
            });
        }
        Ok(BitMatrix { cols, rows })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &BitBlock {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    /// Row-vector product `x M`.
    pub fn vec_mul(&self, x: &BitBlock) -> Result<BitBlock, BitError> {
        if x.len() != self.rows.len() {
            return Err(BitError::Dimension {
                expected: self.rows.len(),
                actual: x.len(),
            });
        }
        let mut y = BitBlock::zeros(self.cols);
        for i in x.iter_ones() {
            y ^= &self.rows[i];
        }
        Ok(y)
    }
}
