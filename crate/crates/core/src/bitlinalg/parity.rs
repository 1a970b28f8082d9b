//! Sparse parity-check matrices and syndrome computation.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{BitBlock, BitError};

/// Sparse binary parity-check matrix `H` with `r` rows (checks) and `n`
/// columns (variables), stored as both row and column adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheck {
    n: usize,
    rows: Vec<Vec<usize>>,
    cols: Vec<Vec<usize>>,
}

impl ParityCheck {
    /// Builds a matrix from per-row column indices. Rows are sorted; indices
    /// must be `< n` and unique within a row.
    pub fn from_rows(n: usize, rows: Vec<Vec<usize>>) -> Result<Self, BitError> {
        let mut cols = vec![Vec::new(); n];
        let mut sorted_rows = Vec::with_capacity(rows.len());
        for (i, mut row) in rows.into_iter().enumerate() {
            row.sort_unstable();
            if let Some(w) = row.windows(2).find(|w| w[0] == w[1]) {
                return Err(BitError::Matrix(format!(
                    "row {i} lists column {} twice",
                    w[0]
                )));
            }
            for &j in &row {
                if j >= n {
                    return Err(BitError::Matrix(format!(
                        "row {i} references column {j}, code length is {n}"
                    )));
                }
                cols[j].push(i);
            }
            sorted_rows.push(row);
        }
        Ok(ParityCheck {
            n,
            rows: sorted_rows,
            cols,
        })
    }

    /// The (7,4) Hamming code: column `j` is the binary expansion of `j + 1`.
    pub fn hamming_7_4() -> Self {
        let rows = (0..3)
            .map(|b| (0..7).filter(|j| ((j + 1) >> b) & 1 == 1).collect())
            .collect();
        Self::from_rows(7, rows).expect("static code")
    }

    /// Random `(dv, dc)`-regular code. Checks are filled least-loaded first and
    /// placements that would close a 4-cycle are avoided while possible.
    pub fn regular<R: Rng + ?Sized>(
        n: usize,
        dv: usize,
        dc: usize,
        rng: &mut R,
    ) -> Result<Self, BitError> {
        if dv == 0 || dc == 0 || !(n * dv).is_multiple_of(dc) || n * dv / dc < dv {
            return Err(BitError::Matrix(format!(
                "no ({dv},{dc})-regular code of length {n}"
            )));
        }
        let r = n * dv / dc;
        let mut rows: Vec<Vec<usize>> = vec![Vec::with_capacity(dc); r];
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut candidates = Vec::with_capacity(r);
        for &v in &order {
            let mut chosen: Vec<usize> = Vec::with_capacity(dv);
            for _ in 0..dv {
                let mut picked = None;
                for strict in [true, false] {
                    let mut level = rows.iter().map(|row| row.len()).filter(|&d| d < dc).min();
                    while let Some(deg) = level {
                        candidates.clear();
                        candidates.extend(
                            (0..r).filter(|&c| rows[c].len() == deg && !chosen.contains(&c)),
                        );
                        candidates.shuffle(rng);
                        picked = candidates.iter().copied().find(|&c| {
                            !strict
                                || chosen
                                    .iter()
                                    .all(|&c2| !rows[c].iter().any(|u| rows[c2].contains(u)))
                        });
                        if picked.is_some() {
                            break;
                        }
                        level = rows
                            .iter()
                            .map(|row| row.len())
                            .filter(|&d| d > deg && d < dc)
                            .min();
                    }
                    if picked.is_some() {
                        break;
                    }
                }
                let c = picked.ok_or_else(|| {
                    BitError::Matrix("ran out of check sockets while building code".into())
                })?;
                chosen.push(c);
            }
            for c in chosen {
                rows[c].push(v);
            }
        }
        Self::from_rows(n, rows)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of checks (syndrome length).
    #[inline]
    pub fn r(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[usize] {
        &self.rows[i]
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[usize] {
        &self.cols[j]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn cols(&self) -> &[Vec<usize>] {
        &self.cols
    }

    pub fn edges(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn max_col_degree(&self) -> usize {
        self.cols.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn max_row_degree(&self) -> usize {
        self.rows.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_zero_column(&self) -> bool {
        self.cols.iter().any(Vec::is_empty)
    }

    /// Column `j` of `H` as an `r`-bit vector.
    pub fn column(&self, j: usize) -> BitBlock {
        let mut b = BitBlock::zeros(self.r());
        for &i in &self.cols[j] {
            b.set(i, true);
        }
        b
    }

    /// `s = k Hᵀ`: bit `i` is the parity of `k` over the columns of row `i`.
    pub fn syndrome(&self, k: &BitBlock) -> Result<BitBlock, BitError> {
        if k.len() != self.n {
            return Err(BitError::Dimension {
                expected: self.n,
                actual: k.len(),
            });
        }
        let words = k.words();
        let mut s = BitBlock::zeros(self.r());
        for (i, row) in self.rows.iter().enumerate() {
            let parity = row
                .iter()
                .fold(0u64, |acc, &j| acc ^ (words[j / 64] >> (j % 64)));
            if parity & 1 == 1 {
                s.set(i, true);
            }
        }
        Ok(s)
    }

    /// Basis of the code `{c : c Hᵀ = 0}` via dense Gaussian elimination.
    pub fn codeword_basis(&self) -> Vec<BitBlock> {
        let mut rows: Vec<BitBlock> = self
            .rows
            .iter()
            .map(|row| {
                let mut b = BitBlock::zeros(self.n);
                for &j in row {
                    b.set(j, true);
                }
                b
            })
            .collect();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in 0..self.n {
            let Some(p) = (rank..rows.len()).find(|&i| rows[i].get(col)) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != rank && row.get(col) {
                    *row ^= &pivot;
                }
            }
            pivots.push(col);
            rank += 1;
        }
        let mut is_pivot = vec![false; self.n];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        (0..self.n)
            .filter(|&f| !is_pivot[f])
            .map(|free| {
                let mut c = BitBlock::unit(self.n, free);
                for (k, &p) in pivots.iter().enumerate() {
                    if rows[k].get(free) {
                        c.set(p, true);
                    }
                }
                c
            })
            .collect()
    }
}
