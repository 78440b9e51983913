//! Systematic encoding from an arbitrary parity-check matrix.
//!
//! `H` is brought to reduced row echelon form over GF(2). Pivot columns carry
//! parity bits and the remaining (free) columns carry the information bits,
//! so the encoder works for rank-deficient matrices too: `K = N - rank(H)`.

use super::{BitVector, LdpcError, ParityCheckMatrix};

pub(super) struct Rref {
    /// Packed rows of the reduced matrix, one per pivot.
    pub rows: Vec<Vec<u64>>,
    /// Pivot column of each row.
    pub pivots: Vec<usize>,
}

fn words(n: usize) -> usize {
    n.div_ceil(64)
}

fn get(row: &[u64], j: usize) -> bool {
    (row[j / 64] >> (j % 64)) & 1 == 1
}

pub(super) fn rref(h: &ParityCheckMatrix) -> Rref {
    let n = h.n_bits();
    let mut rows: Vec<Vec<u64>> = h
        .rows()
        .iter()
        .map(|r| {
            let mut packed = vec![0u64; words(n)];
            for &j in r {
                packed[j / 64] |= 1 << (j % 64);
            }
            packed
        })
        .collect();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..n {
        let Some(p) = (rank..rows.len()).find(|&r| get(&rows[r], col)) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && get(row, col) {
                for (a, b) in row.iter_mut().zip(&pivot_row) {
                    *a ^= b;
                }
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rows.truncate(rank);
    Rref { rows, pivots }
}

/// GF(2) systematic encoder derived from a parity-check matrix.
#[derive(Debug, Clone)]
pub struct Encoder {
    n_code: usize,
    info_positions: Vec<usize>,
    parity_positions: Vec<usize>,
    parity_rows: Vec<Vec<u64>>,
}

impl Encoder {
    /// Derives the encoder by Gaussian elimination; never fails.
    pub fn new(h: &ParityCheckMatrix) -> Self {
        let Rref { rows, pivots } = rref(h);
        let mut is_pivot = vec![false; h.n_bits()];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        Self {
            n_code: h.n_bits(),
            info_positions: (0..h.n_bits()).filter(|&j| !is_pivot[j]).collect(),
            parity_positions: pivots,
            parity_rows: rows,
        }
    }

    /// Number of information bits `K`.
    pub fn n_info(&self) -> usize {
        self.info_positions.len()
    }

    /// Codeword length `N`.
    pub fn n_code(&self) -> usize {
        self.n_code
    }

    /// GF(2) rank of the source matrix.
    pub fn rank(&self) -> usize {
        self.parity_positions.len()
    }

    pub fn rate(&self) -> f64 {
        self.n_info() as f64 / self.n_code as f64
    }

    /// Codeword positions holding the information bits, in order.
    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    /// Column permutation: entry `i` is the codeword position of systematic
    /// symbol `i` (information symbols first, then parity).
    pub fn systematic_permutation(&self) -> Vec<usize> {
        self.info_positions
            .iter()
            .chain(&self.parity_positions)
            .copied()
            .collect()
    }

    pub fn encode(&self, info: &BitVector) -> Result<BitVector, LdpcError> {
        if info.len() != self.n_info() {
            return Err(LdpcError::LengthMismatch {
                expected: self.n_info(),
                actual: info.len(),
            });
        }
        let mut packed = vec![0u64; words(self.n_code)];
        for (&pos, &b) in self.info_positions.iter().zip(info.as_slice()) {
            packed[pos / 64] |= (b as u64) << (pos % 64);
        }
        // each reduced row touches exactly one pivot, so parity bits can be
        // filled in any order from the information part alone
        let mut parity = Vec::with_capacity(self.rank());
        for row in &self.parity_rows {
            let ones: u32 = row
                .iter()
                .zip(&packed)
                .map(|(a, b)| (a & b).count_ones())
                .sum();
            parity.push((ones & 1) as u64);
        }
        for (&pos, p) in self.parity_positions.iter().zip(parity) {
            packed[pos / 64] |= p << (pos % 64);
        }
        Ok(BitVector::from_bools(
            (0..self.n_code).map(|j| get(&packed, j)),
        ))
    }

    /// Reads the information bits out of a codeword.
    pub fn extract_info(&self, codeword: &BitVector) -> Result<BitVector, LdpcError> {
        if codeword.len() != self.n_code {
            return Err(LdpcError::LengthMismatch {
                expected: self.n_code,
                actual: codeword.len(),
            });
        }
        Ok(BitVector::from_bools(
            self.info_positions.iter().map(|&j| codeword.get(j) == 1),
        ))
    }
}

/// Free-function form of [`Encoder::new`].
pub fn derive_encoder(h: &ParityCheckMatrix) -> Encoder {
    Encoder::new(h)
}
