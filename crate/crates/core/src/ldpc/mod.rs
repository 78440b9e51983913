//! LDPC codes: sparse parity-check matrices, GF(2) encoding and sum-product
//! decoding.
//!
//! All soft values in this crate use the convention `llr = ln P(c=1) / P(c=0)`,
//! so a positive LLR favours a one.

mod alist;
mod construct;
mod decoder;
mod encoder;

pub use construct::construct_regular;
pub use decoder::{bp_decode, BpDecoder, BpOutcome};
pub use encoder::{derive_encoder, Encoder};

use thiserror::Error;

/// Magnitude at which channel LLRs and decoder messages are saturated.
pub const LLR_CLAMP: f64 = 50.0;

/// Errors raised by code loading, construction and encoding.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LdpcError {
    #[error("alist line {line}: {kind}")]
    Alist { line: usize, kind: AlistErrorKind },
    #[error("invalid parity-check matrix: {0}")]
    InvalidMatrix(String),
    #[error("infeasible degree profile: {0}")]
    InfeasibleDegrees(String),
    #[error("construction retry budget exhausted after {attempts} attempts")]
    RetryBudgetExhausted { attempts: usize },
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("bit value {0} is not 0 or 1")]
    InvalidBit(u8),
}

/// What went wrong while reading an alist file.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlistErrorKind {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("invalid integer `{0}`")]
    InvalidNumber(String),
    #[error("index out of range: {index} not in 1..={bound}")]
    IndexOutOfRange { index: usize, bound: usize },
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("unexpected end of input")]
    UnexpectedEof,
    #[error("row and column lists disagree: {0}")]
    Inconsistent(String),
}

/// Sequence of hard bits, each 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector(Vec<u8>);

impl BitVector {
    pub fn new(bits: Vec<u8>) -> Result<Self, LdpcError> {
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(LdpcError::InvalidBit(b));
        }
        Ok(Self(bits))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    /// Builds a vector from booleans (`true` is a one).
    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        Self(bits.into_iter().map(u8::from).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<u8> {
        self.0
    }

    pub fn get(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] ^= 1;
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }

    /// Elementwise XOR.
    pub fn xor(&self, other: &Self) -> Result<Self, LdpcError> {
        if self.len() != other.len() {
            return Err(LdpcError::LengthMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(Self(
            self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect(),
        ))
    }

    /// Number of positions where the two vectors differ.
    pub fn hamming_distance(&self, other: &Self) -> usize {
        assert_eq!(
            self.len(),
            other.len(),
            "hamming distance of unequal lengths"
        );
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

impl std::fmt::Display for BitVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// Per-bit log-likelihood ratios, `ln P(1)/P(0)`, saturated to
/// `±LLR_CLAMP`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LlrVector(Vec<f64>);

impl LlrVector {
    /// Clamps every value to `±LLR_CLAMP`.
    ///
    /// # Panics
    ///
    /// Panics on NaN input, which always indicates an upstream bug.
    pub fn from_values(mut values: Vec<f64>) -> Self {
        for v in &mut values {
            assert!(!v.is_nan(), "NaN log-likelihood ratio");
            *v = v.clamp(-LLR_CLAMP, LLR_CLAMP);
        }
        Self(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Hard decisions: positive values map to 1.
    pub fn hard_decision(&self) -> BitVector {
        BitVector::from_bools(self.0.iter().map(|&v| v > 0.0))
    }
}

/// Sparse binary M×N parity-check matrix with row and column adjacency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    n_checks: usize,
    n_bits: usize,
    rows: Vec<Vec<usize>>,
    cols: Vec<Vec<usize>>,
}

impl ParityCheckMatrix {
    /// Builds a matrix from per-check lists of (0-based) bit indices.
    pub fn from_rows(n_bits: usize, mut rows: Vec<Vec<usize>>) -> Result<Self, LdpcError> {
        let n_checks = rows.len();
        if n_checks == 0 {
            return Err(LdpcError::InvalidMatrix("no checks".into()));
        }
        if n_checks >= n_bits {
            return Err(LdpcError::InvalidMatrix(format!(
                "need fewer checks than bits, got {n_checks}x{n_bits}"
            )));
        }
        let mut cols = vec![Vec::new(); n_bits];
        for (i, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(LdpcError::InvalidMatrix(format!(
                    "duplicate bit index in check {i}"
                )));
            }
            for &j in row.iter() {
                if j >= n_bits {
                    return Err(LdpcError::InvalidMatrix(format!(
                        "bit index {j} out of range in check {i}"
                    )));
                }
                cols[j].push(i);
            }
        }
        Ok(Self {
            n_checks,
            n_bits,
            rows,
            cols,
        })
    }

    /// Builds a matrix from dense 0/1 rows.
    pub fn from_dense(dense: &[Vec<u8>]) -> Result<Self, LdpcError> {
        let n_bits = dense.first().map_or(0, Vec::len);
        if dense.iter().any(|r| r.len() != n_bits) {
            return Err(LdpcError::InvalidMatrix("ragged dense rows".into()));
        }
        let rows = dense
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0)
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect();
        Self::from_rows(n_bits, rows)
    }

    /// The (7,4) Hamming code, column `j` holding the binary expansion of `j+1`.
    pub fn hamming_7_4() -> Self {
        let rows = (0..3)
            .map(|bit| (0..7).filter(|j| ((j + 1) >> bit) & 1 == 1).collect())
            .collect();
        Self::from_rows(7, rows).expect("hamming matrix is valid")
    }

    pub fn n_checks(&self) -> usize {
        self.n_checks
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.rows[i]
    }

    pub fn col(&self, j: usize) -> &[usize] {
        &self.cols[j]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn cols(&self) -> &[Vec<usize>] {
        &self.cols
    }

    pub fn n_edges(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        self.rows
            .iter()
            .map(|row| {
                let mut dense = vec![0u8; self.n_bits];
                for &j in row {
                    dense[j] = 1;
                }
                dense
            })
            .collect()
    }

    /// Checks that the column lists are exactly the transpose of the row lists.
    pub fn is_consistent(&self) -> bool {
        let mut transposed = vec![Vec::new(); self.n_bits];
        for (i, row) in self.rows.iter().enumerate() {
            for &j in row {
                if j >= self.n_bits {
                    return false;
                }
                transposed[j].push(i);
            }
        }
        transposed == self.cols
    }

    /// True if two distinct bits share two or more checks.
    pub fn has_4cycle(&self) -> bool {
        // last_seen[c] == i means check c already shares a bit with check i
        let mut last_seen = vec![usize::MAX; self.n_checks];
        for (i, row) in self.rows.iter().enumerate() {
            for &j in row {
                for &c in &self.cols[j] {
                    if c <= i {
                        continue;
                    }
                    if last_seen[c] == i {
                        return true;
                    }
                    last_seen[c] = i;
                }
            }
        }
        false
    }

    /// GF(2) rank, computed by dense elimination on packed rows.
    pub fn rank(&self) -> usize {
        encoder::rref(self).pivots.len()
    }

    /// True iff `H c = 0` over GF(2).
    pub fn syndrome_check(&self, c: &BitVector) -> Result<bool, LdpcError> {
        if c.len() != self.n_bits {
            return Err(LdpcError::LengthMismatch {
                expected: self.n_bits,
                actual: c.len(),
            });
        }
        Ok(self.syndrome_is_zero(c.as_slice()))
    }

    pub(crate) fn syndrome_is_zero(&self, bits: &[u8]) -> bool {
        self.rows
            .iter()
            .all(|row| row.iter().fold(0u8, |acc, &j| acc ^ bits[j]) == 0)
    }

    /// Parses the alist interchange format.
    pub fn from_alist(text: &str) -> Result<Self, LdpcError> {
        alist::parse(text)
    }

    /// Serializes to the alist interchange format (1-based, zero padded).
    pub fn to_alist(&self) -> String {
        alist::write(self)
    }
}

/// Free-function form of [`ParityCheckMatrix::syndrome_check`].
pub fn syndrome_check(h: &ParityCheckMatrix, c: &BitVector) -> Result<bool, LdpcError> {
    h.syndrome_check(c)
}

/// Free-function form of [`ParityCheckMatrix::from_alist`].
pub fn load_alist(text: &str) -> Result<ParityCheckMatrix, LdpcError> {
    alist::parse(text)
}
