//! Noiseless adder channel and the noisy channel obtained by cascading it
//! with a discrete memoryless channel (DMC) on the sum symbols.
//!
//! Noise sampling uses ChaCha8 seeded through `SeedableRng::seed_from_u64`,
//! one uniform draw per output symbol in order, so a given seed gives the
//! same output on every platform.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::codebook::{sum_tuple, CodebookError, MultiUserCode, SumWord, Word};
use crate::Symbol;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("expected one word per user ({expected}), got {found}")]
    TupleSize { expected: usize, found: usize },
    #[error("word {word} is not a codeword of user {user}")]
    NotACodeword { user: usize, word: String },
    #[error("sum symbol {symbol} is outside the channel input range 0..{max}")]
    SymbolOutOfRange { symbol: i64, max: usize },
    #[error("invalid transition matrix: {0}")]
    InvalidMatrix(String),
    #[error(transparent)]
    Codebook(#[from] CodebookError),
}

/// Sends one codeword per user through the noiseless adder channel.
pub fn transmit<S: Symbol>(code: &MultiUserCode<S>, tuple: &[Word<S>]) -> Result<SumWord, ChannelError> {
    if tuple.len() != code.users() {
        return Err(ChannelError::TupleSize { expected: code.users(), found: tuple.len() });
    }
    for (c, w) in code.constituents().iter().zip(tuple) {
        if !c.contains(w) {
            return Err(ChannelError::NotACodeword { user: c.index(), word: w.to_string() });
        }
    }
    let y = sum_tuple(tuple)?;
    debug_assert!(code.alphabet().is_signed() || y.within(code.max_sum_symbol()));
    Ok(y)
}

/// Row-stochastic matrix `P(j | i)` over channel symbols `0..size`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    rows: Vec<Vec<f64>>,
}

const ROW_TOLERANCE: f64 = 1e-12;

impl TransitionMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, ChannelError> {
        let size = rows.len();
        if size == 0 {
            return Err(ChannelError::InvalidMatrix("matrix is empty".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != size {
                return Err(ChannelError::InvalidMatrix(format!("row {i} has {} entries, expected {size}", row.len())));
            }
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(ChannelError::InvalidMatrix(format!("row {i} has a negative or non-finite entry")));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > ROW_TOLERANCE {
                return Err(ChannelError::InvalidMatrix(format!("row {i} sums to {total}")));
            }
        }
        Ok(TransitionMatrix { rows })
    }

    /// Channel for a T-user k-ary code has `(k-1) T + 1` symbols.
    pub fn size_for(k: u64, users: usize) -> usize {
        (k as usize - 1) * users + 1
    }

    pub fn identity(size: usize) -> Self {
        let rows = (0..size).map(|i| (0..size).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        TransitionMatrix { rows }
    }

    /// Moves each symbol up by one, saturating at the top symbol.
    pub fn saturating_increment(size: usize) -> Self {
        let rows = (0..size)
            .map(|i| (0..size).map(|j| if j == (i + 1).min(size - 1) { 1.0 } else { 0.0 }).collect())
            .collect();
        TransitionMatrix { rows }
    }

    /// Every output equally likely.
    pub fn uniform(size: usize) -> Self {
        TransitionMatrix { rows: vec![vec![1.0 / size as f64; size]; size] }
    }

    /// Demo noise model: each symbol moves to `i - 1` or `i + 1` with
    /// probability `p / 2` each (mass beyond the edges stays at `i`).
    pub fn symmetric_step(size: usize, p: f64) -> Result<Self, ChannelError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(ChannelError::InvalidMatrix(format!("p = {p} is not a probability")));
        }
        let rows = (0..size)
            .map(|i| {
                let mut row = vec![0.0; size];
                let mut stay = 1.0 - p;
                if i > 0 {
                    row[i - 1] = p / 2.0;
                } else {
                    stay += p / 2.0;
                }
                if i + 1 < size {
                    row[i + 1] = p / 2.0;
                } else {
                    stay += p / 2.0;
                }
                row[i] = stay;
                row
            })
            .collect();
        Self::new(rows)
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.size())
    }
}

/// Passes each sum symbol independently through `matrix`.
pub fn apply_dmc(y: &SumWord, matrix: &TransitionMatrix, seed: u64) -> Result<SumWord, ChannelError> {
    let size = matrix.size();
    if let Some(&bad) = y.symbols().iter().find(|&&s| s < 0 || s as usize >= size) {
        return Err(ChannelError::SymbolOutOfRange { symbol: bad, max: size - 1 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let out = y
        .symbols()
        .iter()
        .map(|&s| {
            let row =
                WeightedIndex::new(&matrix.rows[s as usize]).map_err(|e| ChannelError::InvalidMatrix(e.to_string()))?;
            Ok(row.sample(&mut rng) as i64)
        })
        .collect::<Result<Vec<_>, ChannelError>>()?;
    Ok(SumWord::new(out))
}
