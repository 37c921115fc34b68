//! Codewords, constituent codes and multi-user codes.
//!
//! All arithmetic is over the integers: the weight of a vector is the sum of
//! the absolute values of its entries and the distance between two vectors
//! is the weight of their componentwise difference.

use std::fmt;

use thiserror::Error;

use crate::Symbol;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodebookError {
    #[error("alphabet size must be at least 2, got {0}")]
    InvalidArity(u64),
    #[error("codewords must have length at least 1")]
    EmptyWord,
    #[error("symbol {symbol} is outside the alphabet {alphabet}")]
    SymbolOutOfRange { symbol: i64, alphabet: Alphabet },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("alphabet mismatch: expected {expected}, found {found}")]
    AlphabetMismatch { expected: Alphabet, found: Alphabet },
    #[error("user {user} contains a duplicate codeword {word}")]
    DuplicateCodeword { user: usize, word: String },
    #[error("user {user} has no codewords")]
    EmptyConstituent { user: usize },
    #[error("a multi-user code needs at least one constituent")]
    NoConstituents,
    #[error("cannot parse {0:?} as a digit string")]
    BadDigits(String),
}

/// Symbol alphabet: {0..k-1} when unsigned, {-(k-1)..k-1} when signed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Alphabet {
    k: u64,
    signed: bool,
}

impl Alphabet {
    pub fn unsigned(k: u64) -> Result<Self, CodebookError> {
        Self::new(k, false)
    }

    pub fn signed(k: u64) -> Result<Self, CodebookError> {
        Self::new(k, true)
    }

    pub fn new(k: u64, signed: bool) -> Result<Self, CodebookError> {
        if k < 2 || k > i64::MAX as u64 {
            return Err(CodebookError::InvalidArity(k));
        }
        Ok(Alphabet { k, signed })
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn is_signed(&self) -> bool {
        self.signed
    }

    pub fn min_symbol(&self) -> i64 {
        if self.signed {
            -(self.k as i64 - 1)
        } else {
            0
        }
    }

    pub fn max_symbol(&self) -> i64 {
        self.k as i64 - 1
    }

    pub fn contains(&self, symbol: i64) -> bool {
        (self.min_symbol()..=self.max_symbol()).contains(&symbol)
    }

    /// Same k with the sign flag flipped to unsigned.
    pub fn to_unsigned(self) -> Alphabet {
        Alphabet { k: self.k, signed: false }
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.signed {
            write!(f, "{{-{}..{}}}", self.k - 1, self.k - 1)
        } else {
            write!(f, "{{0..{}}}", self.k - 1)
        }
    }
}

/// A codeword: a fixed-length vector of symbols over an [`Alphabet`].
///
/// Ordering is lexicographic on the symbols, which is the canonical order of
/// words inside a [`ConstituentCode`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word<S> {
    symbols: Vec<S>,
    alphabet: Alphabet,
}

impl<S: Symbol> Word<S> {
    pub fn new(symbols: Vec<S>, alphabet: Alphabet) -> Result<Self, CodebookError> {
        if symbols.is_empty() {
            return Err(CodebookError::EmptyWord);
        }
        if let Some(&bad) = symbols.iter().find(|s| !alphabet.contains(s.as_i64())) {
            return Err(CodebookError::SymbolOutOfRange { symbol: bad.as_i64(), alphabet });
        }
        Ok(Word { symbols, alphabet })
    }

    /// Builds a word from `i64` values, checking range and representability.
    pub fn from_i64s(values: &[i64], alphabet: Alphabet) -> Result<Self, CodebookError> {
        let symbols = values
            .iter()
            .map(|&v| {
                S::from_i64(v)
                    .filter(|_| alphabet.contains(v))
                    .ok_or(CodebookError::SymbolOutOfRange { symbol: v, alphabet })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(symbols, alphabet)
    }

    /// Parses the compact digit notation used in the literature ("0220").
    /// Only meaningful for k <= 10 and unsigned alphabets.
    pub fn from_digits(digits: &str, alphabet: Alphabet) -> Result<Self, CodebookError> {
        let values = digits
            .chars()
            .map(|c| c.to_digit(10).map(i64::from))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| CodebookError::BadDigits(digits.to_string()))?;
        Self::from_i64s(&values, alphabet)
    }

    pub fn zeros(len: usize, alphabet: Alphabet) -> Result<Self, CodebookError> {
        Self::new(vec![S::zero(); len], alphabet)
    }

    pub fn symbols(&self) -> &[S] {
        &self.symbols
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn to_i64s(&self) -> Vec<i64> {
        self.symbols.iter().map(|s| s.as_i64()).collect()
    }

    pub fn weight(&self) -> u64 {
        weight(&self.symbols)
    }

    pub fn is_zero(&self) -> bool {
        self.symbols.iter().all(|s| s.is_zero())
    }
}

impl<S: Symbol> fmt::Display for Word<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let values = self.to_i64s();
        write_compact(f, &values)
    }
}

/// Digits run together when every entry is 0..=9, otherwise a parenthesised
/// comma list so that k > 10 stays unambiguous.
fn write_compact(f: &mut fmt::Formatter<'_>, values: &[i64]) -> fmt::Result {
    if values.iter().all(|v| (0..=9).contains(v)) {
        for v in values {
            write!(f, "{v}")?;
        }
        Ok(())
    } else {
        write!(f, "(")?;
        for (i, v) in values.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Sum of absolute values over the integers.
pub fn weight<S: Symbol>(x: &[S]) -> u64 {
    x.iter().map(|s| s.as_i64().unsigned_abs()).sum()
}

/// `weight(y - y')` with componentwise integer subtraction.
pub fn distance<S: Symbol>(y: &[S], y2: &[S]) -> Result<u64, CodebookError> {
    if y.len() != y2.len() {
        return Err(CodebookError::LengthMismatch { expected: y.len(), found: y2.len() });
    }
    Ok(y.iter().zip(y2).map(|(a, b)| (a.as_i64() - b.as_i64()).unsigned_abs()).sum())
}

/// Channel output: the componentwise integer sum of one word per user.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SumWord {
    symbols: Vec<i64>,
}

impl SumWord {
    pub fn new(symbols: Vec<i64>) -> Self {
        SumWord { symbols }
    }

    pub fn symbols(&self) -> &[i64] {
        &self.symbols
    }

    pub fn into_symbols(self) -> Vec<i64> {
        self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// True when every symbol lies in `{0..max}`.
    pub fn within(&self, max: i64) -> bool {
        self.symbols.iter().all(|s| (0..=max).contains(s))
    }
}

impl fmt::Display for SumWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_compact(f, &self.symbols)
    }
}

/// Componentwise integer sum of a tuple of equal-length words.
pub fn sum_tuple<S: Symbol>(words: &[Word<S>]) -> Result<SumWord, CodebookError> {
    let first = words.first().ok_or(CodebookError::NoConstituents)?;
    let mut acc = vec![0i64; first.len()];
    for w in words {
        if w.len() != acc.len() {
            return Err(CodebookError::LengthMismatch { expected: acc.len(), found: w.len() });
        }
        for (a, s) in acc.iter_mut().zip(w.symbols()) {
            *a += s.as_i64();
        }
    }
    Ok(SumWord::new(acc))
}

/// The codeword set of one user. Words are kept sorted and distinct.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConstituentCode<S> {
    index: usize,
    words: Vec<Word<S>>,
}

impl<S: Symbol> ConstituentCode<S> {
    /// `index` is the 1-based user id.
    pub fn new(index: usize, mut words: Vec<Word<S>>) -> Result<Self, CodebookError> {
        let first = words.first().ok_or(CodebookError::EmptyConstituent { user: index })?;
        let (len, alphabet) = (first.len(), first.alphabet());
        for w in &words {
            if w.len() != len {
                return Err(CodebookError::LengthMismatch { expected: len, found: w.len() });
            }
            if w.alphabet() != alphabet {
                return Err(CodebookError::AlphabetMismatch { expected: alphabet, found: w.alphabet() });
            }
        }
        words.sort_unstable();
        if let Some(pair) = words.windows(2).find(|p| p[0] == p[1]) {
            return Err(CodebookError::DuplicateCodeword { user: index, word: pair[0].to_string() });
        }
        Ok(ConstituentCode { index, words })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// Codewords in lexicographic order.
    pub fn words(&self) -> &[Word<S>] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn length(&self) -> usize {
        self.words[0].len()
    }

    pub fn alphabet(&self) -> Alphabet {
        self.words[0].alphabet()
    }

    pub fn contains(&self, word: &Word<S>) -> bool {
        self.words.binary_search(word).is_ok()
    }

    /// Position of `word` in [`Self::words`], if present.
    pub fn position(&self, word: &Word<S>) -> Option<usize> {
        self.words.binary_search(word).ok()
    }

    fn with_index(mut self, index: usize) -> Self {
        self.index = index;
        self
    }
}

/// An ordered list of constituent codes sharing length and alphabet.
///
/// User order is significant: equality compares constituents position by
/// position.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiUserCode<S> {
    constituents: Vec<ConstituentCode<S>>,
    length: usize,
    alphabet: Alphabet,
}

impl<S: Symbol> MultiUserCode<S> {
    /// Builds a code from per-user word lists; users are numbered from 1 in
    /// the given order.
    pub fn new(users: Vec<Vec<Word<S>>>) -> Result<Self, CodebookError> {
        let constituents = users
            .into_iter()
            .enumerate()
            .map(|(i, words)| ConstituentCode::new(i + 1, words))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_constituents(constituents)
    }

    /// Takes constituents as given and renumbers them 1..T.
    pub fn from_constituents(constituents: Vec<ConstituentCode<S>>) -> Result<Self, CodebookError> {
        let first = constituents.first().ok_or(CodebookError::NoConstituents)?;
        let (length, alphabet) = (first.length(), first.alphabet());
        for c in &constituents {
            if c.length() != length {
                return Err(CodebookError::LengthMismatch { expected: length, found: c.length() });
            }
            if c.alphabet() != alphabet {
                return Err(CodebookError::AlphabetMismatch { expected: alphabet, found: c.alphabet() });
            }
        }
        let constituents = constituents.into_iter().enumerate().map(|(i, c)| c.with_index(i + 1)).collect();
        Ok(MultiUserCode { constituents, length, alphabet })
    }

    /// Convenience constructor from digit strings, one list per user.
    pub fn from_digit_lists(users: &[&[&str]], alphabet: Alphabet) -> Result<Self, CodebookError> {
        let users = users
            .iter()
            .map(|ws| ws.iter().map(|w| Word::from_digits(w, alphabet)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(users)
    }

    pub fn constituents(&self) -> &[ConstituentCode<S>] {
        &self.constituents
    }

    /// Constituent of 1-based user `index`.
    pub fn user(&self, index: usize) -> Option<&ConstituentCode<S>> {
        index.checked_sub(1).and_then(|i| self.constituents.get(i))
    }

    /// Number of users T.
    pub fn users(&self) -> usize {
        self.constituents.len()
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    /// Codebook sizes |C_1|..|C_T|.
    pub fn sizes(&self) -> Vec<u64> {
        self.constituents.iter().map(|c| c.len() as u64).collect()
    }

    /// Number of codeword tuples, saturating at `u128::MAX`.
    pub fn tuple_count(&self) -> u128 {
        self.constituents.iter().fold(1u128, |acc, c| acc.saturating_mul(c.len() as u128))
    }

    /// Stored symbol count: length times total codeword count.
    pub fn storage(&self) -> u64 {
        let words: u64 = self.constituents.iter().map(|c| c.len() as u64).sum();
        words.saturating_mul(self.length as u64)
    }

    /// Largest symbol the adder channel can output for an unsigned code.
    pub fn max_sum_symbol(&self) -> i64 {
        self.alphabet.max_symbol() * self.users() as i64
    }
}
