//! Recovering the transmitted tuple from a noiseless channel output.
//!
//! [`build_lookup`] tabulates every achievable sum and is the reference
//! decoder. [`decode_recursive`] needs only the [`ConstructionTrace`]: at an
//! Omega node with children of lengths `f >= g` the output splits as
//! `y = (s1, s2)`, and `s1[..g] - s2` equals the sum of the difference-set
//! words, because the first-code users contribute `a[..g]` to both halves.
//! Adding back `T^g * offset` gives a sum of the right child code, which is
//! decoded recursively; removing the `(d+, d-)` contributions from `s1`
//! leaves a sum of the left child code. Leaves are length-1 two-user codes
//! `{0..2^l - 1}`, `{0, k - 1}` and decode by comparing with `2^l`.

use std::fmt;

use crate::analysis::AnalysisError;
pub use crate::codebook::SumWord;
use crate::codebook::{sum_tuple, Alphabet, CodebookError, MultiUserCode, Word};
use crate::construction::{ell, ConstructionTrace};
use crate::enumerate::{dispatch, tuple_words, Enumerator, KeyContext, KeyJob, TupleKey};
use crate::{Limits, Symbol};
use rayon::slice::ParallelSliceMut;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("code is not uniquely decodable: sum {0} has two preimages")]
    NotUniquelyDecodable(SumWord),
    #[error("{0} is not the sum of any codeword tuple")]
    NotAchievable(SumWord),
    #[error("received word has length {found}, code length is {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("lookup tables index tuples with u32; cap {0} is too large")]
    TableTooLarge(u64),
    #[error("inconsistent trace: {0}")]
    InconsistentTrace(String),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Codebook(#[from] CodebookError),
}

/// One codeword per user, in user order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DecodedTuple<S>(Vec<Word<S>>);

impl<S: Symbol> DecodedTuple<S> {
    pub fn new(words: Vec<Word<S>>) -> Self {
        DecodedTuple(words)
    }

    pub fn words(&self) -> &[Word<S>] {
        &self.0
    }

    pub fn into_words(self) -> Vec<Word<S>> {
        self.0
    }

    pub fn sum(&self) -> Result<SumWord, CodebookError> {
        sum_tuple(&self.0)
    }
}

impl<S: Symbol> fmt::Display for DecodedTuple<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, w) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{w}")?;
        }
        Ok(())
    }
}

/// Sorted `(key, tuple index)` pairs for one key width.
struct SortedEntries<K> {
    ctx: KeyContext,
    pairs: Vec<(K, u32)>,
}

trait EntryStore: Send + Sync {
    fn find(&self, digits: &[i64]) -> Option<u32>;
    fn len(&self) -> usize;
    fn sums(&self) -> Vec<SumWord>;
}

impl<K: TupleKey> EntryStore for SortedEntries<K> {
    fn find(&self, digits: &[i64]) -> Option<u32> {
        let key = K::pack(digits, &self.ctx);
        self.pairs.binary_search_by(|(k, _)| k.cmp(&key)).ok().map(|i| self.pairs[i].1)
    }

    fn len(&self) -> usize {
        self.pairs.len()
    }

    fn sums(&self) -> Vec<SumWord> {
        self.pairs.iter().map(|(k, _)| SumWord::new(self.ctx.sum_from_digits(&k.unpack(&self.ctx)))).collect()
    }
}

/// Sorted map from every achievable sum to its tuple index.
pub struct LookupTable<'c, S> {
    code: &'c MultiUserCode<S>,
    ctx: KeyContext,
    sizes: Vec<usize>,
    entries: Box<dyn EntryStore>,
}

struct TableJob;

impl KeyJob for TableJob {
    type Output = Result<(KeyContext, Box<dyn EntryStore>), DecodeError>;

    fn run<K: TupleKey>(self, e: Enumerator<K>) -> Self::Output {
        let mut pairs: Vec<(K, u32)> = e.keys().into_iter().enumerate().map(|(i, k)| (k, i as u32)).collect();
        pairs.par_sort_unstable();
        if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(DecodeError::NotUniquelyDecodable(SumWord::new(e.sum_of(&w[0].0))));
        }
        let ctx = e.ctx.clone();
        Ok((e.ctx, Box::new(SortedEntries { ctx, pairs })))
    }
}

/// Tabulates every tuple sum. Fails if two tuples collide or the tuple count
/// exceeds the cap.
pub fn build_lookup<'c, S: Symbol>(
    code: &'c MultiUserCode<S>,
    limits: &Limits,
) -> Result<LookupTable<'c, S>, DecodeError> {
    if limits.max_tuples > u64::from(u32::MAX) {
        return Err(DecodeError::TableTooLarge(limits.max_tuples));
    }
    let needed = code.tuple_count();
    if needed > limits.max_tuples as u128 {
        return Err(AnalysisError::Capacity { what: "codeword tuples", needed, cap: limits.max_tuples }.into());
    }
    let (ctx, entries) = dispatch(code, TableJob)?;
    let sizes = code.constituents().iter().map(|c| c.len()).collect();
    Ok(LookupTable { code, ctx, sizes, entries })
}

impl<S: Symbol> LookupTable<'_, S> {
    /// Number of achievable sums.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.len() == 0
    }

    fn positions(&self, mut index: u64) -> Vec<usize> {
        let mut pos = vec![0usize; self.sizes.len()];
        for u in (0..self.sizes.len()).rev() {
            let s = self.sizes[u] as u64;
            pos[u] = (index % s) as usize;
            index /= s;
        }
        pos
    }

    /// All achievable sums, in key order.
    pub fn sums(&self) -> Vec<SumWord> {
        self.entries.sums()
    }
}

/// Looks `y` up in the table.
pub fn decode_lookup<S: Symbol>(y: &SumWord, table: &LookupTable<'_, S>) -> Result<DecodedTuple<S>, DecodeError> {
    if y.len() != table.ctx.length {
        return Err(DecodeError::LengthMismatch { expected: table.ctx.length, found: y.len() });
    }
    let index = table
        .ctx
        .digits_from_sum(y.symbols())
        .and_then(|d| table.entries.find(&d))
        .ok_or_else(|| DecodeError::NotAchievable(y.clone()))?;
    Ok(DecodedTuple(tuple_words(table.code, &table.positions(u64::from(index)))))
}

/// Decodes `y` by walking the construction trace, without any table.
pub fn decode_recursive<S: Symbol>(y: &SumWord, trace: &ConstructionTrace) -> Result<DecodedTuple<S>, DecodeError> {
    let expected = trace.length() as usize;
    if y.len() != expected {
        return Err(DecodeError::LengthMismatch { expected, found: y.len() });
    }
    let users = solve(y.symbols(), trace).map_err(|e| match e {
        Unsolvable::NotAchievable => DecodeError::NotAchievable(y.clone()),
        Unsolvable::Inconsistent(msg) => DecodeError::InconsistentTrace(msg),
    })?;
    let alphabet = Alphabet::unsigned(trace.arity())?;
    let words = users.iter().map(|u| Word::from_i64s(u, alphabet)).collect::<Result<Vec<_>, _>>()?;
    Ok(DecodedTuple(words))
}

enum Unsolvable {
    NotAchievable,
    Inconsistent(String),
}

fn solve(y: &[i64], node: &ConstructionTrace) -> Result<Vec<Vec<i64>>, Unsolvable> {
    match node {
        ConstructionTrace::Initial { arity } => {
            let [s] = y else {
                return Err(Unsolvable::Inconsistent(format!("leaf received length {}", y.len())));
            };
            let top = 1i64 << ell(*arity);
            let second = if *s >= top { *arity as i64 - 1 } else { 0 };
            let first = s - second;
            if !(0..top).contains(&first) {
                return Err(Unsolvable::NotAchievable);
            }
            Ok(vec![vec![first], vec![second]])
        }
        ConstructionTrace::Omega { offset, left, right, .. } => {
            let (f, g) = (left.length() as usize, right.length() as usize);
            if y.len() != f + g {
                return Err(Unsolvable::Inconsistent(format!("node expects length {}, got {}", f + g, y.len())));
            }
            let (s1, s2) = y.split_at(f);
            // s1[..g] - s2 is the sum of the signed difference words
            let lift = right.users() as i64 * *offset as i64;
            let right_sum: Vec<i64> = s1[..g].iter().zip(s2).map(|(a, b)| a - b + lift).collect();
            let right_words = solve(&right_sum, right)?;

            let mut left_sum = s1.to_vec();
            let mut minus_total = vec![0i64; g];
            let mut d_users = Vec::with_capacity(right_words.len());
            for w in &right_words {
                let mut word = vec![0i64; f + g];
                for (p, &a) in w.iter().enumerate() {
                    let d = a - *offset as i64;
                    if d >= 0 {
                        word[p] = d;
                        left_sum[p] -= d;
                    } else {
                        word[f + p] = -d;
                        minus_total[p] -= d;
                    }
                }
                d_users.push(word);
            }
            let left_words = solve(&left_sum, left)?;

            // the second half must equal sum a[..g] + sum d-
            let mut check = minus_total;
            for a in &left_words {
                check.iter_mut().zip(a).for_each(|(c, v)| *c += v);
            }
            if check != s2 {
                return Err(Unsolvable::NotAchievable);
            }
            let mut out: Vec<Vec<i64>> = left_words
                .into_iter()
                .map(|mut a| {
                    let prefix = a[..g].to_vec();
                    a.extend(prefix);
                    a
                })
                .collect();
            out.extend(d_users);
            Ok(out)
        }
    }
}
