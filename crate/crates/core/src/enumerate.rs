//! Exhaustive enumeration of codeword tuples.
//!
//! Every tuple sum is mapped to a key. When the sum space fits, the key is
//! the sum written in base `span * T + 1` (span = alphabet max - min), which
//! is linear in the words, so each tuple key is the sum of per-word keys and
//! an odometer step costs one subtraction and one addition. Wider spaces
//! fall back to plain `Vec<i64>` keys.
//!
//! Enumeration is partitioned by the first user's codeword index; tuple
//! index `t` has the first user as its most significant mixed-radix digit
//! and the last user as the least significant one.

use std::fmt::Debug;
use std::hash::Hash;

use rayon::prelude::*;

use crate::codebook::{MultiUserCode, Word};
use crate::Symbol;

#[derive(Debug, Clone)]
pub(crate) struct KeyContext {
    /// Alphabet minimum; word digits are `symbol - lo`.
    pub lo: i64,
    pub base: u128,
    pub length: usize,
    pub users: usize,
}

impl KeyContext {
    /// Converts key digits back to the actual channel sum.
    pub fn sum_from_digits(&self, digits: &[i64]) -> Vec<i64> {
        let shift = self.lo * self.users as i64;
        digits.iter().map(|d| d + shift).collect()
    }

    /// Converts a channel sum into key digits, `None` if out of range.
    pub fn digits_from_sum(&self, sum: &[i64]) -> Option<Vec<i64>> {
        if sum.len() != self.length {
            return None;
        }
        let shift = self.lo * self.users as i64;
        sum.iter()
            .map(|s| {
                let d = s - shift;
                (d >= 0 && (d as u128) < self.base).then_some(d)
            })
            .collect()
    }
}

pub(crate) trait TupleKey: Clone + Ord + Hash + Send + Sync + Debug + 'static {
    fn zero(ctx: &KeyContext) -> Self;
    fn pack(digits: &[i64], ctx: &KeyContext) -> Self;
    fn unpack(&self, ctx: &KeyContext) -> Vec<i64>;
    fn add(&mut self, other: &Self);
    fn sub(&mut self, other: &Self);
}

macro_rules! packed_key {
    ($t:ty) => {
        impl TupleKey for $t {
            fn zero(_: &KeyContext) -> Self {
                0
            }

            fn pack(digits: &[i64], ctx: &KeyContext) -> Self {
                let base = ctx.base as $t;
                digits.iter().rev().fold(0, |acc, &d| acc * base + d as $t)
            }

            fn unpack(&self, ctx: &KeyContext) -> Vec<i64> {
                let base = ctx.base as $t;
                let mut v = *self;
                (0..ctx.length)
                    .map(|_| {
                        let d = v % base;
                        v /= base;
                        d as i64
                    })
                    .collect()
            }

            fn add(&mut self, other: &Self) {
                *self += *other;
            }

            fn sub(&mut self, other: &Self) {
                *self -= *other;
            }
        }
    };
}

packed_key!(u64);
packed_key!(u128);

impl TupleKey for Vec<i64> {
    fn zero(ctx: &KeyContext) -> Self {
        vec![0; ctx.length]
    }

    fn pack(digits: &[i64], _: &KeyContext) -> Self {
        digits.to_vec()
    }

    fn unpack(&self, _: &KeyContext) -> Vec<i64> {
        self.clone()
    }

    fn add(&mut self, other: &Self) {
        self.iter_mut().zip(other).for_each(|(a, b)| *a += b);
    }

    fn sub(&mut self, other: &Self) {
        self.iter_mut().zip(other).for_each(|(a, b)| *a -= b);
    }
}

/// Per-user packed word keys plus the mixed-radix layout of tuple indices.
pub(crate) struct Enumerator<K> {
    pub ctx: KeyContext,
    values: Vec<Vec<K>>,
    sizes: Vec<usize>,
}

impl<K: TupleKey> Enumerator<K> {
    fn new<S: Symbol>(code: &MultiUserCode<S>, ctx: KeyContext) -> Self {
        let values = code
            .constituents()
            .iter()
            .map(|c| c.words().iter().map(|w| K::pack(&word_digits(w, &ctx), &ctx)).collect())
            .collect();
        let sizes = code.constituents().iter().map(|c| c.len()).collect();
        Enumerator { ctx, values, sizes }
    }

    pub fn tuple_count(&self) -> u64 {
        self.sizes.iter().map(|&s| s as u64).product()
    }

    /// Keys of all tuples, in tuple-index order.
    pub fn keys(&self) -> Vec<K> {
        let rest: usize = self.sizes[1..].iter().product();
        let parts: Vec<Vec<K>> = (0..self.sizes[0])
            .into_par_iter()
            .map(|first| {
                let mut out = Vec::with_capacity(rest);
                let mut idx = vec![0usize; self.sizes.len()];
                idx[0] = first;
                let mut key = K::zero(&self.ctx);
                for (u, vals) in self.values.iter().enumerate() {
                    key.add(&vals[idx[u]]);
                }
                loop {
                    out.push(key.clone());
                    // odometer over users 1..T, last user fastest
                    let mut u = self.sizes.len() - 1;
                    loop {
                        if u == 0 {
                            return out;
                        }
                        key.sub(&self.values[u][idx[u]]);
                        idx[u] += 1;
                        if idx[u] < self.sizes[u] {
                            key.add(&self.values[u][idx[u]]);
                            break;
                        }
                        idx[u] = 0;
                        key.add(&self.values[u][0]);
                        u -= 1;
                    }
                }
            })
            .collect();
        let mut keys = Vec::with_capacity(rest * self.sizes[0]);
        parts.into_iter().for_each(|p| keys.extend(p));
        keys
    }

    /// Per-user word positions of tuple `index`.
    pub fn positions(&self, mut index: u64) -> Vec<usize> {
        let mut pos = vec![0usize; self.sizes.len()];
        for u in (0..self.sizes.len()).rev() {
            let s = self.sizes[u] as u64;
            pos[u] = (index % s) as usize;
            index /= s;
        }
        pos
    }

    pub fn sum_of(&self, key: &K) -> Vec<i64> {
        self.ctx.sum_from_digits(&key.unpack(&self.ctx))
    }
}

fn word_digits<S: Symbol>(w: &Word<S>, ctx: &KeyContext) -> Vec<i64> {
    w.symbols().iter().map(|s| s.as_i64() - ctx.lo).collect()
}

/// Work that runs against whichever key width fits the code.
pub(crate) trait KeyJob {
    type Output;
    fn run<K: TupleKey>(self, e: Enumerator<K>) -> Self::Output;
}

pub(crate) fn dispatch<S: Symbol, J: KeyJob>(code: &MultiUserCode<S>, job: J) -> J::Output {
    let alphabet = code.alphabet();
    let span = (alphabet.max_symbol() - alphabet.min_symbol()) as u128;
    let base = span.checked_mul(code.users() as u128).and_then(|x| x.checked_add(1)).unwrap_or(u128::MAX);
    let ctx = KeyContext { lo: alphabet.min_symbol(), base, length: code.length(), users: code.users() };
    let space = u32::try_from(code.length()).ok().and_then(|n| base.checked_pow(n));
    match space {
        Some(s) if s <= u64::MAX as u128 => job.run(Enumerator::<u64>::new(code, ctx)),
        Some(_) => job.run(Enumerator::<u128>::new(code, ctx)),
        None => job.run(Enumerator::<Vec<i64>>::new(code, ctx)),
    }
}

/// Resolves tuple positions into the actual words.
pub(crate) fn tuple_words<S: Symbol>(code: &MultiUserCode<S>, positions: &[usize]) -> Vec<Word<S>> {
    code.constituents().iter().zip(positions).map(|(c, &p)| c.words()[p].clone()).collect()
}
