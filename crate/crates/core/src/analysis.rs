//! Exhaustive decodability checks, exact rates and the closed-form user
//! counts and rates of the recursive constructions.

use std::collections::HashSet;
use std::fmt;
use std::ops::Add;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Float, One, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::codebook::{MultiUserCode, SumWord, Word};
use crate::construction::{build_arbitrary_with, ell, ConstructionError};
use crate::enumerate::{dispatch, tuple_words, Enumerator, KeyJob, TupleKey};
use crate::{Limits, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("{what}: {needed} exceeds the enumeration cap {cap}")]
    Capacity { what: &'static str, needed: u128, cap: u64 },
    #[error("measured and predicted values disagree for n = {n}, k = {k}: {detail}")]
    FormulaMismatch { n: u64, k: u64, detail: String },
    #[error(transparent)]
    Construction(#[from] ConstructionError),
}

fn tuple_cap<S: Symbol>(code: &MultiUserCode<S>, limits: &Limits) -> Result<(), AnalysisError> {
    let needed = code.tuple_count();
    if needed > limits.max_tuples as u128 {
        return Err(AnalysisError::Capacity { what: "codeword tuples", needed, cap: limits.max_tuples });
    }
    Ok(())
}

/// Two distinct tuples with the same channel sum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UdWitness<S> {
    pub first: Vec<Word<S>>,
    pub second: Vec<Word<S>>,
    pub sum: SumWord,
}

/// Outcome of [`check_ud`]. A witness is present exactly when the code is
/// not uniquely decodable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UdReport<S> {
    witness: Option<UdWitness<S>>,
    tuples_checked: u64,
}

impl<S> UdReport<S> {
    pub fn is_ud(&self) -> bool {
        self.witness.is_none()
    }

    pub fn witness(&self) -> Option<&UdWitness<S>> {
        self.witness.as_ref()
    }

    pub fn tuples_checked(&self) -> u64 {
        self.tuples_checked
    }
}

struct UdJob<'a, S>(&'a MultiUserCode<S>);

impl<S: Symbol> KeyJob for UdJob<'_, S> {
    type Output = UdReport<S>;

    fn run<K: TupleKey>(self, e: Enumerator<K>) -> UdReport<S> {
        let mut keys = e.keys();
        keys.par_sort_unstable();
        let duplicate = keys.windows(2).find(|w| w[0] == w[1]).map(|w| w[0].clone());
        drop(keys);
        let witness = duplicate.map(|key| {
            // second pass to recover the two smallest tuple indices
            let mut hits = e.keys().into_iter().enumerate().filter(|(_, k)| *k == key).map(|(i, _)| i as u64);
            let (a, b) = (hits.next().expect("duplicate key"), hits.next().expect("duplicate key"));
            UdWitness {
                first: tuple_words(self.0, &e.positions(a)),
                second: tuple_words(self.0, &e.positions(b)),
                sum: SumWord::new(e.sum_of(&key)),
            }
        });
        UdReport { witness, tuples_checked: e.tuple_count() }
    }
}

/// Sum-collision check: enumerates every tuple and looks for equal sums.
///
/// Works on unsigned codes and on signed difference sets alike.
pub fn check_ud<S: Symbol>(code: &MultiUserCode<S>, limits: &Limits) -> Result<UdReport<S>, AnalysisError> {
    tuple_cap(code, limits)?;
    Ok(dispatch(code, UdJob(code)))
}

/// Difference criterion: the code is UD iff no tuple of within-user
/// differences `u_j - u'_j`, not all zero, sums to the zero vector.
///
/// Tracks the set of sums reachable with at least one nonzero difference,
/// user by user, and never looks at tuple sums directly.
pub fn check_ud_differences<S: Symbol>(code: &MultiUserCode<S>, limits: &Limits) -> Result<bool, AnalysisError> {
    tuple_cap(code, limits)?;
    let n = code.length();
    let zero = vec![0i64; n];
    let mut nonzero: HashSet<Vec<i64>> = HashSet::new();
    for c in code.constituents() {
        let words: Vec<Vec<i64>> = c.words().iter().map(|w| w.to_i64s()).collect();
        let diffs: HashSet<Vec<i64>> = words
            .iter()
            .flat_map(|u| words.iter().map(move |v| u.iter().zip(v).map(|(a, b)| a - b).collect()))
            .collect();
        let mut next: HashSet<Vec<i64>> = diffs.iter().filter(|d| **d != zero).cloned().collect();
        for s in &nonzero {
            for d in &diffs {
                next.insert(s.iter().zip(d).map(|(a, b)| a + b).collect());
            }
        }
        if next.len() as u64 > limits.max_tuples {
            return Err(AnalysisError::Capacity {
                what: "difference sums",
                needed: next.len() as u128,
                cap: limits.max_tuples,
            });
        }
        nonzero = next;
    }
    Ok(!nonzero.contains(&zero))
}

struct DeltaJob<'a> {
    limits: &'a Limits,
}

impl KeyJob for DeltaJob<'_> {
    type Output = Result<u64, AnalysisError>;

    fn run<K: TupleKey>(self, e: Enumerator<K>) -> Self::Output {
        let mut keys = e.keys();
        keys.par_sort_unstable();
        if keys.windows(2).any(|w| w[0] == w[1]) {
            return Ok(0);
        }
        if keys.len() < 2 {
            return Ok(u64::MAX);
        }
        let ctx = &e.ctx;
        let max_digit = (ctx.base - 1) as i64;
        let has_unit_neighbour = keys.par_iter().any(|key| {
            let mut digits = key.unpack(ctx);
            (0..digits.len()).any(|p| {
                let orig = digits[p];
                let hit = [orig - 1, orig + 1].into_iter().filter(|v| (0..=max_digit).contains(v)).any(|v| {
                    digits[p] = v;
                    keys.binary_search(&K::pack(&digits, ctx)).is_ok()
                });
                digits[p] = orig;
                hit
            })
        });
        if has_unit_neighbour {
            return Ok(1);
        }
        let pairs = (keys.len() as u128) * (keys.len() as u128 - 1) / 2;
        if pairs > self.limits.max_tuples as u128 {
            return Err(AnalysisError::Capacity { what: "sum pairs", needed: pairs, cap: self.limits.max_tuples });
        }
        let sums: Vec<Vec<i64>> = keys.iter().map(|k| k.unpack(ctx)).collect();
        Ok((0..sums.len())
            .into_par_iter()
            .map(|i| {
                sums[i + 1..]
                    .iter()
                    .map(|s| s.iter().zip(&sums[i]).map(|(a, b)| (a - b).unsigned_abs()).sum::<u64>())
                    .min()
                    .unwrap_or(u64::MAX)
            })
            .min()
            .unwrap_or(u64::MAX))
    }
}

/// Largest `delta` such that any two distinct tuples have sums at distance
/// at least `delta`; 0 iff the code is not UD. A single-tuple code has no
/// distinct pairs and reports `u64::MAX`.
pub fn min_delta<S: Symbol>(code: &MultiUserCode<S>, limits: &Limits) -> Result<u64, AnalysisError> {
    tuple_cap(code, limits)?;
    dispatch(code, DeltaJob { limits })
}

/// Exact rate `log2(P) / n` for a positive integer `P`.
///
/// Kept as a rational number of bits whenever `P` is a power of two (all
/// constructed codes), otherwise as the pair `(P, n)`. Equality is exact in
/// both forms.
#[derive(Debug, Clone)]
pub struct Rate(Repr);

#[derive(Debug, Clone)]
enum Repr {
    Bits(Ratio<u64>),
    Log { arg: BigUint, length: u64 },
}

impl Rate {
    pub fn zero() -> Self {
        Rate(Repr::Bits(Ratio::zero()))
    }

    /// `log2(arg) / length`.
    pub fn from_log_arg(arg: BigUint, length: u64) -> Self {
        assert!(!arg.is_zero() && length > 0, "rate needs a positive argument and length");
        if arg.count_ones() == 1 {
            let bits = arg.trailing_zeros().expect("nonzero");
            Rate(Repr::Bits(Ratio::new(bits, length)))
        } else {
            Rate(Repr::Log { arg, length })
        }
    }

    /// Rate of a single codebook of `size` words and the given length.
    pub fn from_size(size: u64, length: u64) -> Self {
        Self::from_log_arg(BigUint::from(size), length)
    }

    pub fn from_bits(bits: Ratio<u64>) -> Self {
        Rate(Repr::Bits(bits))
    }

    /// The rate as a rational number of bits, when it is one.
    pub fn exact(&self) -> Option<Ratio<u64>> {
        match &self.0 {
            Repr::Bits(r) => Some(*r),
            Repr::Log { .. } => None,
        }
    }

    fn log_form(&self) -> (BigUint, u64) {
        match &self.0 {
            Repr::Bits(r) => (BigUint::one() << *r.numer(), *r.denom()),
            Repr::Log { arg, length } => (arg.clone(), *length),
        }
    }

    /// Multiplies the rate by `num / den`.
    pub fn scale(&self, num: u64, den: u64) -> Rate {
        assert!(den > 0);
        match &self.0 {
            Repr::Bits(r) => Rate(Repr::Bits(r * Ratio::new(num, den))),
            Repr::Log { arg, length } => {
                if num == 0 {
                    return Rate::zero();
                }
                let g = num.gcd(&den);
                let (num, den) = (num / g, den / g);
                let exp = u32::try_from(num).expect("scale numerator too large");
                Rate::from_log_arg(arg.pow(exp), length * den)
            }
        }
    }

    /// `(f R_a + g R_d) / (f + g)`.
    pub fn mix(f: u64, a: &Rate, g: u64, d: &Rate) -> Rate {
        (a.scale(f, 1) + d.scale(g, 1)).scale(1, f + g)
    }

    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Bits(r) => *r.numer() as f64 / *r.denom() as f64,
            Repr::Log { arg, length } => {
                let shift = arg.bits().saturating_sub(64);
                let top = (arg >> shift).to_u64().expect("fits after shift") as f64;
                (top.log2() + shift as f64) / *length as f64
            }
        }
    }

    pub fn to_float<F: Float>(&self) -> F {
        F::from(self.to_f64()).expect("finite rate")
    }
}

impl Add for Rate {
    type Output = Rate;

    fn add(self, rhs: Rate) -> Rate {
        match (&self.0, &rhs.0) {
            (Repr::Bits(a), Repr::Bits(b)) => Rate(Repr::Bits(a + b)),
            _ => {
                let ((a1, n1), (a2, n2)) = (self.log_form(), rhs.log_form());
                let l = n1.lcm(&n2);
                // log2(a1)/n1 + log2(a2)/n2 = log2(a1^(l/n1) a2^(l/n2)) / l
                let p1 = u32::try_from(l / n1).expect("exponent fits u32");
                let p2 = u32::try_from(l / n2).expect("exponent fits u32");
                Rate::from_log_arg(a1.pow(p1) * a2.pow(p2), l)
            }
        }
    }
}

impl PartialEq for Rate {
    fn eq(&self, other: &Self) -> bool {
        match (&self.0, &other.0) {
            (Repr::Bits(a), Repr::Bits(b)) => a == b,
            // log2 of a non-power of two is irrational
            (Repr::Bits(_), Repr::Log { .. }) | (Repr::Log { .. }, Repr::Bits(_)) => false,
            (Repr::Log { arg: a1, length: n1 }, Repr::Log { arg: a2, length: n2 }) => {
                let l = n1.lcm(n2);
                let p1 = u32::try_from(l / n1).expect("exponent fits u32");
                let p2 = u32::try_from(l / n2).expect("exponent fits u32");
                a1.pow(p1) == a2.pow(p2)
            }
        }
    }
}

impl Eq for Rate {}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(&format!("{:.3}", self.to_f64()))
    }
}

/// User count and total rate predicted by a closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Prediction {
    pub users: u64,
    pub rate: Ratio<u64>,
}

/// Per-user and total rates of a code, in bits per channel use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateSummary {
    pub length: u64,
    pub per_user: Vec<Rate>,
    pub total: Rate,
    pub prediction: Option<Prediction>,
}

impl RateSummary {
    pub fn users(&self) -> u64 {
        self.per_user.len() as u64
    }

    pub fn with_prediction(mut self, prediction: Prediction) -> Self {
        self.prediction = Some(prediction);
        self
    }

    /// True when a prediction is attached and both users and rate match it
    /// exactly.
    pub fn matches_prediction(&self) -> bool {
        self.prediction.is_some_and(|p| p.users == self.users() && self.total == Rate::from_bits(p.rate))
    }
}

/// `R_j = log2|C_j| / n` and `R(C) = sum R_j`.
pub fn total_rate<S: Symbol>(code: &MultiUserCode<S>) -> RateSummary {
    let n = code.length() as u64;
    let sizes = code.sizes();
    let per_user = sizes.iter().map(|&s| Rate::from_size(s, n)).collect();
    let product = sizes.iter().fold(BigUint::one(), |acc, &s| acc * s);
    RateSummary { length: n, per_user, total: Rate::from_log_arg(product, n), prediction: None }
}

fn require_supported(k: u64) -> Result<(), AnalysisError> {
    if k < 3 {
        return Err(ConstructionError::UnsupportedArity(k).into());
    }
    Ok(())
}

/// Length `2^m`: `2^(m+1)` users at `m/2 + 1 + floor(log2(k-1))` bits.
pub fn predicted_pow2(m: u64, k: u64) -> Result<Prediction, AnalysisError> {
    require_supported(k)?;
    let users = u32::try_from(m + 1)
        .ok()
        .and_then(|e| 2u64.checked_pow(e))
        .ok_or(ConstructionError::LengthCap { length: u64::MAX, cap: u64::MAX })?;
    let l = u64::from(ell(k));
    Ok(Prediction { users, rate: Ratio::new(m + 2 * (1 + l), 2) })
}

/// Length `n`: `2n` users at
/// `(1/n) sum_j n_j j 2^(j-1) + (1/n) sum_{j<r} n_j 2^j sum_{i>j} n_i + 1 + floor(log2(k-1))`.
pub fn predicted_arbitrary(n: u64, k: u64) -> Result<Prediction, AnalysisError> {
    require_supported(k)?;
    if n == 0 {
        return Err(ConstructionError::ZeroLength.into());
    }
    let r = 63 - n.leading_zeros() as u64;
    let digit = |j: u64| (n >> j) & 1;
    // twice the first sum, to stay integral
    let first2: u64 = (0..=r).map(|j| digit(j) * j * (1 << j)).sum();
    let second: u64 = (0..r).map(|j| digit(j) * (1 << j) * (j + 1..=r).map(digit).sum::<u64>()).sum();
    let l = u64::from(ell(k));
    let rate = Ratio::new(first2 + 2 * second, 2 * n) + Ratio::from_integer(1 + l);
    Ok(Prediction { users: 2 * n, rate })
}

/// One row of the rate table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateRow {
    pub users: u64,
    pub length: u64,
    pub predicted: Ratio<u64>,
    pub measured: Rate,
}

/// Builds each length, measures users and total rate, and checks them
/// against [`predicted_arbitrary`].
pub fn rate_table(lengths: &[u64], k: u64, limits: &Limits) -> Result<Vec<RateRow>, AnalysisError> {
    lengths
        .iter()
        .map(|&n| {
            let prediction = predicted_arbitrary(n, k)?;
            let (code, _) = build_arbitrary_with::<i32>(n, k, limits)?;
            let summary = total_rate(&code).with_prediction(prediction);
            if !summary.matches_prediction() {
                return Err(AnalysisError::FormulaMismatch {
                    n,
                    k,
                    detail: format!(
                        "measured {} users at {}, predicted {} users at {}",
                        summary.users(),
                        summary.total,
                        prediction.users,
                        prediction.rate
                    ),
                });
            }
            Ok(RateRow { users: summary.users(), length: n, predicted: prediction.rate, measured: summary.total })
        })
        .collect()
}
