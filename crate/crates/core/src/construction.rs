//! Recursive construction of UD multi-user codes.
//!
//! The building block is [`omega_combine`]: given an unsigned UD code `A` of
//! length `f` with `T^f` users and a signed UD difference set `D` of length
//! `g <= f` with `T^g` users over the same `k`, it produces a UD code of
//! length `f + g` with `T^f + T^g` users:
//!
//! * user `i <= T^f` sends `(a, a[..g])` for `a` in `A_i`;
//! * user `T^f + i` sends `(d+ ++ 0^(f-g), d-)` for `d` in `D_i`, where
//!   `d = d+ - d-` is the split into nonnegative parts with disjoint support.
//!
//! A difference set is obtained from an unsigned code over `{0..2c}` by
//! subtracting `c` from every symbol ([`shift_to_signed`]), which turns it
//! into a set over `{-c..c}`, i.e. a signed set for arity `c + 1`.
//!
//! [`build_pow2`] folds this over the arity ladder `k_j = 2^j (k-1) + 1`,
//! [`build_arbitrary`] over the binary digits of the target length. Both
//! return a [`ConstructionTrace`] alongside the code; the trace fully
//! determines the code ([`ConstructionTrace::replay`]) and drives the
//! structural decoder.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codebook::{Alphabet, CodebookError, ConstituentCode, MultiUserCode, Word};
use crate::{Limits, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error("k = {0} is not supported: the binary and unary cases need a different difference-set construction (k >= 3 required)")]
    UnsupportedArity(u64),
    #[error("code length must be at least 1")]
    ZeroLength,
    #[error("offset {offset} does not map arity {arity} onto a signed alphabet (need arity = 2 * offset + 1)")]
    OffsetMismatch { arity: u64, offset: u64 },
    #[error("first code is shorter than the difference set ({f} < {g})")]
    LengthOrder { f: usize, g: usize },
    #[error("arity mismatch: code is {code}-ary, difference set is over +-{set}")]
    ArityMismatch { code: u64, set: u64 },
    #[error("expected an unsigned code")]
    ExpectedUnsigned,
    #[error("expected a signed difference set")]
    ExpectedSigned,
    #[error("arity overflow: ladder arity for k = {k} at step {step} does not fit the symbol type")]
    ArityOverflow { k: u64, step: u64 },
    #[error("code length {length} exceeds the configured maximum {cap}")]
    LengthCap { length: u64, cap: u64 },
    #[error("construction needs {needed} stored symbols, cap is {cap}")]
    StorageCap { needed: u64, cap: u64 },
    #[error("inconsistent trace: {0}")]
    InvalidTrace(String),
    #[error(transparent)]
    Codebook(#[from] CodebookError),
}

/// A signed word with its split into nonnegative parts, `d = plus - minus`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DifferencePair<S> {
    d: Word<S>,
    plus: Word<S>,
    minus: Word<S>,
}

impl<S: Symbol> DifferencePair<S> {
    pub fn d(&self) -> &Word<S> {
        &self.d
    }

    pub fn plus(&self) -> &Word<S> {
        &self.plus
    }

    pub fn minus(&self) -> &Word<S> {
        &self.minus
    }

    /// Recomputes `plus - minus` componentwise.
    pub fn reconstruct(&self) -> Vec<i64> {
        self.plus.symbols().iter().zip(self.minus.symbols()).map(|(p, m)| p.as_i64() - m.as_i64()).collect()
    }
}

/// Splits a signed word into `(d+, d-)`: positive entries go to `d+`,
/// magnitudes of negative entries to `d-`, zeros to both.
pub fn split_signed<S: Symbol>(d: &Word<S>) -> DifferencePair<S> {
    let alphabet = d.alphabet().to_unsigned();
    let (plus, minus): (Vec<S>, Vec<S>) =
        d.symbols().iter().map(|&s| if s >= S::zero() { (s, S::zero()) } else { (S::zero(), s.abs()) }).unzip();
    DifferencePair {
        d: d.clone(),
        plus: Word::new(plus, alphabet).expect("split parts stay within the alphabet"),
        minus: Word::new(minus, alphabet).expect("split parts stay within the alphabet"),
    }
}

/// Translates an unsigned code over `{0..2c}` down by `c`, giving a signed
/// set over `{-c..c}` (signed alphabet with `k = c + 1`).
pub fn shift_to_signed<S: Symbol>(code: &MultiUserCode<S>, offset: u64) -> Result<MultiUserCode<S>, ConstructionError> {
    let arity = code.alphabet().k();
    if code.alphabet().is_signed() {
        return Err(ConstructionError::ExpectedUnsigned);
    }
    if offset == 0 || offset.checked_mul(2).and_then(|x| x.checked_add(1)) != Some(arity) {
        return Err(ConstructionError::OffsetMismatch { arity, offset });
    }
    let alphabet = Alphabet::signed(offset + 1)?;
    let shift = S::from_i64(offset as i64).ok_or(ConstructionError::ArityOverflow { k: arity, step: 0 })?;
    let users = code
        .constituents()
        .iter()
        .map(|c| {
            c.words()
                .iter()
                .map(|w| Word::new(w.symbols().iter().map(|&s| s - shift).collect(), alphabet))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MultiUserCode::new(users)?)
}

/// Ladder arity `2^step (k-1) + 1`, `None` on overflow.
pub fn ladder_arity(k: u64, step: u64) -> Option<u64> {
    let step = u32::try_from(step).ok()?;
    2u64.checked_pow(step)?.checked_mul(k.checked_sub(1)?)?.checked_add(1)
}

/// `floor(log2(arity - 1))` for `arity >= 2`.
pub fn ell(arity: u64) -> u32 {
    debug_assert!(arity >= 2);
    63 - (arity - 1).leading_zeros()
}

fn require_supported(k: u64) -> Result<(), ConstructionError> {
    if k < 3 {
        Err(ConstructionError::UnsupportedArity(k))
    } else {
        Ok(())
    }
}

/// Length-1 two-user code over arity `k_j = 2^j (k-1) + 1`:
/// `A_1 = {0..2^l - 1}` with `l = floor(log2(k_j - 1))`, `A_2 = {0, k_j - 1}`.
pub fn initial_code<S: Symbol>(step: u64, k: u64) -> Result<MultiUserCode<S>, ConstructionError> {
    require_supported(k)?;
    let arity = ladder_arity(k, step).ok_or(ConstructionError::ArityOverflow { k, step })?;
    initial_code_for_arity(arity).map_err(|e| match e {
        ConstructionError::ArityOverflow { .. } => ConstructionError::ArityOverflow { k, step },
        other => other,
    })
}

/// Same as [`initial_code`], addressed by the arity itself.
pub fn initial_code_for_arity<S: Symbol>(arity: u64) -> Result<MultiUserCode<S>, ConstructionError> {
    require_supported(arity)?;
    if S::from_i64(arity as i64 - 1).is_none() || arity > i64::MAX as u64 {
        return Err(ConstructionError::ArityOverflow { k: arity, step: 0 });
    }
    let alphabet = Alphabet::unsigned(arity)?;
    let top = 1i64 << ell(arity);
    let first = (0..top).map(|v| Word::from_i64s(&[v], alphabet)).collect::<Result<Vec<_>, _>>()?;
    let second = vec![Word::from_i64s(&[0], alphabet)?, Word::from_i64s(&[arity as i64 - 1], alphabet)?];
    Ok(MultiUserCode::new(vec![first, second])?)
}

/// Joins an unsigned code and a signed difference set; `None` stands for the
/// empty set and returns `a` unchanged.
pub fn omega_combine<S: Symbol>(
    a: &MultiUserCode<S>,
    d: Option<&MultiUserCode<S>>,
) -> Result<MultiUserCode<S>, ConstructionError> {
    omega_combine_with(a, d, &Limits::default())
}

/// [`omega_combine`] with an explicit storage cap.
pub fn omega_combine_with<S: Symbol>(
    a: &MultiUserCode<S>,
    d: Option<&MultiUserCode<S>>,
    limits: &Limits,
) -> Result<MultiUserCode<S>, ConstructionError> {
    if a.alphabet().is_signed() {
        return Err(ConstructionError::ExpectedUnsigned);
    }
    let Some(d) = d else {
        return Ok(a.clone());
    };
    if !d.alphabet().is_signed() {
        return Err(ConstructionError::ExpectedSigned);
    }
    if d.alphabet().k() != a.alphabet().k() {
        return Err(ConstructionError::ArityMismatch { code: a.alphabet().k(), set: d.alphabet().k() });
    }
    let (f, g) = (a.length(), d.length());
    if f < g {
        return Err(ConstructionError::LengthOrder { f, g });
    }
    let words: u64 = a.sizes().iter().chain(d.sizes().iter()).sum();
    let needed = words.saturating_mul((f + g) as u64);
    if needed > limits.max_symbols {
        return Err(ConstructionError::StorageCap { needed, cap: limits.max_symbols });
    }

    let alphabet = a.alphabet();
    let mut constituents = Vec::with_capacity(a.users() + d.users());
    for c in a.constituents() {
        let words = c
            .words()
            .iter()
            .map(|w| {
                let mut s = Vec::with_capacity(f + g);
                s.extend_from_slice(w.symbols());
                s.extend_from_slice(&w.symbols()[..g]);
                Word::new(s, alphabet)
            })
            .collect::<Result<Vec<_>, _>>()?;
        constituents.push(ConstituentCode::new(c.index(), words)?);
    }
    for c in d.constituents() {
        let words = c
            .words()
            .iter()
            .map(|w| {
                let pair = split_signed(w);
                let mut s = Vec::with_capacity(f + g);
                s.extend_from_slice(pair.plus().symbols());
                s.resize(f, S::zero());
                s.extend_from_slice(pair.minus().symbols());
                Word::new(s, alphabet)
            })
            .collect::<Result<Vec<_>, _>>()?;
        constituents.push(ConstituentCode::new(a.users() + c.index(), words)?);
    }
    Ok(MultiUserCode::from_constituents(constituents)?)
}

/// Recipe tree of a construction.
///
/// Leaves are initial length-1 codes; each internal node records one
/// application of [`omega_combine`] with the right child shifted down by
/// `offset` before combining.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum ConstructionTrace {
    Initial {
        arity: u64,
    },
    Omega {
        arity: u64,
        length: u64,
        users: u64,
        offset: u64,
        left: Arc<ConstructionTrace>,
        right: Arc<ConstructionTrace>,
    },
}

impl ConstructionTrace {
    pub fn arity(&self) -> u64 {
        match self {
            ConstructionTrace::Initial { arity } | ConstructionTrace::Omega { arity, .. } => *arity,
        }
    }

    pub fn length(&self) -> u64 {
        match self {
            ConstructionTrace::Initial { .. } => 1,
            ConstructionTrace::Omega { length, .. } => *length,
        }
    }

    pub fn users(&self) -> u64 {
        match self {
            ConstructionTrace::Initial { .. } => 2,
            ConstructionTrace::Omega { users, .. } => *users,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            ConstructionTrace::Initial { .. } => 0,
            ConstructionTrace::Omega { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    fn combine(left: Arc<ConstructionTrace>, right: Arc<ConstructionTrace>, offset: u64) -> Self {
        ConstructionTrace::Omega {
            arity: left.arity(),
            length: left.length() + right.length(),
            users: left.users() + right.users(),
            offset,
            left,
            right,
        }
    }

    /// Checks the bookkeeping at every node: lengths and user counts add up,
    /// `f >= g`, and the offset maps the right child's `{0..2c}` onto
    /// `{-c..c}` with `c + 1` equal to the node arity.
    pub fn validate(&self) -> Result<(), ConstructionError> {
        match self {
            ConstructionTrace::Initial { arity } => require_supported(*arity),
            ConstructionTrace::Omega { arity, length, users, offset, left, right } => {
                let bad = |msg: String| Err(ConstructionError::InvalidTrace(msg));
                if left.arity() != *arity {
                    return bad(format!("node arity {arity} differs from left child arity {}", left.arity()));
                }
                if left.length() + right.length() != *length {
                    return bad(format!("length {length} != {} + {}", left.length(), right.length()));
                }
                if left.users() + right.users() != *users {
                    return bad(format!("users {users} != {} + {}", left.users(), right.users()));
                }
                if left.length() < right.length() {
                    return bad(format!("f = {} < g = {}", left.length(), right.length()));
                }
                if right.arity() != 2 * offset + 1 || *offset + 1 != *arity {
                    return bad(format!(
                        "offset {offset} inconsistent with node arity {arity} and right arity {}",
                        right.arity()
                    ));
                }
                left.validate()?;
                right.validate()
            }
        }
    }

    /// Rebuilds the code this trace describes.
    pub fn replay<S: Symbol>(&self, limits: &Limits) -> Result<MultiUserCode<S>, ConstructionError> {
        match self {
            ConstructionTrace::Initial { arity } => initial_code_for_arity(*arity),
            ConstructionTrace::Omega { left, right, offset, .. } => {
                let (a, d) = rayon::join(|| left.replay::<S>(limits), || right.replay::<S>(limits));
                let d = shift_to_signed(&d?, *offset)?;
                omega_combine_with(&a?, Some(&d), limits)
            }
        }
    }
}

type Built<S> = (MultiUserCode<S>, Arc<ConstructionTrace>);

/// Code of length `2^m` over `k` with `2^(m+1)` users, default limits.
pub fn build_pow2<S: Symbol>(m: u64, k: u64) -> Result<Built<S>, ConstructionError> {
    build_pow2_with(m, k, &Limits::default())
}

/// Code of length `2^m` over `k`.
///
/// Starts from the initial codes over `k_0..k_m` and applies, for
/// `i = 1..m` and `j = 0..m-i`,
/// `A(2^i, k_j) = Omega(A(2^(i-1), k_j), A(2^(i-1), k_(j+1)) - (k_j - 1))`.
/// Cells of one level are independent and built in parallel.
pub fn build_pow2_with<S: Symbol>(m: u64, k: u64, limits: &Limits) -> Result<Built<S>, ConstructionError> {
    require_supported(k)?;
    let length = u32::try_from(m).ok().and_then(|m| 2u64.checked_pow(m)).unwrap_or(u64::MAX);
    if length > limits.max_length {
        return Err(ConstructionError::LengthCap { length, cap: limits.max_length });
    }
    let arities = (0..=m)
        .map(|j| ladder_arity(k, j).ok_or(ConstructionError::ArityOverflow { k, step: j }))
        .collect::<Result<Vec<_>, _>>()?;

    let mut level: Vec<Built<S>> = (0..=m)
        .into_par_iter()
        .map(|j| {
            let code = initial_code(j, k)?;
            Ok((code, Arc::new(ConstructionTrace::Initial { arity: arities[j as usize] })))
        })
        .collect::<Result<_, ConstructionError>>()?;

    for _ in 1..=m {
        level = (0..level.len() - 1)
            .into_par_iter()
            .map(|j| {
                let (left, left_trace) = &level[j];
                let (right, right_trace) = &level[j + 1];
                let offset = left.alphabet().k() - 1;
                let d = shift_to_signed(right, offset)?;
                let code = omega_combine_with(left, Some(&d), limits)?;
                let trace = ConstructionTrace::combine(left_trace.clone(), right_trace.clone(), offset);
                Ok((code, Arc::new(trace)))
            })
            .collect::<Result<_, ConstructionError>>()?;
    }
    Ok(level.pop().expect("level 0 cell remains"))
}

/// Binary expansion of a code length and the arity ladder it induces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryProfile {
    n: u64,
    k: u64,
    digits: Vec<u8>,
    f: Vec<u64>,
    g: Vec<u64>,
    ladder: Vec<u64>,
}

/// Digits `n_j`, parts `f_j = n_j 2^j`, prefixes `g_j = sum_{i<=j} n_i 2^i`
/// and ladder `k~_j = 2^(n_(j+1) + .. + n_r) (k-1) + 1` for `j = 0..r`.
pub fn binary_profile(n: u64, k: u64) -> Result<BinaryProfile, ConstructionError> {
    require_supported(k)?;
    if n == 0 {
        return Err(ConstructionError::ZeroLength);
    }
    let r = 63 - n.leading_zeros() as usize;
    let digits: Vec<u8> = (0..=r).map(|j| ((n >> j) & 1) as u8).collect();
    let f: Vec<u64> = (0..=r).map(|j| u64::from(digits[j]) << j).collect();
    let g: Vec<u64> = f
        .iter()
        .scan(0u64, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect();
    let ladder = (0..=r)
        .map(|j| {
            let above: u64 = digits[j + 1..].iter().map(|&d| u64::from(d)).sum();
            ladder_arity(k, above).ok_or(ConstructionError::ArityOverflow { k, step: above })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BinaryProfile { n, k, digits, f, g, ladder })
}

impl BinaryProfile {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    /// `floor(log2 n)`.
    pub fn r(&self) -> usize {
        self.digits.len() - 1
    }

    /// `n_j` for `j = 0..=r`.
    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn f(&self) -> &[u64] {
        &self.f
    }

    pub fn g(&self) -> &[u64] {
        &self.g
    }

    /// `k~_j` for `j = 0..=r`.
    pub fn ladder(&self) -> &[u64] {
        &self.ladder
    }

    /// `floor(log2(k~_j - 1))`.
    pub fn ell(&self, j: usize) -> u32 {
        ell(self.ladder[j])
    }
}

/// Code of any length `n >= 1` over `k` with `2n` users, default limits.
pub fn build_arbitrary<S: Symbol>(n: u64, k: u64) -> Result<Built<S>, ConstructionError> {
    build_arbitrary_with(n, k, &Limits::default())
}

/// Code of length `n` over `k`.
///
/// Walks the binary digits of `n` from the least significant one. The
/// running code has length `g_j` over `k~_j`; at each set digit `j` it is
/// shifted down by `(k~_(j-1) - 1) / 2` and combined as the difference set
/// with `A(2^j, k~_j)`. Zero digits carry it forward unchanged.
pub fn build_arbitrary_with<S: Symbol>(n: u64, k: u64, limits: &Limits) -> Result<Built<S>, ConstructionError> {
    let profile = binary_profile(n, k)?;
    if n > limits.max_length {
        return Err(ConstructionError::LengthCap { length: n, cap: limits.max_length });
    }
    let mut acc: Option<Built<S>> = None;
    for j in 0..=profile.r() {
        if profile.digits[j] == 0 {
            continue;
        }
        let block = build_pow2_with::<S>(j as u64, profile.ladder[j], limits)?;
        acc = Some(match acc {
            None => block,
            Some((prev, prev_trace)) => {
                let offset = (profile.ladder[j - 1] - 1) / 2;
                let d = shift_to_signed(&prev, offset)?;
                let code = omega_combine_with(&block.0, Some(&d), limits)?;
                let trace = ConstructionTrace::combine(block.1, prev_trace, offset);
                (code, Arc::new(trace))
            }
        });
    }
    Ok(acc.expect("n >= 1 has a set digit"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Code;

    fn ternary() -> Alphabet {
        Alphabet::unsigned(3).unwrap()
    }

    fn signed(k: u64, values: &[i64]) -> Word<i32> {
        Word::from_i64s(values, Alphabet::signed(k).unwrap()).unwrap()
    }

    fn lists(code: &Code) -> Vec<Vec<Vec<i64>>> {
        code.constituents().iter().map(|c| c.words().iter().map(|w| w.to_i64s()).collect()).collect()
    }

    #[test]
    fn split_signed_examples() {
        let p = split_signed(&signed(3, &[0, 0]));
        assert_eq!((p.plus().to_i64s(), p.minus().to_i64s()), (vec![0, 0], vec![0, 0]));
        let p = split_signed(&signed(3, &[-2, 1]));
        assert_eq!((p.plus().to_i64s(), p.minus().to_i64s()), (vec![0, 1], vec![2, 0]));
        let p = split_signed(&signed(3, &[-2, -2]));
        assert_eq!((p.plus().to_i64s(), p.minus().to_i64s()), (vec![0, 0], vec![2, 2]));
        assert!(!p.plus().alphabet().is_signed());
    }

    #[test]
    fn split_signed_exhaustive_round_trip_and_injective() {
        for k in 2..=4u64 {
            let alphabet = Alphabet::signed(k).unwrap();
            let span = 2 * k as i64 - 1;
            let mut seen = std::collections::HashSet::new();
            for code in 0..span.pow(3) {
                let values: Vec<i64> = (0..3).map(|p| (code / span.pow(p)) % span - (k as i64 - 1)).collect();
                let w = Word::<i32>::from_i64s(&values, alphabet).unwrap();
                let pair = split_signed(&w);
                assert_eq!(pair.reconstruct(), values);
                assert!(pair.plus().symbols().iter().zip(pair.minus().symbols()).all(|(p, m)| *p == 0 || *m == 0));
                assert!(seen.insert((pair.plus().clone(), pair.minus().clone())));
            }
        }
    }

    #[test]
    fn shift_examples() {
        let five = Alphabet::unsigned(5).unwrap();
        let code =
            Code::new(vec![vec![Word::from_i64s(&[0], five).unwrap(), Word::from_i64s(&[4], five).unwrap()]]).unwrap();
        let shifted = shift_to_signed(&code, 2).unwrap();
        assert_eq!(lists(&shifted), vec![vec![vec![-2], vec![2]]]);
        assert_eq!(shifted.alphabet(), Alphabet::signed(3).unwrap());

        let a15: Code = initial_code(1, 3).unwrap();
        let shifted = shift_to_signed(&a15, 2).unwrap();
        assert_eq!(lists(&shifted)[0], vec![vec![-2], vec![-1], vec![0], vec![1]]);

        let zero = Code::new(vec![vec![Word::zeros(3, five).unwrap()]]).unwrap();
        assert_eq!(lists(&shift_to_signed(&zero, 2).unwrap()), vec![vec![vec![-2, -2, -2]]]);

        assert_eq!(shift_to_signed(&a15, 1), Err(ConstructionError::OffsetMismatch { arity: 5, offset: 1 }));
    }

    #[test]
    fn initial_code_examples() {
        let c: Code = initial_code(0, 3).unwrap();
        assert_eq!(lists(&c), vec![vec![vec![0], vec![1]], vec![vec![0], vec![2]]]);
        let c: Code = initial_code(1, 3).unwrap();
        assert_eq!(c.sizes(), vec![4, 2]);
        assert_eq!(lists(&c)[1], vec![vec![0], vec![4]]);
        let c: Code = initial_code(2, 3).unwrap();
        assert_eq!(lists(&c)[0], (0..8).map(|v| vec![v]).collect::<Vec<_>>());
        assert_eq!(lists(&c)[1], vec![vec![0], vec![8]]);
        assert_eq!(initial_code::<i32>(0, 2), Err(ConstructionError::UnsupportedArity(2)));
    }

    #[test]
    fn initial_code_leaf_ranges_are_disjoint() {
        // k_j - 1 >= 2^l > 2^l - 1, so the top codeword of user 1 never
        // reaches the nonzero codeword of user 2.
        for arity in 3..=1025u64 {
            let l = ell(arity);
            assert!(1u64 << l < arity);
            assert!(arity - 1 < 1u64 << (l + 1));
        }
    }

    #[test]
    fn omega_example_a23() {
        let a: Code = initial_code(0, 3).unwrap();
        let d = shift_to_signed(&initial_code(1, 3).unwrap(), 2).unwrap();
        let c = omega_combine(&a, Some(&d)).unwrap();
        let expected = Code::from_digit_lists(
            &[&["00", "11"], &["00", "22"], &["02", "01", "00", "10"], &["02", "20"]],
            ternary(),
        )
        .unwrap();
        assert_eq!(c, expected);
    }

    #[test]
    fn omega_with_empty_set_is_identity() {
        let a: Code = build_pow2(1, 3).unwrap().0;
        assert_eq!(omega_combine(&a, None).unwrap(), a);
    }

    #[test]
    fn omega_precondition_errors() {
        let short: Code = initial_code(0, 3).unwrap();
        let long = shift_to_signed(&build_pow2::<i32>(1, 5).unwrap().0, 2).unwrap();
        assert_eq!(omega_combine(&short, Some(&long)), Err(ConstructionError::LengthOrder { f: 1, g: 2 }));
        let wrong_k = shift_to_signed(&initial_code::<i32>(0, 5).unwrap(), 2).unwrap();
        let a4: Code = initial_code(0, 4).unwrap();
        assert_eq!(omega_combine(&a4, Some(&wrong_k)), Err(ConstructionError::ArityMismatch { code: 4, set: 3 }));
        assert_eq!(omega_combine(&short, Some(&short)), Err(ConstructionError::ExpectedSigned));
    }

    #[test]
    fn storage_cap_is_enforced() {
        let limits = Limits { max_symbols: 50, ..Limits::default() };
        assert!(matches!(build_pow2_with::<i32>(3, 3, &limits), Err(ConstructionError::StorageCap { cap: 50, .. })));
        let limits = Limits { max_length: 8, ..Limits::default() };
        assert_eq!(
            build_pow2_with::<i32>(4, 3, &limits).unwrap_err(),
            ConstructionError::LengthCap { length: 16, cap: 8 }
        );
        assert!(matches!(build_arbitrary_with::<i32>(9, 3, &limits), Err(ConstructionError::LengthCap { .. })));
    }

    #[test]
    fn narrow_symbol_types_report_overflow() {
        // k_4 = 16 * 8 + 1 = 129 does not fit i8
        assert!(matches!(build_pow2::<i8>(4, 9), Err(ConstructionError::ArityOverflow { .. })));
        assert!(build_pow2::<i16>(4, 9).is_ok());
    }

    #[test]
    fn build_pow2_small_cases() {
        let (c, t): (Code, _) = build_pow2(0, 3).unwrap();
        assert_eq!(c, initial_code(0, 3).unwrap());
        assert_eq!(*t, ConstructionTrace::Initial { arity: 3 });
        let (c, t): (Code, _) = build_pow2(1, 3).unwrap();
        assert_eq!(c.users(), 4);
        assert_eq!(t.length(), 2);
        assert_eq!(t.users(), 4);
    }

    #[test]
    fn k_below_three_is_rejected() {
        assert_eq!(build_pow2::<i32>(2, 2).unwrap_err(), ConstructionError::UnsupportedArity(2));
        assert_eq!(build_arbitrary::<i32>(7, 2).unwrap_err(), ConstructionError::UnsupportedArity(2));
        assert_eq!(binary_profile(7, 1).unwrap_err(), ConstructionError::UnsupportedArity(1));
        assert_eq!(build_arbitrary::<i32>(0, 3).unwrap_err(), ConstructionError::ZeroLength);
    }

    #[test]
    fn binary_profile_examples() {
        let p = binary_profile(7, 3).unwrap();
        assert_eq!(p.digits(), &[1, 1, 1]);
        assert_eq!(p.g(), &[1, 3, 7]);
        assert_eq!(p.ladder(), &[9, 5, 3]);

        let p = binary_profile(4, 6).unwrap();
        assert_eq!(p.digits(), &[0, 0, 1]);
        assert_eq!(p.g(), &[0, 0, 4]);
        assert_eq!(p.ladder()[2], 6);

        // worked by hand: 5 = 101b; both digits above j = 0 and j = 1 sum to 1
        let p = binary_profile(5, 3).unwrap();
        assert_eq!(p.digits(), &[1, 0, 1]);
        assert_eq!(p.f(), &[1, 0, 4]);
        assert_eq!(p.g(), &[1, 1, 5]);
        assert_eq!(p.ladder(), &[5, 5, 3]);
        assert_eq!(p.ell(0), 2);
    }

    #[test]
    fn binary_profile_invariants() {
        for n in 1..=200u64 {
            for k in [3u64, 4, 5, 9] {
                let p = binary_profile(n, k).unwrap();
                let r = p.r();
                assert_eq!(p.digits()[r], 1);
                assert_eq!(*p.g().last().unwrap(), n);
                assert_eq!(p.ladder()[r], k);
                for j in 1..=r {
                    assert_eq!(p.g()[j], p.f()[j] + p.g()[j - 1]);
                    if p.digits()[j] == 1 {
                        assert_eq!(p.ladder()[j - 1] - 1, 2 * (p.ladder()[j] - 1));
                    } else {
                        assert_eq!(p.ladder()[j - 1], p.ladder()[j]);
                    }
                }
            }
        }
    }

    #[test]
    fn trace_validates_and_replays() {
        for n in 1..=12u64 {
            let (code, trace): (Code, _) = build_arbitrary(n, 3).unwrap();
            trace.validate().unwrap();
            assert_eq!(trace.length(), n);
            assert_eq!(trace.users(), 2 * n);
            assert_eq!(trace.replay::<i32>(&Limits::default()).unwrap(), code);
        }
    }

    #[test]
    fn trace_validation_catches_bad_offset() {
        let leaf = Arc::new(ConstructionTrace::Initial { arity: 3 });
        let right = Arc::new(ConstructionTrace::Initial { arity: 5 });
        let bad = ConstructionTrace::Omega { arity: 3, length: 2, users: 4, offset: 1, left: leaf, right };
        assert!(matches!(bad.validate(), Err(ConstructionError::InvalidTrace(_))));
    }
}
