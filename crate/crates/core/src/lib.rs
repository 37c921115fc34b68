//! Uniquely decodable k-ary multi-user codes for the multiple-access adder
//! channel (MAAC).
//!
//! T users each send one codeword of length n over the alphabet {0..k-1};
//! the receiver sees the componentwise integer sum. A T-user code is
//! uniquely decodable (UD) when every choice of one codeword per user yields
//! a distinct sum.
//!
//! The crate builds such codes recursively:
//!
//! * [`construction::omega_combine`] joins an unsigned UD code of length `f`
//!   with a signed UD difference set of length `g <= f` into a UD code of
//!   length `f + g` carrying the users of both.
//! * [`construction::build_pow2`] builds codes of length `2^m` with `2^(m+1)`
//!   users from length-1 codes over the arity ladder `2^j (k-1) + 1`.
//! * [`construction::build_arbitrary`] builds codes of any length `n` with
//!   `2n` users by following the binary digits of `n`.
//!
//! [`analysis`] verifies decodability by exhaustive enumeration and checks
//! measured rates against the closed forms; [`decoder`] recovers the
//! transmitted tuple from a channel output, either from a lookup table or by
//! walking the [`construction::ConstructionTrace`].
//!
//! Every type is generic over the codeword symbol type (any signed primitive
//! integer, see [`Symbol`]). The aliases below fix it to `i32`, which is
//! what the CLI uses.

pub mod analysis;
pub mod channel;
pub mod cli;
pub mod codebook;
pub mod construction;
pub mod decoder;
mod enumerate;

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_traits::{PrimInt, Signed};

/// Integer type used to store codeword symbols.
///
/// Signed because difference sets live over {0, ±1, .., ±(k-1)}.
pub trait Symbol: PrimInt + Signed + Hash + Debug + Display + Send + Sync + 'static {
    /// Converts from `i64`, `None` if the value does not fit.
    fn from_i64(value: i64) -> Option<Self> {
        <Self as num_traits::NumCast>::from(value)
    }

    /// Widens to `i64`. Every symbol a valid alphabet admits fits.
    fn as_i64(self) -> i64 {
        self.to_i64().expect("symbol does not fit in i64")
    }
}

impl<T> Symbol for T where T: PrimInt + Signed + Hash + Debug + Display + Send + Sync + 'static {}

/// Resource guards shared by construction, verification and decoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Maximum number of stored symbols (length times codeword count) of any
    /// code produced during construction.
    pub max_symbols: u64,
    /// Maximum number of codeword tuples enumerated by verification and
    /// lookup-table construction.
    pub max_tuples: u64,
    /// Maximum code length accepted by the constructions.
    pub max_length: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_symbols: 10_000_000, max_tuples: 1 << 24, max_length: 1 << 16 }
    }
}

pub use analysis::{Prediction, Rate, RateSummary, UdReport};
pub use channel::TransitionMatrix;
pub use codebook::{Alphabet, ConstituentCode, MultiUserCode, SumWord, Word};
pub use construction::{BinaryProfile, ConstructionTrace, DifferencePair};
pub use decoder::{DecodedTuple, LookupTable};

/// Codeword with `i32` symbols. Unsigned alphabets make it a k-ary vector,
/// signed ones a difference-set element.
pub type KVector = Word<i32>;
/// Signed-alphabet word with `i32` symbols.
pub type SignedVector = Word<i32>;
/// Constituent code with `i32` symbols.
pub type Constituent = ConstituentCode<i32>;
/// Multi-user code with `i32` symbols.
pub type Code = MultiUserCode<i32>;
/// Decoded tuple with `i32` symbols.
pub type Tuple = DecodedTuple<i32>;
/// Compact multi-user code with `i16` symbols, for large constructions.
pub type Code16 = MultiUserCode<i16>;
