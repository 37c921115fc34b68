//! JSON code-table files.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "k": 3,
//!   "n": 2,
//!   "T": 4,
//!   "provenance": {"mode":"pow2","m":1,"k":3},
//!   "constituents": [
//!     [[0,0],[1,1]],
//!     ...
//!   ],
//!   "trace": {...}
//! }
//! ```
//!
//! `constituents[j]` lists the codewords of user `j + 1` as integer arrays.
//! `trace` and `provenance` are optional. A trace, when present, must
//! rebuild exactly the listed constituents.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codebook::{Alphabet, CodebookError, MultiUserCode, Word};
use crate::construction::ConstructionTrace;
use crate::{Limits, Symbol};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema_version {0} (expected {SCHEMA_VERSION})")]
    Version(u32),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Codebook(#[from] CodebookError),
}

/// How a stored code was produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Provenance {
    Pow2 { m: u64, k: u64 },
    Arbitrary { n: u64, k: u64, digits: Vec<u8> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeTableFile {
    pub schema_version: u32,
    pub k: u64,
    pub n: usize,
    #[serde(rename = "T")]
    pub users: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    pub constituents: Vec<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Arc<ConstructionTrace>>,
}

impl CodeTableFile {
    pub fn from_code<S: Symbol>(
        code: &MultiUserCode<S>,
        trace: Option<Arc<ConstructionTrace>>,
        provenance: Option<Provenance>,
    ) -> Self {
        CodeTableFile {
            schema_version: SCHEMA_VERSION,
            k: code.alphabet().k(),
            n: code.length(),
            users: code.users(),
            provenance,
            constituents: code.constituents().iter().map(|c| c.words().iter().map(|w| w.to_i64s()).collect()).collect(),
            trace,
        }
    }

    /// Parses and checks the header fields; the code itself is checked by
    /// [`CodeTableFile::code`].
    pub fn parse(text: &str) -> Result<Self, FileError> {
        let file: CodeTableFile = serde_json::from_str(text)?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(FileError::Version(file.schema_version));
        }
        if file.users != file.constituents.len() {
            return Err(FileError::Invalid(format!(
                "T = {} but {} constituents are listed",
                file.users,
                file.constituents.len()
            )));
        }
        Ok(file)
    }

    /// Builds the code and checks it against `n`, `k` and the trace.
    pub fn code<S: Symbol>(&self, limits: &Limits) -> Result<MultiUserCode<S>, FileError> {
        let alphabet = Alphabet::unsigned(self.k)?;
        let users = self
            .constituents
            .iter()
            .map(|c| c.iter().map(|w| Word::from_i64s(w, alphabet)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        let code = MultiUserCode::new(users)?;
        if code.length() != self.n {
            return Err(FileError::Invalid(format!("n = {} but codewords have length {}", self.n, code.length())));
        }
        if let Some(trace) = &self.trace {
            trace.validate().map_err(|e| FileError::Invalid(format!("trace: {e}")))?;
            let rebuilt: MultiUserCode<S> =
                trace.replay(limits).map_err(|e| FileError::Invalid(format!("trace: {e}")))?;
            if rebuilt != code {
                return Err(FileError::Invalid("trace does not rebuild the listed constituents".into()));
            }
        }
        Ok(code)
    }

    /// Pretty JSON with one constituent per line.
    pub fn to_json(&self) -> String {
        let mut out = String::from("{\n");
        let _ = writeln!(out, "  \"schema_version\": {},", self.schema_version);
        let _ = writeln!(out, "  \"k\": {},", self.k);
        let _ = writeln!(out, "  \"n\": {},", self.n);
        let _ = writeln!(out, "  \"T\": {},", self.users);
        if let Some(p) = &self.provenance {
            let _ = writeln!(out, "  \"provenance\": {},", json(p));
        }
        out.push_str("  \"constituents\": [\n");
        for (i, c) in self.constituents.iter().enumerate() {
            let sep = if i + 1 < self.constituents.len() { "," } else { "" };
            let _ = writeln!(out, "    {}{sep}", json(c));
        }
        out.push_str("  ]");
        if let Some(t) = &self.trace {
            let _ = write!(out, ",\n  \"trace\": {}", json(t.as_ref()));
        }
        out.push_str("\n}\n");
        out
    }
}

fn json<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string(value).expect("plain data serializes")
}
