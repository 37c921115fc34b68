//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a check failed, 2 unsupported alphabet size
//! (`k < 3`), 3 a resource cap was exceeded, 4 malformed input (file or
//! arguments), 5 the code given to `simulate` is not uniquely decodable.

pub mod codefile;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{
    check_ud, check_ud_differences, min_delta, predicted_arbitrary, predicted_pow2, rate_table, total_rate,
    AnalysisError, Rate,
};
use crate::channel::{apply_dmc, transmit, ChannelError, TransitionMatrix};
use crate::codebook::SumWord;
use crate::construction::{binary_profile, build_arbitrary_with, build_pow2_with, ConstructionError};
use crate::decoder::{build_lookup, decode_lookup, decode_recursive, DecodeError, LookupTable};
use crate::{Code, Limits, Tuple};
use codefile::{CodeTableFile, FileError, Provenance};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_UNSUPPORTED: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;
pub const EXIT_MALFORMED: i32 = 4;
pub const EXIT_NOT_UD: i32 = 5;

#[derive(Parser, Debug)]
#[command(name = "udmaac", version, about = "Uniquely decodable codes for the k-ary multiple-access adder channel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a code and write it as a JSON code table.
    Construct(ConstructArgs),
    /// Check a stored code.
    Verify(VerifyArgs),
    /// Print users and total rate for a list of lengths.
    RateTable(RateTableArgs),
    /// Send message tuples through the channel and decode them.
    Simulate(SimulateArgs),
    /// Decode one channel output.
    Decode(DecodeArgs),
}

#[derive(Args, Debug, Clone)]
struct CapArgs {
    /// Maximum stored symbols of any intermediate code.
    #[arg(long, default_value_t = Limits::default().max_symbols)]
    max_symbols: u64,
    /// Maximum number of codeword tuples enumerated.
    #[arg(long, default_value_t = Limits::default().max_tuples)]
    max_tuples: u64,
    /// Maximum code length.
    #[arg(long, default_value_t = Limits::default().max_length)]
    max_length: u64,
}

impl CapArgs {
    fn limits(&self) -> Limits {
        Limits { max_symbols: self.max_symbols, max_tuples: self.max_tuples, max_length: self.max_length }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Pow2,
    Arbitrary,
}

#[derive(Args, Debug)]
struct ConstructArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    /// Length exponent for `pow2` (length 2^m).
    #[arg(long, required_if_eq("mode", "pow2"))]
    m: Option<u64>,
    /// Code length for `arbitrary`.
    #[arg(long, required_if_eq("mode", "arbitrary"))]
    n: Option<u64>,
    #[arg(long)]
    k: u64,
    #[arg(long)]
    out: PathBuf,
    /// Leave the construction trace out of the file.
    #[arg(long)]
    no_trace: bool,
    #[command(flatten)]
    caps: CapArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Check {
    /// Exhaustive sum-collision search.
    Ud,
    /// Nonzero difference tuples summing to zero.
    Differences,
    /// Minimum distance between distinct tuple sums.
    Delta,
    /// Users and rate against the closed forms.
    Formulas,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "ud")]
    check: Check,
    #[command(flatten)]
    caps: CapArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Text,
    Csv,
}

#[derive(Args, Debug)]
struct RateTableArgs {
    #[arg(long)]
    k: u64,
    /// Comma-separated code lengths.
    #[arg(long, value_delimiter = ',', required = true)]
    lengths: Vec<u64>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[command(flatten)]
    caps: CapArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Messages {
    Random,
    Enumerate,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum DecoderKind {
    Lookup,
    Recursive,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "random")]
    messages: Messages,
    /// Number of tuples; for `enumerate`, the first `count` tuples (all if
    /// omitted).
    #[arg(long)]
    count: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON file holding a row-stochastic matrix over the sum symbols.
    #[arg(long)]
    noise: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "lookup")]
    decoder: DecoderKind,
    #[command(flatten)]
    caps: CapArgs,
}

#[derive(Args, Debug)]
struct DecodeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Comma-separated channel output.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    sum: Vec<i64>,
    #[arg(long, value_enum, default_value = "lookup")]
    decoder: DecoderKind,
    #[command(flatten)]
    caps: CapArgs,
}

/// Failure carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }

    fn malformed(message: impl Into<String>) -> Self {
        Self::new(EXIT_MALFORMED, message)
    }
}

impl From<ConstructionError> for Failure {
    fn from(e: ConstructionError) -> Self {
        let code = match e {
            ConstructionError::UnsupportedArity(_) => EXIT_UNSUPPORTED,
            ConstructionError::LengthCap { .. }
            | ConstructionError::StorageCap { .. }
            | ConstructionError::ArityOverflow { .. } => EXIT_CAPACITY,
            _ => EXIT_MALFORMED,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Capacity { .. } => Failure::new(EXIT_CAPACITY, e.to_string()),
            AnalysisError::FormulaMismatch { .. } => Failure::new(EXIT_CHECK_FAILED, e.to_string()),
            AnalysisError::Construction(c) => c.into(),
        }
    }
}

impl From<FileError> for Failure {
    fn from(e: FileError) -> Self {
        Failure::malformed(e.to_string())
    }
}

impl From<ChannelError> for Failure {
    fn from(e: ChannelError) -> Self {
        Failure::malformed(e.to_string())
    }
}

impl From<DecodeError> for Failure {
    fn from(e: DecodeError) -> Self {
        match e {
            DecodeError::NotUniquelyDecodable(_) => Failure::new(EXIT_NOT_UD, e.to_string()),
            DecodeError::NotAchievable(_) => Failure::new(EXIT_CHECK_FAILED, e.to_string()),
            DecodeError::TableTooLarge(_) => Failure::new(EXIT_CAPACITY, e.to_string()),
            DecodeError::Analysis(a) => a.into(),
            _ => Failure::malformed(e.to_string()),
        }
    }
}

type Outcome = Result<i32, Failure>;

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Normal output goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                EXIT_OK
            } else {
                let _ = write!(err, "{e}");
                EXIT_MALFORMED
            };
        }
    };
    let result = match cli.command {
        Command::Construct(a) => construct(a, out),
        Command::Verify(a) => verify(a, out),
        Command::RateTable(a) => rate_table_cmd(a, out),
        Command::Simulate(a) => simulate(a, out),
        Command::Decode(a) => decode(a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn emit(out: &mut dyn Write, text: std::fmt::Arguments<'_>) -> Result<(), Failure> {
    out.write_fmt(text).map_err(|e| Failure::malformed(format!("cannot write output: {e}")))
}

macro_rules! say {
    ($out:expr, $($arg:tt)*) => {
        emit($out, format_args!("{}\n", format_args!($($arg)*)))
    };
}

fn load(path: &Path, limits: &Limits) -> Result<(CodeTableFile, Code), Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::malformed(format!("{}: {e}", path.display())))?;
    let file = CodeTableFile::parse(&text)?;
    if file.k < 3 {
        return Err(ConstructionError::UnsupportedArity(file.k).into());
    }
    let code = file.code(limits)?;
    Ok((file, code))
}

fn exact(rate: &Rate) -> String {
    match rate.exact() {
        Some(r) => ratio(r),
        None => "irrational".into(),
    }
}

fn ratio(r: Ratio<u64>) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn construct(a: ConstructArgs, out: &mut dyn Write) -> Outcome {
    let limits = a.caps.limits();
    let (code, trace, provenance) = match a.mode {
        Mode::Pow2 => {
            let m = a.m.ok_or_else(|| Failure::malformed("--m is required for pow2"))?;
            let (code, trace) = build_pow2_with::<i32>(m, a.k, &limits)?;
            (code, trace, Provenance::Pow2 { m, k: a.k })
        }
        Mode::Arbitrary => {
            let n = a.n.ok_or_else(|| Failure::malformed("--n is required for arbitrary"))?;
            let profile = binary_profile(n, a.k)?;
            let (code, trace) = build_arbitrary_with::<i32>(n, a.k, &limits)?;
            (code, trace, Provenance::Arbitrary { n, k: a.k, digits: profile.digits().to_vec() })
        }
    };
    let trace = (!a.no_trace).then_some(trace);
    let file = CodeTableFile::from_code(&code, trace, Some(provenance));
    fs::write(&a.out, file.to_json()).map_err(|e| Failure::malformed(format!("{}: {e}", a.out.display())))?;
    let rate = total_rate(&code).total;
    say!(out, "T={} n={} k={} rate={} ({} bits/use)", code.users(), code.length(), a.k, rate, exact(&rate))?;
    say!(out, "wrote {}", a.out.display())?;
    Ok(EXIT_OK)
}

fn verify(a: VerifyArgs, out: &mut dyn Write) -> Outcome {
    let limits = a.caps.limits();
    let (file, code) = load(&a.input, &limits)?;
    match a.check {
        Check::Ud => {
            let report = check_ud(&code, &limits)?;
            match report.witness() {
                None => {
                    say!(out, "ud: pass ({} tuples)", report.tuples_checked())?;
                    Ok(EXIT_OK)
                }
                Some(w) => {
                    say!(out, "ud: FAIL")?;
                    say!(out, "first:  {}", Tuple::new(w.first.clone()))?;
                    say!(out, "second: {}", Tuple::new(w.second.clone()))?;
                    say!(out, "sum:    {}", w.sum)?;
                    Ok(EXIT_CHECK_FAILED)
                }
            }
        }
        Check::Differences => {
            let ud = check_ud_differences(&code, &limits)?;
            say!(out, "differences: {}", if ud { "pass" } else { "FAIL" })?;
            Ok(if ud { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
        Check::Delta => {
            let delta = min_delta(&code, &limits)?;
            if delta == u64::MAX {
                say!(out, "delta: unbounded (single tuple)")?;
            } else {
                say!(out, "delta: {delta}")?;
            }
            Ok(if delta >= 1 { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
        Check::Formulas => {
            let n = code.length() as u64;
            let prediction = match file.provenance {
                Some(Provenance::Pow2 { m, k }) => predicted_pow2(m, k)?,
                _ => predicted_arbitrary(n, file.k)?,
            };
            let summary = total_rate(&code).with_prediction(prediction);
            say!(out, "measured:  T={} R={} ({})", summary.users(), exact(&summary.total), summary.total)?;
            say!(
                out,
                "predicted: T={} R={} ({:.3})",
                prediction.users,
                ratio(prediction.rate),
                *prediction.rate.numer() as f64 / *prediction.rate.denom() as f64
            )?;
            let ok = summary.matches_prediction();
            say!(out, "formulas: {}", if ok { "pass" } else { "FAIL" })?;
            Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
    }
}

fn rate_table_cmd(a: RateTableArgs, out: &mut dyn Write) -> Outcome {
    let rows = rate_table(&a.lengths, a.k, &a.caps.limits())?;
    match a.format {
        Format::Text => {
            say!(out, "{:>6} {:>6} {:>8} {:>10}", "T", "n", "rate", "exact")?;
            for r in &rows {
                say!(out, "{:>6} {:>6} {:>8} {:>10}", r.users, r.length, r.measured, ratio(r.predicted))?;
            }
        }
        Format::Csv => {
            say!(out, "users,length,rate,exact")?;
            for r in &rows {
                say!(out, "{},{},{},{}", r.users, r.length, r.measured, ratio(r.predicted))?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn load_noise(path: &Path, size: usize) -> Result<TransitionMatrix, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::malformed(format!("{}: {e}", path.display())))?;
    let rows: Vec<Vec<f64>> =
        serde_json::from_str(&text).map_err(|e| Failure::malformed(format!("noise matrix: {e}")))?;
    let matrix = TransitionMatrix::new(rows)?;
    if matrix.size() != size {
        return Err(Failure::malformed(format!("noise matrix is {0}x{0}, channel has {size} symbols", matrix.size())));
    }
    Ok(matrix)
}

enum Decoder<'c> {
    Lookup(LookupTable<'c, i32>),
    Recursive(&'c crate::ConstructionTrace),
}

impl Decoder<'_> {
    fn decode(&self, y: &SumWord) -> Result<Tuple, DecodeError> {
        match self {
            Decoder::Lookup(table) => decode_lookup(y, table),
            Decoder::Recursive(trace) => decode_recursive(y, trace),
        }
    }
}

fn decoder<'c>(
    kind: DecoderKind,
    file: &'c CodeTableFile,
    code: &'c Code,
    limits: &Limits,
) -> Result<Decoder<'c>, Failure> {
    match kind {
        DecoderKind::Lookup => Ok(Decoder::Lookup(build_lookup(code, limits)?)),
        DecoderKind::Recursive => match &file.trace {
            Some(t) => Ok(Decoder::Recursive(t)),
            None => Err(Failure::malformed("the recursive decoder needs a file with a construction trace")),
        },
    }
}

fn simulate(a: SimulateArgs, out: &mut dyn Write) -> Outcome {
    let limits = a.caps.limits();
    let (file, code) = load(&a.input, &limits)?;
    let noise =
        a.noise.as_deref().map(|p| load_noise(p, TransitionMatrix::size_for(file.k, code.users()))).transpose()?;
    // a non-UD code must be reported even with the recursive decoder
    let ud = check_ud(&code, &limits)?;
    if let Some(w) = ud.witness() {
        return Err(Failure::new(
            EXIT_NOT_UD,
            format!("code is not uniquely decodable: two tuples give sum {}", w.sum),
        ));
    }
    let dec = decoder(a.decoder, &file, &code, &limits)?;

    let sizes = code.sizes();
    let total = code.tuple_count();
    let count = match a.messages {
        Messages::Enumerate => a.count.map_or(total, |c| u128::from(c).min(total)),
        Messages::Random => u128::from(a.count.unwrap_or(1000)),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let (mut correct, mut detected, mut wrong) = (0u64, 0u64, 0u64);
    say!(out, "# index\ttuple\tsum\treceived\tdecoded\tstatus")?;
    for i in 0..count {
        let positions: Vec<usize> = match a.messages {
            Messages::Random => sizes.iter().map(|&s| rng.gen_range(0..s as usize)).collect(),
            Messages::Enumerate => {
                let mut index = i;
                let mut pos = vec![0usize; sizes.len()];
                for u in (0..sizes.len()).rev() {
                    pos[u] = (index % u128::from(sizes[u])) as usize;
                    index /= u128::from(sizes[u]);
                }
                pos
            }
        };
        let words: Vec<_> = code.constituents().iter().zip(&positions).map(|(c, &p)| c.words()[p].clone()).collect();
        let sent = Tuple::new(words);
        let y = transmit(&code, sent.words())?;
        let received = match &noise {
            Some(m) => apply_dmc(&y, m, a.seed.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ i as u64)?,
            None => y.clone(),
        };
        let (decoded, status) = match dec.decode(&received) {
            Ok(t) if t == sent => {
                correct += 1;
                (t.to_string(), "ok")
            }
            Ok(t) => {
                wrong += 1;
                (t.to_string(), "wrong")
            }
            Err(DecodeError::NotAchievable(_)) => {
                detected += 1;
                ("-".to_string(), "detected")
            }
            Err(e) => return Err(e.into()),
        };
        say!(out, "{i}\t{sent}\t{y}\t{received}\t{decoded}\t{status}")?;
    }
    say!(out, "# {correct}/{count} decoded correctly, {detected} detected errors, {wrong} undetected errors")?;
    Ok(if noise.is_none() && correct as u128 != count { EXIT_CHECK_FAILED } else { EXIT_OK })
}

fn decode(a: DecodeArgs, out: &mut dyn Write) -> Outcome {
    let limits = a.caps.limits();
    let (file, code) = load(&a.input, &limits)?;
    let dec = decoder(a.decoder, &file, &code, &limits)?;
    let y = SumWord::new(a.sum);
    let tuple = dec.decode(&y)?;
    for (u, w) in tuple.words().iter().enumerate() {
        say!(out, "user {}: {w}", u + 1)?;
    }
    Ok(EXIT_OK)
}
