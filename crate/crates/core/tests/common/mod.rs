#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use udmaac::analysis::check_ud;
use udmaac::construction::{build_arbitrary, build_pow2, initial_code_for_arity};
use udmaac::{Alphabet, Code, Limits, Word};

pub fn ternary() -> Alphabet {
    Alphabet::unsigned(3).unwrap()
}

pub fn digits(users: &[&[&str]], k: u64) -> Code {
    Code::from_digit_lists(users, Alphabet::unsigned(k).unwrap()).unwrap()
}

/// Words of user `index` (1-based) rendered as digit strings.
pub fn user_set(code: &Code, index: usize) -> BTreeSet<String> {
    code.user(index).unwrap().words().iter().map(|w| w.to_string()).collect()
}

pub fn set(words: &[&str]) -> BTreeSet<String> {
    words.iter().map(|w| w.to_string()).collect()
}

/// Random code with distinct words per user; not necessarily UD.
pub fn random_code(rng: &mut impl Rng, alphabet: Alphabet, length: usize, users: usize, max_words: usize) -> Code {
    let (lo, hi) = (alphabet.min_symbol(), alphabet.max_symbol());
    let lists = (0..users)
        .map(|_| {
            let want = rng.gen_range(1..=max_words);
            let mut words = BTreeSet::new();
            for _ in 0..want * 4 {
                if words.len() == want {
                    break;
                }
                words.insert((0..length).map(|_| rng.gen_range(lo..=hi)).collect::<Vec<i64>>());
            }
            words.into_iter().map(|w| Word::from_i64s(&w, alphabet).unwrap()).collect()
        })
        .collect();
    Code::new(lists).unwrap()
}

/// Draws random codes until one passes the sum-collision check.
pub fn random_ud_code(rng: &mut impl Rng, alphabet: Alphabet, length: usize, users: usize, max_words: usize) -> Code {
    loop {
        let code = random_code(rng, alphabet, length, users, max_words);
        if check_ud(&code, &Limits::default()).unwrap().is_ud() {
            return code;
        }
    }
}

/// Constructed codes plus broken variants of them and small random codes.
pub fn difference_corpus(rng: &mut impl Rng) -> Vec<Code> {
    let mut corpus: Vec<Code> = Vec::new();
    for arity in 3..=12 {
        corpus.push(initial_code_for_arity(arity).unwrap());
    }
    for (m, k) in [(1, 3), (1, 4), (1, 5), (2, 3), (2, 4)] {
        corpus.push(build_pow2(m, k).unwrap().0);
    }
    for (n, k) in [(3, 3), (3, 4), (3, 5)] {
        corpus.push(build_arbitrary(n, k).unwrap().0);
    }

    let constructed = corpus.clone();
    for code in &constructed {
        // a repeated user always collides once it has two words
        let mut users: Vec<Vec<Word<i32>>> = code.constituents().iter().map(|c| c.words().to_vec()).collect();
        let first = users[0].clone();
        users.push(first);
        corpus.push(Code::new(users).unwrap());

        // give the last user one more word, which may or may not break UD
        let mut users: Vec<Vec<Word<i32>>> = code.constituents().iter().map(|c| c.words().to_vec()).collect();
        let last = users.last_mut().unwrap();
        let alphabet = code.alphabet();
        let mut extra = last[0].to_i64s();
        extra[0] = (extra[0] + 1) % alphabet.k() as i64;
        let extra = Word::from_i64s(&extra, alphabet).unwrap();
        if !last.contains(&extra) {
            last.push(extra);
            corpus.push(Code::new(users).unwrap());
        }
    }

    for _ in 0..30 {
        let k = rng.gen_range(3..=5);
        let signed = rng.gen_bool(0.3);
        let alphabet = Alphabet::new(k, signed).unwrap();
        let length = rng.gen_range(1..=3);
        let users = rng.gen_range(2..=4);
        corpus.push(random_code(rng, alphabet, length, users, 3));
    }
    corpus
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the `udmaac` binary.
pub fn cli(args: &[&str]) -> Run {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_udmaac")).args(args).output().unwrap();
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}
