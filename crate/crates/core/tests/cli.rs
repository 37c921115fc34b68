mod common;

use std::fs;
use std::path::Path;

use common::cli;

fn construct(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name).to_str().unwrap().to_string();
    let mut full = vec!["construct"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", &path]);
    let run = cli(&full);
    assert_eq!(run.code, 0, "{}", run.stderr);
    path
}

#[test]
fn construct_reports_users_and_rate() {
    let dir = tempfile::tempdir().unwrap();
    for (args, expect) in [
        (&["--mode", "pow2", "--m", "2", "--k", "3"][..], "T=8 n=4 k=3 rate=3.000"),
        (&["--mode", "arbitrary", "--n", "7", "--k", "3"][..], "T=14 n=7 k=3 rate=3.286"),
        (&["--mode", "arbitrary", "--n", "1", "--k", "3"][..], "T=2 n=1 k=3 rate=2.000"),
    ] {
        let mut full = vec!["construct"];
        full.extend_from_slice(args);
        let out = dir.path().join("c.json");
        full.extend_from_slice(&["--out", out.to_str().unwrap()]);
        let run = cli(&full);
        assert_eq!(run.code, 0);
        assert!(run.stdout.starts_with(expect), "{}", run.stdout);
    }
}

#[test]
fn construct_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = construct(dir.path(), "a.json", &["--mode", "arbitrary", "--n", "6", "--k", "4"]);
    let b = construct(dir.path(), "b.json", &["--mode", "arbitrary", "--n", "6", "--k", "4"]);
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.json");
    let out = out.to_str().unwrap();

    let run = cli(&["construct", "--mode", "pow2", "--m", "2", "--k", "2", "--out", out]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("k = 2 is not supported"));
    assert!(!Path::new(out).exists());

    let run = cli(&["construct", "--mode", "pow2", "--m", "3", "--k", "3", "--out", out, "--max-symbols", "10"]);
    assert_eq!(run.code, 3);
    let run = cli(&["rate-table", "--k", "3", "--lengths", "40", "--max-length", "16"]);
    assert_eq!(run.code, 3);

    assert_eq!(cli(&["construct", "--mode", "pow2", "--k", "3", "--out", out]).code, 4);
    assert_eq!(cli(&["frobnicate"]).code, 4);
    assert_eq!(cli(&["rate-table", "--k", "three", "--lengths", "4"]).code, 4);
    assert_eq!(cli(&["--help"]).code, 0);

    fs::write(out, "{ not json").unwrap();
    let run = cli(&["verify", "--in", out]);
    assert_eq!(run.code, 4);
    assert!(run.stderr.contains("malformed JSON"));
    assert_eq!(cli(&["verify", "--in", dir.path().join("missing.json").to_str().unwrap()]).code, 4);
}

#[test]
fn malformed_code_tables() {
    let dir = tempfile::tempdir().unwrap();
    let path = construct(dir.path(), "a.json", &["--mode", "pow2", "--m", "1", "--k", "3"]);
    let good = fs::read_to_string(&path).unwrap();
    let cases = [
        good.replace("\"T\": 4", "\"T\": 3"),
        good.replace("\"schema_version\": 1", "\"schema_version\": 9"),
        good.replace("[[0,0],[1,1]]", "[[0,0],[1,7]]"),
        good.replace("[[0,0],[1,1]]", "[[0,0],[1,1,1]]"),
        good.replace("[[0,0],[1,1]]", "[[0,0],[0,0]]"),
        good.replace("[[0,0],[1,1]]", "[[0,0],[1,0]]"),
        good.replace("\"k\": 3", "\"k\": 2"),
    ];
    for (i, text) in cases.iter().enumerate() {
        assert_ne!(text, &good, "case {i} did not change the file");
        let bad = dir.path().join(format!("bad{i}.json"));
        fs::write(&bad, text).unwrap();
        let run = cli(&["verify", "--in", bad.to_str().unwrap()]);
        let expected = if i == 6 { 2 } else { 4 };
        assert_eq!(run.code, expected, "case {i}: {}", run.stderr);
        assert!(!run.stderr.is_empty());
    }
}

#[test]
fn verify_checks() {
    let dir = tempfile::tempdir().unwrap();
    let a43 = construct(dir.path(), "a43.json", &["--mode", "pow2", "--m", "2", "--k", "3"]);
    let run = cli(&["verify", "--in", &a43, "--check", "ud"]);
    assert_eq!(run.code, 0);
    assert_eq!(run.stdout, "ud: pass (4096 tuples)\n");
    assert_eq!(cli(&["verify", "--in", &a43, "--check", "differences"]).code, 0);
    let run = cli(&["verify", "--in", &a43, "--check", "delta"]);
    assert_eq!((run.code, run.stdout.as_str()), (0, "delta: 1\n"));

    let a73 = construct(dir.path(), "a73.json", &["--mode", "arbitrary", "--n", "7", "--k", "3"]);
    let run = cli(&["verify", "--in", &a73, "--check", "formulas"]);
    assert_eq!(run.code, 0);
    assert!(run.stdout.contains("measured:  T=14 R=23/7 (3.286)"));
    assert!(run.stdout.contains("predicted: T=14 R=23/7 (3.286)"));

    // a duplicated constituent collides
    let dup = dir.path().join("dup.json");
    let text = fs::read_to_string(&a43).unwrap();
    let text = text
        .replace("\"T\": 8", "\"T\": 9")
        .replace("    [[0,0,0,0],[1,1,1,1]],\n", "    [[0,0,0,0],[1,1,1,1]],\n    [[0,0,0,0],[1,1,1,1]],\n");
    let text = text.split(",\n  \"trace\"").next().unwrap().to_string() + "\n}\n";
    fs::write(&dup, text).unwrap();
    let run = cli(&["verify", "--in", dup.to_str().unwrap()]);
    assert_eq!(run.code, 1, "{}", run.stderr);
    assert!(run.stdout.starts_with("ud: FAIL\n"));
    assert!(run.stdout.contains("sum:"));
    assert_eq!(cli(&["verify", "--in", dup.to_str().unwrap(), "--check", "delta"]).code, 1);
    assert_eq!(cli(&["verify", "--in", dup.to_str().unwrap(), "--check", "differences"]).code, 1);

    let run = cli(&["verify", "--in", dup.to_str().unwrap(), "--max-tuples", "100"]);
    assert_eq!(run.code, 3);
    let run = cli(&["simulate", "--in", dup.to_str().unwrap()]);
    assert_eq!(run.code, 5);
}

#[test]
fn rate_table_output() {
    let run = cli(&["rate-table", "--k", "3", "--lengths", "4,7,10,13,16", "--format", "csv"]);
    assert_eq!(run.code, 0);
    assert_eq!(
        run.stdout,
        "users,length,rate,exact\n8,4,3.000,3\n14,7,3.286,23/7\n20,10,3.500,7/2\n26,13,3.692,48/13\n32,16,4.000,4\n"
    );
    let run = cli(&["rate-table", "--k", "5", "--lengths", "1"]);
    assert!(run.stdout.lines().nth(1).unwrap().contains("3.000"));
    assert_eq!(cli(&["rate-table", "--k", "2", "--lengths", "4"]).code, 2);
}

#[test]
fn simulate_and_decode() {
    let dir = tempfile::tempdir().unwrap();
    let a23 = construct(dir.path(), "a23.json", &["--mode", "pow2", "--m", "1", "--k", "3"]);

    let run = cli(&["simulate", "--in", &a23, "--messages", "enumerate"]);
    assert_eq!(run.code, 0);
    assert!(run.stdout.ends_with("# 32/32 decoded correctly, 0 detected errors, 0 undetected errors\n"));

    let recursive = cli(&["simulate", "--in", &a23, "--messages", "enumerate", "--decoder", "recursive"]);
    assert_eq!(recursive.stdout, run.stdout);

    let random = cli(&["simulate", "--in", &a23, "--count", "50", "--seed", "9"]);
    assert_eq!(random.stdout, cli(&["simulate", "--in", &a23, "--count", "50", "--seed", "9"]).stdout);
    assert_ne!(random.stdout, cli(&["simulate", "--in", &a23, "--count", "50", "--seed", "10"]).stdout);

    // 4 users over {0,1,2}: 9 sum symbols
    let identity = dir.path().join("identity.json");
    let rows: Vec<Vec<f64>> = (0..9).map(|i| (0..9).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    fs::write(&identity, serde_json::to_string(&rows).unwrap()).unwrap();
    let noisy = cli(&["simulate", "--in", &a23, "--count", "50", "--seed", "9", "--noise", identity.to_str().unwrap()]);
    assert_eq!(noisy.stdout, random.stdout);

    let uniform = dir.path().join("uniform.json");
    fs::write(&uniform, serde_json::to_string(&vec![vec![1.0 / 9.0; 9]; 9]).unwrap()).unwrap();
    let a = cli(&["simulate", "--in", &a23, "--count", "200", "--seed", "3", "--noise", uniform.to_str().unwrap()]);
    assert_eq!(a.code, 0);
    assert!(a.stdout.contains("detected"));
    let b = cli(&["simulate", "--in", &a23, "--count", "200", "--seed", "3", "--noise", uniform.to_str().unwrap()]);
    assert_eq!(a.stdout, b.stdout);

    let small = dir.path().join("small.json");
    fs::write(&small, "[[1.0]]").unwrap();
    assert_eq!(cli(&["simulate", "--in", &a23, "--noise", small.to_str().unwrap()]).code, 4);

    let run = cli(&["decode", "--in", &a23, "--sum", "5,4"]);
    assert_eq!(run.code, 0);
    assert_eq!(run.stdout, "user 1: 11\nuser 2: 22\nuser 3: 01\nuser 4: 20\n");
    assert_eq!(cli(&["decode", "--in", &a23, "--sum", "5,4", "--decoder", "recursive"]).stdout, run.stdout);
    assert_eq!(cli(&["decode", "--in", &a23, "--sum", "0,0"]).code, 1);
    assert_eq!(cli(&["decode", "--in", &a23, "--sum", "1"]).code, 4);
}
