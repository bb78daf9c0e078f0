//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Criterion 11 runs the CLI binary twice and compares the bytes it
//! writes.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use chainbound_harness::suites::{self, name_of, Verdict, DEFAULT_SEED};

fn simulate_once(dir: &Path) -> Vec<u8> {
    let status = Command::new(env!("CARGO_BIN_EXE_chainbound"))
        .args(["simulate", "--experiment", "multiplier", "--seed", "7", "--trials", "50", "--out"])
        .arg(dir)
        .output()
        .expect("binary runs");
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    std::fs::read(dir.join("multiplier.trials.jsonl")).expect("trials file")
}

fn reproducibility() -> Verdict {
    let start = Instant::now();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = simulate_once(a.path());
    let second = simulate_once(b.path());
    let same = first == second && !first.is_empty();
    Verdict {
        id: 11,
        name: name_of(11).to_string(),
        pass: same,
        detail: format!("two CLI runs, {} and {} bytes of JSON lines, identical {}", first.len(), second.len(), first == second),
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn main() -> ExitCode {
    let mut verdicts: Vec<Verdict> = Vec::new();
    for id in 1..=10u8 {
        let v = suites::run(id, DEFAULT_SEED);
        println!("{v}");
        verdicts.push(v);
    }
    let v = reproducibility();
    println!("{v}");
    verdicts.push(v);
    let failed = verdicts.iter().filter(|v| !v.pass).count();
    println!("acceptance: {} passed, {failed} failed", verdicts.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
