//! Golden tests: every script in tests/scripts replays to the byte-exact
//! output recorded in tests/golden, with the expected exit code, within a
//! time budget, and deterministically.

use std::path::{Path, PathBuf};
use std::time::Instant;

use hintelab::front::{Flags, Session};

fn scripts_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/scripts")
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn run(name: &str) -> (i32, String) {
    let mut s = Session::new(Flags::default());
    let code = s.run_file(&scripts_dir().join(format!("{name}.hel")));
    (code, s.output.clone())
}

fn check_golden(name: &str, expected_code: i32) {
    let started = Instant::now();
    let (code, out) = run(name);
    assert!(
        started.elapsed().as_secs_f64() < 1.0,
        "{name} took {:?}",
        started.elapsed()
    );
    let golden = std::fs::read_to_string(golden_dir().join(format!("{name}.out")))
        .unwrap_or_else(|e| panic!("missing golden for {name}: {e}"));
    assert_eq!(code, expected_code, "{name} exit code; output:\n{out}");
    assert_eq!(out, golden, "{name} output differs from golden");
    // replay determinism
    let (code2, out2) = run(name);
    assert_eq!((code, out), (code2, out2), "{name} is not deterministic");
}

#[test]
fn semigroup() {
    check_golden("semigroup", 0);
}

#[test]
fn assocfun() {
    check_golden("assocfun", 0);
}

#[test]
fn assocfun_reversed() {
    check_golden("assocfun_reversed", 0);
}

#[test]
fn group_grid() {
    check_golden("group_grid", 0);
}

#[test]
fn group_conjecture() {
    check_golden("group_conjecture", 0);
}

#[test]
fn sugar_semigroup() {
    check_golden("sugar_semigroup", 0);
}

#[test]
fn hand_semigroup() {
    check_golden("hand_semigroup", 0);
}

#[test]
fn neg_not_acceptable() {
    check_golden("neg_not_acceptable", 1);
}

#[test]
fn neg_nonlinear() {
    check_golden("neg_nonlinear", 1);
}

#[test]
fn cyclic() {
    check_golden("cyclic", 1);
}

#[test]
fn missing_file_is_a_syntax_error() {
    let mut s = Session::new(Flags::default());
    let code = s.run_file(Path::new("/nonexistent/nope.hel"));
    assert_eq!(code, 2);
}

#[test]
fn keep_going_reports_all_errors() {
    let mut s = Session::new(Flags {
        keep_going: true,
        ..Flags::default()
    });
    let code = s.run_script(
        "axiom Int : Type\ncheck missing : Int\naxiom i : Int\ncheck i : Int\n",
    );
    assert_eq!(code, 1);
    assert!(s.output.contains("ERROR"));
    assert!(s.output.contains("TERM: i"), "output:\n{}", s.output);
}
