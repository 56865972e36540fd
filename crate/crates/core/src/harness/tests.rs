use super::*;
use crate::corpus::MethodRecord;
use crate::mutate::{apply, enumerate_sites, OperatorId};
use crate::structure::find_function;

const CALC: &str = "def clamp(x, lo, hi):
    if x < lo:
        return lo
    if x > hi:
        return hi
    return x


def spin(n):
    while n >= 0:
        n = n
    return n


def unused(a):
    if a > 100:
        return a - 1
    return a
";

const TESTS: &str = "from calc import clamp


def test_low():
    assert clamp(-5, 0, 10) == 0


def test_high():
    assert clamp(50, 0, 10) == 10


def test_mid():
    assert clamp(5, 0, 10) == 5
";

fn project(extra: &[(&str, &str)]) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    write_tree(dir.path(), &[("calc.py", CALC), ("tests/test_calc.py", TESTS)]).unwrap();
    write_tree(dir.path(), extra).unwrap();
    dir
}

fn harness() -> Harness {
    Harness::new(SandboxConfig::default()).unwrap()
}

fn record(dir: &Path, name: &str) -> MethodRecord {
    let text = fs::read_to_string(dir.join("calc.py")).unwrap();
    let idx = index_file("calc.py", &text).unwrap();
    MethodRecord::from_index("t", &idx, find_function(&idx, name).unwrap()).unwrap()
}

#[test]
fn all_pass_suite() {
    let p = project(&[]);
    let runs = harness().run_suite(p.path(), false).unwrap();
    assert_eq!(runs.len(), 3);
    assert!(runs.iter().all(|r| r.outcome == Outcome::Pass && r.raw_trace.is_empty()));
    let ids: Vec<_> = runs.iter().map(|r| r.test_id.as_str()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
}

#[test]
fn failing_test_carries_trace() {
    let p = project(&[("tests/test_bad.py", "from calc import clamp\n\ndef test_bad():\n    v = clamp(1, 2, 3)\n    assert v == 7\n")]);
    let runs = harness().run_suite(p.path(), false).unwrap();
    let bad = runs.iter().find(|r| r.test_id.ends_with("test_bad")).unwrap();
    assert_eq!(bad.outcome, Outcome::Fail);
    assert!(bad.raw_trace.contains("assert v == 7"));
    assert!(bad.raw_trace.contains("AssertionError"));
}

#[test]
fn infinite_loop_times_out() {
    let p = project(&[("tests/test_spin.py", "from calc import spin\n\ndef test_spin():\n    assert spin(3) == 3\n")]);
    let h = harness();
    let ids = vec!["tests/test_spin.py::test_spin".to_string()];
    let start = Instant::now();
    let runs = h
        .run(
            p.path(),
            &RunRequest {
                selected: Some(&ids),
                timeout: Some(Duration::from_secs(2)),
                ..RunRequest::default()
            },
        )
        .unwrap();
    let took = start.elapsed().as_secs_f64();
    assert_eq!(runs.len(), 1);
    assert_eq!(runs[0].outcome, Outcome::Timeout);
    assert!(took < 3.5, "{took}");
}

#[test]
fn hanging_test_is_interrupted_and_the_rest_run() {
    let p = project(&[("tests/test_a_spin.py", "from calc import spin\n\ndef test_spin():\n    assert spin(3) == 3\n")]);
    for backend in [Backend::Server, Backend::default_command()] {
        let h = Harness::new(SandboxConfig {
            test_timeout_seconds: 1.0,
            backend,
            ..SandboxConfig::default()
        })
        .unwrap();
        let start = Instant::now();
        let runs = h.run_suite(p.path(), true).unwrap();
        assert!(start.elapsed().as_secs_f64() < 10.0);
        let spin = runs.iter().find(|r| r.test_id.ends_with("test_spin")).unwrap();
        assert_eq!(spin.outcome, Outcome::Timeout);
        assert!(spin.raw_trace.contains("calc.py:"), "{}", spin.raw_trace);
        assert!(spin.executed_lines.as_ref().unwrap()["calc.py"].contains(&11));
        assert_eq!(runs.iter().filter(|r| r.outcome == Outcome::Pass).count(), 3);
    }
}

#[test]
fn command_backend_matches_server() {
    let p = project(&[]);
    let cmd = Harness::new(SandboxConfig {
        backend: Backend::default_command(),
        ..SandboxConfig::default()
    })
    .unwrap();
    let a = cmd.run_suite(p.path(), true).unwrap();
    let b = harness().run_suite(p.path(), true).unwrap();
    let strip = |v: &[TestRun]| v.iter().map(|r| (r.test_id.clone(), r.outcome, r.executed_lines.clone())).collect::<Vec<_>>();
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn coverage_records_function_lines() {
    let p = project(&[]);
    let runs = harness().run_suite(p.path(), true).unwrap();
    let low = runs.iter().find(|r| r.test_id.ends_with("test_low")).unwrap();
    let lines = &low.executed_lines.as_ref().unwrap()["calc.py"];
    assert!(lines.contains(&1) && lines.contains(&2) && lines.contains(&3));
    assert!(!lines.contains(&4));
    let mid = runs.iter().find(|r| r.test_id.ends_with("test_mid")).unwrap();
    assert!(mid.executed_lines.as_ref().unwrap()["calc.py"].contains(&6));
    for r in &runs {
        for file in r.executed_lines.as_ref().unwrap().keys() {
            assert!(p.path().join(file).is_file(), "{file}");
        }
    }
}

#[test]
fn validate_bug_accepts_and_restores() {
    let p = project(&[]);
    let h = harness();
    let base = h.baseline(p.path()).unwrap();
    assert!(base.all_pass() && base.quarantined.is_empty());
    let rec = record(p.path(), "clamp");
    let site = enumerate_sites(&rec.source, OperatorId::CmpSwap)[0];
    let bug = apply(&rec, OperatorId::CmpSwap, site, 1, &h).unwrap();
    let before = tree_digest(p.path()).unwrap();
    let verdict = h.validate_bug(p.path(), &bug, &base).unwrap();
    assert!(matches!(verdict, BugVerdict::Accepted { .. }), "{verdict:?}");
    assert_eq!(tree_digest(p.path()).unwrap(), before);
}

#[test]
fn validate_bug_rejects_dead_code_and_untested() {
    let tests = "from calc import clamp, unused\n\ndef test_low():\n    assert clamp(-5, 0, 10) == 0\n\ndef test_unused():\n    assert unused(3) == 3\n";
    let p = project(&[("tests/test_calc.py", tests)]);
    let h = harness();
    let base = h.baseline(p.path()).unwrap();
    let rec = record(p.path(), "unused");
    // Edit only the branch no test reaches.
    let site = *enumerate_sites(&rec.source, OperatorId::CmpSwap).first().unwrap();
    let mut bug = apply(&rec, OperatorId::CmpSwap, site, 0, &h).unwrap();
    bug.mutated_source = rec.source.replace("a - 1", "a - 2");
    let verdict = h.validate_bug(p.path(), &bug, &base).unwrap();
    assert_eq!(
        verdict,
        BugVerdict::Rejected {
            reason: RejectReason::StillPassing
        }
    );
    let spin = record(p.path(), "spin");
    let mut untested = bug.clone();
    untested.original = spin;
    assert!(matches!(
        h.validate_bug(p.path(), &untested, &base),
        Err(HarnessError::NoCoveringTests(_))
    ));
}

fn run(id: &str, outcome: Outcome, lines: &[usize]) -> TestRun {
    TestRun {
        test_id: id.into(),
        outcome,
        duration: 0.0,
        executed_lines: Some([("m.py".to_string(), lines.iter().copied().collect())].into_iter().collect()),
        raw_trace: String::new(),
    }
}

#[test]
fn coverage_matrix_counts() {
    let runs = [
        run("a", Outcome::Fail, &[1, 2]),
        run("b", Outcome::Fail, &[1]),
        run("c", Outcome::Pass, &[1, 3]),
    ];
    let m = coverage_matrix(&runs, "m.py");
    assert_eq!(m.total_failed, 2);
    assert_eq!(m.lines[&1], (2, 1));
    assert_eq!(m.lines[&2], (1, 0));
    assert_eq!(m.lines[&3], (0, 1));
    assert!(!m.lines.contains_key(&4));
}

#[test]
fn syntax_check_through_server() {
    let h = harness();
    assert!(h.check_source("def f(x):\n    return x\n").unwrap().is_ok());
    match h.check_source("def f(x):\n    if x:\n    return x\n").unwrap() {
        SyntaxVerdict::Failure { line, .. } => assert_eq!(line, Some(3)),
        SyntaxVerdict::Ok => panic!("accepted an empty block"),
    }
}

#[test]
fn missing_interpreter_is_reported() {
    let h = Harness::new(SandboxConfig {
        python: "no-such-python".into(),
        ..SandboxConfig::default()
    })
    .unwrap();
    let p = project(&[]);
    assert!(matches!(h.run_suite(p.path(), false), Err(HarnessError::CommandNotFound(_))));
}
