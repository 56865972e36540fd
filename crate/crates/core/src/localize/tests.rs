use std::collections::BTreeSet;

use proptest::prelude::*;

use super::*;
use crate::harness::{LineSets, Outcome, TestRun};
use crate::trace::parse_trace;

fn run(id: &str, outcome: Outcome, file: &str, lines: &[usize]) -> TestRun {
    let mut sets = LineSets::new();
    sets.insert(file.to_string(), lines.iter().copied().collect::<BTreeSet<_>>());
    TestRun {
        test_id: id.to_string(),
        outcome,
        duration: 0.0,
        executed_lines: Some(sets),
        raw_trace: String::new(),
    }
}

fn lines_of(r: &SuspectRanking) -> Vec<usize> {
    r.entries.iter().map(|s| s.unit.line()).collect()
}

const E2: DStarParams = DStarParams { e: 2.0 };

#[test]
fn dstar_examples() {
    assert_eq!(dstar_score(2, 1, 3, E2), 2.0);
    assert_eq!(dstar_score(0, 5, 3, E2), 0.0);
    assert_eq!(dstar_score(3, 0, 3, E2), f64::INFINITY);
    assert_eq!(dstar_score(0, 0, 0, E2), 0.0);
}

#[test]
fn dstar_matches_direct_arithmetic() {
    let mut checked = 0;
    for total in 0..=4usize {
        for failed in 0..=total {
            for passed in 0..=4usize {
                for e in 1..=3u32 {
                    let got = dstar_score(failed, passed, total, DStarParams { e: e as f64 });
                    let denom = passed + total - failed;
                    if failed == 0 {
                        assert_eq!(got, 0.0);
                    } else if denom == 0 {
                        assert_eq!(got, f64::INFINITY);
                    } else {
                        assert_eq!(got, failed.pow(e) as f64 / denom as f64);
                    }
                    checked += 1;
                }
            }
        }
    }
    assert!(checked >= 20);
}

#[test]
fn uncovered_by_passing_ranks_first() {
    let runs = [
        run("t_fail", Outcome::Fail, "m.py", &[3, 4]),
        run("t_pass", Outcome::Pass, "m.py", &[3]),
    ];
    let r = rank_statements(&project_matrices(&runs), E2);
    assert_eq!(lines_of(&r), [4, 3]);
    assert_eq!(r.entries[0].score, f64::INFINITY);
    assert_eq!(r.entries[1].score, 1.0);
}

#[test]
fn all_pass_scores_zero_in_file_order() {
    let runs = [
        run("a", Outcome::Pass, "b.py", &[2, 1]),
        run("b", Outcome::Pass, "a.py", &[7]),
    ];
    let r = rank_statements(&project_matrices(&runs), E2);
    let got: Vec<String> = r.entries.iter().map(|s| s.unit.to_string()).collect();
    assert_eq!(got, ["a.py:7", "b.py:1", "b.py:2"]);
    assert!(r.entries.iter().all(|s| s.score == 0.0));
}

#[test]
fn five_test_fixture() {
    let runs = [
        run("t1", Outcome::Fail, "m.py", &[1, 2, 3]),
        run("t2", Outcome::Fail, "m.py", &[1, 3, 4]),
        run("t3", Outcome::Pass, "m.py", &[1, 2]),
        run("t4", Outcome::Pass, "m.py", &[1, 5]),
        run("t5", Outcome::Pass, "m.py", &[1, 2, 5]),
    ];
    let r = rank_statements(&project_matrices(&runs), E2);
    assert_eq!(lines_of(&r), [3, 1, 4, 2, 5]);
    let scores: Vec<f64> = r.entries.iter().map(|s| s.score).collect();
    assert_eq!(scores, [f64::INFINITY, 4.0 / 3.0, 1.0, 1.0 / 3.0, 0.0]);
}

#[test]
fn skipped_runs_do_not_count() {
    let runs = [
        run("t1", Outcome::Fail, "m.py", &[1]),
        run("t2", Outcome::Skipped, "m.py", &[1]),
    ];
    let m = project_matrices(&runs);
    assert_eq!(m[0].lines[&1], (1, 0));
}

#[test]
fn jsonl_export_writes_infinity_as_string() {
    let runs = [run("t", Outcome::Fail, "m.py", &[1])];
    let r = rank_statements(&project_matrices(&runs), E2);
    let mut buf = Vec::new();
    r.write_jsonl(&mut buf).unwrap();
    let row: serde_json::Value = serde_json::from_slice(&buf).unwrap();
    assert_eq!(row["rank"], 1);
    assert_eq!(row["score"], "inf");
    assert_eq!(row["unit"]["line"], 1);
    let back: Suspect = serde_json::from_str(&serde_json::to_string(&r.entries[0]).unwrap()).unwrap();
    assert_eq!(back, r.entries[0]);
}

proptest! {
    #[test]
    fn dstar_monotone(total in 0usize..20, a in 0usize..20, b in 0usize..20, passed in 0usize..20, e in 1u32..4) {
        let p = DStarParams { e: e as f64 };
        let (lo, hi) = (a.min(b).min(total), a.max(b).min(total));
        prop_assert!(dstar_score(lo, passed, total, p) <= dstar_score(hi, passed, total, p));
        prop_assert!(dstar_score(lo, passed + 1, total, p) <= dstar_score(lo, passed, total, p));
    }

    #[test]
    fn replicating_tests_keeps_argmax(
        outcomes in proptest::collection::vec(any::<bool>(), 1..8),
        covers in proptest::collection::vec(proptest::collection::btree_set(1usize..10, 1..6), 8),
        k in 2usize..4,
    ) {
        let runs: Vec<TestRun> = outcomes
            .iter()
            .enumerate()
            .map(|(i, &fail)| {
                let lines: Vec<usize> = covers[i].iter().copied().collect();
                run(&format!("t{i}"), if fail { Outcome::Fail } else { Outcome::Pass }, "m.py", &lines)
            })
            .collect();
        let mut replicated = Vec::new();
        for _ in 0..k {
            replicated.extend(runs.iter().cloned());
        }
        let top = |rs: &[TestRun]| rank_statements(&project_matrices(rs), E2).entries[0].unit.clone();
        prop_assert_eq!(top(&runs), top(&replicated));
    }
}

const APP: &str = "\
def f(x):
    return g(x) + 1


def g(x):
    return x.missing


class Box:
    def __init__(self, v):
        self.v = v

    def get(self):
        return self.v

    def __repr__(self):
        return \"Box(%r)\" % self.v

    def __eq__(self, other):
        return self.v == other.v
";

const TEST_APP: &str = "\
from app import f, Box


def test_f():
    assert f(1) == 2


def test_box():
    b = Box(3)
    assert b.get() == 4
";

fn project() -> ProjectIndex {
    ProjectIndex::from_sources(
        vec![
            index_file("app.py", APP).unwrap(),
            index_file("tests/test_app.py", TEST_APP).unwrap(),
        ],
        &LocalizeConfig::default(),
    )
    .unwrap()
}

fn names(r: &SuspectRanking) -> Vec<&str> {
    r.functions().map(|(_, n)| n).collect()
}

const RULE: &str = "_ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _";

#[test]
fn recency_over_project_frames() {
    let raw = format!(
        "    def test_f():\n>       assert f(1) == 2\n\ntests/test_app.py:5: \n{RULE}\n\n\
x = 1\n\n    def f(x):\n>       return g(x) + 1\n\napp.py:2: \n{RULE}\n\n\
    def helper():\n>       return lib()\n\n/usr/lib/python3/site-packages/lib.py:10: \n{RULE}\n\n\
x = 1\n\n    def g(x):\n>       return x.missing\nE       AttributeError: 'int' object has no attribute 'missing'\n\napp.py:6: AttributeError\n"
    );
    let t = parse_trace(&raw).unwrap();
    let r = rank_functions_by_trace(&t, Path::new("/nonexistent"), &project()).unwrap();
    assert_eq!(names(&r), ["g", "f", "Box.__eq__"]);
    assert!(r.entries[0].score > r.entries[1].score);
}

#[test]
fn external_only_falls_back() {
    let raw = "    def helper():\n>       raise ValueError()\nE       ValueError\n\n/usr/lib/python3/site-packages/lib.py:10: ValueError\n";
    let t = parse_trace(raw).unwrap();
    match rank_functions_by_trace(&t, Path::new("/x"), &project()) {
        Err(LocalizeError::NoProjectFrames { fallback }) => {
            assert_eq!(fallback.entries[0].unit.to_string(), "/usr/lib/python3/site-packages/lib.py:10");
        }
        other => panic!("expected fallback, got {other:?}"),
    }
}

#[test]
fn test_frame_stands_for_its_callees() {
    let raw = "    def test_box():\n        b = Box(3)\n>       assert b.get() == 4\nE       assert 3 == 4\n\ntests/test_app.py:10: AssertionError\n";
    let t = parse_trace(raw).unwrap();
    let r = rank_functions_by_trace(&t, Path::new("/x"), &project()).unwrap();
    assert_eq!(names(&r), ["Box.get", "Box.__eq__", "Box.__init__"]);
}

#[test]
fn builtins_reach_special_methods() {
    let raw = "    def test_box():\n>       assert repr(Box(3)) == 'Box(4)'\nE       AssertionError\n\ntests/test_app.py:10: AssertionError\n";
    let r = rank_functions_by_trace(&parse_trace(raw).unwrap(), Path::new("/x"), &project()).unwrap();
    assert_eq!(names(&r), ["Box.__repr__", "Box.__init__", "Box.__eq__"]);
}

#[test]
fn callees_of_ranked_functions_follow() {
    let raw = "    def test_f():\n>       assert f(1) == 2\nE       assert 3 == 2\n\ntests/test_app.py:5: AssertionError\n";
    let r = rank_functions_by_trace(&parse_trace(raw).unwrap(), Path::new("/x"), &project()).unwrap();
    assert_eq!(names(&r), ["f", "Box.__eq__", "g"]);
}

#[test]
fn statement_ranking_lifts_to_functions() {
    let runs = [
        run("t1", Outcome::Fail, "app.py", &[1, 2, 5, 6]),
        run("t2", Outcome::Pass, "app.py", &[10, 11, 13, 14]),
        run("t3", Outcome::Pass, "app.py", &[1, 2]),
    ];
    let stmts = rank_statements(&project_matrices(&runs), E2);
    let r = rank_functions_by_statements(&stmts, &project());
    assert_eq!(names(&r)[0], "g");
}
