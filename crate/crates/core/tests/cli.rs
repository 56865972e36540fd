mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use repairkit::harness::{copy_project, write_tree};

fn cli(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_repairkit")).args(args).current_dir(cwd).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// The weak fixture with `normalize_name` made to upper-case.
fn broken_weak(dir: &Path) -> std::path::PathBuf {
    let p = dir.join("weak");
    copy_project(&common::project("weak"), &p).unwrap();
    let text = fs::read_to_string(p.join("guard.py")).unwrap();
    fs::write(p.join("guard.py"), text.replace(".lower()", ".upper()")).unwrap();
    p
}

#[test]
fn usage_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&cli(&["frobnicate"], tmp.path())), 2);
    assert_eq!(code(&cli(&["repair", ".", "--generator", "neural"], tmp.path())), 2);
    assert_eq!(code(&cli(&["mine", "no/such/dir", "--out", "x.jsonl"], tmp.path())), 2);
    fs::write(tmp.path().join("bad.toml"), "budget = 3\n").unwrap();
    let o = cli(&["--config", "bad.toml", "bench", "."], tmp.path());
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert_eq!(code(&cli(&["bench", "."], tmp.path())), 2);
}

#[test]
fn mine_writes_jsonl() {
    let repo = common::history_repo();
    let tmp = tempfile::tempdir().unwrap();
    let o = cli(&["mine", repo.path().to_str().unwrap(), "--out", "pairs.jsonl"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("# effective configuration"));
    let text = fs::read_to_string(tmp.path().join("pairs.jsonl")).unwrap();
    let rows: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["name"], "add");
    assert_eq!(rows[0]["after"], "def add(a, b):\n    return a + b\n");
}

#[test]
fn mutate_needs_tests_and_accepts_zero() {
    let tmp = tempfile::tempdir().unwrap();
    write_tree(&tmp.path().join("bare"), &[("m.py", "def f():\n    return 1\n")]).unwrap();
    let o = cli(&["mutate", "bare", "-n", "2", "--out", "bugs.jsonl"], tmp.path());
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    let weak = common::project("weak");
    let o = cli(&["mutate", weak.to_str().unwrap(), "-n", "0", "--out", "none.jsonl"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(fs::read_to_string(tmp.path().join("none.jsonl")).unwrap(), "");
}

#[test]
fn mutate_then_bench() {
    let tmp = tempfile::tempdir().unwrap();
    let algos = common::project("algos");
    let o = cli(
        &["--seed", "4", "mutate", algos.to_str().unwrap(), "-n", "2", "--non-lossy", "--out", "bugs.jsonl", "--bench-dir", "cases"],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows: Vec<serde_json::Value> = fs::read_to_string(tmp.path().join("bugs.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert!(r["skeleton"].as_str().unwrap().contains("# target edit"));
        assert!(!r["trace"].as_str().unwrap().is_empty());
        assert!(!r["failing_tests"].as_array().unwrap().is_empty());
    }
    let o = cli(&["bench", "cases", "--top-k", "1,10", "--budget-seconds", "30", "--out", "report.json"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("Number of Bugs"));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["aggregates"]["n_cases"], 2);
}

#[test]
fn repair_writes_patch_and_applies_on_request() {
    let tmp = tempfile::tempdir().unwrap();
    let p = broken_weak(tmp.path());
    let before = fs::read_to_string(p.join("guard.py")).unwrap();
    let o = cli(&["repair", "weak", "--patch-out", "fix.patch", "--budget-seconds", "30"], tmp.path());
    assert_eq!(code(&o), 0, "{}\n{}", stdout(&o), stderr(&o));
    let patch = fs::read_to_string(tmp.path().join("fix.patch")).unwrap();
    assert!(patch.starts_with("--- a/guard.py\n+++ b/guard.py\n"), "{patch}");
    assert!(patch.contains("-    return name.strip().upper()\n+    return name.strip().lower()\n"), "{patch}");
    assert_eq!(fs::read_to_string(p.join("guard.py")).unwrap(), before);
    let o = cli(&["repair", "weak", "--apply", "--patch-out", "fix.patch"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(fs::read_to_string(p.join("guard.py")).unwrap(), before.replace(".upper()", ".lower()"));
    let o = cli(&["repair", "weak"], tmp.path());
    assert_eq!(code(&o), 3, "nothing left to repair: {}", stderr(&o));
}

#[test]
fn repair_without_fix_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    broken_weak(tmp.path());
    fs::write(
        tmp.path().join("gen.py"),
        "import json, sys\nfor line in sys.stdin:\n    req = json.loads(line)\n    print(json.dumps({\"id\": req[\"id\"], \"candidates\": [{\"text\": \"def normalize_name(name):\\n    return name\\n\"}]}), flush=True)\n",
    )
    .unwrap();
    let o = cli(
        &["repair", "weak", "--focal", "guard.py::normalize_name", "--generator", "external", "--generator-cmd", "python3 gen.py"],
        tmp.path(),
    );
    assert_eq!(code(&o), 1, "{}\n{}", stdout(&o), stderr(&o));
    assert!(!tmp.path().join("repair.patch").exists());
}

#[test]
fn repair_scores_a_reference() {
    let tmp = tempfile::tempdir().unwrap();
    broken_weak(tmp.path());
    fs::write(tmp.path().join("ref.py"), "def normalize_name(name):\n    return name.strip().lower()\n").unwrap();
    let o = cli(
        &["repair", "weak", "--focal", "guard.py::normalize_name", "--reference", "ref.py", "--report", "report.json"],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("verbatim fix for guard.py::normalize_name"), "{}", stdout(&o));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["fixed_by"], 0);
}
