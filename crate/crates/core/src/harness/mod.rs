//! Sandboxed test execution.
//!
//! Every session runs against a fresh copy of the project in a temporary
//! directory with a scrubbed environment. Files under test are replaced in
//! the copy only, so the original project is never written to. Sessions are
//! driven by an embedded pytest plugin that records per-test outcomes, raw
//! failure text and, optionally, line coverage as JSON lines.

mod server;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{Read, Write};
use std::os::unix::process::CommandExt;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::mutate::InjectedBug;
use crate::structure::{
    index_file, splice_lines, LineSpan, SyntaxCheckError, SyntaxChecker, SyntaxVerdict,
};
use server::ServerPool;

const RUNNER: &str = include_str!("runner.py");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Error,
    Timeout,
    Skipped,
}

impl Outcome {
    pub fn is_failing(self) -> bool {
        matches!(self, Outcome::Fail | Outcome::Error | Outcome::Timeout)
    }
}

pub type LineSets = BTreeMap<String, BTreeSet<usize>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRun {
    pub test_id: String,
    pub outcome: Outcome,
    pub duration: f64,
    /// Relative file path to executed line numbers, when coverage was on.
    pub executed_lines: Option<LineSets>,
    pub raw_trace: String,
}

impl TestRun {
    fn synthetic(test_id: &str, outcome: Outcome, raw_trace: String) -> Self {
        Self {
            test_id: test_id.to_string(),
            outcome,
            duration: 0.0,
            executed_lines: None,
            raw_trace,
        }
    }

    pub fn covers(&self, file: &str, lines: LineSpan) -> bool {
        self.executed_lines
            .as_ref()
            .and_then(|m| m.get(file))
            .is_some_and(|set| set.range(lines.start..=lines.end).next().is_some())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Backend {
    /// Forking server that keeps pytest imported between sessions.
    Server,
    /// One process per session. Placeholders: `{python}`, `{runner}`,
    /// `{workdir}`, `{results}`, `{coverage}` (expands to the coverage flag
    /// or nothing), `{test_timeout}` (the per-test limit flag or nothing)
    /// and `{selected_tests}` (expands to zero or more ids).
    Command { template: Vec<String> },
}

impl Backend {
    pub fn default_command() -> Self {
        Backend::Command {
            template: [
                "{python}",
                "{runner}",
                "run",
                "--root",
                "{workdir}",
                "--results",
                "{results}",
                "{coverage}",
                "{test_timeout}",
                "{selected_tests}",
            ]
            .map(String::from)
            .to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SandboxConfig {
    pub python: String,
    /// Wall-clock limit for a full suite run.
    pub timeout_seconds: f64,
    /// Wall-clock limit for one validation session (covering tests only).
    pub candidate_timeout_seconds: f64,
    /// Limit for one test; a test over it is interrupted and recorded as a
    /// timeout with the trace of where it was. Zero disables.
    pub test_timeout_seconds: f64,
    pub output_cap_bytes: usize,
    pub backend: Backend,
    /// Variables copied from the caller's environment.
    pub env_passthrough: Vec<String>,
}

impl Default for SandboxConfig {
    fn default() -> Self {
        Self {
            python: "python3".into(),
            timeout_seconds: 60.0,
            candidate_timeout_seconds: 3.0,
            test_timeout_seconds: 5.0,
            output_cap_bytes: 64 * 1024,
            backend: Backend::Server,
            env_passthrough: vec!["PATH".into(), "HOME".into(), "LANG".into()],
        }
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("test command `{0}` not found")]
    CommandNotFound(String),
    #[error("suite exceeded its {0:.1} s limit before collecting any test")]
    SuiteTimeout(f64),
    #[error("test runner failed: {0}")]
    Runner(String),
    #[error("no baseline-passing test covers {0}")]
    NoCoveringTests(String),
    #[error("project bytes changed during validation")]
    ProjectModified,
    #[error("{0}")]
    Structure(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One isolated working copy of a project.
pub struct Sandbox {
    dir: tempfile::TempDir,
    pub workdir: PathBuf,
    /// Scrubbed environment the session runs with.
    pub env: Vec<(String, String)>,
}

impl Sandbox {
    /// Copy `project` into a fresh directory, then write `overrides`
    /// (relative path, contents) over the copy.
    pub fn prepare(project: &Path, overrides: &[(String, String)], env: Vec<(String, String)>) -> Result<Self, HarnessError> {
        let dir = tempfile::Builder::new().prefix("repairkit-").tempdir()?;
        let workdir = dir.path().canonicalize()?.join("project");
        copy_project(project, &workdir)?;
        for (rel, text) in overrides {
            fs::write(workdir.join(rel), text)?;
        }
        Ok(Self { dir, workdir, env })
    }

    fn results_path(&self) -> PathBuf {
        self.dir.path().join("results.jsonl")
    }

    fn log_path(&self) -> PathBuf {
        self.dir.path().join("session.log")
    }
}

/// Recursively copy a project, skipping VCS and cache directories.
pub fn copy_project(src: &Path, dst: &Path) -> std::io::Result<()> {
    fs::create_dir_all(dst)?;
    for entry in fs::read_dir(src)? {
        let entry = entry?;
        let name = entry.file_name();
        if matches!(name.to_str(), Some(".git" | "__pycache__" | ".pytest_cache")) {
            continue;
        }
        let ty = entry.file_type()?;
        let to = dst.join(&name);
        if ty.is_dir() {
            copy_project(&entry.path(), &to)?;
        } else if ty.is_file() {
            fs::copy(entry.path(), &to)?;
        }
    }
    Ok(())
}

/// Digest of every file's relative path and bytes under `dir`, skipping
/// cache directories.
pub fn tree_digest(dir: &Path) -> std::io::Result<String> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<(String, PathBuf)>) -> std::io::Result<()> {
        for entry in fs::read_dir(dir)? {
            let entry = entry?;
            let name = entry.file_name();
            if matches!(name.to_str(), Some("__pycache__" | ".pytest_cache")) {
                continue;
            }
            let path = entry.path();
            if entry.file_type()?.is_dir() {
                walk(root, &path, out)?;
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.push((rel, path));
            }
        }
        Ok(())
    }
    let mut files = Vec::new();
    walk(dir, dir, &mut files)?;
    files.sort();
    let mut h = Sha256::new();
    for (rel, path) in files {
        h.update(rel.as_bytes());
        h.update([0]);
        h.update(fs::read(path)?);
        h.update([0]);
    }
    Ok(format!("{:x}", h.finalize()))
}

/// What a session should run.
#[derive(Debug, Clone, Default)]
pub struct RunRequest<'a> {
    /// Test ids to run; `None` runs the whole suite.
    pub selected: Option<&'a [String]>,
    pub coverage: bool,
    /// Wall-clock limit; defaults to the suite limit.
    pub timeout: Option<Duration>,
    /// Files (relative path, contents) replaced in the sandbox copy.
    pub overrides: &'a [(String, String)],
}

/// Test runs with the suite flagged as flaky removed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub runs: Vec<TestRun>,
    /// Tests whose outcome differed between the two baseline runs.
    pub quarantined: Vec<String>,
}

impl Baseline {
    pub fn passing(&self) -> impl Iterator<Item = &TestRun> {
        self.runs.iter().filter(|r| r.outcome == Outcome::Pass)
    }

    pub fn all_pass(&self) -> bool {
        self.runs.iter().all(|r| !r.outcome.is_failing())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "verdict")]
pub enum BugVerdict {
    Accepted { failing: Vec<TestRun>, rerun: usize },
    Rejected { reason: RejectReason },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    StillPassing,
}

/// Runs test sessions for any number of projects. Safe to share between
/// threads; each concurrent session gets its own sandbox and runner.
pub struct Harness {
    pub cfg: SandboxConfig,
    runner_dir: tempfile::TempDir,
    pool: ServerPool,
}

impl Harness {
    pub fn new(cfg: SandboxConfig) -> Result<Self, HarnessError> {
        let runner_dir = tempfile::Builder::new().prefix("repairkit-runner-").tempdir()?;
        fs::write(runner_dir.path().join("runner.py"), RUNNER)?;
        Ok(Self {
            cfg,
            runner_dir,
            pool: ServerPool::new(),
        })
    }

    fn runner_path(&self) -> PathBuf {
        self.runner_dir.path().join("runner.py")
    }

    fn base_env(&self) -> Vec<(String, String)> {
        let mut env: Vec<(String, String)> = self
            .cfg
            .env_passthrough
            .iter()
            .filter_map(|k| std::env::var(k).ok().map(|v| (k.clone(), v)))
            .collect();
        env.push(("PYTHONDONTWRITEBYTECODE".into(), "1".into()));
        env.push(("PYTHONHASHSEED".into(), "0".into()));
        env.push(("PYTEST_DISABLE_PLUGIN_AUTOLOAD".into(), "1".into()));
        env
    }

    /// Run every test of `project`.
    pub fn run_suite(&self, project: &Path, coverage: bool) -> Result<Vec<TestRun>, HarnessError> {
        self.run(
            project,
            &RunRequest {
                coverage,
                ..RunRequest::default()
            },
        )
    }

    /// Run one session in a fresh sandbox. Results are sorted by test id.
    pub fn run(&self, project: &Path, req: &RunRequest) -> Result<Vec<TestRun>, HarnessError> {
        if let Some(sel) = req.selected {
            if sel.is_empty() {
                return Ok(Vec::new());
            }
        }
        let sandbox = Sandbox::prepare(project, req.overrides, self.base_env())?;
        let limit = req
            .timeout
            .unwrap_or_else(|| Duration::from_secs_f64(self.cfg.timeout_seconds));
        let timed_out = match &self.cfg.backend {
            Backend::Server => self.run_server(&sandbox, req, limit)?,
            Backend::Command { template } => self.run_command(template, &sandbox, req, limit)?,
        };
        let text = fs::read_to_string(sandbox.results_path()).unwrap_or_default();
        let mut runs = collate(&text, req.selected, timed_out, self.cfg.output_cap_bytes)
            .ok_or(HarnessError::SuiteTimeout(limit.as_secs_f64()))?;
        if runs.is_empty() && req.selected.is_none() && !timed_out {
            let log = fs::read_to_string(sandbox.log_path()).unwrap_or_default();
            if !text.contains("\"collected\"") {
                return Err(HarnessError::Runner(tail(&log, 2000)));
            }
        }
        runs.sort_by(|a, b| a.test_id.cmp(&b.test_id));
        Ok(runs)
    }

    fn run_server(&self, sb: &Sandbox, req: &RunRequest, limit: Duration) -> Result<bool, HarnessError> {
        let request = json!({
            "op": "run",
            "workdir": sb.workdir,
            "results": sb.results_path(),
            "log": sb.log_path(),
            "coverage": req.coverage,
            "tests": req.selected.unwrap_or(&[]),
            "timeout": limit.as_secs_f64(),
            "test_timeout": self.cfg.test_timeout_seconds,
        });
        let reply = self
            .pool
            .with(&self.cfg.python, &self.runner_path(), &sb.env, |s| s.request(&request))?;
        match reply.get("status").and_then(Value::as_str) {
            Some("timeout") => Ok(true),
            Some("done") => Ok(false),
            _ => Err(HarnessError::Runner(reply.to_string())),
        }
    }

    fn run_command(&self, template: &[String], sb: &Sandbox, req: &RunRequest, limit: Duration) -> Result<bool, HarnessError> {
        let mut args: Vec<String> = Vec::new();
        for part in template {
            match part.as_str() {
                "{coverage}" => {
                    if req.coverage {
                        args.push("--coverage".into());
                    }
                }
                "{test_timeout}" => {
                    if self.cfg.test_timeout_seconds > 0.0 {
                        args.push("--test-timeout".into());
                        args.push(self.cfg.test_timeout_seconds.to_string());
                    }
                }
                "{selected_tests}" => args.extend(req.selected.unwrap_or(&[]).iter().cloned()),
                _ => args.push(
                    part.replace("{python}", &self.cfg.python)
                        .replace("{runner}", &self.runner_path().to_string_lossy())
                        .replace("{workdir}", &sb.workdir.to_string_lossy())
                        .replace("{results}", &sb.results_path().to_string_lossy()),
                ),
            }
        }
        let Some((program, rest)) = args.split_first() else {
            return Err(HarnessError::CommandNotFound(String::new()));
        };
        let log = fs::File::create(sb.log_path())?;
        let mut child = Command::new(program)
            .args(rest)
            .current_dir(&sb.workdir)
            .env_clear()
            .envs(sb.env.iter().map(|(k, v)| (k, v)))
            .env("PYTHONPATH", &sb.workdir)
            .stdin(Stdio::null())
            .stdout(log.try_clone()?)
            .stderr(log)
            .process_group(0)
            .spawn()
            .map_err(|e| match e.kind() {
                std::io::ErrorKind::NotFound => HarnessError::CommandNotFound(program.clone()),
                _ => HarnessError::Io(e),
            })?;
        let start = Instant::now();
        loop {
            if child.try_wait()?.is_some() {
                return Ok(false);
            }
            if start.elapsed() >= limit {
                let _ = Command::new("kill")
                    .args(["-9", &format!("-{}", child.id())])
                    .stderr(Stdio::null())
                    .status();
                let _ = child.kill();
                child.wait()?;
                return Ok(true);
            }
            std::thread::sleep(Duration::from_millis(2));
        }
    }

    /// Two full runs with coverage. Tests whose outcome differs between the
    /// runs are quarantined and left out of `runs`.
    pub fn baseline(&self, project: &Path) -> Result<Baseline, HarnessError> {
        let first = self.run_suite(project, true)?;
        let second = self.run_suite(project, true)?;
        let second: BTreeMap<&str, Outcome> = second.iter().map(|r| (r.test_id.as_str(), r.outcome)).collect();
        let mut quarantined = Vec::new();
        let mut runs = Vec::new();
        for r in first {
            if second.get(r.test_id.as_str()) == Some(&r.outcome) {
                runs.push(r);
            } else {
                quarantined.push(r.test_id);
            }
        }
        Ok(Baseline { runs, quarantined })
    }

    /// Apply `bug` in a sandbox and rerun the baseline-passing tests that
    /// cover the focal function's body. Accepted iff one of them fails.
    pub fn validate_bug(&self, project: &Path, bug: &InjectedBug, baseline: &Baseline) -> Result<BugVerdict, HarnessError> {
        let file = &bug.original.file_path;
        let text = fs::read_to_string(project.join(file))?;
        let body = body_lines(&text, file, bug.original.line_span)?;
        let covering = covering_tests(baseline.passing(), file, body);
        if covering.is_empty() {
            return Err(HarnessError::NoCoveringTests(format!(
                "{file}::{}",
                bug.original.qualified_name
            )));
        }
        let before = tree_digest(project)?;
        let mutated = splice_lines(&text, bug.original.line_span, &bug.mutated_source);
        let runs = self.run(
            project,
            &RunRequest {
                selected: Some(&covering),
                coverage: false,
                timeout: Some(Duration::from_secs_f64(self.cfg.candidate_timeout_seconds)),
                overrides: &[(file.clone(), mutated)],
            },
        )?;
        if tree_digest(project)? != before {
            return Err(HarnessError::ProjectModified);
        }
        let failing: Vec<TestRun> = runs.iter().filter(|r| r.outcome.is_failing()).cloned().collect();
        if failing.is_empty() {
            Ok(BugVerdict::Rejected {
                reason: RejectReason::StillPassing,
            })
        } else {
            Ok(BugVerdict::Accepted {
                failing,
                rerun: runs.len(),
            })
        }
    }

    /// Compile-check Python source through the runner.
    pub fn check_source(&self, source: &str) -> Result<SyntaxVerdict, HarnessError> {
        if let Backend::Command { .. } = self.cfg.backend {
            return crate::structure::CommandSyntaxChecker::python(&self.cfg.python)
                .check(source)
                .map_err(|e| HarnessError::Runner(e.to_string()));
        }
        let reply = self.pool.with(&self.cfg.python, &self.runner_path(), &self.base_env(), |s| {
            s.request(&json!({"op": "check", "source": source}))
        })?;
        if reply.get("ok") == Some(&Value::Bool(true)) {
            return Ok(SyntaxVerdict::Ok);
        }
        Ok(SyntaxVerdict::Failure {
            line: reply.get("line").and_then(Value::as_u64).map(|l| l as usize),
            message: reply.get("message").and_then(Value::as_str).unwrap_or("").to_string(),
        })
    }
}

impl SyntaxChecker for Harness {
    fn check(&self, source: &str) -> Result<SyntaxVerdict, SyntaxCheckError> {
        self.check_source(source).map_err(|e| match e {
            HarnessError::CommandNotFound(p) => SyntaxCheckError::ToolUnavailable(p),
            HarnessError::Io(e) => SyntaxCheckError::Io(e),
            other => SyntaxCheckError::Io(std::io::Error::other(other.to_string())),
        })
    }
}

/// Convenience wrapper: a one-off harness running the whole suite.
pub fn run_suite(project: &Path, cfg: &SandboxConfig, coverage: bool) -> Result<Vec<TestRun>, HarnessError> {
    Harness::new(cfg.clone())?.run_suite(project, coverage)
}

/// Body lines of the function occupying `span` in `text`: everything after
/// the signature, or the signature line itself for one-liners.
pub fn body_lines(text: &str, file: &str, span: LineSpan) -> Result<LineSpan, HarnessError> {
    let index = index_file(file, text).map_err(|e| HarnessError::Structure(e.to_string()))?;
    let f = index
        .all_functions()
        .into_iter()
        .find(|f| f.span() == span)
        .ok_or_else(|| HarnessError::Structure(format!("no function spans {}-{} in {file}", span.start, span.end)))?;
    Ok(f.body_span)
}

/// Ids of runs whose coverage of `file` intersects `lines`.
pub fn covering_tests<'a>(runs: impl IntoIterator<Item = &'a TestRun>, file: &str, lines: LineSpan) -> Vec<String> {
    runs.into_iter()
        .filter(|r| r.covers(file, lines))
        .map(|r| r.test_id.clone())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageMatrix {
    pub file: String,
    /// Line to (failed, passed) counts.
    pub lines: BTreeMap<usize, (usize, usize)>,
    pub total_failed: usize,
}

/// Per-line failing and passing counts for `file`. Skipped runs are ignored.
pub fn coverage_matrix(runs: &[TestRun], file: &str) -> CoverageMatrix {
    let mut lines: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    let mut total_failed = 0;
    for r in runs.iter().filter(|r| r.outcome != Outcome::Skipped) {
        let failing = r.outcome.is_failing();
        if failing {
            total_failed += 1;
        }
        let Some(set) = r.executed_lines.as_ref().and_then(|m| m.get(file)) else {
            continue;
        };
        for &l in set {
            let e = lines.entry(l).or_default();
            if failing {
                e.0 += 1;
            } else {
                e.1 += 1;
            }
        }
    }
    CoverageMatrix {
        file: file.to_string(),
        lines,
        total_failed,
    }
}

fn tail(s: &str, n: usize) -> String {
    let start = s.len().saturating_sub(n);
    let start = (start..s.len()).find(|&i| s.is_char_boundary(i)).unwrap_or(s.len());
    s[start..].to_string()
}

fn cap(mut s: String, n: usize) -> String {
    if s.len() > n {
        let mut end = n;
        while !s.is_char_boundary(end) {
            end -= 1;
        }
        s.truncate(end);
    }
    s
}

/// Turn the runner's JSON lines into test runs. `None` when the session
/// timed out before collection finished.
fn collate(text: &str, selected: Option<&[String]>, timed_out: bool, cap_bytes: usize) -> Option<Vec<TestRun>> {
    let mut collected: Option<Vec<String>> = None;
    let mut started: BTreeSet<String> = BTreeSet::new();
    let mut ended: BTreeMap<String, TestRun> = BTreeMap::new();
    let mut collect_errors: Vec<(String, String)> = Vec::new();
    for line in text.lines() {
        let Ok(ev) = serde_json::from_str::<Value>(line) else {
            continue;
        };
        let s = |k: &str| ev.get(k).and_then(Value::as_str).unwrap_or("").to_string();
        match ev.get("event").and_then(Value::as_str) {
            Some("collected") => {
                collected = Some(
                    ev["tests"]
                        .as_array()
                        .map(|a| a.iter().filter_map(|t| t.as_str().map(String::from)).collect())
                        .unwrap_or_default(),
                )
            }
            Some("collect_error") => collect_errors.push((s("nodeid"), s("trace"))),
            Some("start") => {
                started.insert(s("test_id"));
            }
            Some("end") => {
                let outcome = match s("outcome").as_str() {
                    "pass" => Outcome::Pass,
                    "fail" => Outcome::Fail,
                    "skipped" => Outcome::Skipped,
                    "timeout" => Outcome::Timeout,
                    _ => Outcome::Error,
                };
                let executed_lines = ev.get("executed_lines").and_then(|m| {
                    serde_json::from_value::<BTreeMap<String, BTreeSet<usize>>>(m.clone()).ok()
                });
                let raw_trace = if outcome == Outcome::Pass {
                    String::new()
                } else {
                    cap(s("raw_trace"), cap_bytes)
                };
                ended.insert(
                    s("test_id"),
                    TestRun {
                        test_id: s("test_id"),
                        outcome,
                        duration: ev.get("duration").and_then(Value::as_f64).unwrap_or(0.0),
                        executed_lines,
                        raw_trace,
                    },
                );
            }
            _ => {}
        }
    }
    if timed_out && collected.is_none() {
        return None;
    }
    let collected = collected.unwrap_or_default();
    let mut runs: Vec<TestRun> = Vec::new();
    for id in &collected {
        if let Some(r) = ended.remove(id) {
            runs.push(r);
        } else {
            let outcome = if timed_out { Outcome::Timeout } else { Outcome::Error };
            let note = if started.contains(id) {
                "test did not finish before the time limit"
            } else {
                "test did not start before the time limit"
            };
            runs.push(TestRun::synthetic(id, outcome, note.into()));
        }
    }
    let collect_text: String = collect_errors
        .iter()
        .map(|(_, t)| t.as_str())
        .collect::<Vec<_>>()
        .join("\n");
    match selected {
        Some(sel) => {
            for id in sel {
                if !collected.contains(id) {
                    let trace = if collect_text.is_empty() {
                        "test was not collected".to_string()
                    } else {
                        cap(collect_text.clone(), cap_bytes)
                    };
                    runs.push(TestRun::synthetic(id, Outcome::Error, trace));
                }
            }
        }
        None => {
            for (nodeid, trace) in collect_errors {
                runs.push(TestRun::synthetic(&nodeid, Outcome::Error, cap(trace, cap_bytes)));
            }
        }
    }
    Some(runs)
}

/// Read a file capped at `limit` bytes.
pub fn read_capped(path: &Path, limit: usize) -> std::io::Result<String> {
    let mut buf = Vec::new();
    fs::File::open(path)?.take(limit as u64).read_to_end(&mut buf)?;
    Ok(String::from_utf8_lossy(&buf).into_owned())
}

/// Write `files` (relative path, contents) under `root`, creating parents.
pub fn write_tree(root: &Path, files: &[(&str, &str)]) -> std::io::Result<()> {
    for (rel, text) in files {
        let p = root.join(rel);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::File::create(&p)?.write_all(text.as_bytes())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests;
