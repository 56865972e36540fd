//! Fault localization: DStar statement scoring over a coverage matrix and a
//! recency ranking of functions from a failure trace.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::io::Write;
use std::path::{Component, Path};
use std::sync::OnceLock;

use globset::{Glob, GlobSet, GlobSetBuilder};
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harness::{CoverageMatrix, Outcome, TestRun};
use crate::lex::is_keyword;
use crate::structure::{index_file, FunctionInfo, SourceIndex};
use crate::trace::ParsedTrace;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DStarParams {
    pub e: f64,
}

impl Default for DStarParams {
    fn default() -> Self {
        Self { e: 2.0 }
    }
}

/// `failed^e / (passed + totalfailed - failed)`. A zero denominator yields
/// `f64::INFINITY` unless `failed` is also zero, which scores 0.
pub fn dstar_score(failed: usize, passed: usize, total_failed: usize, p: DStarParams) -> f64 {
    debug_assert!(failed <= total_failed);
    if failed == 0 {
        return 0.0;
    }
    let denom = passed + (total_failed - failed);
    if denom == 0 {
        return f64::INFINITY;
    }
    let f = failed as f64;
    let num = if p.e.fract() == 0.0 && p.e.abs() < i32::MAX as f64 {
        f.powi(p.e as i32)
    } else {
        f.powf(p.e)
    };
    num / denom as f64
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Unit {
    Statement { file_path: String, line: usize },
    Function { file_path: String, qualified_name: String, line: usize },
}

impl Unit {
    pub fn file_path(&self) -> &str {
        match self {
            Unit::Statement { file_path, .. } | Unit::Function { file_path, .. } => file_path,
        }
    }

    pub fn line(&self) -> usize {
        match self {
            Unit::Statement { line, .. } | Unit::Function { line, .. } => *line,
        }
    }
}

impl std::fmt::Display for Unit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Unit::Statement { file_path, line } => write!(f, "{file_path}:{line}"),
            Unit::Function { file_path, qualified_name, .. } => write!(f, "{file_path}::{qualified_name}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredStatement {
    pub file_path: String,
    pub line: usize,
    pub failed: usize,
    pub passed: usize,
    #[serde(with = "score_serde")]
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suspect {
    pub unit: Unit,
    #[serde(with = "score_serde")]
    pub score: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SuspectRanking {
    pub entries: Vec<Suspect>,
}

impl SuspectRanking {
    /// Sort by score descending, then file and line ascending.
    fn from_unsorted(mut entries: Vec<Suspect>) -> Self {
        entries.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.unit.file_path().cmp(b.unit.file_path()))
                .then_with(|| a.unit.line().cmp(&b.unit.line()))
        });
        Self { entries }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Function units in rank order.
    pub fn functions(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().filter_map(|s| match &s.unit {
            Unit::Function { file_path, qualified_name, .. } => Some((file_path.as_str(), qualified_name.as_str())),
            Unit::Statement { .. } => None,
        })
    }

    /// One `{"rank", "unit", "score"}` object per line, rank from 1.
    pub fn write_jsonl(&self, mut out: impl Write) -> std::io::Result<()> {
        for (i, s) in self.entries.iter().enumerate() {
            let row = serde_json::json!({
                "rank": i + 1,
                "unit": s.unit,
                "score": score_serde::to_value(s.score),
            });
            writeln!(out, "{row}")?;
        }
        Ok(())
    }
}

/// Scores are finite reals or the string `"inf"`.
mod score_serde {
    use serde::{Deserialize, Deserializer, Serializer};
    use serde_json::Value;

    pub fn to_value(x: f64) -> Value {
        if x.is_infinite() {
            Value::from("inf")
        } else {
            Value::from(x)
        }
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*x)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Value::deserialize(d)? {
            Value::String(s) if s == "inf" => Ok(f64::INFINITY),
            Value::Number(n) => n.as_f64().ok_or_else(|| serde::de::Error::custom("bad score")),
            other => Err(serde::de::Error::custom(format!("bad score {other}"))),
        }
    }
}

/// One matrix per file that any run executed.
pub fn project_matrices(runs: &[TestRun]) -> Vec<CoverageMatrix> {
    let counted: Vec<&TestRun> = runs.iter().filter(|r| r.outcome != Outcome::Skipped).collect();
    let total_failed = counted.iter().filter(|r| r.outcome.is_failing()).count();
    let mut by_file: BTreeMap<String, BTreeMap<usize, (usize, usize)>> = BTreeMap::new();
    for r in counted {
        let Some(sets) = &r.executed_lines else { continue };
        for (file, lines) in sets {
            let m = by_file.entry(file.clone()).or_default();
            for &l in lines {
                let e = m.entry(l).or_default();
                if r.outcome.is_failing() {
                    e.0 += 1;
                } else {
                    e.1 += 1;
                }
            }
        }
    }
    by_file
        .into_iter()
        .map(|(file, lines)| CoverageMatrix { file, lines, total_failed })
        .collect()
}

pub fn score_statements(matrices: &[CoverageMatrix], p: DStarParams) -> Vec<ScoredStatement> {
    let mut out = Vec::new();
    for m in matrices {
        for (&line, &(failed, passed)) in &m.lines {
            out.push(ScoredStatement {
                file_path: m.file.clone(),
                line,
                failed,
                passed,
                score: dstar_score(failed, passed, m.total_failed, p),
            });
        }
    }
    out
}

/// Every covered statement, most suspicious first.
pub fn rank_statements(matrices: &[CoverageMatrix], p: DStarParams) -> SuspectRanking {
    SuspectRanking::from_unsorted(
        score_statements(matrices, p)
            .into_iter()
            .map(|s| Suspect {
                unit: Unit::Statement { file_path: s.file_path, line: s.line },
                score: s.score,
            })
            .collect(),
    )
}

/// Lift a statement ranking to functions, scoring each by its best line.
pub fn rank_functions_by_statements(ranking: &SuspectRanking, project: &ProjectIndex) -> SuspectRanking {
    let mut best: BTreeMap<Unit, f64> = BTreeMap::new();
    for s in &ranking.entries {
        let Unit::Statement { file_path, line } = &s.unit else { continue };
        if project.is_test(file_path) {
            continue;
        }
        let Some(f) = project.get(file_path).and_then(|idx| idx.function_at_line(*line)) else {
            continue;
        };
        let unit = Unit::Function {
            file_path: file_path.clone(),
            qualified_name: f.qualified_name.clone(),
            line: f.signature_span.start,
        };
        let e = best.entry(unit).or_insert(f64::NEG_INFINITY);
        if s.score > *e {
            *e = s.score;
        }
    }
    SuspectRanking::from_unsorted(best.into_iter().map(|(unit, score)| Suspect { unit, score }).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LocalizeConfig {
    /// Paths that are never the developer's own code.
    pub exclude: Vec<String>,
    /// Test modules; their frames contribute only the project calls they make.
    pub test_globs: Vec<String>,
}

impl Default for LocalizeConfig {
    fn default() -> Self {
        Self {
            exclude: [
                "**/site-packages/**",
                "**/dist-packages/**",
                "**/.venv/**",
                "**/venv/**",
                ".venv/**",
                "venv/**",
                "**/.tox/**",
                "**/node_modules/**",
            ]
            .map(String::from)
            .to_vec(),
            test_globs: ["**/test_*.py", "test_*.py", "**/*_test.py", "*_test.py", "tests/**", "**/tests/**", "**/conftest.py", "conftest.py"]
                .map(String::from)
                .to_vec(),
        }
    }
}

#[derive(Debug, Error)]
pub enum LocalizeError {
    #[error("invalid glob: {0}")]
    Glob(#[from] globset::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("no trace frame lies in project code")]
    NoProjectFrames { fallback: SuspectRanking },
}

fn glob_set(patterns: &[String]) -> Result<GlobSet, globset::Error> {
    let mut b = GlobSetBuilder::new();
    for p in patterns {
        b.add(Glob::new(p)?);
    }
    b.build()
}

/// Parsed Python sources of a project, keyed by `/`-separated relative path.
#[derive(Debug, Clone)]
pub struct ProjectIndex {
    files: BTreeMap<String, SourceIndex>,
    tests: BTreeSet<String>,
    exclude: GlobSet,
}

impl ProjectIndex {
    /// Index every parseable `.py` file under `root` outside the excluded
    /// paths and hidden directories.
    pub fn load(root: &Path, cfg: &LocalizeConfig) -> Result<Self, LocalizeError> {
        let exclude = glob_set(&cfg.exclude)?;
        let tests = glob_set(&cfg.test_globs)?;
        let mut paths = Vec::new();
        walk(root, root, &exclude, &mut paths)?;
        let mut out = Self {
            files: BTreeMap::new(),
            tests: BTreeSet::new(),
            exclude,
        };
        for rel in paths {
            let Ok(text) = fs::read_to_string(root.join(&rel)) else { continue };
            let Ok(idx) = index_file(&rel, &text) else { continue };
            if tests.is_match(&rel) {
                out.tests.insert(rel.clone());
            }
            out.files.insert(rel, idx);
        }
        Ok(out)
    }

    /// Build from already parsed sources.
    pub fn from_sources(files: Vec<SourceIndex>, cfg: &LocalizeConfig) -> Result<Self, LocalizeError> {
        let tests = glob_set(&cfg.test_globs)?;
        Ok(Self {
            tests: files.iter().filter(|f| tests.is_match(&f.file_path)).map(|f| f.file_path.clone()).collect(),
            files: files.into_iter().map(|f| (f.file_path.clone(), f)).collect(),
            exclude: glob_set(&cfg.exclude)?,
        })
    }

    pub fn get(&self, rel: &str) -> Option<&SourceIndex> {
        self.files.get(rel)
    }

    pub fn is_test(&self, rel: &str) -> bool {
        self.tests.contains(rel)
    }

    pub fn files(&self) -> impl Iterator<Item = &SourceIndex> {
        self.files.values()
    }

    /// Map a trace path onto an indexed project file.
    pub fn resolve(&self, root: &Path, path: &str) -> Option<String> {
        let p = Path::new(path);
        let rel = if p.is_absolute() {
            let canon_root = root.canonicalize().unwrap_or_else(|_| root.to_path_buf());
            p.strip_prefix(&canon_root).or_else(|_| p.strip_prefix(root)).ok()?.to_path_buf()
        } else {
            p.to_path_buf()
        };
        let mut parts = Vec::new();
        for c in rel.components() {
            match c {
                Component::Normal(s) => parts.push(s.to_str()?.to_string()),
                Component::CurDir => {}
                _ => return None,
            }
        }
        let rel = parts.join("/");
        if self.exclude.is_match(&rel) {
            return None;
        }
        self.files.contains_key(&rel).then_some(rel)
    }
}

fn walk(root: &Path, dir: &Path, exclude: &GlobSet, out: &mut Vec<String>) -> std::io::Result<()> {
    let mut entries: Vec<_> = fs::read_dir(dir)?.collect::<Result<_, _>>()?;
    entries.sort_by_key(|e| e.file_name());
    for e in entries {
        let name = e.file_name();
        let name = name.to_string_lossy();
        if name.starts_with('.') || name == "__pycache__" {
            continue;
        }
        let path = e.path();
        let rel = path
            .strip_prefix(root)
            .expect("walk stays under root")
            .components()
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .collect::<Vec<_>>()
            .join("/");
        if exclude.is_match(&rel) {
            continue;
        }
        let ft = e.file_type()?;
        if ft.is_dir() {
            walk(root, &path, exclude, out)?;
        } else if ft.is_file() && name.ends_with(".py") {
            out.push(rel);
        }
    }
    Ok(())
}

fn call_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(\.)?\b([A-Za-z_][A-Za-z0-9_]*)\s*\(").unwrap())
}

/// Special methods reached through a builtin call.
const BUILTIN_DUNDERS: [(&str, &str); 7] = [
    ("repr", "__repr__"),
    ("str", "__str__"),
    ("len", "__len__"),
    ("hash", "__hash__"),
    ("iter", "__iter__"),
    ("bool", "__bool__"),
    ("format", "__format__"),
];

fn operator_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"==|!=|\bnot in\b|\bin\b").unwrap())
}

/// Project functions a source line calls, in call order, then the special
/// methods its comparisons may dispatch to. `Name(` resolves to functions
/// named `Name` or to `Name.__init__`; `.m(` to methods `m`; `repr(` and
/// similar builtins to the matching special method.
fn callees(line: &str, project: &ProjectIndex) -> Vec<Unit> {
    let mut out = Vec::new();
    let push_matching = |out: &mut Vec<Unit>, pred: &dyn Fn(&FunctionInfo) -> bool| {
        for idx in project.files().filter(|f| !project.is_test(&f.file_path)) {
            for f in idx.all_functions() {
                if pred(f) {
                    out.push(Unit::Function {
                        file_path: idx.file_path.clone(),
                        qualified_name: f.qualified_name.clone(),
                        line: f.signature_span.start,
                    });
                }
            }
        }
    };
    for c in call_re().captures_iter(line) {
        let name = &c[2];
        if is_keyword(name) {
            continue;
        }
        if c.get(1).is_some() {
            push_matching(&mut out, &|f| f.parent_class.is_some() && f.name() == name);
            continue;
        }
        push_matching(&mut out, &|f| {
            (f.parent_class.is_none() && f.name() == name) || (f.parent_class.as_deref() == Some(name) && f.name() == "__init__")
        });
        if let Some((_, dunder)) = BUILTIN_DUNDERS.iter().find(|(b, _)| *b == name) {
            push_matching(&mut out, &|f| f.parent_class.is_some() && f.name() == *dunder);
        }
    }
    let code = line.split('#').next().unwrap_or("");
    for m in operator_re().find_iter(code) {
        let dunders: &[&str] = match m.as_str() {
            "==" => &["__eq__"],
            "!=" => &["__ne__", "__eq__"],
            _ => &["__contains__"],
        };
        for d in dunders {
            push_matching(&mut out, &|f| f.parent_class.is_some() && f.name() == *d);
        }
    }
    out
}

/// Project functions called from the body of `unit`.
fn body_callees(unit: &Unit, project: &ProjectIndex) -> Vec<Unit> {
    let Unit::Function { file_path, qualified_name, .. } = unit else {
        return Vec::new();
    };
    let Some(idx) = project.get(file_path) else {
        return Vec::new();
    };
    let Some(f) = idx.all_functions().into_iter().find(|f| &f.qualified_name == qualified_name) else {
        return Vec::new();
    };
    idx.text_of(f.body_span).lines().flat_map(|l| callees(l, project)).collect()
}

/// Rank the project functions on a failure trace, most recently called
/// first. Frames outside the project are dropped. A frame in a test module
/// stands for the project functions called on its executing line, then on
/// the lines above it. Functions called from the bodies of the ranked ones
/// follow. Repeated functions keep their most recent rank.
pub fn rank_functions_by_trace(t: &ParsedTrace, root: &Path, project: &ProjectIndex) -> Result<SuspectRanking, LocalizeError> {
    let mut order: Vec<Unit> = Vec::new();
    for frame in t.frames.iter().rev() {
        let Some(rel) = project.resolve(root, &frame.footer.file_path) else {
            continue;
        };
        if project.is_test(&rel) {
            let marked = frame.head_lines.iter().rposition(|l| l.starts_with('>'));
            let upto = marked.map_or(frame.head_lines.len(), |i| i + 1);
            for line in frame.head_lines[..upto].iter().rev() {
                order.extend(callees(line.trim_start_matches('>'), project));
            }
            continue;
        }
        let idx = project.get(&rel).expect("resolved paths are indexed");
        if let Some(f) = idx.function_at_line(frame.footer.line_number) {
            order.push(Unit::Function {
                file_path: rel,
                qualified_name: f.qualified_name.clone(),
                line: f.signature_span.start,
            });
        }
    }
    let mut seen = HashSet::new();
    order.retain(|u| seen.insert(u.clone()));
    let direct = order.len();
    for i in 0..direct {
        for u in body_callees(&order[i].clone(), project) {
            if seen.insert(u.clone()) {
                order.push(u);
            }
        }
    }
    if order.is_empty() {
        let fallback = t
            .frames
            .iter()
            .rev()
            .map(|f| Unit::Statement {
                file_path: f.footer.file_path.clone(),
                line: f.footer.line_number,
            })
            .collect::<Vec<_>>();
        return Err(LocalizeError::NoProjectFrames { fallback: recency_ranking(fallback) });
    }
    Ok(recency_ranking(order))
}

/// Score rank `i` (from 0) as `1 / (i + 1)`.
fn recency_ranking(units: Vec<Unit>) -> SuspectRanking {
    let mut seen = HashSet::new();
    SuspectRanking {
        entries: units
            .into_iter()
            .filter(|u| seen.insert(u.clone()))
            .enumerate()
            .map(|(i, unit)| Suspect { unit, score: 1.0 / (i + 1) as f64 })
            .collect(),
    }
}

#[cfg(test)]
mod tests;
