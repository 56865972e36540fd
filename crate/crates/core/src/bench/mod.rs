//! Single-bug benchmarks: construction from validated injected bugs, an
//! on-disk directory-per-case layout, and end-to-end evaluation reports.
//!
//! ```text
//! bench/
//!   index.json              {"cases": ["algos-000", ...]}
//!   algos-000/
//!     manifest.json
//!     project/              buggy project with its tests
//!     reference.py          the fixed focal function
//!     trace.txt             a failing test's trace
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{normalize, MethodRecord};
use crate::harness::{copy_project, covering_tests, BugVerdict, Harness, HarnessError, TestRun};
use crate::localize::{
    project_matrices, rank_functions_by_statements, rank_functions_by_trace, rank_statements, DStarParams,
    LocalizeConfig, LocalizeError, ProjectIndex, Suspect, SuspectRanking, Unit,
};
use crate::mutate::{sample_bug, InjectedBug, OperatorId, OperatorWeights, Site};
use crate::repair::{joint_localize_and_repair, Budgets, JointConfig, LoopOptions, PatchGenerator};
use crate::skeleton::SkeletonConfig;
use crate::structure::{find_function, index_file, splice_lines};
use crate::trace::{parse_trace, render_raw, render_trace, TraceRenderConfig};

pub const INDEX_FILE: &str = "index.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const REFERENCE_FILE: &str = "reference.py";
pub const TRACE_FILE: &str = "trace.txt";
pub const PROJECT_DIR: &str = "project";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseManifest {
    pub case_id: String,
    pub focal_file: String,
    pub focal_function: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_fix_file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_command: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub injected_operator: Option<OperatorId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site: Option<Site>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_project: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchCase {
    pub case_id: String,
    /// The case directory; the project lives in its `project/`.
    pub case_dir: PathBuf,
    pub manifest: CaseManifest,
}

impl BenchCase {
    pub fn project_dir(&self) -> PathBuf {
        self.case_dir.join(PROJECT_DIR)
    }

    pub fn reference_source(&self) -> Result<Option<String>, BenchError> {
        match &self.manifest.reference_fix_file {
            Some(f) => Ok(Some(fs::read_to_string(self.case_dir.join(f))?)),
            None => Ok(None),
        }
    }

    /// The reference fix as a method record located at the buggy focal span.
    pub fn reference_record(&self) -> Result<Option<MethodRecord>, BenchError> {
        let Some(source) = self.reference_source()? else {
            return Ok(None);
        };
        let text = fs::read_to_string(self.project_dir().join(&self.manifest.focal_file))?;
        let idx = index_file(&self.manifest.focal_file, &text).map_err(|e| BenchError::Invalid(e.to_string()))?;
        let f = find_function(&idx, &self.manifest.focal_function).map_err(|e| BenchError::Invalid(e.to_string()))?;
        Ok(Some(MethodRecord {
            repo_id: self.manifest.source_project.clone().unwrap_or_default(),
            file_path: self.manifest.focal_file.clone(),
            qualified_name: self.manifest.focal_function.clone(),
            line_span: f.span(),
            normalized: normalize(&source).unwrap_or_default(),
            source,
        }))
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("only {got} of {wanted} bugs survived validation")]
    InsufficientCoverage { wanted: usize, got: usize },
    #[error("baseline suite has no passing test")]
    NoPassingTests,
    #[error("invalid bench: {0}")]
    Invalid(String),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Localize(#[from] LocalizeError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Serialize, Deserialize)]
struct Index {
    cases: Vec<String>,
}

fn project_name(project: &Path) -> String {
    let canon = project.canonicalize().unwrap_or_else(|_| project.to_path_buf());
    canon
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "project".into())
}

/// Inject and validate `n_cases` bugs into `project`, writing one case
/// directory per bug under `out_dir` and merging their ids into its index.
/// Deterministic under `seed`.
pub fn build_bench_from_mutations(
    harness: &Harness,
    project: &Path,
    out_dir: &Path,
    n_cases: usize,
    weights: &OperatorWeights,
    seed: u64,
) -> Result<Vec<BenchCase>, BenchError> {
    let bugs = inject_validated_bugs(harness, project, n_cases, weights, seed)?;
    write_cases(project, out_dir, &bugs)
}

/// An injected bug that fails at least one previously passing test.
#[derive(Debug, Clone)]
pub struct ValidatedBug {
    pub bug: InjectedBug,
    pub failing: Vec<TestRun>,
}

/// Sample and validate `n_cases` distinct bugs over the covered functions
/// of `project`.
pub fn inject_validated_bugs(
    harness: &Harness,
    project: &Path,
    n_cases: usize,
    weights: &OperatorWeights,
    seed: u64,
) -> Result<Vec<ValidatedBug>, BenchError> {
    if n_cases == 0 {
        return Ok(Vec::new());
    }
    let baseline = harness.baseline(project)?;
    if baseline.passing().next().is_none() {
        return Err(BenchError::NoPassingTests);
    }
    let name = project_name(project);
    let index = ProjectIndex::load(project, &LocalizeConfig::default())?;
    let mut pool: Vec<MethodRecord> = Vec::new();
    for idx in index.files().filter(|f| !index.is_test(&f.file_path)) {
        for f in idx.all_functions() {
            if covering_tests(baseline.passing(), &idx.file_path, f.body_span).is_empty() {
                continue;
            }
            if let Ok(r) = MethodRecord::from_index(&name, idx, f) {
                pool.push(r);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pool.shuffle(&mut rng);
    let mut accepted: Vec<ValidatedBug> = Vec::new();
    let mut seen: BTreeSet<(String, String, String)> = BTreeSet::new();
    let max_attempts = n_cases * 10 + pool.len() * 2;
    let mut attempt = 0;
    while accepted.len() < n_cases && attempt < max_attempts && !pool.is_empty() {
        let original = &pool[attempt % pool.len()];
        attempt += 1;
        let bug_seed = rng.gen::<u64>();
        let Some(bug) = sample_bug(original, weights, bug_seed, harness).map_err(|e| BenchError::Invalid(e.to_string()))? else {
            continue;
        };
        let key = (bug.original.file_path.clone(), bug.original.qualified_name.clone(), bug.mutated_normalized());
        if seen.contains(&key) {
            continue;
        }
        match harness.validate_bug(project, &bug, &baseline)? {
            BugVerdict::Accepted { failing, .. } => {
                seen.insert(key);
                accepted.push(ValidatedBug { bug, failing });
            }
            BugVerdict::Rejected { .. } => {}
        }
    }
    if accepted.len() < n_cases {
        return Err(BenchError::InsufficientCoverage {
            wanted: n_cases,
            got: accepted.len(),
        });
    }
    Ok(accepted)
}

/// Materialize validated bugs as case directories under `out_dir` and
/// merge them into its index.
pub fn write_cases(project: &Path, out_dir: &Path, bugs: &[ValidatedBug]) -> Result<Vec<BenchCase>, BenchError> {
    if bugs.is_empty() {
        return Ok(Vec::new());
    }
    let name = project_name(project);
    fs::create_dir_all(out_dir)?;
    let mut cases = Vec::new();
    for (k, ValidatedBug { bug, failing }) in bugs.iter().enumerate() {
        let case_id = format!("{name}-{k:03}");
        let case_dir = out_dir.join(&case_id);
        if case_dir.exists() {
            fs::remove_dir_all(&case_dir)?;
        }
        copy_project(project, &case_dir.join(PROJECT_DIR))?;
        let file = &bug.original.file_path;
        let text = fs::read_to_string(project.join(file))?;
        fs::write(
            case_dir.join(PROJECT_DIR).join(file),
            splice_lines(&text, bug.original.line_span, &bug.mutated_source),
        )?;
        fs::write(case_dir.join(REFERENCE_FILE), &bug.original.source)?;
        fs::write(case_dir.join(TRACE_FILE), &failing[0].raw_trace)?;
        let manifest = CaseManifest {
            case_id: case_id.clone(),
            focal_file: file.clone(),
            focal_function: bug.original.qualified_name.clone(),
            reference_fix_file: Some(REFERENCE_FILE.into()),
            test_command: None,
            injected_operator: Some(bug.operator),
            site: Some(bug.site),
            seed: Some(bug.seed),
            source_project: Some(name.clone()),
        };
        fs::write(case_dir.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)? + "\n")?;
        cases.push(BenchCase {
            case_id,
            case_dir,
            manifest,
        });
    }
    let mut ids: BTreeSet<String> = read_index(out_dir).unwrap_or_default().into_iter().collect();
    ids.extend(cases.iter().map(|c| c.case_id.clone()));
    write_index(out_dir, &ids.into_iter().collect::<Vec<_>>())?;
    Ok(cases)
}

fn read_index(dir: &Path) -> Result<Vec<String>, BenchError> {
    let index: Index = serde_json::from_str(&fs::read_to_string(dir.join(INDEX_FILE))?)?;
    Ok(index.cases)
}

pub fn write_index(dir: &Path, case_ids: &[String]) -> Result<(), BenchError> {
    let index = Index { cases: case_ids.to_vec() };
    fs::write(dir.join(INDEX_FILE), serde_json::to_string_pretty(&index)? + "\n")?;
    Ok(())
}

/// Read every case listed in `dir`'s index.
pub fn load_bench(dir: &Path) -> Result<Vec<BenchCase>, BenchError> {
    let ids = read_index(dir).map_err(|e| BenchError::Invalid(format!("{}: {e}", dir.join(INDEX_FILE).display())))?;
    let mut cases = Vec::new();
    for id in ids {
        let case_dir = dir.join(&id);
        let manifest: CaseManifest = serde_json::from_str(&fs::read_to_string(case_dir.join(MANIFEST_FILE))?)?;
        if manifest.case_id != id {
            return Err(BenchError::Invalid(format!("manifest id `{}` under `{id}`", manifest.case_id)));
        }
        if !case_dir.join(PROJECT_DIR).is_dir() {
            return Err(BenchError::Invalid(format!("{id}: missing {PROJECT_DIR}/")));
        }
        cases.push(BenchCase { case_id: id, case_dir, manifest });
    }
    Ok(cases)
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub budgets: Budgets,
    pub k_values: Vec<usize>,
    pub skeleton: SkeletonConfig,
    pub trace: TraceRenderConfig,
    /// Pass the rendered failing trace to the generator.
    pub use_trace: bool,
    pub localize: LocalizeConfig,
    pub dstar: DStarParams,
    pub jobs: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            budgets: Budgets::default(),
            k_values: vec![1, 10, 100],
            skeleton: SkeletonConfig::default(),
            trace: TraceRenderConfig::default(),
            use_trace: true,
            localize: LocalizeConfig::default(),
            dstar: DStarParams::default(),
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CaseRow {
    pub case_id: String,
    pub operator: Option<OperatorId>,
    /// 1-based rank of the true focal function on the trace heuristic alone.
    pub trace_rank: Option<usize>,
    /// 1-based rank in the ranking handed to repair.
    pub rank: Option<usize>,
    pub suspects_tried: usize,
    /// Some test-adequate patch was found.
    pub fixed: bool,
    pub verbatim: bool,
    pub plausible_only: bool,
    pub fixed_function: Option<String>,
    pub first_fix_index: Option<usize>,
    pub first_verbatim_index: Option<usize>,
    pub plausible_at: BTreeMap<usize, bool>,
    pub verbatim_at: BTreeMap<usize, bool>,
    pub n_validated: usize,
    pub elapsed: f64,
    pub patch: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub n_cases: usize,
    pub n_fixed: usize,
    pub n_plausible_only: usize,
    pub n_verbatim: usize,
    /// verbatim / (verbatim + plausible_only); absent with no fixes.
    pub true_positive_proxy_rate: Option<f64>,
    pub plausible_at: BTreeMap<usize, usize>,
    pub verbatim_at: BTreeMap<usize, usize>,
    pub trace_top1: usize,
    pub n_errors: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<CaseRow>,
    pub aggregates: Aggregates,
}

impl BenchReport {
    pub fn from_rows(mut rows: Vec<CaseRow>, k_values: &[usize]) -> Self {
        rows.sort_by(|a, b| a.case_id.cmp(&b.case_id));
        let aggregates = Self::aggregate(&rows, k_values);
        Self { rows, aggregates }
    }

    pub fn aggregate(rows: &[CaseRow], k_values: &[usize]) -> Aggregates {
        let count = |p: &dyn Fn(&CaseRow) -> bool| rows.iter().filter(|r| p(r)).count();
        let n_verbatim = count(&|r| r.verbatim);
        let n_plausible_only = count(&|r| r.plausible_only);
        let at = |pick: &dyn Fn(&CaseRow) -> &BTreeMap<usize, bool>| {
            k_values
                .iter()
                .map(|&k| (k, rows.iter().filter(|r| pick(r).get(&k).copied().unwrap_or(false)).count()))
                .collect()
        };
        Aggregates {
            n_cases: rows.len(),
            n_fixed: count(&|r| r.fixed),
            n_plausible_only,
            n_verbatim,
            true_positive_proxy_rate: (n_verbatim + n_plausible_only > 0)
                .then(|| n_verbatim as f64 / (n_verbatim + n_plausible_only) as f64),
            plausible_at: at(&|r| &r.plausible_at),
            verbatim_at: at(&|r| &r.verbatim_at),
            trace_top1: count(&|r| r.trace_rank == Some(1)),
            n_errors: count(&|r| r.error.is_some()),
        }
    }

    /// Aggregates agree with a recomputation from the rows.
    pub fn is_consistent(&self) -> bool {
        let ks: Vec<usize> = self.aggregates.plausible_at.keys().copied().collect();
        Self::aggregate(&self.rows, &ks) == self.aggregates
    }

    /// Aligned text: the fix summary, then success within the first k
    /// samples.
    pub fn table(&self) -> String {
        let a = &self.aggregates;
        let rate = a
            .true_positive_proxy_rate
            .map_or("-".to_string(), |r| format!("{:.1}%", r * 100.0));
        let mut s = String::new();
        let rows = [
            ("Number of Bugs", a.n_cases.to_string()),
            ("Number of Bugs Fixed", a.n_fixed.to_string()),
            ("Plausible, Not Verbatim", a.n_plausible_only.to_string()),
            ("True Positive Proxy Rate", rate),
            ("Number of Verbatim Fixes", a.n_verbatim.to_string()),
            ("Trace Localization Top-1", a.trace_top1.to_string()),
        ];
        for (label, value) in rows {
            let _ = writeln!(s, "{label:<26}{value:>10}");
        }
        let pct = |n: usize| {
            if a.n_cases == 0 {
                "-".to_string()
            } else {
                format!("{:.1}%", 100.0 * n as f64 / a.n_cases as f64)
            }
        };
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<10}{:>14}{:>14}", "k", "Plausible@k", "Verbatim@k");
        for (k, n) in &a.plausible_at {
            let v = a.verbatim_at.get(k).copied().unwrap_or(0);
            let _ = writeln!(s, "{:<10}{:>14}{:>14}", format!("Top-{k}"), pct(*n), pct(v));
        }
        s
    }
}

/// Suspects for a failing project: functions on the first failing trace in
/// recency order, then the remaining functions by DStar score. Returns the
/// ranking and the trace-only ranking.
pub fn suspects_for(
    project: &Path,
    runs: &[TestRun],
    cfg: &LocalizeConfig,
    dstar: DStarParams,
) -> Result<(SuspectRanking, SuspectRanking), BenchError> {
    let index = ProjectIndex::load(project, cfg)?;
    let trace_ranking = runs
        .iter()
        .find(|r| r.outcome.is_failing() && !r.raw_trace.is_empty())
        .and_then(|r| parse_trace(&r.raw_trace).ok())
        .and_then(|t| rank_functions_by_trace(&t, project, &index).ok())
        .unwrap_or_default();
    let sbfl = rank_functions_by_statements(&rank_statements(&project_matrices(runs), dstar), &index);
    let mut entries: Vec<Suspect> = trace_ranking.entries.clone();
    let mut seen: BTreeSet<Unit> = entries.iter().map(|s| s.unit.clone()).collect();
    let floor = entries.last().map_or(1.0, |s| s.score);
    for s in sbfl.entries {
        if seen.insert(s.unit.clone()) {
            // Keep scores non-increasing below the trace suspects.
            let score = floor * 0.5 / (entries.len() + 1) as f64;
            entries.push(Suspect { unit: s.unit, score });
        }
    }
    Ok((SuspectRanking { entries }, trace_ranking))
}

fn rank_of(r: &SuspectRanking, file: &str, name: &str) -> Option<usize> {
    r.functions().position(|(f, n)| f == file && n == name).map(|i| i + 1)
}

/// Run one case end to end. Failures are recorded on the row.
pub fn run_case(harness: &Harness, case: &BenchCase, gen: &mut dyn PatchGenerator, cfg: &BenchConfig) -> CaseRow {
    let mut row = CaseRow {
        case_id: case.case_id.clone(),
        operator: case.manifest.injected_operator,
        ..CaseRow::default()
    };
    if let Err(e) = run_case_into(harness, case, gen, cfg, &mut row) {
        row.error = Some(e.to_string());
    }
    row
}

fn run_case_into(
    harness: &Harness,
    case: &BenchCase,
    gen: &mut dyn PatchGenerator,
    cfg: &BenchConfig,
    row: &mut CaseRow,
) -> Result<(), BenchError> {
    let project = case.project_dir();
    let runs = harness.run_suite(&project, true)?;
    if !runs.iter().any(|r| r.outcome.is_failing()) {
        return Err(BenchError::Invalid(format!("{}: buggy project passes every test", case.case_id)));
    }
    let (ranking, trace_ranking) = suspects_for(&project, &runs, &cfg.localize, cfg.dstar)?;
    let (file, name) = (&case.manifest.focal_file, &case.manifest.focal_function);
    row.trace_rank = rank_of(&trace_ranking, file, name);
    row.rank = rank_of(&ranking, file, name);
    let trace_context = if cfg.use_trace { Some(failing_trace_context(&runs, cfg)?) } else { None };
    let joint = JointConfig {
        skeleton: cfg.skeleton.clone(),
        budgets: cfg.budgets,
        loop_options: LoopOptions {
            k_values: cfg.k_values.clone(),
            stop_at_plausible: false,
        },
        trace_context,
        reference_fix: case.reference_record()?,
    };
    let report = joint_localize_and_repair(harness, &project, &runs, &ranking, gen, &joint)
        .map_err(|e| BenchError::Invalid(e.to_string()))?;
    row.suspects_tried = report.attempts.len();
    row.n_validated = report.attempts.iter().map(|a| a.metrics.n_validated).sum();
    row.elapsed = report.elapsed;
    if let Some(w) = report.winner() {
        let on_focal = &w.file_path == file && &w.qualified_name == name;
        row.fixed = true;
        row.verbatim = on_focal && w.metrics.n_verbatim > 0;
        row.plausible_only = !row.verbatim;
        row.fixed_function = Some(format!("{}::{}", w.file_path, w.qualified_name));
        row.first_fix_index = w.metrics.first_fix_index;
        row.first_verbatim_index = w.metrics.first_verbatim_index;
        row.plausible_at = w.metrics.topk_success.clone();
        row.verbatim_at = w.metrics.verbatim_topk.clone();
        row.patch = w.patch.clone();
    }
    for k in &cfg.k_values {
        row.plausible_at.entry(*k).or_insert(false);
        row.verbatim_at.entry(*k).or_insert(false);
    }
    Ok(())
}

/// The first failing test's trace, rendered within the trace budget.
pub fn failing_trace_context(runs: &[TestRun], cfg: &BenchConfig) -> Result<String, BenchError> {
    let raw = runs
        .iter()
        .find(|r| r.outcome.is_failing())
        .map(|r| r.raw_trace.clone())
        .unwrap_or_default();
    let tok = &cfg.skeleton.tokenizer;
    match parse_trace(&raw) {
        Ok(t) => render_trace(&t, tok, &cfg.trace),
        Err(_) => render_raw(&raw, tok, cfg.trace.budget_tokens),
    }
    .map_err(|e| BenchError::Invalid(e.to_string()))
}

/// Evaluate every case, `cfg.jobs` at a time, each with its own generator.
pub fn run_bench(
    harness: &Harness,
    cases: &[BenchCase],
    make_gen: &(dyn Fn() -> Box<dyn PatchGenerator> + Sync),
    cfg: &BenchConfig,
) -> BenchReport {
    let next = AtomicUsize::new(0);
    let rows = Mutex::new(Vec::new());
    std::thread::scope(|s| {
        for _ in 0..cfg.jobs.max(1).min(cases.len().max(1)) {
            s.spawn(|| {
                let mut gen = make_gen();
                loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some(case) = cases.get(i) else { break };
                    let row = run_case(harness, case, gen.as_mut(), cfg);
                    rows.lock().unwrap().push(row);
                }
            });
        }
    });
    BenchReport::from_rows(rows.into_inner().unwrap(), &cfg.k_values)
}
