//! The generate-and-validate loop: candidate full-function rewrites are
//! generated, deduplicated by normalized text, spliced over the focal
//! function in a sandbox and classified by the tests they pass.

mod generate;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{normalize, MethodRecord};
use crate::harness::{covering_tests, Harness, HarnessError, RunRequest, TestRun};
use crate::localize::{SuspectRanking, Unit};
use crate::mutate::{dedent, reindent};
use crate::skeleton::{build_skeleton, Skeleton, SkeletonConfig, SkeletonError};
use crate::structure::{find_function, index_file, splice_lines, FunctionInfo, SyntaxVerdict};

pub use generate::{
    dedupe, oracle_candidates, Dedupe, ExternalGenerator, GeneratorError, OracleGenerator, PatchGenerator,
    StubGenerator, ORACLE_PRIORS,
};

/// Validations are not started with less time than this left.
const MIN_REMAINING: Duration = Duration::from_millis(10);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Budgets {
    /// Raw samples requested from the generator, counted before dedup.
    pub max_candidates: usize,
    pub wall_clock_seconds: f64,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            max_candidates: 100,
            wall_clock_seconds: 60.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchCandidate {
    /// Full replacement function source.
    pub text: String,
    pub origin: String,
    /// Position in the generator's raw output.
    pub sample_index: usize,
    pub score: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationClass {
    SyntacticallyInvalid,
    StillFailing,
    Plausible,
    Verbatim,
}

impl ValidationClass {
    /// Plausible or verbatim.
    pub fn passes_tests(self) -> bool {
        matches!(self, ValidationClass::Plausible | ValidationClass::Verbatim)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationOutcome {
    pub candidate: PatchCandidate,
    pub class: ValidationClass,
    pub tests_run: usize,
    pub duration: f64,
    pub failing_tests: Vec<String>,
}

#[derive(Debug, Error)]
pub enum RepairError {
    #[error("sandbox failure: {0}")]
    SandboxFailure(#[from] HarnessError),
    #[error("cannot index {0}")]
    Structure(String),
    #[error(transparent)]
    Skeleton(#[from] SkeletonError),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error("empty suspect ranking")]
    NoSuspects,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// One focal function to repair.
#[derive(Debug, Clone)]
pub struct RepairTask {
    pub project: PathBuf,
    pub file_path: String,
    /// The buggy file.
    pub file_text: String,
    pub focal: FunctionInfo,
    pub focal_source: String,
    pub skeleton: Skeleton,
    pub trace_context: Option<String>,
    pub reference_fix: Option<MethodRecord>,
    pub budgets: Budgets,
    /// Tests every candidate is run against.
    pub tests: Vec<String>,
}

impl RepairTask {
    /// Build a task for `qualified_name` in `file_path`. Candidates are
    /// checked against the tests in `runs` that failed or executed the
    /// function body.
    pub fn new(
        project: &Path,
        file_path: &str,
        qualified_name: &str,
        runs: &[TestRun],
        skeleton_cfg: &SkeletonConfig,
        budgets: Budgets,
    ) -> Result<Self, RepairError> {
        let file_text = fs::read_to_string(project.join(file_path))?;
        let index = index_file(file_path, &file_text).map_err(|e| RepairError::Structure(format!("{file_path}: {e}")))?;
        let focal = find_function(&index, qualified_name)
            .map_err(|e| RepairError::Structure(format!("{file_path}: {e}")))?
            .clone();
        let skeleton = match build_skeleton(&index, &focal, None, skeleton_cfg) {
            Err(SkeletonError::BudgetTooSmall { needed, .. }) => {
                // The focal function alone exceeds the budget: send it bare.
                build_skeleton(&index, &focal, None, &SkeletonConfig { budget_tokens: needed, ..skeleton_cfg.clone() })?
            }
            other => other?,
        };
        let mut tests = covering_tests(runs, file_path, focal.body_span);
        for r in runs.iter().filter(|r| r.outcome.is_failing()) {
            if !tests.contains(&r.test_id) {
                tests.push(r.test_id.clone());
            }
        }
        tests.sort();
        Ok(Self {
            project: project.to_path_buf(),
            file_path: file_path.to_string(),
            focal_source: index.function_source(&focal),
            file_text,
            focal,
            skeleton,
            trace_context: None,
            reference_fix: None,
            budgets,
            tests,
        })
    }

    pub fn with_trace(mut self, rendered: Option<String>) -> Self {
        self.trace_context = rendered;
        self
    }

    pub fn with_reference(mut self, reference: Option<MethodRecord>) -> Self {
        self.reference_fix = reference;
        self
    }

    fn indent(&self) -> String {
        dedent(&self.focal_source).1
    }

    /// `text` moved to the focal function's indentation, newline-terminated.
    pub fn conform(&self, text: &str) -> String {
        let (bare, _) = dedent(text);
        let mut out = reindent(&bare, &self.indent());
        if !out.ends_with('\n') {
            out.push('\n');
        }
        out
    }

    /// The buggy file with `candidate` spliced over the focal function.
    pub fn patched_file(&self, candidate: &str) -> String {
        splice_lines(&self.file_text, self.focal.span(), &self.conform(candidate))
    }
}

/// Normalized, dedented function text; the identity used for dedup and
/// verbatim comparison. Text that does not tokenize compares raw.
pub fn function_key(text: &str) -> String {
    let (bare, _) = dedent(text);
    normalize(&bare).unwrap_or_else(|_| bare.trim_end().to_string())
}

/// Splice, syntax-check, and run the task's tests on one candidate.
pub fn validate_candidate(harness: &Harness, task: &RepairTask, c: &PatchCandidate) -> Result<ValidationOutcome, RepairError> {
    validate_within(harness, task, c, Duration::from_secs_f64(harness.cfg.candidate_timeout_seconds))
}

fn validate_within(harness: &Harness, task: &RepairTask, c: &PatchCandidate, limit: Duration) -> Result<ValidationOutcome, RepairError> {
    let started = Instant::now();
    let done = |class, tests_run, failing_tests| ValidationOutcome {
        candidate: c.clone(),
        class,
        tests_run,
        duration: started.elapsed().as_secs_f64(),
        failing_tests,
    };
    if c.text.trim().is_empty() {
        return Ok(done(ValidationClass::SyntacticallyInvalid, 0, Vec::new()));
    }
    let patched = task.patched_file(&c.text);
    if let SyntaxVerdict::Failure { .. } = harness.check_source(&patched)? {
        return Ok(done(ValidationClass::SyntacticallyInvalid, 0, Vec::new()));
    }
    let overrides = [(task.file_path.clone(), patched)];
    let runs = match harness.run(
        &task.project,
        &RunRequest {
            selected: Some(&task.tests),
            coverage: false,
            timeout: Some(limit),
            overrides: &overrides,
        },
    ) {
        Ok(runs) => runs,
        // The candidate hung or crashed the session.
        Err(HarnessError::SuiteTimeout(_)) | Err(HarnessError::Runner(_)) => {
            return Ok(done(ValidationClass::StillFailing, task.tests.len(), task.tests.clone()))
        }
        Err(e) => return Err(e.into()),
    };
    let failing: Vec<String> = runs
        .iter()
        .filter(|r| !matches!(r.outcome, crate::harness::Outcome::Pass | crate::harness::Outcome::Skipped))
        .map(|r| r.test_id.clone())
        .collect();
    let class = if !failing.is_empty() {
        ValidationClass::StillFailing
    } else if task
        .reference_fix
        .as_ref()
        .is_some_and(|r| function_key(&r.source) == function_key(&c.text))
    {
        ValidationClass::Verbatim
    } else {
        ValidationClass::Plausible
    };
    Ok(done(class, runs.len(), failing))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopStatus {
    /// Stopped at the first verbatim fix.
    Verbatim,
    /// Stopped at the first plausible patch.
    Plausible,
    /// Every candidate was validated.
    Exhausted,
    /// The wall-clock budget ran out.
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairMetrics {
    /// A plausible patch was the first raw sample.
    pub top1_success: bool,
    /// k to whether a plausible patch is among the first k raw samples.
    pub topk_success: BTreeMap<usize, bool>,
    /// As `topk_success`, counting verbatim fixes only.
    pub verbatim_topk: BTreeMap<usize, bool>,
    pub n_generated: usize,
    pub n_validated: usize,
    pub n_plausible: usize,
    pub n_verbatim: usize,
    pub n_duplicates_removed: usize,
    /// Raw sample index of the first plausible patch.
    pub first_fix_index: Option<usize>,
    pub first_verbatim_index: Option<usize>,
    pub status: LoopStatus,
    pub elapsed: f64,
}

impl RepairMetrics {
    fn compute(outcomes: &[ValidationOutcome], k_values: &[usize], generated: usize, removed: usize, status: LoopStatus, elapsed: f64) -> Self {
        let first = |pred: &dyn Fn(ValidationClass) -> bool| {
            outcomes
                .iter()
                .filter(|o| pred(o.class))
                .map(|o| o.candidate.sample_index)
                .min()
        };
        let first_fix_index = first(&|c| c.passes_tests());
        let first_verbatim_index = first(&|c| c == ValidationClass::Verbatim);
        let at = |idx: Option<usize>| -> BTreeMap<usize, bool> {
            k_values.iter().map(|&k| (k, idx.is_some_and(|i| i < k))).collect()
        };
        Self {
            top1_success: first_fix_index == Some(0),
            topk_success: at(first_fix_index),
            verbatim_topk: at(first_verbatim_index),
            n_generated: generated,
            n_validated: outcomes.len(),
            n_plausible: outcomes.iter().filter(|o| o.class.passes_tests()).count(),
            n_verbatim: outcomes.iter().filter(|o| o.class == ValidationClass::Verbatim).count(),
            n_duplicates_removed: removed,
            first_fix_index,
            first_verbatim_index,
            status,
            elapsed,
        }
    }

    pub fn success(&self) -> bool {
        self.first_fix_index.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LoopOptions {
    pub k_values: Vec<usize>,
    /// Stop at the first plausible patch instead of the first verbatim one.
    /// Always the case when the task has no reference fix.
    pub stop_at_plausible: bool,
}

impl Default for LoopOptions {
    fn default() -> Self {
        Self {
            k_values: vec![1, 10, 100],
            stop_at_plausible: false,
        }
    }
}

/// Generate, dedupe and validate in order until a stopping fix is found or
/// a budget runs out.
pub fn repair_loop(
    harness: &Harness,
    task: &RepairTask,
    gen: &mut dyn PatchGenerator,
    opts: &LoopOptions,
) -> Result<(Vec<ValidationOutcome>, RepairMetrics), RepairError> {
    repair_loop_until(harness, task, gen, opts, Instant::now() + Duration::from_secs_f64(task.budgets.wall_clock_seconds))
}

fn repair_loop_until(
    harness: &Harness,
    task: &RepairTask,
    gen: &mut dyn PatchGenerator,
    opts: &LoopOptions,
    deadline: Instant,
) -> Result<(Vec<ValidationOutcome>, RepairMetrics), RepairError> {
    let started = Instant::now();
    let stop_at_plausible = opts.stop_at_plausible || task.reference_fix.is_none();
    let mut outcomes = Vec::new();
    let mut status = LoopStatus::Exhausted;
    let mut generated = 0;
    let mut dedup = Dedupe::default();
    if deadline.saturating_duration_since(Instant::now()) < MIN_REMAINING {
        status = LoopStatus::Timeout;
    } else {
        let raw = gen.generate(task, task.budgets.max_candidates)?;
        for c in raw.into_iter().take(task.budgets.max_candidates) {
            generated += 1;
            if !dedup.admit(&c.text) {
                continue;
            }
            let remaining = deadline.saturating_duration_since(Instant::now());
            if remaining < MIN_REMAINING {
                status = LoopStatus::Timeout;
                break;
            }
            let limit = remaining.min(Duration::from_secs_f64(harness.cfg.candidate_timeout_seconds));
            let outcome = validate_within(harness, task, &c, limit)?;
            let class = outcome.class;
            outcomes.push(outcome);
            if class == ValidationClass::Verbatim {
                status = LoopStatus::Verbatim;
                break;
            }
            if stop_at_plausible && class == ValidationClass::Plausible {
                status = LoopStatus::Plausible;
                break;
            }
        }
    }
    let metrics = RepairMetrics::compute(
        &outcomes,
        &opts.k_values,
        generated,
        dedup.removed,
        status,
        started.elapsed().as_secs_f64(),
    );
    Ok((outcomes, metrics))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuspectAttempt {
    pub file_path: String,
    pub qualified_name: String,
    pub outcomes: Vec<ValidationOutcome>,
    pub metrics: RepairMetrics,
    /// The patched function of the best outcome, if any test-adequate one.
    pub patch: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointReport {
    pub attempts: Vec<SuspectAttempt>,
    /// Index into `attempts` of the suspect that was fixed.
    pub fixed_by: Option<usize>,
    pub elapsed: f64,
}

impl JointReport {
    pub fn winner(&self) -> Option<&SuspectAttempt> {
        self.fixed_by.map(|i| &self.attempts[i])
    }

    pub fn verbatim(&self) -> bool {
        self.winner().is_some_and(|a| a.metrics.n_verbatim > 0)
    }

    pub fn plausible(&self) -> bool {
        self.fixed_by.is_some()
    }
}

/// Shared settings for joint localization and repair.
#[derive(Debug, Clone)]
pub struct JointConfig {
    pub skeleton: SkeletonConfig,
    pub budgets: Budgets,
    pub loop_options: LoopOptions,
    pub trace_context: Option<String>,
    /// Matched to the suspect with the same file and name.
    pub reference_fix: Option<MethodRecord>,
}

/// Repair suspects in rank order under one wall clock. Each suspect gets the
/// full candidate budget; the next is tried only if time remains. Stops at
/// the first suspect with a test-adequate patch.
pub fn joint_localize_and_repair(
    harness: &Harness,
    project: &Path,
    runs: &[TestRun],
    ranking: &SuspectRanking,
    gen: &mut dyn PatchGenerator,
    cfg: &JointConfig,
) -> Result<JointReport, RepairError> {
    let started = Instant::now();
    let deadline = started + Duration::from_secs_f64(cfg.budgets.wall_clock_seconds);
    let suspects: Vec<(&str, &str)> = ranking.functions().collect();
    if suspects.is_empty() {
        return Err(RepairError::NoSuspects);
    }
    let mut attempts = Vec::new();
    let mut fixed_by = None;
    for (file, name) in suspects {
        if deadline.saturating_duration_since(Instant::now()) < MIN_REMAINING {
            break;
        }
        let reference = cfg
            .reference_fix
            .as_ref()
            .filter(|r| r.file_path == file && r.qualified_name == name)
            .cloned();
        let task = match RepairTask::new(project, file, name, runs, &cfg.skeleton, cfg.budgets) {
            Ok(t) => t.with_trace(cfg.trace_context.clone()).with_reference(reference),
            Err(RepairError::Structure(_)) => continue,
            Err(e) => return Err(e),
        };
        let (outcomes, metrics) = repair_loop_until(harness, &task, gen, &cfg.loop_options, deadline)?;
        let best = outcomes
            .iter()
            .filter(|o| o.class.passes_tests())
            .max_by_key(|o| (o.class, std::cmp::Reverse(o.candidate.sample_index)));
        let patch = best.map(|o| task.conform(&o.candidate.text));
        let success = metrics.success();
        attempts.push(SuspectAttempt {
            file_path: file.to_string(),
            qualified_name: name.to_string(),
            outcomes,
            metrics,
            patch,
        });
        if success {
            fixed_by = Some(attempts.len() - 1);
            break;
        }
    }
    Ok(JointReport {
        attempts,
        fixed_by,
        elapsed: started.elapsed().as_secs_f64(),
    })
}

/// A ranking holding just one function, for repair at a known location.
pub fn single_suspect(file_path: &str, focal: &FunctionInfo) -> SuspectRanking {
    SuspectRanking {
        entries: vec![crate::localize::Suspect {
            unit: Unit::Function {
                file_path: file_path.to_string(),
                qualified_name: focal.qualified_name.clone(),
                line: focal.signature_span.start,
            },
            score: 1.0,
        }],
    }
}
