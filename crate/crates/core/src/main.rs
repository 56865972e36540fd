use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use similar::TextDiff;

use repairkit::bench::{
    failing_trace_context, inject_validated_bugs, load_bench, run_bench, suspects_for, write_cases, BenchError,
};
use repairkit::config::{Config, GeneratorKind};
use repairkit::corpus::{normalize, read_history, EditPairRecord, GitRepo, MethodRecord, MineError};
use repairkit::harness::{Harness, HarnessError};
use repairkit::mutate::OperatorWeights;
use repairkit::repair::{joint_localize_and_repair, single_suspect, JointConfig, LoopOptions, PatchGenerator};
use repairkit::skeleton::{build_skeleton, SkeletonConfig, SkeletonError};
use repairkit::structure::{find_function, index_file, splice_lines};

const EXIT_NO_FIX: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_ENVIRONMENT: u8 = 3;

#[derive(Parser)]
#[command(name = "repairkit", version, about = "Mine bug fixes, inject bugs, and repair Python projects")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Parallel bench cases.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract before/after function pairs from fix commits as JSONL.
    Mine {
        repo: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Inject validated bugs into a passing project.
    Mutate {
        project: PathBuf,
        #[arg(short, long, default_value_t = 10)]
        n: usize,
        /// JSONL corpus of bugs with their skeletons and traces.
        #[arg(long, short)]
        out: PathBuf,
        /// Also write the bugs as benchmark cases here.
        #[arg(long)]
        bench_dir: Option<PathBuf>,
        /// Sample only operators that have an exact inverse.
        #[arg(long)]
        non_lossy: bool,
    },
    /// Localize and repair a project with failing tests.
    Repair {
        project: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Repair only this function, as `path/to/file.py::Qualified.name`.
        #[arg(long)]
        focal: Option<String>,
        /// File holding the known fixed function, for verbatim scoring.
        #[arg(long, requires = "focal")]
        reference: Option<PathBuf>,
        /// Where the unified diff of the fix is written.
        #[arg(long, default_value = "repair.patch")]
        patch_out: PathBuf,
        /// Write the fix into the project.
        #[arg(long)]
        apply: bool,
        /// JSON report of every attempt.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Evaluate a benchmark directory.
    Bench {
        bench_dir: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// JSON report path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GeneratorArg {
    Oracle,
    External,
}

#[derive(Args)]
struct RunArgs {
    /// Send the rendered failing trace to the generator.
    #[arg(long, overrides_with = "no_trace")]
    trace: bool,
    #[arg(long)]
    no_trace: bool,
    #[arg(long, value_enum)]
    generator: Option<GeneratorArg>,
    /// External generator command line, split on whitespace.
    #[arg(long)]
    generator_cmd: Option<String>,
    #[arg(long)]
    budget_candidates: Option<usize>,
    #[arg(long)]
    budget_seconds: Option<f64>,
    /// Comma-separated k values for top-k metrics.
    #[arg(long, value_delimiter = ',')]
    top_k: Option<Vec<usize>>,
}

impl RunArgs {
    fn apply(&self, cfg: &mut Config) {
        if self.trace {
            cfg.use_trace = true;
        }
        if self.no_trace {
            cfg.use_trace = false;
        }
        if let Some(g) = self.generator {
            cfg.generator.kind = match g {
                GeneratorArg::Oracle => GeneratorKind::Oracle,
                GeneratorArg::External => GeneratorKind::External,
            };
        }
        if let Some(c) = &self.generator_cmd {
            cfg.generator.command = c.split_whitespace().map(str::to_string).collect();
        }
        if let Some(n) = self.budget_candidates {
            cfg.budgets.max_candidates = n;
        }
        if let Some(s) = self.budget_seconds {
            cfg.budgets.wall_clock_seconds = s;
        }
        if let Some(k) = &self.top_k {
            cfg.k_values = k.clone();
        }
    }
}

/// A failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl std::fmt::Display) -> Failure {
    Failure {
        code,
        message: message.to_string(),
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        fail(EXIT_ENVIRONMENT, e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        fail(EXIT_ENVIRONMENT, e)
    }
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Harness(h) => h.into(),
            BenchError::NoPassingTests => fail(EXIT_ENVIRONMENT, e),
            BenchError::InsufficientCoverage { .. } => fail(EXIT_NO_FIX, e),
            other => fail(EXIT_USAGE, other),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p).map_err(|e| fail(EXIT_USAGE, e))?,
        None => Config::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(j) = cli.jobs {
        cfg.jobs = j;
    }
    match &cli.command {
        Command::Repair { run, .. } | Command::Bench { run, .. } => run.apply(&mut cfg),
        _ => {}
    }
    cfg.validate().map_err(|e| fail(EXIT_USAGE, e))?;
    eprintln!("# effective configuration\n{}", cfg.render());
    match cli.command {
        Command::Mine { repo, out } => mine(&repo, &out),
        Command::Mutate {
            project,
            n,
            out,
            bench_dir,
            non_lossy,
        } => mutate(&cfg, &project, n, &out, bench_dir.as_deref(), non_lossy),
        Command::Repair {
            project,
            focal,
            reference,
            patch_out,
            apply,
            report,
            ..
        } => repair(&cfg, &project, focal.as_deref(), reference.as_deref(), &patch_out, apply, report.as_deref()),
        Command::Bench { bench_dir, out, .. } => bench(&cfg, &bench_dir, out.as_deref()),
    }
}

fn mine(repo: &Path, out: &Path) -> Result<u8, Failure> {
    let repo = GitRepo::open(repo).map_err(|e| match e {
        MineError::NotARepository(_) => fail(EXIT_USAGE, e),
        other => fail(EXIT_ENVIRONMENT, other),
    })?;
    let pairs = read_history(&repo).map_err(|e| fail(EXIT_ENVIRONMENT, e))?;
    let mut w = std::io::BufWriter::new(fs::File::create(out)?);
    for p in &pairs {
        let line = serde_json::to_string(&EditPairRecord::from(p)).map_err(|e| fail(EXIT_ENVIRONMENT, e))?;
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    println!("{} edit pairs from {}", pairs.len(), repo.repo_id());
    Ok(0)
}

#[derive(serde::Serialize)]
struct BugRecord<'a> {
    bug: &'a repairkit::mutate::InjectedBug,
    failing_tests: Vec<&'a str>,
    skeleton: String,
    trace: String,
}

fn mutate(cfg: &Config, project: &Path, n: usize, out: &Path, bench_dir: Option<&Path>, non_lossy: bool) -> Result<u8, Failure> {
    if !project.is_dir() {
        return Err(fail(EXIT_USAGE, format!("{} is not a directory", project.display())));
    }
    let harness = Harness::new(cfg.sandbox.clone())?;
    let weights = if non_lossy { OperatorWeights::non_lossy() } else { cfg.operator_weights.clone() };
    let bugs = inject_validated_bugs(&harness, project, n, &weights, cfg.seed)?;
    let skeleton_cfg = cfg.skeleton();
    let tok = cfg.tokenizer();
    let mut w = std::io::BufWriter::new(fs::File::create(out)?);
    for b in &bugs {
        let file = &b.bug.original.file_path;
        let text = fs::read_to_string(project.join(file))?;
        let idx = index_file(file, &text).map_err(|e| fail(EXIT_ENVIRONMENT, e))?;
        let focal = find_function(&idx, &b.bug.original.qualified_name).map_err(|e| fail(EXIT_ENVIRONMENT, e))?;
        let skeleton = match build_skeleton(&idx, focal, Some(&b.bug.mutated_source), &skeleton_cfg) {
            Err(SkeletonError::BudgetTooSmall { needed, .. }) => build_skeleton(
                &idx,
                focal,
                Some(&b.bug.mutated_source),
                &SkeletonConfig {
                    budget_tokens: needed,
                    ..skeleton_cfg.clone()
                },
            ),
            other => other,
        }
        .map_err(|e| fail(EXIT_ENVIRONMENT, e))?;
        let raw = &b.failing[0].raw_trace;
        let trace = match repairkit::trace::parse_trace(raw) {
            Ok(t) => repairkit::trace::render_trace(&t, &tok, &cfg.trace()),
            Err(_) => repairkit::trace::render_raw(raw, &tok, cfg.trace_budget),
        }
        .map_err(|e| fail(EXIT_ENVIRONMENT, e))?;
        let record = BugRecord {
            bug: &b.bug,
            failing_tests: b.failing.iter().map(|r| r.test_id.as_str()).collect(),
            skeleton: skeleton.text,
            trace,
        };
        writeln!(w, "{}", serde_json::to_string(&record).map_err(|e| fail(EXIT_ENVIRONMENT, e))?)?;
    }
    w.flush()?;
    if let Some(dir) = bench_dir {
        let cases = write_cases(project, dir, &bugs)?;
        println!("{} cases written to {}", cases.len(), dir.display());
    }
    println!("{} validated bugs", bugs.len());
    Ok(0)
}

fn split_focal(spec: &str) -> Result<(&str, &str), Failure> {
    spec.split_once("::")
        .filter(|(f, n)| !f.is_empty() && !n.is_empty())
        .ok_or_else(|| fail(EXIT_USAGE, format!("--focal expects `file.py::name`, got `{spec}`")))
}

fn reference_record(project: &Path, file: &str, name: &str, path: &Path) -> Result<MethodRecord, Failure> {
    let source = fs::read_to_string(path).map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", path.display())))?;
    let text = fs::read_to_string(project.join(file))?;
    let idx = index_file(file, &text).map_err(|e| fail(EXIT_USAGE, e))?;
    let f = find_function(&idx, name).map_err(|e| fail(EXIT_USAGE, e))?;
    Ok(MethodRecord {
        repo_id: String::new(),
        file_path: file.to_string(),
        qualified_name: name.to_string(),
        line_span: f.span(),
        normalized: normalize(&source).unwrap_or_default(),
        source,
    })
}

fn generator(cfg: &Config) -> Box<dyn PatchGenerator> {
    cfg.generator.build()
}

fn repair(
    cfg: &Config,
    project: &Path,
    focal: Option<&str>,
    reference: Option<&Path>,
    patch_out: &Path,
    apply: bool,
    report_out: Option<&Path>,
) -> Result<u8, Failure> {
    if !project.is_dir() {
        return Err(fail(EXIT_USAGE, format!("{} is not a directory", project.display())));
    }
    let harness = Harness::new(cfg.sandbox.clone())?;
    let runs = harness.run_suite(project, true)?;
    if runs.is_empty() {
        return Err(fail(EXIT_ENVIRONMENT, format!("no tests collected in {}", project.display())));
    }
    let failing = runs.iter().filter(|r| r.outcome.is_failing()).count();
    if failing == 0 {
        return Err(fail(EXIT_ENVIRONMENT, format!("all {} tests pass; nothing to repair", runs.len())));
    }
    println!("{failing} of {} tests fail", runs.len());
    let bench_cfg = cfg.bench();
    let (ranking, reference_fix) = match focal {
        Some(spec) => {
            let (file, name) = split_focal(spec)?;
            let text = fs::read_to_string(project.join(file)).map_err(|e| fail(EXIT_USAGE, format!("{file}: {e}")))?;
            let idx = index_file(file, &text).map_err(|e| fail(EXIT_USAGE, e))?;
            let f = find_function(&idx, name).map_err(|e| fail(EXIT_USAGE, e))?;
            let reference = reference.map(|p| reference_record(project, file, name, p)).transpose()?;
            (single_suspect(file, f), reference)
        }
        None => (suspects_for(project, &runs, &cfg.localize, cfg.dstar())?.0, None),
    };
    for (i, s) in ranking.entries.iter().take(5).enumerate() {
        println!("suspect {}: {} ({})", i + 1, s.unit, s.score);
    }
    let trace_context = if cfg.use_trace { Some(failing_trace_context(&runs, &bench_cfg)?) } else { None };
    let joint = JointConfig {
        skeleton: bench_cfg.skeleton.clone(),
        budgets: cfg.budgets,
        loop_options: LoopOptions {
            k_values: cfg.k_values.clone(),
            stop_at_plausible: reference_fix.is_none(),
        },
        trace_context,
        reference_fix,
    };
    let mut gen = generator(cfg);
    let report = joint_localize_and_repair(&harness, project, &runs, &ranking, gen.as_mut(), &joint)
        .map_err(|e| fail(EXIT_ENVIRONMENT, e))?;
    for a in &report.attempts {
        println!(
            "{}::{}: {} validated, {} plausible, {} verbatim, first fix at {}",
            a.file_path,
            a.qualified_name,
            a.metrics.n_validated,
            a.metrics.n_plausible,
            a.metrics.n_verbatim,
            a.metrics.first_fix_index.map_or("-".to_string(), |i| i.to_string()),
        );
    }
    if let Some(path) = report_out {
        fs::write(path, serde_json::to_string_pretty(&report).map_err(|e| fail(EXIT_ENVIRONMENT, e))? + "\n")?;
    }
    let Some(winner) = report.winner() else {
        println!("no test-adequate patch in {:.1} s", report.elapsed);
        return Ok(EXIT_NO_FIX);
    };
    let patch = winner.patch.as_deref().expect("a fixed suspect carries its patch");
    let file = &winner.file_path;
    let text = fs::read_to_string(project.join(file))?;
    let idx = index_file(file, &text).map_err(|e| fail(EXIT_ENVIRONMENT, e))?;
    let f = find_function(&idx, &winner.qualified_name).map_err(|e| fail(EXIT_ENVIRONMENT, e))?;
    let patched = splice_lines(&text, f.span(), patch);
    let diff = TextDiff::from_lines(&text, &patched)
        .unified_diff()
        .header(&format!("a/{file}"), &format!("b/{file}"))
        .to_string();
    fs::write(patch_out, &diff)?;
    print!("{diff}");
    println!(
        "{} fix for {}::{} written to {} ({:.1} s)",
        if report.verbatim() { "verbatim" } else { "plausible" },
        file,
        winner.qualified_name,
        patch_out.display(),
        report.elapsed
    );
    if apply {
        fs::write(project.join(file), &patched)?;
        println!("applied to {}", project.join(file).display());
    }
    Ok(0)
}

fn bench(cfg: &Config, dir: &Path, out: Option<&Path>) -> Result<u8, Failure> {
    let cases = load_bench(dir).map_err(|e| fail(EXIT_USAGE, e))?;
    if cases.is_empty() {
        return Err(fail(EXIT_USAGE, format!("{} holds no cases", dir.display())));
    }
    let harness = Harness::new(cfg.sandbox.clone())?;
    let make = || generator(cfg);
    let report = run_bench(&harness, &cases, &make, &cfg.bench());
    for r in &report.rows {
        println!(
            "{:<24} {:<8} trace-rank {:<3} {}",
            r.case_id,
            if r.verbatim {
                "verbatim"
            } else if r.fixed {
                "plausible"
            } else {
                "unfixed"
            },
            r.trace_rank.map_or("-".to_string(), |k| k.to_string()),
            r.error.as_deref().unwrap_or(""),
        );
    }
    println!("{}", report.table());
    if let Some(path) = out {
        fs::write(path, serde_json::to_string_pretty(&report).map_err(|e| fail(EXIT_ENVIRONMENT, e))? + "\n")?;
    }
    Ok(0)
}
