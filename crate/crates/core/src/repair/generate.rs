//! Patch generators and candidate deduplication.

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::time::Duration;

use serde::Deserialize;
use serde_json::json;
use thiserror::Error;

use super::{function_key, PatchCandidate, RepairTask};
use crate::mutate::{inverse_candidates, inverse_sites, replace_at, OperatorId};
use crate::trace::parse_trace;

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("generator unavailable: {0}")]
    GeneratorUnavailable(String),
    #[error("generator protocol error: {0}")]
    ProtocolError(String),
}

/// A source of candidate rewrites of a task's focal function.
pub trait PatchGenerator {
    fn id(&self) -> &str;

    /// Up to `n` raw samples, in generation order.
    fn generate(&mut self, task: &RepairTask, n: usize) -> Result<Vec<PatchCandidate>, GeneratorError>;
}

/// Prior per operator: how likely its inverse is the fix. Lossy operators
/// have no inverse sites and are omitted.
pub const ORACLE_PRIORS: [(OperatorId, f64); 10] = [
    (OperatorId::CmpSwap, 1.0),
    (OperatorId::IsNotSwap, 0.95),
    (OperatorId::SwapException, 0.9),
    (OperatorId::DotToBracket, 0.85),
    (OperatorId::WrapReturn, 0.8),
    (OperatorId::SwapArgs, 0.75),
    (OperatorId::DropSelf, 0.7),
    (OperatorId::RenameCall, 0.6),
    (OperatorId::VarMisuse, 0.5),
    (OperatorId::UnwrapReturn, 0.4),
];

/// Lines of the focal function, relative to its first line, that a frame
/// of the task's trace stopped at.
fn trace_lines(task: &RepairTask) -> Vec<usize> {
    let Some(trace) = task.trace_context.as_deref().and_then(|t| parse_trace(t).ok()) else {
        return Vec::new();
    };
    let span = task.focal.span();
    trace
        .frames
        .iter()
        .filter(|f| f.footer.file_path == task.file_path && span.contains(f.footer.line_number))
        .map(|f| f.footer.line_number + 1 - span.start)
        .collect()
}

/// Every inverse edit of the buggy focal function. Sites on a line the
/// trace points at come first; otherwise the order is operator prior, then
/// site, then candidate.
pub fn oracle_candidates(task: &RepairTask) -> Vec<String> {
    let hot = trace_lines(task);
    let mut ranked = Vec::new();
    for (op, _) in ORACLE_PRIORS {
        for site in inverse_sites(&task.focal_source, op) {
            let cold = !hot.contains(&site.site.line);
            for replacement in inverse_candidates(op, &site.text, &task.skeleton) {
                ranked.push((cold, replace_at(&task.focal_source, &site, &replacement)));
            }
        }
    }
    ranked.sort_by_key(|(cold, _)| *cold);
    ranked.into_iter().map(|(_, text)| text).collect()
}

/// Enumerates the inverse of every injection operator.
#[derive(Debug, Default, Clone)]
pub struct OracleGenerator;

impl PatchGenerator for OracleGenerator {
    fn id(&self) -> &str {
        "oracle"
    }

    fn generate(&mut self, task: &RepairTask, n: usize) -> Result<Vec<PatchCandidate>, GeneratorError> {
        Ok(oracle_candidates(task)
            .into_iter()
            .take(n)
            .enumerate()
            .map(|(i, text)| PatchCandidate {
                text,
                origin: "oracle".into(),
                sample_index: i,
                score: None,
            })
            .collect())
    }
}

/// Replays a fixed list of texts.
#[derive(Debug, Clone)]
pub struct StubGenerator {
    pub name: String,
    pub texts: Vec<String>,
}

impl StubGenerator {
    pub fn new(name: &str, texts: Vec<String>) -> Self {
        Self {
            name: name.to_string(),
            texts,
        }
    }
}

impl PatchGenerator for StubGenerator {
    fn id(&self) -> &str {
        &self.name
    }

    fn generate(&mut self, _task: &RepairTask, n: usize) -> Result<Vec<PatchCandidate>, GeneratorError> {
        Ok(self
            .texts
            .iter()
            .take(n)
            .enumerate()
            .map(|(i, t)| PatchCandidate {
                text: t.clone(),
                origin: self.name.clone(),
                sample_index: i,
                score: None,
            })
            .collect())
    }
}

#[derive(Deserialize)]
struct Reply {
    id: String,
    candidates: Vec<ReplyCandidate>,
}

#[derive(Deserialize)]
struct ReplyCandidate {
    text: String,
    #[serde(default)]
    score: Option<f64>,
}

/// A generator process speaking newline-delimited JSON on its standard
/// streams: one request line in, one response line out.
pub struct ExternalGenerator {
    name: String,
    command: Vec<String>,
    timeout: Duration,
    child: Option<(Child, ChildStdin, Receiver<String>)>,
    requests: u64,
}

impl ExternalGenerator {
    pub fn new(command: Vec<String>, timeout: Duration) -> Self {
        Self {
            name: "external".into(),
            command,
            timeout,
            child: None,
            requests: 0,
        }
    }

    fn start(&mut self) -> Result<(), GeneratorError> {
        if self.child.is_some() {
            return Ok(());
        }
        let (program, args) = self
            .command
            .split_first()
            .ok_or_else(|| GeneratorError::GeneratorUnavailable("empty command".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| GeneratorError::GeneratorUnavailable(format!("{program}: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        self.child = Some((child, stdin, rx));
        Ok(())
    }

    fn stop(&mut self) {
        if let Some((mut child, _, _)) = self.child.take() {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

impl Drop for ExternalGenerator {
    fn drop(&mut self) {
        self.stop();
    }
}

impl PatchGenerator for ExternalGenerator {
    fn id(&self) -> &str {
        &self.name
    }

    fn generate(&mut self, task: &RepairTask, n: usize) -> Result<Vec<PatchCandidate>, GeneratorError> {
        self.start()?;
        self.requests += 1;
        let id = format!("req-{}", self.requests);
        let request = json!({
            "id": id,
            "skeleton": task.skeleton.text,
            "trace": task.trace_context,
            "num_candidates": n,
        });
        let (_, stdin, rx) = self.child.as_mut().expect("started");
        if writeln!(stdin, "{request}").and_then(|_| stdin.flush()).is_err() {
            self.stop();
            return Err(GeneratorError::GeneratorUnavailable("generator closed its input".into()));
        }
        let line = match rx.recv_timeout(self.timeout) {
            Ok(line) => line,
            Err(RecvTimeoutError::Timeout) => {
                self.stop();
                return Err(GeneratorError::GeneratorUnavailable("no reply before the time limit".into()));
            }
            Err(RecvTimeoutError::Disconnected) => {
                self.stop();
                return Err(GeneratorError::GeneratorUnavailable("generator exited".into()));
            }
        };
        let reply: Reply = serde_json::from_str(&line).map_err(|e| {
            self.stop();
            GeneratorError::ProtocolError(format!("{e}: {line}"))
        })?;
        if reply.id != id {
            self.stop();
            return Err(GeneratorError::ProtocolError(format!("reply id `{}` for request `{id}`", reply.id)));
        }
        Ok(reply
            .candidates
            .into_iter()
            .filter(|c| !c.text.trim().is_empty())
            .take(n)
            .enumerate()
            .map(|(i, c)| PatchCandidate {
                text: c.text,
                origin: self.name.clone(),
                sample_index: i,
                score: c.score,
            })
            .collect())
    }
}

/// Running dedup over normalized function text.
#[derive(Debug, Default)]
pub struct Dedupe {
    seen: HashSet<String>,
    pub removed: usize,
}

impl Dedupe {
    /// True the first time a normalized text is seen.
    pub fn admit(&mut self, text: &str) -> bool {
        let fresh = self.seen.insert(function_key(text));
        if !fresh {
            self.removed += 1;
        }
        fresh
    }
}

/// First occurrences in order, and the number of removals.
pub fn dedupe(candidates: Vec<PatchCandidate>) -> (Vec<PatchCandidate>, usize) {
    let mut d = Dedupe::default();
    let kept = candidates.into_iter().filter(|c| d.admit(&c.text)).collect();
    (kept, d.removed)
}
