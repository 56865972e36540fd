//! Parsing and budgeted rendering of pytest long-form failure traces.
//!
//! A trace is a sequence of frames separated by `_ _ _` rules. Each frame
//! holds, in order: the function's argument values, the source of the
//! function up to the executed line (marked with `>`), the `E`-prefixed
//! error lines (last frame only), the local variables when `-l` is on, and
//! a `path:line: Name` footer.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tokenizer::{BudgetTokenizer, TokenizerError};

/// Rendered variable values longer than this are elided in the middle.
pub const MAX_VALUE_CHARS: usize = 200;
const ELLIPSIS: &str = "...";
const FRAME_RULE: &str = "_ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _ _";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Footer {
    pub file_path: String,
    pub line_number: usize,
    /// Only the innermost frame names the error.
    pub error_name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceFrame {
    pub input_vars: Vec<(String, String)>,
    pub head_lines: Vec<String>,
    pub error_lines: Vec<String>,
    pub local_vars: Vec<(String, String)>,
    pub footer: Footer,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedTrace {
    /// Outermost first.
    pub frames: Vec<TraceFrame>,
    pub summary_line: Option<String>,
}

impl ParsedTrace {
    pub fn last(&self) -> &TraceFrame {
        self.frames.last().expect("a parsed trace has at least one frame")
    }

    /// Name of the raised error, from the innermost frame that names one.
    pub fn error_name(&self) -> Option<&str> {
        self.frames.iter().rev().find_map(|f| f.footer.error_name.as_deref())
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("text is not a recognizable long-form trace")]
    UnrecognizedTraceFormat { raw: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TraceRenderConfig {
    pub budget_tokens: usize,
    pub include_heads: bool,
    /// Covers both the argument block and the locals block.
    pub include_locals: bool,
}

impl Default for TraceRenderConfig {
    fn default() -> Self {
        Self {
            budget_tokens: 896,
            include_heads: true,
            include_locals: true,
        }
    }
}

fn footer_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^(\S.*?):(\d+):(?: ([A-Za-z_][\w.]*))?\s*$").unwrap())
}

fn var_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^([A-Za-z_][A-Za-z0-9_]*) *= (.*)$").unwrap())
}

fn header_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^_{3,} .* _{3,}$").unwrap())
}

fn rule_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^(_ ){3,}_?\s*$").unwrap())
}

/// Middle-elide values longer than [`MAX_VALUE_CHARS`].
pub fn elide(value: &str) -> String {
    let n = value.chars().count();
    if n <= MAX_VALUE_CHARS {
        return value.to_string();
    }
    let keep = MAX_VALUE_CHARS - ELLIPSIS.len();
    let head: String = value.chars().take(keep / 2).collect();
    let tail: String = value.chars().skip(n - (keep - keep / 2)).collect();
    format!("{head}{ELLIPSIS}{tail}")
}

/// Join wrapped lines: a line starting with `...` continues the previous.
fn join_continuations(raw: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for line in raw.lines() {
        let line = line.trim_end_matches('\r');
        match (line.strip_prefix("..."), out.last_mut()) {
            (Some(rest), Some(prev)) => prev.push_str(rest),
            _ => out.push(line.to_string()),
        }
    }
    out
}

pub fn parse_trace(raw: &str) -> Result<ParsedTrace, TraceError> {
    let unrecognized = || TraceError::UnrecognizedTraceFormat { raw: raw.to_string() };
    let lines = join_continuations(raw);
    let mut chunks: Vec<Vec<&str>> = vec![Vec::new()];
    for line in &lines {
        if rule_re().is_match(line) {
            chunks.push(Vec::new());
        } else if !header_re().is_match(line) {
            chunks.last_mut().unwrap().push(line);
        }
    }
    let mut frames = Vec::new();
    let mut summary_line = None;
    let n = chunks.len();
    for (k, chunk) in chunks.iter().enumerate() {
        let Some((frame, rest)) = parse_frame(chunk) else {
            continue;
        };
        frames.push(frame);
        if k + 1 == n {
            let text = rest
                .iter()
                .map(|l| l.trim_end())
                .collect::<Vec<_>>()
                .join("\n")
                .trim()
                .to_string();
            if !text.is_empty() {
                summary_line = Some(text);
            }
        }
    }
    if frames.is_empty() {
        return Err(unrecognized());
    }
    Ok(ParsedTrace { frames, summary_line })
}

#[derive(PartialEq, PartialOrd)]
enum Section {
    Args,
    Head,
    Error,
    Locals,
}

/// Parse one frame; returns it and the lines after its footer.
fn parse_frame<'a>(chunk: &[&'a str]) -> Option<(TraceFrame, Vec<&'a str>)> {
    let footer_at = chunk.iter().position(|l| footer_re().is_match(l))?;
    let caps = footer_re().captures(chunk[footer_at])?;
    let footer = Footer {
        file_path: caps[1].to_string(),
        line_number: caps[2].parse().ok()?,
        error_name: caps.get(3).map(|m| m.as_str().to_string()),
    };
    let mut frame = TraceFrame {
        input_vars: Vec::new(),
        head_lines: Vec::new(),
        error_lines: Vec::new(),
        local_vars: Vec::new(),
        footer,
    };
    let mut section = Section::Args;
    for line in &chunk[..footer_at] {
        if line.trim().is_empty() {
            continue;
        }
        if line.starts_with("E ") || *line == "E" {
            section = Section::Error;
            frame.error_lines.push(line.to_string());
            continue;
        }
        if line.starts_with('>') || line.starts_with(' ') || line.starts_with('\t') {
            if section > Section::Head {
                // Source after the error block belongs to a chained frame.
                continue;
            }
            section = Section::Head;
            frame.head_lines.push(line.to_string());
            continue;
        }
        if let Some(c) = var_re().captures(line) {
            let pair = (c[1].to_string(), elide(&c[2]));
            if section == Section::Args {
                frame.input_vars.push(pair);
            } else {
                section = Section::Locals;
                frame.local_vars.push(pair);
            }
        }
    }
    Some((frame, chunk[footer_at + 1..].to_vec()))
}

fn render_vars(vars: &[(String, String)], pad: bool, out: &mut Vec<String>) {
    for (name, value) in vars {
        if pad {
            out.push(format!("{name:<10} = {value}"));
        } else {
            out.push(format!("{name} = {value}"));
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Admit {
    error: bool,
    head: bool,
    locals: bool,
}

fn render_frame(f: &TraceFrame, a: Admit) -> Option<String> {
    if !a.error && !a.head && !a.locals {
        return None;
    }
    let mut blocks: Vec<Vec<String>> = Vec::new();
    if a.locals && !f.input_vars.is_empty() {
        let mut b = Vec::new();
        render_vars(&f.input_vars, false, &mut b);
        blocks.push(b);
    }
    let mut body = Vec::new();
    if a.head {
        body.extend(f.head_lines.iter().cloned());
    }
    if a.error {
        body.extend(f.error_lines.iter().cloned());
    }
    if !body.is_empty() {
        blocks.push(body);
    }
    if a.locals && !f.local_vars.is_empty() {
        let mut b = Vec::new();
        render_vars(&f.local_vars, true, &mut b);
        blocks.push(b);
    }
    let footer = match &f.footer.error_name {
        Some(name) => format!("{}:{}: {name}", f.footer.file_path, f.footer.line_number),
        None => format!("{}:{}: ", f.footer.file_path, f.footer.line_number),
    };
    blocks.push(vec![footer]);
    let text: Vec<String> = blocks.into_iter().map(|b| b.join("\n")).collect();
    Some(text.join("\n\n"))
}

fn assemble(t: &ParsedTrace, admits: &[Admit], summary: bool) -> String {
    let frames: Vec<String> = t
        .frames
        .iter()
        .zip(admits)
        .filter_map(|(f, a)| render_frame(f, *a))
        .collect();
    let mut s = frames.join(&format!("\n{FRAME_RULE}\n\n"));
    if summary {
        if let Some(line) = &t.summary_line {
            s.push_str("\n\n");
            s.push_str(line);
        }
    }
    s.push('\n');
    s
}

/// Render `t` within the token budget. Sections are admitted whole in
/// priority order: the innermost frame's error and footer, the other
/// frames' errors and footers, heads, then variables, each tier from the
/// most recent frame outwards. A section that does not fit is skipped.
pub fn render_trace(t: &ParsedTrace, tokenizer: &BudgetTokenizer, cfg: &TraceRenderConfig) -> Result<String, TokenizerError> {
    let n = t.frames.len();
    let mut admits = vec![Admit::default(); n];
    admits[n - 1].error = true;
    let mut text = assemble(t, &admits, false);
    let mut steps: Vec<(usize, u8)> = Vec::new();
    for i in (0..n - 1).rev() {
        steps.push((i, 0));
    }
    if cfg.include_heads {
        for i in (0..n).rev() {
            steps.push((i, 1));
        }
    }
    if cfg.include_locals {
        for i in (0..n).rev() {
            steps.push((i, 2));
        }
    }
    for (i, kind) in steps {
        let mut trial = admits.clone();
        match kind {
            0 => trial[i].error = true,
            1 => {
                if t.frames[i].head_lines.is_empty() {
                    continue;
                }
                trial[i].head = true
            }
            _ => {
                if t.frames[i].local_vars.is_empty() && t.frames[i].input_vars.is_empty() {
                    continue;
                }
                trial[i].locals = true
            }
        }
        let candidate = assemble(t, &trial, false);
        if tokenizer.count(&candidate)? <= cfg.budget_tokens {
            admits = trial;
            text = candidate;
        }
    }
    if t.summary_line.is_some() {
        let candidate = assemble(t, &admits, true);
        if tokenizer.count(&candidate)? <= cfg.budget_tokens {
            text = candidate;
        }
    }
    Ok(text)
}

/// Budgeted passthrough for text that did not parse: keep the last lines
/// that fit.
pub fn render_raw(raw: &str, tokenizer: &BudgetTokenizer, budget: usize) -> Result<String, TokenizerError> {
    let mut kept: Vec<&str> = Vec::new();
    for line in raw.lines().rev() {
        let mut trial = kept.clone();
        trial.insert(0, line);
        let text = format!("{}\n", trial.join("\n"));
        if tokenizer.count(&text)? > budget {
            break;
        }
        kept = trial;
    }
    Ok(if kept.is_empty() {
        String::new()
    } else {
        format!("{}\n", kept.join("\n"))
    })
}

/// Text of the innermost error and footer alone, the floor of every render.
pub fn minimal_render(t: &ParsedTrace) -> String {
    let mut admits = vec![Admit::default(); t.frames.len()];
    admits[t.frames.len() - 1].error = true;
    assemble(t, &admits, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const FIG4: &str = "self = HobokenApplication(name='TestCatchallFilters',
...debug=False)
match = re.compile(b'.*')
func = <function TestCatchallFilters.after_setup.
...<locals>.after_all at 0x7f5f70a81d30>

    def add_after_filter(self, match, func):
>       filter_tuple = self.__build_filter(match, func)
E       AttributeError: 'HobokenApplication' object
...has no attribute '_HobokenBaseApplication__build_filter'

func       = <function TestCatchallFilters.after_setup.
...<locals>.after_all at 0x7f5f70a81d30>
match      = re.compile(b'.*')
self       = HobokenApplication(name='TestCatchallFilters',
...debug=False)

hoboken/application.py:480: AttributeError
";

    #[test]
    fn figure_four_frame() {
        let t = parse_trace(FIG4).unwrap();
        assert_eq!(t.frames.len(), 1);
        let f = &t.frames[0];
        let names: Vec<_> = f.input_vars.iter().map(|v| v.0.as_str()).collect();
        assert_eq!(names, ["self", "match", "func"]);
        assert_eq!(f.footer.error_name.as_deref(), Some("AttributeError"));
        assert_eq!(f.footer.file_path, "hoboken/application.py");
        assert_eq!(f.footer.line_number, 480);
        assert_eq!(f.head_lines.len(), 2);
        assert!(f.head_lines[1].starts_with('>'));
        assert_eq!(f.error_lines.len(), 1);
        assert!(f.error_lines[0].ends_with("'_HobokenBaseApplication__build_filter'"));
        assert_eq!(f.local_vars.len(), 3);
        assert_eq!(t.summary_line, None);
    }

    #[test]
    fn empty_is_unrecognized() {
        assert!(matches!(parse_trace(""), Err(TraceError::UnrecognizedTraceFormat { .. })));
        assert!(parse_trace("ImportError while importing test module\n").is_err());
    }

    #[test]
    fn withholding_locals() {
        let t = parse_trace(FIG4).unwrap();
        let cfg = TraceRenderConfig {
            include_locals: false,
            ..TraceRenderConfig::default()
        };
        let out = render_trace(&t, &BudgetTokenizer::default(), &cfg).unwrap();
        assert!(!out.contains("func       ="));
        assert!(out.contains(">       filter_tuple"));
    }

    #[test]
    fn unlimited_render_round_trips() {
        let t = parse_trace(FIG4).unwrap();
        let cfg = TraceRenderConfig {
            budget_tokens: usize::MAX,
            ..TraceRenderConfig::default()
        };
        let out = render_trace(&t, &BudgetTokenizer::default(), &cfg).unwrap();
        assert_eq!(parse_trace(&out).unwrap(), t);
    }

    #[test]
    fn minimal_budget_keeps_only_error_and_footer() {
        let t = parse_trace(FIG4).unwrap();
        let tok = BudgetTokenizer::default();
        let floor = minimal_render(&t);
        let cfg = TraceRenderConfig {
            budget_tokens: tok.count(&floor).unwrap(),
            ..TraceRenderConfig::default()
        };
        assert_eq!(render_trace(&t, &tok, &cfg).unwrap(), floor);
        assert!(floor.starts_with("E       AttributeError"));
        assert!(floor.ends_with("hoboken/application.py:480: AttributeError\n"));
    }

    #[test]
    fn long_values_are_elided() {
        let long = "x".repeat(500);
        let v = elide(&long);
        assert_eq!(v.chars().count(), MAX_VALUE_CHARS);
        assert!(v.contains(ELLIPSIS));
        assert_eq!(elide(&v), v);
    }

    #[test]
    fn two_frames_keep_order() {
        let raw = format!(
            "    def test_x():\n>       f(1)\n\ntests/test_x.py:3: \n{FRAME_RULE}\n\n{FIG4}"
        );
        let t = parse_trace(&raw).unwrap();
        assert_eq!(t.frames.len(), 2);
        assert_eq!(t.frames[0].footer.file_path, "tests/test_x.py");
        assert_eq!(t.frames[0].footer.error_name, None);
        assert_eq!(t.frames[1].footer.line_number, 480);
        assert_eq!(t.error_name(), Some("AttributeError"));
    }
}
