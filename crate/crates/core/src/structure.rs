//! Structural indexing of indentation-structured source files.
//!
//! The index records where imports, module-level statements, classes and
//! functions live, down to signature, docstring and body spans. It is built
//! from logical lines and indentation alone; full syntactic validation is
//! delegated to an external checker (see [`SyntaxChecker`]).

use std::io::Write as _;
use std::process::{Command, Stdio};

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lex::{self, LexError, Token, TokenKind};

/// Inclusive, 1-based range of physical lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LineSpan {
    pub start: usize,
    pub end: usize,
}

impl LineSpan {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end, "bad span {start}..{end}");
        Self { start, end }
    }

    pub fn contains(&self, line: usize) -> bool {
        self.start <= line && line <= self.end
    }

    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lines(&self) -> std::ops::RangeInclusive<usize> {
        self.start..=self.end
    }

    pub fn overlaps(&self, other: &LineSpan) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionInfo {
    /// `name` for top-level functions, `Class.name` for methods.
    pub qualified_name: String,
    /// Decorators plus the `def` line(s).
    pub signature_span: LineSpan,
    pub docstring_span: Option<LineSpan>,
    /// Everything after the signature, docstring included. For one-line
    /// definitions this equals the last signature line.
    pub body_span: LineSpan,
    pub parent_class: Option<String>,
}

impl FunctionInfo {
    pub fn name(&self) -> &str {
        self.qualified_name
            .rsplit('.')
            .next()
            .unwrap_or(&self.qualified_name)
    }

    /// Full extent, decorators through the last body line.
    pub fn span(&self) -> LineSpan {
        LineSpan::new(self.signature_span.start, self.body_span.end)
    }

    /// Body lines that are not the docstring.
    pub fn body_rest(&self) -> Option<LineSpan> {
        if self.body_span.start <= self.signature_span.end {
            return None;
        }
        match self.docstring_span {
            Some(doc) if doc.end >= self.body_span.end => None,
            Some(doc) => Some(LineSpan::new(doc.end + 1, self.body_span.end)),
            None => Some(self.body_span),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassInfo {
    pub name: String,
    /// Line holding the `class` keyword.
    pub definition_line: usize,
    /// Decorators plus the `class ...:` line(s).
    pub header_span: LineSpan,
    pub docstring_span: Option<LineSpan>,
    /// Non-method statements of the class body (nested classes included).
    pub attribute_spans: Vec<LineSpan>,
    pub methods: Vec<FunctionInfo>,
    pub end_line: usize,
}

impl ClassInfo {
    pub fn span(&self) -> LineSpan {
        LineSpan::new(self.header_span.start, self.end_line)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceIndex {
    pub file_path: String,
    /// Physical lines of the indexed text, without terminators.
    pub lines: Vec<String>,
    pub imports: Vec<LineSpan>,
    pub globals: Vec<LineSpan>,
    pub classes: Vec<ClassInfo>,
    /// Top-level functions only; methods live in their class.
    pub functions: Vec<FunctionInfo>,
}

impl SourceIndex {
    /// Every addressable function, top-level and methods, in file order.
    pub fn all_functions(&self) -> Vec<&FunctionInfo> {
        let mut all: Vec<&FunctionInfo> = self
            .functions
            .iter()
            .chain(self.classes.iter().flat_map(|c| c.methods.iter()))
            .collect();
        all.sort_by_key(|f| f.signature_span.start);
        all
    }

    /// Innermost addressable function whose extent contains `line`.
    pub fn function_at_line(&self, line: usize) -> Option<&FunctionInfo> {
        self.all_functions()
            .into_iter()
            .filter(|f| f.span().contains(line))
            .min_by_key(|f| f.span().len())
    }

    pub fn class(&self, name: &str) -> Option<&ClassInfo> {
        self.classes.iter().find(|c| c.name == name)
    }

    /// Text of the given span, each line terminated by `\n`.
    pub fn text_of(&self, span: LineSpan) -> String {
        let mut out = String::new();
        for n in span.lines() {
            if let Some(l) = self.lines.get(n - 1) {
                out.push_str(l);
            }
            out.push('\n');
        }
        out
    }

    pub fn function_source(&self, f: &FunctionInfo) -> String {
        self.text_of(f.span())
    }

    pub fn line_count(&self) -> usize {
        self.lines.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("inconsistent indentation on line {line}: {reason}")]
    IndentationError { line: usize, reason: &'static str },
    #[error("no function named `{0}`")]
    NotFound(String),
    #[error("`{0}` is defined more than once at the same nesting level")]
    Ambiguous(String),
}

struct Node {
    ll: usize,
    indent: usize,
    header: bool,
    children: Vec<usize>,
}

struct Parsed<'a> {
    src: &'a str,
    tokens: Vec<Token>,
    logical: Vec<lex::LogicalLine>,
    nodes: Vec<Node>,
    roots: Vec<usize>,
}

impl Parsed<'_> {
    fn first_word(&self, node: usize) -> &str {
        self.logical[self.nodes[node].ll]
            .first_code(&self.tokens)
            .map(|t| t.text(self.src))
            .unwrap_or("")
    }

    fn code_texts(&self, node: usize) -> Vec<&str> {
        self.logical[self.nodes[node].ll]
            .code(&self.tokens)
            .map(|t| t.text(self.src))
            .collect()
    }

    fn first_line(&self, node: usize) -> usize {
        self.logical[self.nodes[node].ll].first_line
    }

    fn own_last_line(&self, node: usize) -> usize {
        self.logical[self.nodes[node].ll].last_line
    }

    fn extent_end(&self, node: usize) -> usize {
        let mut end = self.own_last_line(node);
        for &c in &self.nodes[node].children {
            end = end.max(self.extent_end(c));
        }
        end
    }

    fn is_docstring(&self, node: usize) -> bool {
        let ll = &self.logical[self.nodes[node].ll];
        let mut any = false;
        for t in ll.code(&self.tokens) {
            if t.kind != TokenKind::Str {
                return false;
            }
            any = true;
        }
        any && self.nodes[node].children.is_empty()
    }

    fn def_name(&self, node: usize) -> Option<(&'static str, String)> {
        let words = self.code_texts(node);
        let (kw, name) = match words.as_slice() {
            ["async", "def", name, ..] | ["def", name, ..] => ("def", *name),
            ["class", name, ..] => ("class", *name),
            _ => return None,
        };
        Some((kw, name.to_string()))
    }
}

/// Build a structural index of `source`.
pub fn index_file(file_path: &str, source: &str) -> Result<SourceIndex, StructureError> {
    let parsed = parse(source)?;
    let lines: Vec<String> = split_lines(source);
    let mut index = SourceIndex {
        file_path: file_path.to_string(),
        lines,
        imports: Vec::new(),
        globals: Vec::new(),
        classes: Vec::new(),
        functions: Vec::new(),
    };

    let mut pending_decorator: Option<usize> = None;
    for &node in &parsed.roots {
        let first = parsed.first_line(node);
        let word = parsed.first_word(node);
        if word == "@" {
            pending_decorator.get_or_insert(first);
            continue;
        }
        match parsed.def_name(node) {
            Some(("def", name)) => {
                index
                    .functions
                    .push(function_info(&parsed, node, name, None, pending_decorator.take()));
            }
            Some((_, name)) => {
                index
                    .classes
                    .push(class_info(&parsed, node, name, pending_decorator.take()));
            }
            None => {
                if let Some(start) = pending_decorator.take() {
                    // Decorators not followed by a definition.
                    index.globals.push(LineSpan::new(start, first - 1));
                }
                let span = LineSpan::new(first, parsed.extent_end(node));
                if matches!(word, "import" | "from") {
                    index.imports.push(span);
                } else {
                    index.globals.push(span);
                }
            }
        }
    }
    if let Some(start) = pending_decorator {
        let end = parsed
            .roots
            .last()
            .map(|&n| parsed.extent_end(n))
            .unwrap_or(start);
        index.globals.push(LineSpan::new(start, end));
    }
    Ok(index)
}

fn function_info(
    parsed: &Parsed<'_>,
    node: usize,
    name: String,
    parent_class: Option<&str>,
    decorator_start: Option<usize>,
) -> FunctionInfo {
    let first = parsed.first_line(node);
    let sig_end = parsed.own_last_line(node);
    let signature_span = LineSpan::new(decorator_start.unwrap_or(first), sig_end);
    let children = &parsed.nodes[node].children;
    let (body_span, docstring_span) = match children.first() {
        Some(&c0) => {
            let body = LineSpan::new(parsed.first_line(c0), parsed.extent_end(node));
            let doc = parsed
                .is_docstring(c0)
                .then(|| LineSpan::new(parsed.first_line(c0), parsed.own_last_line(c0)));
            (body, doc)
        }
        None => (LineSpan::new(sig_end, sig_end), None),
    };
    let qualified_name = match parent_class {
        Some(c) => format!("{c}.{name}"),
        None => name,
    };
    FunctionInfo {
        qualified_name,
        signature_span,
        docstring_span,
        body_span,
        parent_class: parent_class.map(str::to_string),
    }
}

fn class_info(parsed: &Parsed<'_>, node: usize, name: String, decorator_start: Option<usize>) -> ClassInfo {
    let first = parsed.first_line(node);
    let header_span = LineSpan::new(decorator_start.unwrap_or(first), parsed.own_last_line(node));
    let mut docstring_span = None;
    let mut attribute_spans = Vec::new();
    let mut methods = Vec::new();
    let mut pending_decorator: Option<usize> = None;
    for (i, &child) in parsed.nodes[node].children.iter().enumerate() {
        let cfirst = parsed.first_line(child);
        if i == 0 && parsed.is_docstring(child) {
            docstring_span = Some(LineSpan::new(cfirst, parsed.own_last_line(child)));
            continue;
        }
        if parsed.first_word(child) == "@" {
            pending_decorator.get_or_insert(cfirst);
            continue;
        }
        match parsed.def_name(child) {
            Some(("def", mname)) => {
                methods.push(function_info(parsed, child, mname, Some(&name), pending_decorator.take()));
            }
            _ => {
                let start = pending_decorator.take().unwrap_or(cfirst);
                attribute_spans.push(LineSpan::new(start, parsed.extent_end(child)));
            }
        }
    }
    if let Some(start) = pending_decorator {
        attribute_spans.push(LineSpan::new(start, parsed.extent_end(node)));
    }
    ClassInfo {
        name,
        definition_line: first,
        header_span,
        docstring_span,
        attribute_spans,
        methods,
        end_line: parsed.extent_end(node),
    }
}

/// Split into physical lines the way editors number them: a trailing
/// newline does not start an extra line.
pub fn split_lines(source: &str) -> Vec<String> {
    if source.is_empty() {
        return Vec::new();
    }
    let body = source.strip_suffix('\n').unwrap_or(source);
    body.split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l).to_string())
        .collect()
}

fn parse(src: &str) -> Result<Parsed<'_>, StructureError> {
    let tokens = lex::tokenize(src)?;
    let logical = lex::logical_lines(&tokens);
    let phys: Vec<&str> = src.split('\n').collect();
    let mut nodes: Vec<Node> = Vec::with_capacity(logical.len());
    let mut roots = Vec::new();
    // (indent width, owning header node)
    let mut stack: Vec<(usize, Option<usize>)> = vec![(0, None)];
    let mut prev: Option<usize> = None;

    for (li, ll) in logical.iter().enumerate() {
        let indent = lex::indent_width(lex::indent_of(phys[ll.first_line - 1]));
        let top = stack.last().unwrap().0;
        if indent > top {
            match prev {
                Some(p) if nodes[p].header && indent > nodes[p].indent => {
                    stack.push((indent, Some(p)));
                }
                _ => {
                    return Err(StructureError::IndentationError {
                        line: ll.first_line,
                        reason: "unexpected indent",
                    })
                }
            }
        } else {
            if let Some(p) = prev {
                if nodes[p].header && nodes[p].children.is_empty() {
                    return Err(StructureError::IndentationError {
                        line: ll.first_line,
                        reason: "expected an indented block",
                    });
                }
            }
            while indent < stack.last().unwrap().0 {
                stack.pop();
            }
            if indent != stack.last().unwrap().0 {
                return Err(StructureError::IndentationError {
                    line: ll.first_line,
                    reason: "unindent does not match any outer indentation level",
                });
            }
        }
        let header = ll
            .last_code(&tokens)
            .is_some_and(|t| t.kind == TokenKind::Op && t.text(src) == ":" && t.depth == 0);
        let id = nodes.len();
        nodes.push(Node {
            ll: li,
            indent,
            header,
            children: Vec::new(),
        });
        match stack.last().unwrap().1 {
            Some(parent) => nodes[parent].children.push(id),
            None => roots.push(id),
        }
        prev = Some(id);
    }
    if let Some(p) = prev {
        if nodes[p].header && nodes[p].children.is_empty() {
            return Err(StructureError::IndentationError {
                line: logical[nodes[p].ll].last_line,
                reason: "expected an indented block",
            });
        }
    }
    Ok(Parsed {
        src,
        tokens,
        logical,
        nodes,
        roots,
    })
}

/// Look up a function by dotted qualified name (`Class.method` or `name`).
pub fn find_function<'a>(index: &'a SourceIndex, qualified_name: &str) -> Result<&'a FunctionInfo, StructureError> {
    let mut matches = index
        .all_functions()
        .into_iter()
        .filter(|f| f.qualified_name == qualified_name);
    let first = matches
        .next()
        .ok_or_else(|| StructureError::NotFound(qualified_name.to_string()))?;
    if matches.next().is_some() {
        return Err(StructureError::Ambiguous(qualified_name.to_string()));
    }
    Ok(first)
}

/// Replace the lines of `span` in `file_text` with `replacement`.
/// `replacement` is taken as whole lines; a missing trailing newline is added.
pub fn splice_lines(file_text: &str, span: LineSpan, replacement: &str) -> String {
    let lines = split_lines(file_text);
    let mut out = String::with_capacity(file_text.len() + replacement.len());
    for l in &lines[..span.start - 1] {
        out.push_str(l);
        out.push('\n');
    }
    out.push_str(replacement);
    if !replacement.ends_with('\n') {
        out.push('\n');
    }
    for l in &lines[span.end.min(lines.len())..] {
        out.push_str(l);
        out.push('\n');
    }
    if !file_text.ends_with('\n') && out.ends_with('\n') && span.end < lines.len() {
        out.pop();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SyntaxVerdict {
    Ok,
    Failure { line: Option<usize>, message: String },
}

impl SyntaxVerdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, SyntaxVerdict::Ok)
    }
}

#[derive(Debug, Error)]
pub enum SyntaxCheckError {
    #[error("syntax checker `{0}` is not available")]
    ToolUnavailable(String),
    #[error("syntax checker i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Full-fidelity syntax validation backed by the target toolchain.
pub trait SyntaxChecker: Send + Sync {
    fn check(&self, source: &str) -> Result<SyntaxVerdict, SyntaxCheckError>;
}

/// Compile-only check for Python sources. The message is printed before the
/// line number so that "on line N" references to a block head win.
const PY_CHECK: &str = r#"import sys
path = sys.argv[1]
with open(path, encoding="utf-8") as fh:
    src = fh.read()
try:
    compile(src, path, "exec", dont_inherit=True)
except SyntaxError as e:
    sys.stderr.write("%s\n  line %s\n" % (e.msg, e.lineno))
    sys.exit(1)
"#;

/// Runs an external command per check. `{file}` in the template is replaced
/// by a temporary file holding the source; exit status 0 means valid.
#[derive(Debug, Clone)]
pub struct CommandSyntaxChecker {
    pub template: Vec<String>,
}

impl Default for CommandSyntaxChecker {
    fn default() -> Self {
        Self::python("python3")
    }
}

impl CommandSyntaxChecker {
    pub fn python(interpreter: &str) -> Self {
        Self {
            template: vec![
                interpreter.to_string(),
                "-c".into(),
                PY_CHECK.into(),
                "{file}".into(),
            ],
        }
    }

    pub fn new(template: Vec<String>) -> Self {
        Self { template }
    }
}

impl SyntaxChecker for CommandSyntaxChecker {
    fn check(&self, source: &str) -> Result<SyntaxVerdict, SyntaxCheckError> {
        let mut tmp = tempfile::Builder::new().suffix(".py").tempfile()?;
        tmp.write_all(source.as_bytes())?;
        tmp.flush()?;
        let path = tmp.path().to_string_lossy().into_owned();
        let Some((program, args)) = self.template.split_first() else {
            return Err(SyntaxCheckError::ToolUnavailable(String::new()));
        };
        let args: Vec<String> = args.iter().map(|a| a.replace("{file}", &path)).collect();
        let output = match Command::new(program)
            .args(&args)
            .stdin(Stdio::null())
            .env("PYTHONDONTWRITEBYTECODE", "1")
            .output()
        {
            Ok(o) => o,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(SyntaxCheckError::ToolUnavailable(program.clone()))
            }
            Err(e) => return Err(e.into()),
        };
        if output.status.success() {
            return Ok(SyntaxVerdict::Ok);
        }
        let stderr = String::from_utf8_lossy(&output.stderr).into_owned();
        Ok(failure_from_stderr(&stderr))
    }
}

/// Parse checker diagnostics: the first `line N` occurrence is the error line.
pub fn failure_from_stderr(stderr: &str) -> SyntaxVerdict {
    static LINE_RE: std::sync::OnceLock<Regex> = std::sync::OnceLock::new();
    let re = LINE_RE.get_or_init(|| Regex::new(r"line (\d+)").unwrap());
    let line = re
        .captures(stderr)
        .and_then(|c| c[1].parse::<usize>().ok());
    SyntaxVerdict::Failure {
        line,
        message: stderr.trim().to_string(),
    }
}
