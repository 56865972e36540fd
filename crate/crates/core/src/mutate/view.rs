use std::ops::Range;

use crate::lex::{self, indent_width, Token, TokenKind};

/// Code tokens of one function (or bare snippet) with statement structure.
pub(crate) struct View<'a> {
    pub src: &'a str,
    pub toks: Vec<Token>,
    /// Index of the first body token. Zero when the text is not a `def`.
    pub body_start: usize,
    pub stmts: Vec<Stmt>,
    /// Byte offset of each physical line start, 1-based (index 0 unused).
    line_starts: Vec<usize>,
}

#[derive(Debug, Clone)]
pub(crate) struct Stmt {
    /// Code token index range.
    pub toks: Range<usize>,
    pub first_line: usize,
    pub last_line: usize,
    pub indent: usize,
}

impl<'a> View<'a> {
    pub fn new(src: &'a str) -> Option<Self> {
        let all = lex::tokenize(src).ok()?;
        let mut toks = Vec::new();
        let mut stmts = Vec::new();
        let mut cur_start: Option<usize> = None;
        for t in &all {
            match t.kind {
                TokenKind::Newline => {
                    if let Some(s) = cur_start.take() {
                        stmts.push(s..toks.len());
                    }
                }
                TokenKind::Comment | TokenKind::Nl => {}
                _ => {
                    if cur_start.is_none() {
                        cur_start = Some(toks.len());
                    }
                    toks.push(t.clone());
                }
            }
        }
        if let Some(s) = cur_start {
            stmts.push(s..toks.len());
        }
        let mut line_starts = vec![0, 0];
        for (i, b) in src.bytes().enumerate() {
            if b == b'\n' {
                line_starts.push(i + 1);
            }
        }
        let lines: Vec<&str> = src.split('\n').collect();
        let stmts = stmts
            .into_iter()
            .map(|r| {
                let first_line = toks[r.start].line;
                let last_line = toks[r.end - 1].end_line;
                let indent = indent_width(lex::indent_of(lines[first_line - 1]));
                Stmt {
                    toks: r,
                    first_line,
                    last_line,
                    indent,
                }
            })
            .collect();
        let mut v = View {
            src,
            toks,
            body_start: 0,
            stmts,
            line_starts,
        };
        v.body_start = v.find_body_start();
        Some(v)
    }

    fn find_body_start(&self) -> usize {
        for s in &self.stmts {
            let first = self.text(s.toks.start);
            if first == "@" {
                continue;
            }
            let mut i = s.toks.start;
            if first == "async" {
                i += 1;
            }
            if i >= s.toks.end || self.text(i) != "def" {
                return 0;
            }
            for j in i..s.toks.end {
                if self.text(j) == ":" && self.toks[j].depth == 0 {
                    return j + 1;
                }
            }
            return 0;
        }
        0
    }

    pub fn len(&self) -> usize {
        self.toks.len()
    }

    pub fn text(&self, i: usize) -> &'a str {
        self.toks[i].text(self.src)
    }

    pub fn get(&self, i: Option<usize>) -> &'a str {
        i.filter(|&i| i < self.toks.len()).map(|i| self.text(i)).unwrap_or("")
    }

    pub fn kind(&self, i: usize) -> TokenKind {
        self.toks[i].kind
    }

    pub fn is_name(&self, i: usize) -> bool {
        self.kind(i) == TokenKind::Name && !lex::is_keyword(self.text(i))
    }

    pub fn prev(&self, i: usize) -> Option<usize> {
        i.checked_sub(1)
    }

    pub fn next(&self, i: usize) -> Option<usize> {
        (i + 1 < self.toks.len()).then_some(i + 1)
    }

    pub fn prev_text(&self, i: usize) -> &'a str {
        if self.starts_stmt(i) {
            return "";
        }
        self.get(self.prev(i))
    }

    pub fn next_text(&self, i: usize) -> &'a str {
        if self.ends_stmt(i) {
            return "";
        }
        self.get(self.next(i))
    }

    pub fn stmt_of(&self, i: usize) -> &Stmt {
        self.stmts
            .iter()
            .find(|s| s.toks.contains(&i))
            .expect("token belongs to a statement")
    }

    pub fn starts_stmt(&self, i: usize) -> bool {
        self.stmts.iter().any(|s| s.toks.start == i)
    }

    pub fn ends_stmt(&self, i: usize) -> bool {
        self.stmts.iter().any(|s| s.toks.end == i + 1)
    }

    pub fn in_body(&self, i: usize) -> bool {
        i >= self.body_start
    }

    /// Matching closing bracket for the opening bracket at `i`.
    pub fn close_of(&self, i: usize) -> Option<usize> {
        let depth = self.toks[i].depth;
        (i + 1..self.toks.len()).find(|&j| {
            self.toks[j].depth == depth && matches!(self.text(j), ")" | "]" | "}")
        })
    }

    /// Byte range covering tokens `a..=b`.
    pub fn span(&self, a: usize, b: usize) -> Range<usize> {
        self.toks[a].start..self.toks[b].end
    }

    pub fn slice(&self, a: usize, b: usize) -> &'a str {
        &self.src[self.span(a, b)]
    }

    /// Byte range of physical lines `first..=last`, including the final
    /// newline when there is one.
    pub fn line_range(&self, first: usize, last: usize) -> Range<usize> {
        let start = self.line_starts[first];
        let end = self.line_starts.get(last + 1).copied().unwrap_or(self.src.len());
        start..end
    }

    pub fn line_text(&self, line: usize) -> &'a str {
        let r = self.line_range(line, line);
        self.src[r].trim_end_matches('\n')
    }

    /// Statements sharing the block of `s`: same indentation, with no
    /// shallower statement in between.
    pub fn siblings(&self, idx: usize) -> Vec<usize> {
        let indent = self.stmts[idx].indent;
        let mut out = vec![idx];
        for j in (0..idx).rev() {
            let s = &self.stmts[j];
            if s.indent < indent || s.toks.start < self.body_start {
                break;
            }
            if s.indent == indent {
                out.push(j);
            }
        }
        for j in idx + 1..self.stmts.len() {
            let s = &self.stmts[j];
            if s.indent < indent {
                break;
            }
            if s.indent == indent {
                out.push(j);
            }
        }
        out.sort_unstable();
        out
    }

    /// The header statement owning the block of statement `idx`.
    pub fn parent(&self, idx: usize) -> Option<usize> {
        let indent = self.stmts[idx].indent;
        (0..idx).rev().find(|&j| self.stmts[j].indent < indent)
    }

    /// Top-level comma-separated items between brackets `open` and `close`.
    pub fn items(&self, open: usize, close: usize) -> Vec<Range<usize>> {
        let depth = self.toks[open].depth + 1;
        let mut out = Vec::new();
        let mut start = open + 1;
        for j in open + 1..close {
            if self.toks[j].depth == depth && self.text(j) == "," {
                out.push(start..j);
                start = j + 1;
            }
        }
        if start < close {
            out.push(start..close);
        }
        out
    }

    /// Whether the name at `i` is read rather than bound.
    pub fn is_load(&self, i: usize) -> bool {
        let next = self.next_text(i);
        if next == "=" || is_aug_assign(next) {
            return false;
        }
        if matches!(self.prev_text(i), "def" | "class" | "as" | "global" | "nonlocal" | "import" | "from") {
            return false;
        }
        !self.is_for_target(i) && !self.is_unpack_target(i)
    }

    /// Whether `i` is one of several comma-separated assignment targets.
    fn is_unpack_target(&self, i: usize) -> bool {
        let stmt = self.stmt_of(i).toks.clone();
        self.toks[i].depth == 0
            && (stmt.start..i).all(|k| self.text(k) == "," || self.kind(k) == TokenKind::Name)
            && (i + 1..stmt.end)
                .take_while(|&k| self.text(k) == "," || self.kind(k) == TokenKind::Name || self.text(k) == "=")
                .any(|k| self.text(k) == "=")
    }

    /// Whether `i` sits between a `for` and its `in` at the same depth.
    pub fn is_for_target(&self, i: usize) -> bool {
        let depth = self.toks[i].depth;
        let stmt = self.stmt_of(i).toks.clone();
        let mut j = i;
        while j > stmt.start {
            j -= 1;
            let t = &self.toks[j];
            if t.depth > depth {
                continue;
            }
            if t.depth < depth {
                return false;
            }
            match self.text(j) {
                "for" => {
                    // Must not pass an `in` first; checked below.
                    return !(j + 1..i).any(|k| self.toks[k].depth == depth && self.text(k) == "in");
                }
                "in" | "if" | "=" | ":" => return false,
                _ => {}
            }
        }
        false
    }

    /// Whether the `in` at `i` is the loop keyword of a `for` clause.
    pub fn is_for_in(&self, i: usize) -> bool {
        let depth = self.toks[i].depth;
        let stmt = self.stmt_of(i).toks.clone();
        let mut j = i;
        while j > stmt.start {
            j -= 1;
            let t = &self.toks[j];
            if t.depth > depth {
                continue;
            }
            if t.depth < depth {
                return false;
            }
            match self.text(j) {
                "for" => return true,
                "in" | "if" => return false,
                _ => {}
            }
        }
        false
    }

    /// Plain identifiers (not attributes, not keywords) in first-occurrence
    /// order, with occurrence counts.
    pub fn plain_names(&self) -> Vec<(&'a str, usize)> {
        let mut out: Vec<(&str, usize)> = Vec::new();
        for i in 0..self.len() {
            if self.is_name(i) && self.prev_text(i) != "." {
                let t = self.text(i);
                match out.iter_mut().find(|(n, _)| *n == t) {
                    Some(e) => e.1 += 1,
                    None => out.push((t, 1)),
                }
            }
        }
        out
    }

    /// Parameters (minus self/cls) and assigned locals, in first-occurrence
    /// order.
    pub fn bound_names(&self) -> Vec<&'a str> {
        let mut out: Vec<&str> = Vec::new();
        let mut add = |n: &'a str| {
            if n != "self" && n != "cls" && !out.contains(&n) {
                out.push(n);
            }
        };
        if self.body_start > 0 {
            let open = (0..self.body_start).find(|&j| self.text(j) == "(" && self.toks[j].depth == 0);
            if let Some(open) = open {
                let close = self.close_of(open).unwrap_or(self.body_start);
                for j in open + 1..close {
                    if self.is_name(j)
                        && self.toks[j].depth == 1
                        && matches!(self.text(j - 1), "(" | "," | "*" | "**")
                    {
                        add(self.text(j));
                    }
                }
            }
        }
        for i in self.body_start..self.len() {
            if !self.is_name(i) || self.prev_text(i) == "." {
                continue;
            }
            let next = self.next_text(i);
            let stmt_start = self.stmt_of(i).toks.start;
            let at_target = self.toks[i].depth == 0
                && (next == "=" || is_aug_assign(next) || next == ",")
                && (i == stmt_start || (stmt_start..i).all(|k| self.text(k) == "," || self.is_name(k)));
            let assigned = at_target
                && (next != ","
                    || (i..self.stmt_of(i).toks.end).any(|k| self.toks[k].depth == 0 && self.text(k) == "="));
            if assigned || self.is_for_target(i) || matches!(self.prev_text(i), "as") {
                add(self.text(i));
            }
        }
        out
    }

    /// `.name` attributes that are not called, as (dot index, name index).
    pub fn plain_attrs(&self) -> Vec<(usize, usize)> {
        (1..self.len())
            .filter(|&i| {
                self.text(i - 1) == "."
                    && self.kind(i) == TokenKind::Name
                    && self.next_text(i) != "("
                    && !self.starts_stmt(i)
            })
            .map(|i| (i - 1, i))
            .collect()
    }

    /// `.name(` attribute calls, as name indices.
    pub fn attr_calls(&self) -> Vec<usize> {
        (1..self.len())
            .filter(|&i| {
                self.text(i - 1) == "."
                    && self.kind(i) == TokenKind::Name
                    && self.next_text(i) == "("
                    && !self.starts_stmt(i)
            })
            .collect()
    }

    /// Start of the dotted name chain ending at `end` (a name token).
    pub fn chain_start(&self, end: usize) -> usize {
        let mut s = end;
        while s >= 2 && self.text(s - 1) == "." && self.kind(s - 2) == TokenKind::Name && !self.starts_stmt(s) {
            s -= 2;
        }
        s
    }
}

pub(crate) fn is_aug_assign(t: &str) -> bool {
    matches!(
        t,
        "+=" | "-=" | "*=" | "/=" | "//=" | "%=" | "**=" | ">>=" | "<<=" | "&=" | "|=" | "^=" | "@="
    )
}
