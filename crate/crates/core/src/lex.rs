//! Token-level lexer for indentation-structured (Python-like) source.
//!
//! The lexer is deliberately shallow: it identifies names, numbers, string
//! literals (including prefixed and triple-quoted forms), comments, operators
//! and logical line boundaries. It never builds an AST. Everything above it
//! (normalization, structural indexing, mutation sites) works on the token
//! stream it produces.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Name,
    Number,
    Str,
    Op,
    Comment,
    /// End of a logical line.
    Newline,
    /// A physical newline that does not end a logical line (blank line,
    /// comment-only line, or inside brackets).
    Nl,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    /// Byte offsets into the source.
    pub start: usize,
    pub end: usize,
    /// 1-based line of the first character.
    pub line: usize,
    /// 0-based character column of the first character.
    pub col: usize,
    /// 1-based line of the last character.
    pub end_line: usize,
    /// Bracket nesting depth the token lives in. Opening brackets live in
    /// the outer depth, closing brackets too.
    pub depth: usize,
}

impl Token {
    pub fn text<'a>(&self, src: &'a str) -> &'a str {
        &src[self.start..self.end]
    }

    pub fn is_code(&self) -> bool {
        !matches!(
            self.kind,
            TokenKind::Comment | TokenKind::Newline | TokenKind::Nl
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexError {
    #[error("unterminated string literal starting on line {line}")]
    UnterminatedLiteral { line: usize },
}

pub const KEYWORDS: &[&str] = &[
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class", "continue",
    "def", "del", "elif", "else", "except", "finally", "for", "from", "global", "if", "import",
    "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return", "try", "while",
    "with", "yield",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

const OPS3: &[&str] = &["**=", "//=", ">>=", "<<=", "..."];
const OPS2: &[&str] = &[
    "==", "!=", "<=", ">=", "**", "//", "<<", ">>", "->", ":=", "+=", "-=", "*=", "/=", "%=", "&=",
    "|=", "^=", "@=",
];

/// Tokenize `src`. Comments and newline tokens are included so callers can
/// reconstruct layout.
pub fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    Lexer::new(src).run()
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    line: usize,
    line_start: usize,
    depth: usize,
    tokens: Vec<Token>,
    /// Whether the current logical line has produced a code token yet.
    line_has_code: bool,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            src,
            bytes: src.as_bytes(),
            pos: 0,
            line: 1,
            line_start: 0,
            depth: 0,
            tokens: Vec::new(),
            line_has_code: false,
        }
    }

    fn col_of(&self, pos: usize) -> usize {
        self.src[self.line_start..pos].chars().count()
    }

    fn push(&mut self, kind: TokenKind, start: usize, end: usize, line: usize, col: usize) {
        let depth = match kind {
            TokenKind::Op => {
                let text = &self.src[start..end];
                if matches!(text, ")" | "]" | "}") {
                    self.depth.saturating_sub(1)
                } else {
                    self.depth
                }
            }
            _ => self.depth,
        };
        if !matches!(kind, TokenKind::Comment | TokenKind::Newline | TokenKind::Nl) {
            self.line_has_code = true;
        }
        self.tokens.push(Token {
            kind,
            start,
            end,
            line,
            col,
            end_line: self.line,
            depth,
        });
    }

    fn run(mut self) -> Result<Vec<Token>, LexError> {
        while self.pos < self.bytes.len() {
            let c = self.bytes[self.pos];
            match c {
                b' ' | b'\t' | b'\x0c' | b'\r' => {
                    self.pos += 1;
                }
                b'\\' if self.peek_newline(self.pos + 1).is_some() => {
                    let nl = self.peek_newline(self.pos + 1).unwrap();
                    self.pos += 1 + nl;
                    self.line += 1;
                    self.line_start = self.pos;
                }
                b'\n' => {
                    let kind = if self.depth == 0 && self.line_has_code {
                        TokenKind::Newline
                    } else {
                        TokenKind::Nl
                    };
                    let (line, col) = (self.line, self.col_of(self.pos));
                    self.push(kind, self.pos, self.pos + 1, line, col);
                    if kind == TokenKind::Newline {
                        self.line_has_code = false;
                    }
                    self.pos += 1;
                    self.line += 1;
                    self.line_start = self.pos;
                }
                b'#' => {
                    let start = self.pos;
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                    let col = self.col_of(start);
                    self.push(TokenKind::Comment, start, self.pos, self.line, col);
                }
                _ => {
                    if let Some(qpos) = self.string_start(self.pos) {
                        self.string(self.pos, qpos)?;
                    } else if c.is_ascii_digit()
                        || (c == b'.'
                            && self.bytes.get(self.pos + 1).is_some_and(u8::is_ascii_digit))
                    {
                        self.number();
                    } else if is_ident_start(self.char_at(self.pos)) {
                        self.name();
                    } else {
                        self.op();
                    }
                }
            }
        }
        if self.line_has_code {
            let (line, col) = (self.line, self.col_of(self.pos));
            let pos = self.pos;
            self.push(TokenKind::Newline, pos, pos, line, col);
        }
        Ok(self.tokens)
    }

    fn peek_newline(&self, at: usize) -> Option<usize> {
        match self.bytes.get(at) {
            Some(b'\n') => Some(1),
            Some(b'\r') if self.bytes.get(at + 1) == Some(&b'\n') => Some(2),
            _ => None,
        }
    }

    fn char_at(&self, pos: usize) -> char {
        self.src[pos..].chars().next().unwrap_or('\0')
    }

    /// If a string literal starts at `pos`, return the offset of its opening
    /// quote.
    fn string_start(&self, pos: usize) -> Option<usize> {
        let mut p = pos;
        while p < self.bytes.len() && p - pos < 2 && matches!(self.bytes[p].to_ascii_lowercase(), b'r' | b'b' | b'u' | b'f') {
            p += 1;
        }
        match self.bytes.get(p) {
            Some(b'\'') | Some(b'"') => {
                // A prefix must not be the tail of a longer identifier.
                if p > pos {
                    let prefix = self.src[pos..p].to_ascii_lowercase();
                    let valid = matches!(
                        prefix.as_str(),
                        "r" | "b" | "u" | "f" | "rb" | "br" | "fr" | "rf"
                    );
                    if !valid {
                        return None;
                    }
                }
                Some(p)
            }
            _ => None,
        }
    }

    fn string(&mut self, start: usize, qpos: usize) -> Result<(), LexError> {
        let (line, col) = (self.line, self.col_of(start));
        let quote = self.bytes[qpos];
        let triple = self.bytes.get(qpos + 1) == Some(&quote) && self.bytes.get(qpos + 2) == Some(&quote);
        let mut p = if triple { qpos + 3 } else { qpos + 1 };
        loop {
            let Some(&b) = self.bytes.get(p) else {
                return Err(LexError::UnterminatedLiteral { line });
            };
            match b {
                b'\\' => {
                    if let Some(n) = self.peek_newline(p + 1) {
                        p += 1 + n;
                        self.line += 1;
                        self.line_start = p;
                    } else {
                        p += 1 + self.src[p + 1..].chars().next().map_or(0, char::len_utf8);
                    }
                }
                b'\n' => {
                    if !triple {
                        return Err(LexError::UnterminatedLiteral { line });
                    }
                    p += 1;
                    self.line += 1;
                    self.line_start = p;
                }
                _ if b == quote => {
                    if triple {
                        if self.bytes.get(p + 1) == Some(&quote) && self.bytes.get(p + 2) == Some(&quote) {
                            p += 3;
                            break;
                        }
                        p += 1;
                    } else {
                        p += 1;
                        break;
                    }
                }
                _ => p += 1,
            }
        }
        self.pos = p;
        self.push(TokenKind::Str, start, p, line, col);
        Ok(())
    }

    fn number(&mut self) {
        let start = self.pos;
        let hex_like = self.bytes[start] == b'0'
            && matches!(self.bytes.get(start + 1).map(u8::to_ascii_lowercase), Some(b'x' | b'o' | b'b'));
        let mut p = start;
        while p < self.bytes.len() {
            let b = self.bytes[p];
            if b.is_ascii_alphanumeric() || b == b'_' {
                p += 1;
                if !hex_like
                    && matches!(b, b'e' | b'E')
                    && matches!(self.bytes.get(p), Some(b'+' | b'-'))
                    && self.bytes.get(p + 1).is_some_and(u8::is_ascii_digit)
                {
                    p += 1;
                }
            } else if b == b'.' && !hex_like && !self.src[start..p].contains('.') {
                // `1.` and `1.5` are numbers, `1..` is not valid anyway.
                if self.bytes.get(p + 1).is_some_and(|n| n.is_ascii_alphabetic() && !matches!(n, b'e' | b'E' | b'j' | b'J')) {
                    break;
                }
                p += 1;
            } else {
                break;
            }
        }
        let col = self.col_of(start);
        self.pos = p;
        self.push(TokenKind::Number, start, p, self.line, col);
    }

    fn name(&mut self) {
        let start = self.pos;
        let mut p = start;
        for ch in self.src[start..].chars() {
            if is_ident_continue(ch) {
                p += ch.len_utf8();
            } else {
                break;
            }
        }
        let col = self.col_of(start);
        self.pos = p;
        self.push(TokenKind::Name, start, p, self.line, col);
    }

    fn op(&mut self) {
        let start = self.pos;
        let rest = &self.src[start..];
        let len = OPS3
            .iter()
            .chain(OPS2.iter())
            .find(|op| rest.starts_with(**op))
            .map(|op| op.len())
            .unwrap_or_else(|| rest.chars().next().map_or(1, char::len_utf8));
        let col = self.col_of(start);
        let text = &self.src[start..start + len];
        match text {
            "(" | "[" | "{" => {
                self.push(TokenKind::Op, start, start + len, self.line, col);
                self.depth += 1;
            }
            ")" | "]" | "}" => {
                self.push(TokenKind::Op, start, start + len, self.line, col);
                self.depth = self.depth.saturating_sub(1);
            }
            _ => self.push(TokenKind::Op, start, start + len, self.line, col),
        }
        self.pos = start + len;
    }
}

pub fn is_ident_start(c: char) -> bool {
    c == '_' || c.is_alphabetic()
}

pub fn is_ident_continue(c: char) -> bool {
    c == '_' || c.is_alphanumeric()
}

/// One logical line: the code tokens between two `Newline` tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicalLine {
    /// Indices into the token vector (code and comment tokens, no newlines).
    pub tokens: Vec<usize>,
    pub first_line: usize,
    pub last_line: usize,
}

impl LogicalLine {
    pub fn code<'t>(&'t self, tokens: &'t [Token]) -> impl Iterator<Item = &'t Token> + 't {
        self.tokens
            .iter()
            .map(move |&i| &tokens[i])
            .filter(|t| t.is_code())
    }

    pub fn first_code<'t>(&self, tokens: &'t [Token]) -> Option<&'t Token> {
        self.tokens.iter().map(|&i| &tokens[i]).find(|t| t.is_code())
    }

    pub fn last_code<'t>(&self, tokens: &'t [Token]) -> Option<&'t Token> {
        self.tokens.iter().rev().map(|&i| &tokens[i]).find(|t| t.is_code())
    }
}

/// Group tokens into logical lines. Lines holding only comments are not
/// logical lines.
pub fn logical_lines(tokens: &[Token]) -> Vec<LogicalLine> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = Vec::new();
    let mut has_code = false;
    for (i, t) in tokens.iter().enumerate() {
        match t.kind {
            TokenKind::Newline => {
                if has_code {
                    let first = cur.iter().map(|&j| &tokens[j]).find(|t| t.is_code()).unwrap();
                    let last_line = cur
                        .iter()
                        .map(|&j| tokens[j].end_line)
                        .max()
                        .unwrap_or(first.line);
                    out.push(LogicalLine {
                        tokens: std::mem::take(&mut cur),
                        first_line: first.line,
                        last_line,
                    });
                }
                cur.clear();
                has_code = false;
            }
            TokenKind::Nl => {
                if !has_code {
                    cur.clear();
                }
            }
            TokenKind::Comment => {
                if has_code {
                    cur.push(i);
                }
            }
            _ => {
                has_code = true;
                cur.push(i);
            }
        }
    }
    out
}

/// Leading whitespace of a physical line, verbatim.
pub fn indent_of(line: &str) -> &str {
    let n = line.len() - line.trim_start_matches([' ', '\t', '\x0c']).len();
    &line[..n]
}

/// Indentation width with tabs expanded to the next multiple of eight.
pub fn indent_width(indent: &str) -> usize {
    let mut w = 0;
    for c in indent.chars() {
        match c {
            '\t' => w = (w / 8 + 1) * 8,
            '\x0c' => w = 0,
            _ => w += 1,
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<(TokenKind, String)> {
        tokenize(src)
            .unwrap()
            .into_iter()
            .map(|t| (t.kind, t.text(src).to_string()))
            .collect()
    }

    #[test]
    fn numbers_and_strings() {
        let src = "y = 42 + 0x1F - 1.5e-3 + b'x' + r\"\\d\"";
        let toks = kinds(src);
        let nums: Vec<_> = toks.iter().filter(|t| t.0 == TokenKind::Number).map(|t| t.1.as_str()).collect();
        assert_eq!(nums, ["42", "0x1F", "1.5e-3"]);
        let strs: Vec<_> = toks.iter().filter(|t| t.0 == TokenKind::Str).map(|t| t.1.as_str()).collect();
        assert_eq!(strs, ["b'x'", "r\"\\d\""]);
    }

    #[test]
    fn triple_quoted_spans_lines() {
        let src = "def f():\n    \"\"\"doc\n    more\"\"\"\n    return 1\n";
        let toks = tokenize(src).unwrap();
        let s = toks.iter().find(|t| t.kind == TokenKind::Str).unwrap();
        assert_eq!((s.line, s.end_line), (2, 3));
        let lines = logical_lines(&toks);
        assert_eq!(lines.len(), 3);
        assert_eq!((lines[1].first_line, lines[1].last_line), (2, 3));
    }

    #[test]
    fn unterminated_string() {
        assert_eq!(
            tokenize("x = 'abc\ny = 1\n"),
            Err(LexError::UnterminatedLiteral { line: 1 })
        );
        assert!(tokenize("x = \"\"\"abc\n").is_err());
    }

    #[test]
    fn brackets_join_lines() {
        let src = "x = f(1,\n      2)\ny = 3\n";
        let lines = logical_lines(&tokenize(src).unwrap());
        assert_eq!(lines.len(), 2);
        assert_eq!((lines[0].first_line, lines[0].last_line), (1, 2));
    }

    #[test]
    fn comment_only_lines_are_not_logical() {
        let src = "# hi\n\nx = 1  # trailing\n";
        let toks = tokenize(src).unwrap();
        let lines = logical_lines(&toks);
        assert_eq!(lines.len(), 1);
        assert_eq!(lines[0].first_line, 3);
    }

    #[test]
    fn prefixed_identifier_is_not_string() {
        let toks = kinds("bar'x'");
        assert_eq!(toks[0], (TokenKind::Name, "bar".into()));
    }

    #[test]
    fn method_call_on_int_literal() {
        let toks = kinds("1.real");
        assert_eq!(toks[0], (TokenKind::Number, "1".into()));
    }
}
