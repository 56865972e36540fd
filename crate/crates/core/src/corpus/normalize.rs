//! Source normalization used to decide whether two versions of a function
//! differ in a way that matters.
//!
//! Comments are dropped, string literals become `STR_LIT`, numeric literals
//! become `NUM_LIT`, intra-line whitespace is re-emitted canonically,
//! trailing whitespace disappears and runs of blank lines collapse to one.
//! Indentation of every logical line is kept verbatim. Each logical line is
//! emitted on a single physical line.

use crate::lex::{self, is_keyword, LexError, Token, TokenKind};

pub const STR_PLACEHOLDER: &str = "STR_LIT";
pub const NUM_PLACEHOLDER: &str = "NUM_LIT";

/// Normalize a fragment of source text.
pub fn normalize(source: &str) -> Result<String, LexError> {
    let tokens = lex::tokenize(source)?;
    let lines: Vec<&str> = source.split('\n').collect();
    let logical = lex::logical_lines(&tokens);

    let mut out: Vec<String> = Vec::with_capacity(logical.len());
    let mut prev_last: usize = 0;
    for ll in &logical {
        // Physical lines strictly between the previous logical line and this
        // one are blank or comment-only. Any blank among them yields one
        // blank output line.
        let gap_has_blank = (prev_last + 1..ll.first_line)
            .any(|n| lines.get(n - 1).is_some_and(|l| l.trim().is_empty()));
        if gap_has_blank && !out.is_empty() {
            out.push(String::new());
        }
        let indent = lines
            .get(ll.first_line - 1)
            .map(|l| lex::indent_of(l))
            .unwrap_or("");
        let mut text = String::from(indent);
        let mut prev: Option<&Token> = None;
        for tok in ll.code(&tokens) {
            if let Some(p) = prev {
                if needs_space(p, tok, source) {
                    text.push(' ');
                }
            }
            text.push_str(canonical_text(tok, source));
            prev = Some(tok);
        }
        out.push(text.trim_end().to_string());
        prev_last = ll.last_line;
    }
    Ok(out.join("\n"))
}

fn canonical_text<'a>(tok: &Token, src: &'a str) -> &'a str {
    match tok.kind {
        TokenKind::Str => STR_PLACEHOLDER,
        TokenKind::Number => NUM_PLACEHOLDER,
        _ => tok.text(src),
    }
}

fn is_wordlike(tok: &Token, src: &str) -> bool {
    match tok.kind {
        TokenKind::Name => !is_keyword(tok.text(src)),
        TokenKind::Str | TokenKind::Number => true,
        _ => false,
    }
}

/// Canonical spacing between two adjacent code tokens.
fn needs_space(prev: &Token, next: &Token, src: &str) -> bool {
    let p = prev.text(src);
    let n = next.text(src);
    if prev.kind == TokenKind::Op {
        if matches!(p, "(" | "[" | "{") {
            return false;
        }
        if p == "." {
            return next.kind == TokenKind::Name && is_keyword(n);
        }
        // Decorator marker at line start.
        if p == "@" && is_line_start(prev, src) {
            return false;
        }
    }
    if next.kind == TokenKind::Op {
        if matches!(n, ")" | "]" | "}" | "," | ":" | ";" | ".") {
            // `from . import x` keeps its space after the keyword.
            return n == "." && prev.kind == TokenKind::Name && is_keyword(p);
        }
        if matches!(n, "(" | "[") {
            let closes = prev.kind == TokenKind::Op && matches!(p, ")" | "]" | "}");
            return !(is_wordlike(prev, src) || closes);
        }
    }
    true
}

fn is_line_start(tok: &Token, src: &str) -> bool {
    let line_start = src[..tok.start].rfind('\n').map_or(0, |i| i + 1);
    src[line_start..tok.start].trim().is_empty()
}
