use std::collections::BTreeMap;
use std::ops::Range;

use super::view::{is_aug_assign, View};
use super::OperatorId;
use crate::lex::TokenKind;

pub(crate) const CMP_FAMILY: &[&str] = &["<", "<=", ">", ">=", "==", "!="];

pub(crate) const EXCEPTION_FAMILY: &[&str] = &[
    "ValueError",
    "IndexError",
    "KeyError",
    "TypeError",
    "AttributeError",
    "RuntimeError",
];

const METHOD_SIBLINGS: &[&[&str]] = &[
    &["pop", "get"],
    &["append", "extend"],
    &["keys", "values", "items"],
    &["lower", "upper"],
    &["startswith", "endswith"],
    &["add", "discard", "remove"],
    &["index", "find"],
    &["insert", "append"],
    &["strip", "lstrip", "rstrip"],
    &["split", "rsplit"],
    &["sort", "reverse"],
];

/// Tokens after which a bare comparison can stand without changing how the
/// surrounding expression parses.
const EXPR_OPENERS: &[&str] = &[
    "", "if", "elif", "while", "return", "and", "or", "not", "assert", "(", ",", "=", "[", "yield",
];
const EXPR_CLOSERS: &[&str] = &["", ":", "and", "or", ")", ",", "]", "}", "if", "else"];

/// One applicable edit: a byte range of the source and its replacements.
#[derive(Debug, Clone)]
pub(crate) struct Edit {
    pub at: usize,
    pub range: Range<usize>,
    pub candidates: Vec<String>,
}

/// A place where an inverse replacement may apply.
#[derive(Debug, Clone)]
pub(crate) struct InverseSite {
    pub at: usize,
    pub range: Range<usize>,
}

pub(crate) fn siblings_of(method: &str) -> Vec<&'static str> {
    let mut out = Vec::new();
    for group in METHOD_SIBLINGS {
        if group.contains(&method) {
            for m in group.iter().filter(|m| **m != method) {
                if !out.contains(m) {
                    out.push(*m);
                }
            }
        }
    }
    out
}

fn push_unique(out: &mut Vec<String>, s: String) {
    if !out.contains(&s) {
        out.push(s);
    }
}

pub(crate) fn forward(v: &View, op: OperatorId) -> Vec<Edit> {
    let mut out = match op {
        OperatorId::CmpSwap => cmp_swap(v),
        OperatorId::IsNotSwap => is_not_sites(v)
            .into_iter()
            .map(|(at, range, text)| Edit {
                at,
                range,
                candidates: is_not_candidates(&text),
            })
            .collect(),
        OperatorId::VarMisuse => var_misuse(v),
        OperatorId::DropSelf => drop_self(v),
        OperatorId::DeleteStmt => delete_stmt(v),
        OperatorId::SwapArgs => swap_args_sites(v)
            .into_iter()
            .map(|s| Edit {
                at: s.at,
                candidates: arg_swaps(&v.src[s.range.clone()]),
                range: s.range,
            })
            .collect(),
        OperatorId::DotToBracket => dot_to_bracket(v),
        OperatorId::TruncateChain => truncate_chain(v),
        OperatorId::DeleteReturn => delete_return(v),
        OperatorId::WrapReturn => wrap_return(v),
        OperatorId::UnwrapReturn => unwrap_return(v),
        OperatorId::SwapException => exception_sites(v)
            .into_iter()
            .map(|s| Edit {
                at: s.at,
                candidates: exception_candidates(&v.src[s.range.clone()]),
                range: s.range,
            })
            .collect(),
        OperatorId::RenameCall => rename_call(v),
        OperatorId::DeleteBreak => delete_break(v),
    };
    out.retain(|e| !e.candidates.is_empty());
    out.sort_by_key(|e| (v.toks[e.at].line, v.toks[e.at].col, e.range.start));
    out.dedup_by_key(|e| e.at);
    out
}

pub(crate) fn inverse_sites(v: &View, op: OperatorId) -> Vec<InverseSite> {
    let mut out: Vec<InverseSite> = match op {
        OperatorId::CmpSwap => {
            let mut s: Vec<InverseSite> = body(v)
                .filter(|&i| v.kind(i) == TokenKind::Op && CMP_FAMILY.contains(&v.text(i)))
                .map(|i| InverseSite {
                    at: i,
                    range: v.span(i, i),
                })
                .collect();
            s.extend(strict_equalities(v));
            s
        }
        OperatorId::IsNotSwap => is_not_sites(v)
            .into_iter()
            .map(|(at, range, _)| InverseSite { at, range })
            .collect(),
        OperatorId::VarMisuse => {
            let names = v.bound_names();
            let mut s: Vec<InverseSite> = body(v)
                .filter(|&i| v.is_name(i) && v.prev_text(i) != "." && names.contains(&v.text(i)) && v.is_load(i))
                .map(|i| InverseSite {
                    at: i,
                    range: v.span(i, i),
                })
                .collect();
            s.extend(
                v.plain_attrs()
                    .into_iter()
                    .filter(|&(d, n)| v.in_body(d) && v.is_load(n))
                    .map(|(d, n)| InverseSite {
                        at: d,
                        range: v.span(d, n),
                    }),
            );
            s
        }
        OperatorId::DropSelf => body(v)
            .filter(|&i| {
                v.is_name(i)
                    && v.prev_text(i) != "."
                    && v.text(i) != "self"
                    && v.is_load(i)
                    && v.next_text(i) != "("
            })
            .map(|i| InverseSite {
                at: i,
                range: v.span(i, i),
            })
            .collect(),
        OperatorId::SwapArgs => swap_args_sites(v),
        OperatorId::DotToBracket => body(v)
            .filter(|&i| {
                v.text(i) == "["
                    && i + 2 < v.len()
                    && subscriptable(v, i)
                    && v.kind(i + 1) == TokenKind::Str
                    && v.text(i + 2) == "]"
                    && quoted_identifier(v.text(i + 1)).is_some()
            })
            .map(|i| InverseSite {
                at: i,
                range: v.span(i, i + 2),
            })
            .collect(),
        OperatorId::WrapReturn => return_values(v)
            .filter(|&(a, b)| !wrapped_inner(v.slice(a, b)).is_empty())
            .map(|(a, b)| InverseSite {
                at: a,
                range: v.span(a, b),
            })
            .collect(),
        OperatorId::UnwrapReturn => return_values(v)
            .filter(|&(a, b)| a == b && v.is_name(a))
            .map(|(a, _)| InverseSite {
                at: a,
                range: v.span(a, a),
            })
            .collect(),
        OperatorId::SwapException => exception_sites(v),
        OperatorId::RenameCall => v
            .attr_calls()
            .into_iter()
            .filter(|&i| v.in_body(i))
            .map(|i| InverseSite {
                at: i,
                range: v.span(i, i),
            })
            .collect(),
        OperatorId::DeleteStmt => statement_sites(v),
        OperatorId::DeleteReturn | OperatorId::DeleteBreak | OperatorId::TruncateChain => Vec::new(),
    };
    out.sort_by_key(|s| (v.toks[s.at].line, v.toks[s.at].col, s.range.start, s.range.end));
    out.dedup_by(|a, b| a.range == b.range);
    out
}

/// Replacement texts that undo `op` at a site whose current text is
/// `site_text`. `ctx` is the focal function the site lives in.
pub(crate) fn inverse_candidates(op: OperatorId, site_text: &str, ctx: Option<&View>) -> Vec<String> {
    let text = site_text.trim();
    match op {
        OperatorId::CmpSwap => {
            if CMP_FAMILY.contains(&text) {
                return CMP_FAMILY.iter().filter(|c| **c != text).map(|c| c.to_string()).collect();
            }
            let Some(sv) = View::new(text) else {
                return Vec::new();
            };
            let Some(eq) = (0..sv.len()).find(|&i| sv.text(i) == "==" && sv.toks[i].depth == 0) else {
                return Vec::new();
            };
            if eq == 0 || eq + 1 >= sv.len() {
                return Vec::new();
            }
            let lhs = sv.slice(0, eq - 1);
            let rhs = sv.slice(eq + 1, sv.len() - 1);
            vec![format!("{lhs}.startswith({rhs})"), format!("{lhs}.endswith({rhs})")]
        }
        OperatorId::IsNotSwap => is_not_candidates(text),
        OperatorId::VarMisuse => {
            let Some(ctx) = ctx else {
                return Vec::new();
            };
            if let Some(attr) = text.strip_prefix('.') {
                let mut out = Vec::new();
                for (_, n) in ctx.plain_attrs() {
                    if ctx.text(n) != attr {
                        push_unique(&mut out, format!(".{}", ctx.text(n)));
                    }
                }
                out
            } else {
                ctx.bound_names()
                    .into_iter()
                    .filter(|n| *n != text)
                    .map(str::to_string)
                    .collect()
            }
        }
        OperatorId::DropSelf => {
            let Some(ctx) = ctx else {
                return Vec::new();
            };
            let has = (0..ctx.len().saturating_sub(2))
                .any(|i| ctx.text(i) == "self" && ctx.text(i + 1) == "." && ctx.text(i + 2) == text);
            if has {
                vec![format!("self.{text}")]
            } else {
                Vec::new()
            }
        }
        OperatorId::SwapArgs => arg_swaps(text),
        OperatorId::DotToBracket => {
            let inner = text.strip_prefix('[').and_then(|t| t.strip_suffix(']'));
            match inner.and_then(quoted_identifier) {
                Some(id) => vec![format!(".{id}")],
                None => Vec::new(),
            }
        }
        OperatorId::WrapReturn => wrapped_inner(text),
        OperatorId::UnwrapReturn => {
            let mut out = vec![format!("({text},)"), format!("[{text}]")];
            if let Some(ctx) = ctx {
                for (y, _) in ctx.plain_names() {
                    if y != text {
                        out.push(format!("{text}, {y}"));
                        out.push(format!("({text}, {y})"));
                        out.push(format!("[{text}, {y}]"));
                    }
                }
            }
            out
        }
        OperatorId::SwapException => exception_candidates(text),
        OperatorId::RenameCall => {
            let mut out = Vec::new();
            if let Some(ctx) = ctx {
                for i in ctx.attr_calls() {
                    if ctx.text(i) != text {
                        push_unique(&mut out, ctx.text(i).to_string());
                    }
                }
            }
            for s in siblings_of(text) {
                push_unique(&mut out, s.to_string());
            }
            out
        }
        OperatorId::DeleteStmt => {
            // Re-insert a copy of another statement after the site. The
            // deleted statement itself is unrecoverable from the buggy text.
            let Some(ctx) = ctx else {
                return Vec::new();
            };
            let indent = &site_text[..site_text.len() - site_text.trim_start().len()];
            let head = site_text.trim_end_matches('\n');
            let mut out = Vec::new();
            for s in &ctx.stmts {
                if s.toks.start < ctx.body_start || s.first_line != s.last_line {
                    continue;
                }
                let line = ctx.line_text(s.first_line).trim();
                if line != head.trim() && !line.ends_with(':') {
                    push_unique(&mut out, format!("{head}\n{indent}{line}\n"));
                }
            }
            out
        }
        OperatorId::DeleteReturn | OperatorId::DeleteBreak | OperatorId::TruncateChain => Vec::new(),
    }
}

fn body<'v>(v: &'v View) -> impl Iterator<Item = usize> + 'v {
    v.body_start..v.len()
}

fn cmp_swap(v: &View) -> Vec<Edit> {
    let mut out: Vec<Edit> = body(v)
        .filter(|&i| v.kind(i) == TokenKind::Op && CMP_FAMILY.contains(&v.text(i)))
        .map(|i| Edit {
            at: i,
            range: v.span(i, i),
            candidates: CMP_FAMILY
                .iter()
                .filter(|c| **c != v.text(i))
                .map(|c| c.to_string())
                .collect(),
        })
        .collect();
    // Strictify: `recv.startswith(arg)` becomes `recv == arg`.
    for m in v.attr_calls() {
        if !v.in_body(m) || !matches!(v.text(m), "startswith" | "endswith") {
            continue;
        }
        if m < 2 || v.kind(m - 2) != TokenKind::Name {
            continue;
        }
        let recv_start = v.chain_start(m - 2);
        if !EXPR_OPENERS.contains(&v.prev_text(recv_start)) {
            continue;
        }
        let open = m + 1;
        let Some(close) = v.close_of(open) else {
            continue;
        };
        let items = v.items(open, close);
        if items.len() != 1 || !simple_operand(v, items[0].clone()) {
            continue;
        }
        if !EXPR_CLOSERS.contains(&v.next_text(close)) {
            continue;
        }
        let recv = v.slice(recv_start, m - 2);
        let arg = v.slice(items[0].start, items[0].end - 1);
        out.push(Edit {
            at: m,
            range: v.span(recv_start, close),
            candidates: vec![format!("{recv} == {arg}")],
        });
    }
    out
}

/// Tokens that may follow `==` inside a simple operand.
fn simple_operand(v: &View, r: Range<usize>) -> bool {
    if r.is_empty() {
        return false;
    }
    let depth = v.toks[r.start].depth;
    r.clone().all(|j| {
        v.toks[j].depth > depth
            || !(matches!(
                v.text(j),
                "and" | "or" | "not" | "if" | "else" | "lambda" | "in" | "is" | "=" | ":=" | "*" | "**" | "for"
            ) || CMP_FAMILY.contains(&v.text(j)))
    }) && !matches!(v.text(r.start), "*" | "**")
}

/// `lhs == rhs` spans where lhs is a dotted name, the inverse of strictify.
fn strict_equalities(v: &View) -> Vec<InverseSite> {
    let mut out = Vec::new();
    for k in body(v) {
        if v.text(k) != "==" || k == 0 || v.kind(k - 1) != TokenKind::Name || v.starts_stmt(k) {
            continue;
        }
        let lhs_start = v.chain_start(k - 1);
        if !EXPR_OPENERS.contains(&v.prev_text(lhs_start)) || lhs_start < v.body_start {
            continue;
        }
        let depth = v.toks[k].depth;
        let mut end = k;
        let mut j = k + 1;
        while j < v.len() && !v.starts_stmt(j) {
            let t = &v.toks[j];
            if t.depth < depth {
                break;
            }
            if t.depth == depth
                && (matches!(v.text(j), ":" | "and" | "or" | "," | "if" | "else" | "for")
                    || CMP_FAMILY.contains(&v.text(j)))
            {
                break;
            }
            end = j;
            j += 1;
        }
        if end == k || !simple_operand(v, k + 1..end + 1) {
            continue;
        }
        out.push(InverseSite {
            at: k,
            range: v.span(lhs_start, end),
        });
    }
    out
}

fn is_not_sites(v: &View) -> Vec<(usize, Range<usize>, String)> {
    let mut out = Vec::new();
    for i in body(v) {
        match v.text(i) {
            "is" => {
                if v.next_text(i) == "not" {
                    out.push((i, v.span(i, i + 1), "is not".to_string()));
                } else {
                    out.push((i, v.span(i, i), "is".to_string()));
                }
            }
            "not" if v.next_text(i) == "in" => out.push((i, v.span(i, i + 1), "not in".to_string())),
            "in" if v.prev_text(i) != "not" && !v.is_for_in(i) => {
                out.push((i, v.span(i, i), "in".to_string()))
            }
            _ => {}
        }
    }
    out
}

fn is_not_candidates(text: &str) -> Vec<String> {
    let words: Vec<&str> = text.split_whitespace().collect();
    match words.as_slice() {
        ["is"] => vec!["is not".into()],
        ["is", "not"] => vec!["is".into()],
        ["in"] => vec!["not in".into()],
        ["not", "in"] => vec!["in".into()],
        _ => Vec::new(),
    }
}

fn var_misuse(v: &View) -> Vec<Edit> {
    let mut out = Vec::new();
    let names = v.bound_names();
    if names.len() >= 2 {
        for i in body(v) {
            let t = v.text(i);
            if v.is_name(i) && v.prev_text(i) != "." && names.contains(&t) && v.is_load(i) {
                out.push(Edit {
                    at: i,
                    range: v.span(i, i),
                    candidates: names.iter().filter(|n| **n != t).map(|n| n.to_string()).collect(),
                });
            }
        }
    }
    let attrs = v.plain_attrs();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut order: Vec<&str> = Vec::new();
    for &(_, n) in &attrs {
        let t = v.text(n);
        *counts.entry(t).or_default() += 1;
        if !order.contains(&t) {
            order.push(t);
        }
    }
    for &(d, n) in &attrs {
        let t = v.text(n);
        if !v.in_body(d) || counts[t] < 2 || !v.is_load(n) {
            continue;
        }
        out.push(Edit {
            at: d,
            range: v.span(d, n),
            candidates: order.iter().filter(|o| **o != t).map(|o| format!(".{o}")).collect(),
        });
    }
    out
}

fn drop_self(v: &View) -> Vec<Edit> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for i in 0..v.len().saturating_sub(2) {
        if v.text(i) == "self" && v.text(i + 1) == "." && v.kind(i + 2) == TokenKind::Name {
            *counts.entry(v.text(i + 2)).or_default() += 1;
        }
    }
    body(v)
        .filter(|&i| {
            i + 2 < v.len()
                && v.text(i) == "self"
                && v.prev_text(i) != "."
                && v.text(i + 1) == "."
                && v.is_name(i + 2)
                && v.next_text(i + 2) != "("
                && v.is_load(i + 2)
                && counts[v.text(i + 2)] >= 2
        })
        .map(|i| Edit {
            at: i,
            range: v.span(i, i + 2),
            candidates: vec![v.text(i + 2).to_string()],
        })
        .collect()
}

/// Argument lists of calls with at least two distinct positional arguments.
fn swap_args_sites(v: &View) -> Vec<InverseSite> {
    let mut out = Vec::new();
    for open in body(v) {
        if v.text(open) != "(" || open == 0 || v.starts_stmt(open) {
            continue;
        }
        let callee = open - 1;
        let is_call = (v.kind(callee) == TokenKind::Name && !crate::lex::is_keyword(v.text(callee)))
            || matches!(v.text(callee), ")" | "]");
        if !is_call || matches!(v.prev_text(callee), "def" | "class") {
            continue;
        }
        let Some(close) = v.close_of(open) else {
            continue;
        };
        let items = v.items(open, close);
        if items.len() < 2 {
            continue;
        }
        let depth = v.toks[open].depth + 1;
        let nested_clause = (open + 1..close)
            .any(|j| v.toks[j].depth == depth && matches!(v.text(j), "for" | "lambda"));
        if nested_clause {
            continue;
        }
        let range = v.span(items[0].start, items[items.len() - 1].end - 1);
        if !arg_swaps(&v.src[range.clone()]).is_empty() {
            out.push(InverseSite { at: open, range });
        }
    }
    out
}

/// Every swap of two distinct positional arguments in an argument list,
/// keeping separators in place.
pub(crate) fn arg_swaps(args: &str) -> Vec<String> {
    let wrapped = format!("({args})");
    let Some(v) = View::new(&wrapped) else {
        return Vec::new();
    };
    if v.len() < 2 || v.text(0) != "(" || v.close_of(0) != Some(v.len() - 1) {
        return Vec::new();
    }
    let items = v.items(0, v.len() - 1);
    let texts: Vec<&str> = items.iter().map(|r| v.slice(r.start, r.end - 1)).collect();
    let positional: Vec<usize> = items
        .iter()
        .enumerate()
        .filter(|(_, r)| {
            !matches!(v.text(r.start), "*" | "**")
                && !(r.start..r.end).any(|j| v.toks[j].depth == 1 && v.text(j) == "=")
        })
        .map(|(k, _)| k)
        .collect();
    let mut out = Vec::new();
    for (x, &a) in positional.iter().enumerate() {
        for &b in &positional[x + 1..] {
            if texts[a] == texts[b] {
                continue;
            }
            let mut s = String::new();
            for (k, r) in items.iter().enumerate() {
                let item = if k == a {
                    texts[b]
                } else if k == b {
                    texts[a]
                } else {
                    texts[k]
                };
                s.push_str(item);
                if let Some(next) = items.get(k + 1) {
                    s.push_str(&wrapped[v.toks[r.end - 1].end..v.toks[next.start].start]);
                }
            }
            push_unique(&mut out, s);
        }
    }
    out
}

fn subscriptable(v: &View, i: usize) -> bool {
    i > 0 && !v.starts_stmt(i) && (v.is_name(i - 1) || v.text(i - 1) == "self" || matches!(v.text(i - 1), ")" | "]"))
}

fn quoted_identifier(lit: &str) -> Option<&str> {
    let q = lit.chars().next()?;
    if q != '\'' && q != '"' || lit.len() < 3 || !lit.ends_with(q) {
        return None;
    }
    let inner = &lit[1..lit.len() - 1];
    let mut chars = inner.chars();
    let first = chars.next()?;
    let ok = crate::lex::is_ident_start(first)
        && chars.all(crate::lex::is_ident_continue)
        && !crate::lex::is_keyword(inner);
    ok.then_some(inner)
}

fn dot_to_bracket(v: &View) -> Vec<Edit> {
    v.plain_attrs()
        .into_iter()
        .filter(|&(d, n)| {
            v.in_body(d)
                && subscriptable(v, d)
                && v.is_load(n)
                && !matches!(v.text(v.stmt_of(d).toks.start), "import" | "from")
        })
        .map(|(d, n)| Edit {
            at: d,
            range: v.span(d, n),
            candidates: vec![format!("['{}']", v.text(n))],
        })
        .collect()
}

fn truncate_chain(v: &View) -> Vec<Edit> {
    let mut out = Vec::new();
    for i in body(v) {
        if v.kind(i) != TokenKind::Name || crate::lex::is_keyword(v.text(i)) && v.text(i) != "self" {
            continue;
        }
        if matches!(v.prev_text(i), "." | "def" | "class" | "import" | "from" | "as") {
            continue;
        }
        // (start token, end token, is a dot trailer)
        let mut trailers: Vec<(usize, usize, bool)> = Vec::new();
        let mut j = i + 1;
        while j < v.len() && !v.starts_stmt(j) {
            match v.text(j) {
                "." if j + 1 < v.len() && v.kind(j + 1) == TokenKind::Name => {
                    trailers.push((j, j + 1, true));
                    j += 2;
                }
                "(" | "[" => {
                    let Some(c) = v.close_of(j) else { break };
                    trailers.push((j, c, false));
                    j = c + 1;
                }
                _ => break,
            }
        }
        let dots = trailers.iter().filter(|t| t.2).count();
        if dots < 2 {
            continue;
        }
        let end = trailers.last().unwrap().1;
        let next = v.next_text(end);
        if next == "=" || is_aug_assign(next) {
            continue;
        }
        let n = trailers.len();
        let cut = if trailers[n - 1].2 {
            n - 1
        } else if n >= 2 && trailers[n - 2].2 && v.text(trailers[n - 1].0) == "(" {
            n - 2
        } else {
            continue;
        };
        out.push(Edit {
            at: trailers[cut].0,
            range: v.toks[trailers[cut].0].start..v.toks[end].end,
            candidates: vec![String::new()],
        });
    }
    out
}

const COMPOUND: &[&str] = &[
    "if", "elif", "else", "for", "while", "with", "try", "except", "finally", "def", "class", "async", "@",
    "match", "case",
];

fn statement_sites(v: &View) -> Vec<InverseSite> {
    v.stmts
        .iter()
        .filter(|s| s.toks.start >= v.body_start && v.body_start > 0 || v.body_start == 0)
        .map(|s| InverseSite {
            at: s.toks.start,
            range: v.line_range(s.first_line, s.last_line),
        })
        .collect()
}

fn delete_stmt(v: &View) -> Vec<Edit> {
    let mut out = Vec::new();
    for (idx, s) in v.stmts.iter().enumerate() {
        if s.toks.start < v.body_start || s.toks.start == 0 && v.body_start > 0 {
            continue;
        }
        let first = v.text(s.toks.start);
        if matches!(first, "return" | "break" | "pass" | "continue" | "global" | "nonlocal")
            || COMPOUND.contains(&first)
            || v.kind(s.toks.start) == TokenKind::Str
            || v.text(s.toks.end - 1) == ":"
        {
            continue;
        }
        if v.siblings(idx).len() < 2 {
            continue;
        }
        out.push(Edit {
            at: s.toks.start,
            range: v.line_range(s.first_line, s.last_line),
            candidates: vec![String::new()],
        });
    }
    out
}

fn delete_return(v: &View) -> Vec<Edit> {
    let mut out = Vec::new();
    for (idx, s) in v.stmts.iter().enumerate() {
        if s.toks.start < v.body_start || v.text(s.toks.start) != "return" {
            continue;
        }
        let replacement = if v.siblings(idx).len() >= 2 {
            String::new()
        } else {
            let line = v.line_text(s.first_line);
            let indent = &line[..line.len() - line.trim_start().len()];
            format!("{indent}pass\n")
        };
        out.push(Edit {
            at: s.toks.start,
            range: v.line_range(s.first_line, s.last_line),
            candidates: vec![replacement],
        });
    }
    out
}

fn delete_break(v: &View) -> Vec<Edit> {
    let mut out = Vec::new();
    for (idx, s) in v.stmts.iter().enumerate() {
        if s.toks.start < v.body_start || s.toks.len() != 1 || v.text(s.toks.start) != "break" {
            continue;
        }
        if v.siblings(idx).len() >= 2 {
            out.push(Edit {
                at: s.toks.start,
                range: v.line_range(s.first_line, s.last_line),
                candidates: vec![String::new()],
            });
            continue;
        }
        let Some(p) = v.parent(idx) else { continue };
        let ps = &v.stmts[p];
        if ps.toks.start < v.body_start || v.siblings(p).len() < 2 && v.text(ps.toks.start) == "if" {
            continue;
        }
        let removable = match v.text(ps.toks.start) {
            "else" => true,
            "if" => {
                let follow = v.stmts[idx + 1..].iter().find(|n| n.indent <= ps.indent);
                !follow.is_some_and(|n| n.indent == ps.indent && matches!(v.text(n.toks.start), "elif" | "else"))
            }
            _ => false,
        };
        if removable {
            out.push(Edit {
                at: s.toks.start,
                range: v.line_range(ps.first_line, s.last_line),
                candidates: vec![String::new()],
            });
        }
    }
    out
}

/// Value token ranges (inclusive) of `return` statements in the body.
fn return_values<'v>(v: &'v View) -> impl Iterator<Item = (usize, usize)> + 'v {
    v.stmts
        .iter()
        .filter(move |s| s.toks.start >= v.body_start && v.text(s.toks.start) == "return" && s.toks.len() >= 2)
        .map(|s| (s.toks.start + 1, s.toks.end - 1))
}

fn wrap_return(v: &View) -> Vec<Edit> {
    return_values(v)
        .filter(|&(a, b)| {
            v.toks[a].line == v.toks[b].end_line
                && v.text(a) != "yield"
                && !(a..=b).any(|j| v.toks[j].depth == 0 && v.text(j) == ",")
        })
        .map(|(a, b)| {
            let e = v.slice(a, b);
            Edit {
                at: a,
                range: v.span(a, b),
                candidates: vec![format!("({e},)"), format!("[{e}]")],
            }
        })
        .collect()
}

/// The element of a one-element tuple or list display.
fn wrapped_inner(text: &str) -> Vec<String> {
    let Some(v) = View::new(text) else {
        return Vec::new();
    };
    let n = v.len();
    if n < 3 || !matches!(v.text(0), "(" | "[") || v.close_of(0) != Some(n - 1) {
        return Vec::new();
    }
    let items = v.items(0, n - 1);
    if items.len() != 1 {
        return Vec::new();
    }
    let trailing_comma = v.text(n - 2) == ",";
    if v.text(0) == "(" && !trailing_comma {
        return Vec::new();
    }
    vec![v.slice(items[0].start, items[0].end - 1).to_string()]
}

fn unwrap_return(v: &View) -> Vec<Edit> {
    let names = v.plain_names();
    let count = |n: &str| names.iter().find(|(m, _)| *m == n).map_or(0, |e| e.1);
    let mut out = Vec::new();
    for (a, b) in return_values(v) {
        let (elems, bracketed): (Vec<Range<usize>>, bool) =
            if matches!(v.text(a), "(" | "[") && v.close_of(a) == Some(b) {
                (v.items(a, b), true)
            } else {
                let mut items = Vec::new();
                let mut start = a;
                for j in a..=b {
                    if v.toks[j].depth == 0 && v.text(j) == "," {
                        items.push(start..j);
                        start = j + 1;
                    }
                }
                if start <= b {
                    items.push(start..b + 1);
                }
                (items, false)
            };
        if elems.is_empty() || elems.len() > 2 || elems.iter().any(|r| r.len() != 1 || !v.is_name(r.start)) {
            continue;
        }
        if !bracketed && elems.len() != 2 {
            continue;
        }
        if bracketed && elems.len() == 1 && v.text(a) == "(" && v.text(b - 1) != "," {
            continue;
        }
        if elems.len() == 2 && count(v.text(elems[1].start)) < 2 {
            continue;
        }
        out.push(Edit {
            at: a,
            range: v.span(a, b),
            candidates: vec![v.text(elems[0].start).to_string()],
        });
    }
    out
}

fn exception_sites(v: &View) -> Vec<InverseSite> {
    body(v)
        .filter(|&i| EXCEPTION_FAMILY.contains(&v.text(i)) && matches!(v.prev_text(i), "raise" | "except"))
        .map(|i| InverseSite {
            at: i,
            range: v.span(i, i),
        })
        .collect()
}

fn exception_candidates(text: &str) -> Vec<String> {
    if !EXCEPTION_FAMILY.contains(&text) {
        return Vec::new();
    }
    EXCEPTION_FAMILY.iter().filter(|e| **e != text).map(|e| e.to_string()).collect()
}

fn rename_call(v: &View) -> Vec<Edit> {
    let calls = v.attr_calls();
    let mut names: Vec<&str> = Vec::new();
    for &i in &calls {
        if !names.contains(&v.text(i)) {
            names.push(v.text(i));
        }
    }
    calls
        .iter()
        .filter(|&&i| v.in_body(i))
        .map(|&i| {
            let m = v.text(i);
            let mut candidates = Vec::new();
            if calls.iter().filter(|&&j| v.text(j) == m).count() >= 2 {
                for n in names.iter().filter(|n| **n != m) {
                    push_unique(&mut candidates, n.to_string());
                }
            }
            for s in siblings_of(m) {
                push_unique(&mut candidates, s.to_string());
            }
            Edit {
                at: i,
                range: v.span(i, i),
                candidates,
            }
        })
        .collect()
}
