//! Code skeletons: a token-budgeted view of one file centred on a focal
//! function.
//!
//! Elements are admitted in a fixed priority order: the focal function, its
//! class header, imports, its class docstring and attributes, module-level
//! statements, every other signature, every other docstring, and finally
//! bodies. Within a tier elements go in file order. An element is admitted
//! whole or not at all, and admission stops at the first element that does
//! not fit, so a larger budget always yields a superset of a smaller one.
//! The emitted text lists admitted elements in original file order with the
//! focal function wrapped in marker comments.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::structure::{FunctionInfo, LineSpan, SourceIndex};
use crate::tokenizer::{BudgetTokenizer, TokenizerError};

pub const OPEN_MARKER: &str = "# target edit";
pub const CLOSE_MARKER: &str = "# end";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkeletonConfig {
    pub budget_tokens: usize,
    pub open_marker: String,
    pub close_marker: String,
    pub tokenizer: BudgetTokenizer,
}

impl Default for SkeletonConfig {
    fn default() -> Self {
        Self {
            budget_tokens: 1024,
            open_marker: OPEN_MARKER.into(),
            close_marker: CLOSE_MARKER.into(),
            tokenizer: BudgetTokenizer::default(),
        }
    }
}

impl SkeletonConfig {
    pub fn with_budget(budget_tokens: usize) -> Self {
        Self {
            budget_tokens,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Focal,
    FocalClassHeader,
    Import,
    FocalClassDocstring,
    FocalClassAttribute,
    Global,
    ClassHeader,
    Signature,
    Docstring,
    ClassDocstring,
    Body,
    ClassAttribute,
    /// Blank and comment-only lines outside every other element.
    Filler,
}

impl ElementKind {
    fn tier(self) -> u8 {
        match self {
            ElementKind::Focal => 0,
            ElementKind::FocalClassHeader => 1,
            ElementKind::Import => 2,
            ElementKind::FocalClassDocstring | ElementKind::FocalClassAttribute => 3,
            ElementKind::Global => 4,
            ElementKind::ClassHeader | ElementKind::Signature => 5,
            ElementKind::Docstring | ElementKind::ClassDocstring => 6,
            ElementKind::Body | ElementKind::ClassAttribute => 7,
            ElementKind::Filler => 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inclusion {
    Full,
    SignatureOnly,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub kind: ElementKind,
    pub name: String,
    pub span: LineSpan,
    pub inclusion: Inclusion,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skeleton {
    pub text: String,
    pub token_count: usize,
    /// Admitted elements in file order.
    pub manifest: Vec<ManifestEntry>,
}

impl Skeleton {
    /// Lines strictly between the markers, i.e. the focal function as it
    /// appears in the skeleton.
    pub fn focal_text(&self) -> Option<String> {
        self.focal_text_with(OPEN_MARKER, CLOSE_MARKER)
    }

    pub fn focal_text_with(&self, open: &str, close: &str) -> Option<String> {
        let lines: Vec<&str> = self.text.lines().collect();
        let open_at = lines.iter().position(|l| l.trim() == open)?;
        let close_at = open_at + 1 + lines[open_at + 1..].iter().position(|l| l.trim() == close)?;
        let mut out = String::new();
        for l in &lines[open_at + 1..close_at] {
            out.push_str(l);
            out.push('\n');
        }
        Some(out)
    }
}

#[derive(Debug, Error)]
pub enum SkeletonError {
    #[error("focal function and markers need {needed} tokens but the budget is {budget}")]
    BudgetTooSmall { needed: usize, budget: usize },
    #[error("focal function `{0}` is not part of the index")]
    FocalNotFound(String),
    #[error(transparent)]
    Tokenizer(#[from] TokenizerError),
}

#[derive(Debug, Clone)]
struct Element {
    kind: ElementKind,
    name: String,
    span: LineSpan,
}

/// Pack a skeleton of `index` around `focal`. `focal_source_override`, when
/// given, replaces the focal function text (e.g. with a mutated version).
pub fn build_skeleton(
    index: &SourceIndex,
    focal: &FunctionInfo,
    focal_source_override: Option<&str>,
    cfg: &SkeletonConfig,
) -> Result<Skeleton, SkeletonError> {
    if !index
        .all_functions()
        .iter()
        .any(|f| f.qualified_name == focal.qualified_name && f.span() == focal.span())
    {
        return Err(SkeletonError::FocalNotFound(focal.qualified_name.clone()));
    }
    let elements = collect_elements(index, focal);
    let focal_block = focal_block(index, focal, focal_source_override, cfg);
    let tok = &cfg.tokenizer;
    let focal_cost = tok.count(&focal_block)?;
    if focal_cost > cfg.budget_tokens {
        return Err(SkeletonError::BudgetTooSmall {
            needed: focal_cost,
            budget: cfg.budget_tokens,
        });
    }

    let mut admitted: Vec<&Element> = Vec::new();
    let mut used = focal_cost;
    for el in &elements {
        let fits = if tok.is_line_additive() {
            let cost = tok.count(&index.text_of(el.span))?;
            let ok = used.saturating_add(cost) <= cfg.budget_tokens;
            if ok {
                used += cost;
            }
            ok
        } else {
            let mut trial = admitted.clone();
            trial.push(el);
            let text = assemble(index, focal, &focal_block, &trial);
            let cost = tok.count(&text)?;
            let ok = cost <= cfg.budget_tokens;
            if ok {
                used = cost;
            }
            ok
        };
        if !fits {
            break;
        }
        admitted.push(el);
    }

    let text = assemble(index, focal, &focal_block, &admitted);
    let token_count = tok.count(&text)?;
    debug_assert!(token_count <= cfg.budget_tokens);
    debug_assert!(!tok.is_line_additive() || token_count == used);

    Ok(Skeleton {
        text,
        token_count,
        manifest: manifest(focal, &admitted),
    })
}

fn focal_block(
    index: &SourceIndex,
    focal: &FunctionInfo,
    override_src: Option<&str>,
    cfg: &SkeletonConfig,
) -> String {
    let indent = index
        .lines
        .get(focal.signature_span.start - 1)
        .map(|l| crate::lex::indent_of(l).to_string())
        .unwrap_or_default();
    let mut body = match override_src {
        Some(s) => s.to_string(),
        None => index.function_source(focal),
    };
    if !body.ends_with('\n') {
        body.push('\n');
    }
    format!(
        "{indent}{open}\n{body}{indent}{close}\n\n",
        open = cfg.open_marker,
        close = cfg.close_marker
    )
}

fn assemble(index: &SourceIndex, focal: &FunctionInfo, focal_block: &str, admitted: &[&Element]) -> String {
    let mut pieces: BTreeMap<usize, String> = BTreeMap::new();
    pieces.insert(focal.signature_span.start, focal_block.to_string());
    for el in admitted {
        pieces.insert(el.span.start, index.text_of(el.span));
    }
    pieces.into_values().collect()
}

fn manifest(focal: &FunctionInfo, admitted: &[&Element]) -> Vec<ManifestEntry> {
    let mut entries: Vec<ManifestEntry> = admitted
        .iter()
        .map(|el| {
            let inclusion = if el.kind == ElementKind::Signature
                && !admitted
                    .iter()
                    .any(|o| o.kind == ElementKind::Body && o.name == el.name)
            {
                Inclusion::SignatureOnly
            } else {
                Inclusion::Full
            };
            ManifestEntry {
                kind: el.kind,
                name: el.name.clone(),
                span: el.span,
                inclusion,
            }
        })
        .collect();
    entries.push(ManifestEntry {
        kind: ElementKind::Focal,
        name: focal.qualified_name.clone(),
        span: focal.span(),
        inclusion: Inclusion::Full,
    });
    entries.sort_by_key(|e| (e.span.start, e.kind));
    entries
}

fn collect_elements(index: &SourceIndex, focal: &FunctionInfo) -> Vec<Element> {
    let mut els: Vec<Element> = Vec::new();
    let mut push = |kind, name: &str, span| {
        els.push(Element {
            kind,
            name: name.to_string(),
            span,
        })
    };
    collect_structural(index, focal, &mut push);

    // Filler: lines no element (or the focal function) covers.
    let mut covered = vec![false; index.line_count() + 1];
    for el in &els {
        for n in el.span.lines() {
            covered[n] = true;
        }
    }
    for n in focal.span().lines() {
        covered[n] = true;
    }
    let mut n = 1;
    while n <= index.line_count() {
        if covered[n] {
            n += 1;
            continue;
        }
        let start = n;
        while n <= index.line_count() && !covered[n] {
            n += 1;
        }
        els.push(Element {
            kind: ElementKind::Filler,
            name: format!("filler@{start}"),
            span: LineSpan::new(start, n - 1),
        });
    }

    els.sort_by_key(|e| (e.kind.tier(), e.span.start));
    els
}

fn collect_structural(index: &SourceIndex, focal: &FunctionInfo, push: &mut dyn FnMut(ElementKind, &str, LineSpan)) {
    for (i, span) in index.imports.iter().enumerate() {
        push(ElementKind::Import, &format!("import#{i}"), *span);
    }
    for (i, span) in index.globals.iter().enumerate() {
        push(ElementKind::Global, &format!("global#{i}"), *span);
    }
    let function_element = |f: &FunctionInfo, push: &mut dyn FnMut(ElementKind, &str, LineSpan)| {
        if f.qualified_name == focal.qualified_name && f.span() == focal.span() {
            return;
        }
        push(ElementKind::Signature, &f.qualified_name, f.signature_span);
        if let Some(doc) = f.docstring_span {
            push(ElementKind::Docstring, &f.qualified_name, doc);
        }
        if let Some(rest) = f.body_rest() {
            push(ElementKind::Body, &f.qualified_name, rest);
        }
    };
    for f in &index.functions {
        function_element(f, push);
    }
    for c in &index.classes {
        let is_focal_class = focal.parent_class.as_deref() == Some(c.name.as_str())
            && c.span().contains(focal.signature_span.start);
        let (header, doc, attr) = if is_focal_class {
            (
                ElementKind::FocalClassHeader,
                ElementKind::FocalClassDocstring,
                ElementKind::FocalClassAttribute,
            )
        } else {
            (
                ElementKind::ClassHeader,
                ElementKind::ClassDocstring,
                ElementKind::ClassAttribute,
            )
        };
        push(header, &c.name, c.header_span);
        if let Some(d) = c.docstring_span {
            push(doc, &c.name, d);
        }
        for (i, a) in c.attribute_spans.iter().enumerate() {
            push(attr, &format!("{}#attr{i}", c.name), *a);
        }
        for m in &c.methods {
            function_element(m, push);
        }
    }

}
