//! Heuristic bug injection and the matching inverse catalog.
//!
//! Each operator enumerates syntax sites in a function body and rewrites one
//! of them. Choices among several replacements are drawn from a seeded
//! generator, so `(source, operator, site, seed)` always yields the same
//! mutant. Every non-lossy operator has an inverse: at the rewritten site,
//! one of [`inverse_candidates`] restores the original normalized text.

mod ops;
mod view;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{normalize, MethodRecord};
use crate::skeleton::Skeleton;
use crate::structure::{index_file, SyntaxCheckError, SyntaxChecker, SyntaxVerdict};

pub(crate) use view::View;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorId {
    CmpSwap,
    IsNotSwap,
    VarMisuse,
    DropSelf,
    DeleteStmt,
    SwapArgs,
    DotToBracket,
    TruncateChain,
    DeleteReturn,
    WrapReturn,
    UnwrapReturn,
    SwapException,
    RenameCall,
    DeleteBreak,
}

impl OperatorId {
    pub const ALL: [OperatorId; 14] = [
        OperatorId::CmpSwap,
        OperatorId::IsNotSwap,
        OperatorId::VarMisuse,
        OperatorId::DropSelf,
        OperatorId::DeleteStmt,
        OperatorId::SwapArgs,
        OperatorId::DotToBracket,
        OperatorId::TruncateChain,
        OperatorId::DeleteReturn,
        OperatorId::WrapReturn,
        OperatorId::UnwrapReturn,
        OperatorId::SwapException,
        OperatorId::RenameCall,
        OperatorId::DeleteBreak,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OperatorId::CmpSwap => "cmp_swap",
            OperatorId::IsNotSwap => "is_not_swap",
            OperatorId::VarMisuse => "var_misuse",
            OperatorId::DropSelf => "drop_self",
            OperatorId::DeleteStmt => "delete_stmt",
            OperatorId::SwapArgs => "swap_args",
            OperatorId::DotToBracket => "dot_to_bracket",
            OperatorId::TruncateChain => "truncate_chain",
            OperatorId::DeleteReturn => "delete_return",
            OperatorId::WrapReturn => "wrap_return",
            OperatorId::UnwrapReturn => "unwrap_return",
            OperatorId::SwapException => "swap_exception",
            OperatorId::RenameCall => "rename_call",
            OperatorId::DeleteBreak => "delete_break",
        }
    }

    /// Operators whose rewrite discards text that cannot be recovered from
    /// the mutant.
    pub fn is_lossy(self) -> bool {
        matches!(
            self,
            OperatorId::DeleteStmt | OperatorId::DeleteReturn | OperatorId::DeleteBreak | OperatorId::TruncateChain
        )
    }

    pub fn site_selector(self) -> &'static str {
        match self {
            OperatorId::CmpSwap => "comparison operator, or a startswith/endswith call that can become ==",
            OperatorId::IsNotSwap => "`is`, `is not`, `in` (outside for clauses), `not in`",
            OperatorId::VarMisuse => "read of a parameter or local, or of a non-called attribute used twice",
            OperatorId::DropSelf => "`self.x` read where `self.x` appears at least twice",
            OperatorId::DeleteStmt => "simple statement with at least one sibling in its block",
            OperatorId::SwapArgs => "call with two distinct positional arguments",
            OperatorId::DotToBracket => "non-called attribute read",
            OperatorId::TruncateChain => "last link of an attribute chain with two or more links",
            OperatorId::DeleteReturn => "return statement",
            OperatorId::WrapReturn => "single-line return value without a top-level comma",
            OperatorId::UnwrapReturn => "return of a one- or two-name tuple or list",
            OperatorId::SwapException => "exception class after raise or except",
            OperatorId::RenameCall => "attribute call `.m(`",
            OperatorId::DeleteBreak => "break statement, with its else or if when it is the only child",
        }
    }
}

impl fmt::Display for OperatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OperatorId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        OperatorId::ALL
            .into_iter()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| format!("unknown operator `{s}`"))
    }
}

/// Position in the function source: 1-based line, 0-based column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Site {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectedBug {
    pub original: MethodRecord,
    pub mutated_source: String,
    pub operator: OperatorId,
    pub site: Site,
    pub seed: u64,
    pub lossy: bool,
    /// Original text at the site and what replaced it.
    pub replaced: String,
    pub replacement: String,
}

impl InjectedBug {
    pub fn mutated_normalized(&self) -> String {
        normalize(&self.mutated_source).unwrap_or_default()
    }
}

#[derive(Debug, Error)]
pub enum MutateError {
    #[error("source does not tokenize")]
    Unparseable,
    #[error("no {op} site at {line}:{col}")]
    NoSuchSite { op: OperatorId, line: usize, col: usize },
    #[error("mutation leaves the normalized text unchanged")]
    DegenerateMutation,
    #[error("mutant fails the syntax check: {message}")]
    SyntaxBroken { line: Option<usize>, message: String },
    #[error(transparent)]
    Checker(#[from] SyntaxCheckError),
}

/// Applicable sites of `op` in `source`, ordered by (line, column).
pub fn enumerate_sites(source: &str, op: OperatorId) -> Vec<Site> {
    applicable_edits(source, op)
        .into_iter()
        .map(|(site, _, _)| site)
        .collect()
}

fn applicable_edits(source: &str, op: OperatorId) -> Vec<(Site, std::ops::Range<usize>, Vec<String>)> {
    let Some(v) = View::new(source) else {
        return Vec::new();
    };
    ops::forward(&v, op)
        .into_iter()
        .filter_map(|e| {
            let candidates: Vec<String> = e
                .candidates
                .into_iter()
                .filter(|c| structurally_sound(&splice(source, e.range.clone(), c)))
                .collect();
            let t = &v.toks[e.at];
            (!candidates.is_empty()).then_some((
                Site {
                    line: t.line,
                    col: t.col,
                },
                e.range,
                candidates,
            ))
        })
        .collect()
}

/// Cheap structural gate: the text tokenizes and indexes once dedented.
pub(crate) fn structurally_sound(text: &str) -> bool {
    let (dedented, _) = dedent(text);
    index_file("<mutant>", &dedented).is_ok()
}

fn splice(source: &str, range: std::ops::Range<usize>, replacement: &str) -> String {
    let mut s = String::with_capacity(source.len() + replacement.len());
    s.push_str(&source[..range.start]);
    s.push_str(replacement);
    s.push_str(&source[range.end..]);
    s
}

/// Remove the common leading indentation; returns the text and the indent.
pub fn dedent(text: &str) -> (String, String) {
    let indent = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .map(|l| crate::lex::indent_of(l).to_string())
        .unwrap_or_default();
    if indent.is_empty() {
        return (text.to_string(), indent);
    }
    let out: String = text
        .split_inclusive('\n')
        .map(|l| l.strip_prefix(indent.as_str()).unwrap_or(l.trim_start_matches([' ', '\t'])))
        .collect();
    (out, indent)
}

/// Add `indent` to every non-blank line.
pub fn reindent(text: &str, indent: &str) -> String {
    text.split_inclusive('\n')
        .map(|l| {
            if l.trim().is_empty() {
                l.to_string()
            } else {
                format!("{indent}{l}")
            }
        })
        .collect()
}

/// Rewrite `source` at `site` without any syntax check. Returns the mutant
/// and the (replaced, replacement) texts.
pub fn mutate_source(source: &str, op: OperatorId, site: Site, seed: u64) -> Result<(String, String, String), MutateError> {
    if View::new(source).is_none() {
        return Err(MutateError::Unparseable);
    }
    let (_, range, candidates) = applicable_edits(source, op)
        .into_iter()
        .find(|(s, _, _)| *s == site)
        .ok_or(MutateError::NoSuchSite {
            op,
            line: site.line,
            col: site.col,
        })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let choice = candidates[rng.gen_range(0..candidates.len())].clone();
    let replaced = source[range.clone()].to_string();
    Ok((splice(source, range, &choice), replaced, choice))
}

/// Inject a bug into `original` at `site`.
pub fn apply(
    original: &MethodRecord,
    op: OperatorId,
    site: Site,
    seed: u64,
    checker: &dyn SyntaxChecker,
) -> Result<InjectedBug, MutateError> {
    let (mutated, replaced, replacement) = mutate_source(&original.source, op, site, seed)?;
    let mutated_norm = normalize(&mutated).map_err(|_| MutateError::Unparseable)?;
    if mutated_norm == original.normalized {
        return Err(MutateError::DegenerateMutation);
    }
    let (dedented, _) = dedent(&mutated);
    if let SyntaxVerdict::Failure { line, message } = checker.check(&dedented)? {
        return Err(MutateError::SyntaxBroken { line, message });
    }
    Ok(InjectedBug {
        original: original.clone(),
        mutated_source: mutated,
        operator: op,
        site,
        seed,
        lossy: op.is_lossy(),
        replaced,
        replacement,
    })
}

/// Relative sampling weight per operator. Missing operators weigh zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OperatorWeights(pub BTreeMap<OperatorId, f64>);

impl Default for OperatorWeights {
    fn default() -> Self {
        Self(OperatorId::ALL.into_iter().map(|o| (o, 1.0)).collect())
    }
}

impl OperatorWeights {
    pub fn only(ops: &[OperatorId]) -> Self {
        Self(ops.iter().map(|o| (*o, 1.0)).collect())
    }

    pub fn non_lossy() -> Self {
        Self(OperatorId::ALL.into_iter().filter(|o| !o.is_lossy()).map(|o| (o, 1.0)).collect())
    }

    pub fn weight(&self, op: OperatorId) -> f64 {
        self.0.get(&op).copied().unwrap_or(0.0)
    }
}

/// Draw one bug for `original`. Each applicable (operator, site) pair is
/// weighted by its operator's weight; pairs whose mutant is degenerate or
/// fails the syntax check are discarded and the draw repeats.
pub fn sample_bug(
    original: &MethodRecord,
    weights: &OperatorWeights,
    seed: u64,
    checker: &dyn SyntaxChecker,
) -> Result<Option<InjectedBug>, SyntaxCheckError> {
    let mut pairs: Vec<(OperatorId, Site, f64)> = Vec::new();
    for op in OperatorId::ALL {
        let w = weights.weight(op);
        if w <= 0.0 {
            continue;
        }
        for site in enumerate_sites(&original.source, op) {
            pairs.push((op, site, w));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while !pairs.is_empty() {
        let k = match pairs.choose_weighted(&mut rng, |p| p.2) {
            Ok(p) => pairs.iter().position(|q| q.0 == p.0 && q.1 == p.1).unwrap(),
            Err(_) => break,
        };
        let (op, site, _) = pairs.swap_remove(k);
        let bug_seed = rng.gen::<u64>();
        match apply(original, op, site, bug_seed, checker) {
            Ok(bug) => return Ok(Some(bug)),
            Err(MutateError::Checker(e)) => return Err(e),
            Err(_) => continue,
        }
    }
    Ok(None)
}

/// An inverse site in a (buggy) function: where it is and its current text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InverseSite {
    pub site: Site,
    /// Byte range in the function source.
    pub start: usize,
    pub end: usize,
    pub text: String,
}

/// Places where the inverse of `op` may apply in `source`, in site order.
pub fn inverse_sites(source: &str, op: OperatorId) -> Vec<InverseSite> {
    let Some(v) = View::new(source) else {
        return Vec::new();
    };
    ops::inverse_sites(&v, op)
        .into_iter()
        .map(|s| {
            let t = &v.toks[s.at];
            InverseSite {
                site: Site { line: t.line, col: t.col },
                start: s.range.start,
                end: s.range.end,
                text: source[s.range].to_string(),
            }
        })
        .collect()
}

/// Replacement texts undoing `op` at a site currently reading
/// `mutated_site_text`. Identifiers are harvested from the focal function
/// of `context`.
pub fn inverse_candidates(op: OperatorId, mutated_site_text: &str, context: &Skeleton) -> Vec<String> {
    let focal = context.focal_text().unwrap_or_else(|| context.text.clone());
    inverse_candidates_in(op, mutated_site_text, &focal)
}

/// As [`inverse_candidates`], with the focal function given directly.
pub fn inverse_candidates_in(op: OperatorId, mutated_site_text: &str, focal_source: &str) -> Vec<String> {
    let (dedented, _) = dedent(focal_source);
    let ctx = View::new(&dedented);
    ops::inverse_candidates(op, mutated_site_text, ctx.as_ref())
}

/// Splice `replacement` over an inverse site of `source`.
pub fn replace_at(source: &str, site: &InverseSite, replacement: &str) -> String {
    splice(source, site.start..site.end, replacement)
}
