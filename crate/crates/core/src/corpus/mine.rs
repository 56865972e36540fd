use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::normalize::normalize;
use crate::lex::LexError;
use crate::structure::{self, FunctionInfo, LineSpan, SourceIndex, StructureError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitRef {
    pub repo_id: String,
    pub commit_hash: String,
    pub message: String,
    pub parent_hash: String,
}

/// One extracted function at a specific revision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodRecord {
    pub repo_id: String,
    pub file_path: String,
    pub qualified_name: String,
    pub line_span: LineSpan,
    pub source: String,
    pub normalized: String,
}

impl MethodRecord {
    pub fn from_index(
        repo_id: &str,
        index: &SourceIndex,
        function: &FunctionInfo,
    ) -> Result<Self, LexError> {
        let source = index.function_source(function);
        let normalized = normalize(&source)?;
        Ok(Self {
            repo_id: repo_id.to_string(),
            file_path: index.file_path.clone(),
            qualified_name: function.qualified_name.clone(),
            line_span: function.span(),
            source,
            normalized,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodEditPair {
    pub before: MethodRecord,
    pub after: MethodRecord,
    pub commit: CommitRef,
}

/// Flat JSONL row for an edit pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditPairRecord {
    pub repo_id: String,
    pub commit: String,
    pub path: String,
    pub name: String,
    pub before: String,
    pub after: String,
    pub before_normalized: String,
    pub after_normalized: String,
}

impl From<&MethodEditPair> for EditPairRecord {
    fn from(p: &MethodEditPair) -> Self {
        Self {
            repo_id: p.commit.repo_id.clone(),
            commit: p.commit.commit_hash.clone(),
            path: p.after.file_path.clone(),
            name: p.after.qualified_name.clone(),
            before: p.before.source.clone(),
            after: p.after.source.clone(),
            before_normalized: p.before.normalized.clone(),
            after_normalized: p.after.normalized.clone(),
        }
    }
}

#[derive(Debug, Error)]
pub enum MineError {
    #[error("not a readable repository: {0}")]
    NotARepository(PathBuf),
    #[error("git {args}: {stderr}")]
    Git { args: String, stderr: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Case-insensitive substring match on "fix".
pub fn is_fix_message(message: &str) -> bool {
    message.to_lowercase().contains("fix")
}

/// Keep commits whose message mentions a fix, preserving order.
pub fn filter_fix_commits<I>(commits: I) -> impl Iterator<Item = CommitRef>
where
    I: IntoIterator<Item = CommitRef>,
{
    commits.into_iter().filter(|c| is_fix_message(&c.message))
}

/// Path → file contents at one revision.
pub type FileTree = BTreeMap<String, String>;

/// Per-commit extraction outcome. Files that fail to parse are listed and
/// skipped; they never abort the commit.
#[derive(Debug, Default)]
pub struct ExtractReport {
    pub pairs: Vec<MethodEditPair>,
    pub skipped: Vec<(String, StructureError)>,
}

/// Pair up functions edited by `commit`. Functions are matched by
/// `(file path, qualified name)`; only files present in both trees are
/// considered, and pairs whose normalized text is unchanged are dropped.
pub fn extract_edit_pairs(commit: &CommitRef, before_tree: &FileTree, after_tree: &FileTree) -> ExtractReport {
    let mut report = ExtractReport::default();
    for (path, after_src) in after_tree {
        let Some(before_src) = before_tree.get(path) else {
            continue;
        };
        if before_src == after_src {
            continue;
        }
        let before_idx = match structure::index_file(path, before_src) {
            Ok(i) => i,
            Err(e) => {
                report.skipped.push((path.clone(), e));
                continue;
            }
        };
        let after_idx = match structure::index_file(path, after_src) {
            Ok(i) => i,
            Err(e) => {
                report.skipped.push((path.clone(), e));
                continue;
            }
        };
        let before_fns = unique_functions(&before_idx);
        let after_fns = unique_functions(&after_idx);
        for (name, after_fn) in &after_fns {
            let Some(before_fn) = before_fns.get(name) else {
                continue;
            };
            let (Ok(b), Ok(a)) = (
                MethodRecord::from_index(&commit.repo_id, &before_idx, before_fn),
                MethodRecord::from_index(&commit.repo_id, &after_idx, after_fn),
            ) else {
                continue;
            };
            if b.normalized != a.normalized {
                report.pairs.push(MethodEditPair {
                    before: b,
                    after: a,
                    commit: commit.clone(),
                });
            }
        }
    }
    report
}

/// Functions by qualified name; names defined twice are ambiguous and left
/// out.
fn unique_functions(index: &SourceIndex) -> BTreeMap<String, &FunctionInfo> {
    let mut seen: BTreeMap<String, Option<&FunctionInfo>> = BTreeMap::new();
    for f in index.all_functions() {
        seen.entry(f.qualified_name.clone())
            .and_modify(|v| *v = None)
            .or_insert(Some(f));
    }
    seen.into_iter().filter_map(|(k, v)| v.map(|f| (k, f))).collect()
}

/// Read-only view of a git checkout driven through the `git` CLI.
#[derive(Debug, Clone)]
pub struct GitRepo {
    root: PathBuf,
    repo_id: String,
}

impl GitRepo {
    pub fn open(root: impl AsRef<Path>) -> Result<Self, MineError> {
        let root = root.as_ref().to_path_buf();
        if !root.is_dir() {
            return Err(MineError::NotARepository(root));
        }
        let repo = Self {
            repo_id: root
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| "repo".into()),
            root,
        };
        repo.git(&["rev-parse", "--git-dir"])
            .map_err(|_| MineError::NotARepository(repo.root.clone()))?;
        Ok(repo)
    }

    pub fn repo_id(&self) -> &str {
        &self.repo_id
    }

    fn git(&self, args: &[&str]) -> Result<String, MineError> {
        let out = Command::new("git")
            .arg("-C")
            .arg(&self.root)
            .args(args)
            .env("GIT_PAGER", "cat")
            .output()?;
        if !out.status.success() {
            return Err(MineError::Git {
                args: args.join(" "),
                stderr: String::from_utf8_lossy(&out.stderr).trim().to_string(),
            });
        }
        Ok(String::from_utf8_lossy(&out.stdout).into_owned())
    }

    /// First-parent history of HEAD, oldest first. Root commits (no parent)
    /// are omitted since they have nothing to diff against.
    pub fn history(&self) -> Result<Vec<CommitRef>, MineError> {
        let log = match self.git(&["log", "--first-parent", "--reverse", "--format=%H%x00%P%x00%B%x1e", "HEAD"]) {
            Ok(l) => l,
            // An empty repository has no HEAD.
            Err(MineError::Git { .. }) if self.git(&["rev-parse", "--verify", "HEAD"]).is_err() => {
                return Ok(Vec::new())
            }
            Err(e) => return Err(e),
        };
        let mut out = Vec::new();
        for record in log.split('\x1e') {
            let record = record.trim_start_matches('\n');
            if record.trim().is_empty() {
                continue;
            }
            let mut parts = record.splitn(3, '\0');
            let hash = parts.next().unwrap_or("").trim().to_string();
            let parents = parts.next().unwrap_or("");
            let message = parts.next().unwrap_or("").trim_end().to_string();
            let Some(parent) = parents.split_whitespace().next() else {
                continue;
            };
            out.push(CommitRef {
                repo_id: self.repo_id.clone(),
                commit_hash: hash,
                message,
                parent_hash: parent.to_string(),
            });
        }
        Ok(out)
    }

    /// Python files modified (not added, deleted or renamed) by the commit,
    /// at the parent and at the commit.
    pub fn modified_trees(&self, commit: &CommitRef) -> Result<(FileTree, FileTree), MineError> {
        let diff = self.git(&[
            "diff",
            "--name-status",
            "--no-renames",
            &commit.parent_hash,
            &commit.commit_hash,
        ])?;
        let mut before = FileTree::new();
        let mut after = FileTree::new();
        for line in diff.lines() {
            let mut cols = line.split('\t');
            let (Some(status), Some(path)) = (cols.next(), cols.next()) else {
                continue;
            };
            if status != "M" || !path.ends_with(".py") {
                continue;
            }
            before.insert(path.to_string(), self.show(&commit.parent_hash, path)?);
            after.insert(path.to_string(), self.show(&commit.commit_hash, path)?);
        }
        Ok((before, after))
    }

    fn show(&self, rev: &str, path: &str) -> Result<String, MineError> {
        self.git(&["show", &format!("{rev}:{path}")])
    }
}

/// Mine every fix commit of `repo` into edit pairs.
pub fn read_history(repo: &GitRepo) -> Result<Vec<MethodEditPair>, MineError> {
    let mut pairs = Vec::new();
    for commit in filter_fix_commits(repo.history()?) {
        let (before, after) = repo.modified_trees(&commit)?;
        pairs.extend(extract_edit_pairs(&commit, &before, &after).pairs);
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn commit(msg: &str) -> CommitRef {
        CommitRef {
            repo_id: "r".into(),
            commit_hash: format!("{:x}", msg.len() + 100),
            message: msg.into(),
            parent_hash: "p".into(),
        }
    }

    #[test]
    fn fix_filter() {
        let kept: Vec<_> = filter_fix_commits(vec![
            commit("Fix off-by-one in parser"),
            commit("Add README"),
            commit("bugfix: handle None"),
            commit("FIXES #12"),
        ])
        .map(|c| c.message)
        .collect();
        assert_eq!(kept, ["Fix off-by-one in parser", "bugfix: handle None", "FIXES #12"]);
    }

    #[test]
    fn one_fifth_of_corpus() {
        let commits: Vec<_> = (0..100)
            .map(|i| commit(&if i % 5 == 0 { format!("fix bug {i}") } else { format!("feature {i}") }))
            .collect();
        assert_eq!(filter_fix_commits(commits).count(), 20);
    }

    fn tree(files: &[(&str, &str)]) -> FileTree {
        files.iter().map(|(p, s)| (p.to_string(), s.to_string())).collect()
    }

    #[test]
    fn whitespace_only_edit_is_trivial() {
        let before = tree(&[("a.py", "def f(x):\n    return x+1\n")]);
        let after = tree(&[("a.py", "def f(x):\n    return x + 1   # add one\n")]);
        assert!(extract_edit_pairs(&commit("fix"), &before, &after).pairs.is_empty());
    }

    #[test]
    fn local_rename_is_an_edit() {
        let before = tree(&[("a.py", "def f(x):\n    y = x\n    return y\n")]);
        let after = tree(&[("a.py", "def f(x):\n    z = x\n    return z\n")]);
        let pairs = extract_edit_pairs(&commit("fix"), &before, &after).pairs;
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].before.qualified_name, "f");
    }

    #[test]
    fn two_files_two_pairs_and_parse_failures_skip() {
        let before = tree(&[
            ("a.py", "def f():\n    return 1\n\ndef g():\n    return 2\n"),
            ("b.py", "class C:\n    def m(self):\n        return self.a\n"),
            ("c.py", "def h():\n    return 0\n"),
        ]);
        let after = tree(&[
            ("a.py", "def f():\n    return 1\n\ndef g():\n    return -2\n"),
            ("b.py", "class C:\n    def m(self):\n        return self.b\n"),
            ("c.py", "def h():\n        return 0\n    x = 1\n"),
        ]);
        let report = extract_edit_pairs(&commit("fix"), &before, &after);
        let names: Vec<_> = report.pairs.iter().map(|p| p.after.qualified_name.as_str()).collect();
        assert_eq!(names, ["g", "C.m"]);
        assert_eq!(report.skipped.len(), 1);
        assert_eq!(report.skipped[0].0, "c.py");
        assert!(report.pairs.iter().all(|p| p.before.normalized != p.after.normalized));
    }
}
