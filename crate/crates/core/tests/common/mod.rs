//! Shared helpers for integration tests: fixture paths and a seeded
//! generator of synthetic Python modules.

#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn project(name: &str) -> PathBuf {
    fixtures().join("projects").join(name)
}

const WORDS: &[&str] = &[
    "alpha", "beta", "count", "delta", "entry", "frame", "group", "handle", "index", "judge", "key", "limit", "mode",
    "node", "offset", "path", "query", "record", "state", "total", "unit", "value", "width", "item", "lookup",
];

const MODULES: &[&str] = &["os", "re", "json", "math", "itertools", "collections", "functools", "typing"];

fn word(rng: &mut ChaCha8Rng) -> &'static str {
    WORDS.choose(rng).unwrap()
}

fn ident(rng: &mut ChaCha8Rng) -> String {
    if rng.gen_bool(0.5) {
        word(rng).to_string()
    } else {
        format!("{}_{}", word(rng), word(rng))
    }
}

fn number(rng: &mut ChaCha8Rng) -> String {
    match rng.gen_range(0..6) {
        0 => rng.gen_range(0..1000).to_string(),
        1 => format!("{}.{}", rng.gen_range(0..100), rng.gen_range(0..100)),
        2 => format!("0x{:x}", rng.gen_range(0..4096)),
        3 => format!("{}_{:03}", rng.gen_range(1..100), rng.gen_range(0..1000)),
        4 => format!("{}e{}", rng.gen_range(1..10), rng.gen_range(-5..5)),
        _ => format!("{}j", rng.gen_range(1..10)),
    }
}

fn string(rng: &mut ChaCha8Rng) -> String {
    let w = word(rng);
    match rng.gen_range(0..7) {
        0 => format!("'{w}'"),
        1 => format!("\"{w} {}\"", word(rng)),
        2 => format!("f\"{{{w}}}-{}\"", word(rng)),
        3 => format!("r'\\d+{w}'"),
        4 => format!("b'{w}'"),
        5 => format!("'it\\'s {w}'"),
        _ => format!("\"#{w}\""),
    }
}

fn atom(rng: &mut ChaCha8Rng, locals: &[String]) -> String {
    match rng.gen_range(0..5) {
        0 => number(rng),
        1 => string(rng),
        _ => locals.choose(rng).cloned().unwrap_or_else(|| "None".into()),
    }
}

fn expr(rng: &mut ChaCha8Rng, locals: &[String], depth: u32) -> String {
    if depth == 0 {
        return atom(rng, locals);
    }
    match rng.gen_range(0..7) {
        0 => format!("{} + {}", expr(rng, locals, depth - 1), expr(rng, locals, depth - 1)),
        1 => format!("{}({})", ident(rng), expr(rng, locals, depth - 1)),
        2 => format!("[{}, {}]", expr(rng, locals, depth - 1), atom(rng, locals)),
        3 => format!("{{{}: {}}}", string(rng), expr(rng, locals, depth - 1)),
        4 => format!("{}.{}({})", locals.choose(rng).map_or("self", |s| s), word(rng), atom(rng, locals)),
        5 => format!("({} if {} else {})", atom(rng, locals), atom(rng, locals), atom(rng, locals)),
        _ => atom(rng, locals),
    }
}

fn body(rng: &mut ChaCha8Rng, indent: &str, params: &[String], out: &mut String) {
    let mut locals: Vec<String> = params.to_vec();
    let n = rng.gen_range(1..7);
    for _ in 0..n {
        match rng.gen_range(0..8) {
            0 => {
                let _ = writeln!(out, "{indent}# {} the {}", word(rng), word(rng));
            }
            1 if !locals.is_empty() => {
                let v = locals.choose(rng).unwrap().clone();
                let _ = writeln!(out, "{indent}if {v} > {}:  # {}", number(rng), word(rng));
                let _ = writeln!(out, "{indent}    {v} = {}", expr(rng, &locals, 1));
            }
            2 => {
                let v = ident(rng);
                let _ = writeln!(out, "{indent}for {v} in range({}):", number(rng));
                let _ = writeln!(out, "{indent}    total = {}", expr(rng, &locals, 1));
                locals.push(v);
            }
            3 => {
                let _ = writeln!(out, "{indent}{} = (", ident(rng));
                let _ = writeln!(out, "{indent}    {},", expr(rng, &locals, 1));
                let _ = writeln!(out, "{indent}    {},", atom(rng, &locals));
                let _ = writeln!(out, "{indent})");
            }
            4 => {
                let _ = writeln!(out, "{indent}try:");
                let _ = writeln!(out, "{indent}    {}({})", ident(rng), atom(rng, &locals));
                let _ = writeln!(out, "{indent}except (KeyError, ValueError):");
                let _ = writeln!(out, "{indent}    pass");
            }
            5 => {
                let _ = writeln!(out);
                let _ = writeln!(out, "{indent}text = {} \\", string(rng));
                let _ = writeln!(out, "{indent}    + {}", string(rng));
            }
            _ => {
                let v = ident(rng);
                let _ = writeln!(out, "{indent}{v} = {}", expr(rng, &locals, 2));
                locals.push(v);
            }
        }
    }
    let _ = writeln!(out, "{indent}return {}", expr(rng, &locals, 1));
}

fn params(rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut ps: Vec<String> = (0..rng.gen_range(0..4)).map(|_| ident(rng)).collect();
    ps.sort();
    ps.dedup();
    ps
}

fn signature(rng: &mut ChaCha8Rng, names: &[String]) -> String {
    names
        .iter()
        .enumerate()
        .map(|(i, p)| if i + 1 == names.len() && rng.gen_bool(0.3) { format!("{p}={}", number(rng)) } else { p.clone() })
        .collect::<Vec<_>>()
        .join(", ")
}

/// A syntactically valid module with imports, globals, functions and
/// classes, deterministic in `seed`.
pub fn synthetic_module(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    let _ = writeln!(out, "\"\"\"Module {} for {}.\"\"\"", word(&mut rng), word(&mut rng));
    for _ in 0..rng.gen_range(1..4) {
        let m = MODULES.choose(&mut rng).unwrap();
        if rng.gen_bool(0.5) {
            let _ = writeln!(out, "import {m}");
        } else {
            let _ = writeln!(out, "from {m} import {}", word(&mut rng));
        }
    }
    let _ = writeln!(out);
    for _ in 0..rng.gen_range(0..3) {
        let _ = writeln!(out, "{} = {}", ident(&mut rng).to_uppercase(), atom(&mut rng, &[]));
    }
    let mut used = std::collections::BTreeSet::new();
    for _ in 0..rng.gen_range(2..7) {
        let _ = writeln!(out, "\n");
        if rng.gen_bool(0.4) {
            let class = format!("{}{}", capitalize(word(&mut rng)), capitalize(word(&mut rng)));
            if !used.insert(class.clone()) {
                continue;
            }
            let _ = writeln!(out, "class {class}:");
            let _ = writeln!(out, "    \"\"\"A {} {}.\"\"\"", word(&mut rng), word(&mut rng));
            let _ = writeln!(out, "    {} = {}", word(&mut rng), number(&mut rng));
            let mut methods = std::collections::BTreeSet::new();
            for _ in 0..rng.gen_range(1..5) {
                let name = ident(&mut rng);
                if !methods.insert(name.clone()) {
                    continue;
                }
                let ps = params(&mut rng);
                let _ = writeln!(out);
                if rng.gen_bool(0.2) {
                    let _ = writeln!(out, "    @property");
                }
                let mut all = vec!["self".to_string()];
                all.extend(ps.iter().cloned());
                let _ = writeln!(out, "    def {name}({}):", signature(&mut rng, &all));
                if rng.gen_bool(0.5) {
                    let _ = writeln!(out, "        \"\"\"{} {}.", capitalize(word(&mut rng)), word(&mut rng));
                    let _ = writeln!(out);
                    let _ = writeln!(out, "        Returns {}.", word(&mut rng));
                    let _ = writeln!(out, "        \"\"\"");
                }
                body(&mut rng, "        ", &all, &mut out);
            }
        } else {
            let name = ident(&mut rng);
            if !used.insert(name.clone()) {
                continue;
            }
            let ps = params(&mut rng);
            let _ = writeln!(out, "def {name}({}):", signature(&mut rng, &ps));
            if rng.gen_bool(0.3) {
                let _ = writeln!(out, "    '''{}'''", word(&mut rng));
            }
            body(&mut rng, "    ", &ps, &mut out);
        }
    }
    out
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    c.next().map(|f| f.to_ascii_uppercase().to_string() + c.as_str()).unwrap_or_default()
}

/// `n` synthetic modules, seeded from `base`.
pub fn synthetic_corpus(n: usize, base: u64) -> Vec<(String, String)> {
    (0..n)
        .map(|i| (format!("pkg/mod_{i:03}.py"), synthetic_module(base.wrapping_mul(7919).wrapping_add(i as u64))))
        .collect()
}

/// Python's own count of STRING, NUMBER and COMMENT tokens per file.
pub fn python_literal_counts(files: &[String]) -> Vec<(usize, usize, usize)> {
    let script = r#"
import io, json, sys, tokenize
out = []
for src in json.load(sys.stdin):
    s = n = c = 0
    for tok in tokenize.generate_tokens(io.StringIO(src).readline):
        if tok.type == tokenize.STRING: s += 1
        elif tok.type == tokenize.NUMBER: n += 1
        elif tok.type == tokenize.COMMENT: c += 1
    out.append([s, n, c])
json.dump(out, sys.stdout)
"#;
    let json_out = run_python(script, &serde_json::to_string(files).unwrap());
    serde_json::from_str(&json_out).unwrap()
}

/// Python's verdict on whether each source compiles.
pub fn python_compiles(files: &[String]) -> Vec<bool> {
    let script = r#"
import json, sys
out = []
for src in json.load(sys.stdin):
    try:
        compile(src, "<m>", "exec")
        out.append(True)
    except SyntaxError:
        out.append(False)
json.dump(out, sys.stdout)
"#;
    serde_json::from_str(&run_python(script, &serde_json::to_string(files).unwrap())).unwrap()
}

pub fn run_python(script: &str, stdin: &str) -> String {
    use std::io::Write;
    use std::process::{Command, Stdio};
    let mut child = Command::new("python3")
        .args(["-c", script])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .expect("python3 on PATH");
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success(), "python helper failed");
    String::from_utf8(out.stdout).unwrap()
}

pub fn git(dir: &Path, args: &[&str]) {
    let ok = Command::new("git")
        .arg("-C")
        .arg(dir)
        .args(["-c", "user.name=Dev", "-c", "user.email=dev@example.com", "-c", "commit.gpgsign=false"])
        .args(args)
        .output()
        .unwrap();
    assert!(ok.status.success(), "git {args:?}: {}", String::from_utf8_lossy(&ok.stderr));
}

pub fn commit(dir: &Path, files: &[(&str, &str)], message: &str) {
    for (path, text) in files {
        let p = dir.join(path);
        fs::create_dir_all(p.parent().unwrap()).unwrap();
        fs::write(p, text).unwrap();
    }
    git(dir, &["add", "-A"]);
    git(dir, &["commit", "-q", "-m", message]);
}

/// A repository whose history holds one real fix, one whitespace-only
/// "fix", one feature commit and one fix of a non-Python file.
pub fn history_repo() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    git(dir.path(), &["init", "-q"]);
    commit(
        dir.path(),
        &[("pkg/calc.py", "def add(a, b):\n    return a - b\n\n\ndef neg(a):\n    return -a\n")],
        "initial",
    );
    commit(
        dir.path(),
        &[("pkg/calc.py", "def add(a, b):\n    return a + b\n\n\ndef neg(a):\n    return -a\n")],
        "Fix add",
    );
    commit(
        dir.path(),
        &[("pkg/calc.py", "def add(a, b):\n    return a + b   # sum\n\n\ndef neg(a):\n    return -a\n")],
        "fix formatting",
    );
    commit(
        dir.path(),
        &[("pkg/calc.py", "def add(a, b):\n    return a + b   # sum\n\n\ndef neg(a):\n    return 0 - a\n")],
        "Rewrite neg",
    );
    commit(dir.path(), &[("README.md", "fixed\n")], "bugfix: readme");
    dir
}

/// Qualified name of the innermost function enclosing each `(source, line)`,
/// as seen by Python's own parser.
pub fn python_enclosing_functions(queries: &[(String, usize)]) -> Vec<Option<String>> {
    let script = r#"
import ast, json, sys
out = []
for src, line in json.load(sys.stdin):
    best = None
    def walk(node, prefix):
        global best
        for child in ast.iter_child_nodes(node):
            if isinstance(child, (ast.FunctionDef, ast.AsyncFunctionDef)):
                name = prefix + child.name
                start = min([child.lineno] + [d.lineno for d in child.decorator_list])
                if start <= line <= child.end_lineno:
                    best = name
                walk(child, name + ".<locals>.")
            elif isinstance(child, ast.ClassDef):
                walk(child, prefix + child.name + ".")
            else:
                walk(child, prefix)
    walk(ast.parse(src), "")
    out.append(best)
json.dump(out, sys.stdout)
"#;
    serde_json::from_str(&run_python(script, &serde_json::to_string(queries).unwrap())).unwrap()
}
