//! Token counting for context budgets.
//!
//! The approximate mode stands in for a trained subword vocabulary. It
//! overcounts relative to one, which is safe because budgets are ceilings.

use std::io::Write as _;
use std::process::{Command, Stdio};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum TokenizerMode {
    Approximate,
    /// Command that reads text on stdin and prints a decimal token count.
    ExternalCommand { command: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetTokenizer {
    pub mode: TokenizerMode,
    /// Space runs of these lengths count as one token.
    pub whitespace_run_tokens: Vec<usize>,
}

impl Default for BudgetTokenizer {
    fn default() -> Self {
        Self {
            mode: TokenizerMode::Approximate,
            whitespace_run_tokens: vec![4, 8],
        }
    }
}

#[derive(Debug, Error)]
pub enum TokenizerError {
    #[error("tokenizer command `{0}` is not available")]
    ToolUnavailable(String),
    #[error("tokenizer command produced `{0}` instead of a count")]
    BadOutput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl BudgetTokenizer {
    pub fn approximate() -> Self {
        Self::default()
    }

    pub fn external(command: Vec<String>) -> Self {
        Self {
            mode: TokenizerMode::ExternalCommand { command },
            ..Self::default()
        }
    }

    /// Whether counts are additive over `\n`-terminated lines. True for the
    /// approximate mode, where no token crosses a newline.
    pub fn is_line_additive(&self) -> bool {
        matches!(self.mode, TokenizerMode::Approximate)
    }

    pub fn count(&self, text: &str) -> Result<usize, TokenizerError> {
        match &self.mode {
            TokenizerMode::Approximate => Ok(self.approximate_count(text)),
            TokenizerMode::ExternalCommand { command } => external_count(command, text),
        }
    }

    /// Approximate count. Words and numbers are one token each, every other
    /// non-space character is one token, a single space directly before a
    /// non-space character merges into it, newlines are one token each, and
    /// space runs are cut greedily into the configured run lengths.
    pub fn approximate_count(&self, text: &str) -> usize {
        let mut runs: Vec<usize> = self.whitespace_run_tokens.iter().copied().filter(|&r| r > 1).collect();
        runs.sort_unstable_by(|a, b| b.cmp(a));
        let chars: Vec<char> = text.chars().collect();
        let mut i = 0;
        let mut count = 0;
        while i < chars.len() {
            let c = chars[i];
            if c == ' ' {
                let mut n = 0;
                while i + n < chars.len() && chars[i + n] == ' ' {
                    n += 1;
                }
                let followed_by_unit = chars.get(i + n).is_some_and(|c| !c.is_whitespace());
                if n == 1 && followed_by_unit {
                    i += 1;
                    i += unit_len(&chars, i);
                    count += 1;
                    continue;
                }
                // Consume one chunk of the run and loop; the remainder may
                // end with a single space that merges into the next unit.
                let chunk = runs.iter().copied().find(|&r| r <= n).unwrap_or(1);
                i += chunk;
                count += 1;
                continue;
            }
            if c.is_whitespace() {
                i += 1;
                count += 1;
                continue;
            }
            i += unit_len(&chars, i);
            count += 1;
        }
        count
    }
}

/// Length of the token unit starting at `i` (a non-whitespace character).
fn unit_len(chars: &[char], i: usize) -> usize {
    let c = chars[i];
    if c == '_' || c.is_alphabetic() {
        chars[i..]
            .iter()
            .take_while(|c| **c == '_' || c.is_alphanumeric())
            .count()
    } else if c.is_ascii_digit() {
        chars[i..]
            .iter()
            .take_while(|c| **c == '_' || c.is_ascii_alphanumeric())
            .count()
    } else {
        1
    }
}

fn external_count(command: &[String], text: &str) -> Result<usize, TokenizerError> {
    let Some((program, args)) = command.split_first() else {
        return Err(TokenizerError::ToolUnavailable(String::new()));
    };
    let mut child = match Command::new(program)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
    {
        Ok(c) => c,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(TokenizerError::ToolUnavailable(program.clone()))
        }
        Err(e) => return Err(e.into()),
    };
    {
        let mut stdin = child.stdin.take().expect("piped stdin");
        stdin.write_all(text.as_bytes())?;
    }
    let out = child.wait_with_output()?;
    let s = String::from_utf8_lossy(&out.stdout).trim().to_string();
    s.parse::<usize>().map_err(|_| TokenizerError::BadOutput(s))
}
