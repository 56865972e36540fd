//! Run configuration: one TOML document, overridable from the command line.

use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bench::BenchConfig;
use crate::harness::SandboxConfig;
use crate::localize::{DStarParams, LocalizeConfig};
use crate::mutate::OperatorWeights;
use crate::repair::{Budgets, ExternalGenerator, OracleGenerator, PatchGenerator};
use crate::skeleton::SkeletonConfig;
use crate::tokenizer::BudgetTokenizer;
use crate::trace::TraceRenderConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    Oracle,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub kind: GeneratorKind,
    /// Process for the external generator.
    pub command: Vec<String>,
    pub timeout_seconds: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            kind: GeneratorKind::Oracle,
            command: Vec::new(),
            timeout_seconds: 60.0,
        }
    }
}

impl GeneratorConfig {
    pub fn build(&self) -> Box<dyn PatchGenerator> {
        match self.kind {
            GeneratorKind::Oracle => Box::new(OracleGenerator),
            GeneratorKind::External => Box::new(ExternalGenerator::new(
                self.command.clone(),
                Duration::from_secs_f64(self.timeout_seconds),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub jobs: usize,
    pub skeleton_budget: usize,
    pub trace_budget: usize,
    /// Pass the rendered failing trace to the generator.
    pub use_trace: bool,
    pub include_trace_locals: bool,
    /// Empty for the approximate counter, else a command printing a count.
    pub tokenizer_command: Vec<String>,
    pub sandbox: SandboxConfig,
    pub operator_weights: OperatorWeights,
    pub generator: GeneratorConfig,
    pub localize: LocalizeConfig,
    pub dstar_exponent: f64,
    pub budgets: Budgets,
    pub k_values: Vec<usize>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 0,
            jobs: 1,
            skeleton_budget: 1024,
            trace_budget: 896,
            use_trace: true,
            include_trace_locals: true,
            tokenizer_command: Vec::new(),
            sandbox: SandboxConfig::default(),
            operator_weights: OperatorWeights::default(),
            generator: GeneratorConfig::default(),
            localize: LocalizeConfig::default(),
            dstar_exponent: 2.0,
            budgets: Budgets::default(),
            k_values: vec![1, 10, 100],
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Config = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.skeleton_budget == 0 || self.trace_budget == 0 {
            return bad("token budgets must be positive");
        }
        if self.budgets.max_candidates == 0 || self.budgets.wall_clock_seconds.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return bad("repair budgets must be positive");
        }
        if self.sandbox.timeout_seconds <= 0.0 || self.sandbox.candidate_timeout_seconds <= 0.0 {
            return bad("sandbox limits must be positive");
        }
        if self.k_values.is_empty() || self.k_values.contains(&0) || !self.k_values.windows(2).all(|w| w[0] < w[1]) {
            return bad("k_values must be positive and strictly ascending");
        }
        if self.dstar_exponent.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return bad("dstar_exponent must be positive");
        }
        if self.jobs == 0 {
            return bad("jobs must be positive");
        }
        if self.generator.kind == GeneratorKind::External && self.generator.command.is_empty() {
            return bad("the external generator needs a command");
        }
        Ok(())
    }

    pub fn tokenizer(&self) -> BudgetTokenizer {
        if self.tokenizer_command.is_empty() {
            BudgetTokenizer::approximate()
        } else {
            BudgetTokenizer::external(self.tokenizer_command.clone())
        }
    }

    pub fn skeleton(&self) -> SkeletonConfig {
        SkeletonConfig {
            budget_tokens: self.skeleton_budget,
            tokenizer: self.tokenizer(),
            ..SkeletonConfig::default()
        }
    }

    pub fn trace(&self) -> TraceRenderConfig {
        TraceRenderConfig {
            budget_tokens: self.trace_budget,
            include_locals: self.include_trace_locals,
            ..TraceRenderConfig::default()
        }
    }

    pub fn dstar(&self) -> DStarParams {
        DStarParams { e: self.dstar_exponent }
    }

    pub fn bench(&self) -> BenchConfig {
        BenchConfig {
            budgets: self.budgets,
            k_values: self.k_values.clone(),
            skeleton: self.skeleton(),
            trace: self.trace(),
            use_trace: self.use_trace,
            localize: self.localize.clone(),
            dstar: self.dstar(),
            jobs: self.jobs,
        }
    }

    /// The effective configuration as TOML.
    pub fn render(&self) -> String {
        toml::to_string(self).unwrap_or_else(|e| format!("# unprintable config: {e}\n"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = Config::default();
        assert_eq!(Config::parse(&cfg.render()).unwrap(), cfg);
    }

    #[test]
    fn partial_document_keeps_defaults() {
        let cfg = Config::parse("seed = 9\nk_values = [1, 5]\n[budgets]\nmax_candidates = 20\n[sandbox]\ncandidate_timeout_seconds = 1.5\n").unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.budgets.max_candidates, 20);
        assert_eq!(cfg.budgets.wall_clock_seconds, 60.0);
        assert_eq!(cfg.sandbox.candidate_timeout_seconds, 1.5);
        assert_eq!(cfg.skeleton_budget, 1024);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(Config::parse("k_values = [10, 1]").is_err());
        assert!(Config::parse("skeleton_budget = 0").is_err());
        assert!(Config::parse("[generator]\nkind = \"external\"").is_err());
        assert!(Config::parse("no_such_key = 1").is_err());
        assert!(Config::parse("[budgets]\nwall_clock_seconds = -1.0").is_err());
    }
}
