//! Generate-and-validate program repair for Python projects.

pub mod bench;
pub mod config;
pub mod corpus;
pub mod harness;
pub mod lex;
pub mod localize;
pub mod mutate;
pub mod repair;
pub mod skeleton;
pub mod structure;
pub mod tokenizer;
pub mod trace;
