//! Mine function-level edit pairs from the fix commits of a git repository.
//!
//! cargo run --example mine_history -- <repo>

use repairkit::corpus::{read_history, EditPairRecord, GitRepo};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let repo = std::env::args().nth(1).unwrap_or_else(|| ".".into());
    let repo = GitRepo::open(&repo)?;
    let pairs = read_history(&repo)?;
    for p in &pairs {
        println!("{} {}::{}", &p.commit.commit_hash[..8], p.before.file_path, p.before.qualified_name);
        println!("{}", serde_json::to_string(&EditPairRecord::from(p))?);
    }
    eprintln!("{} edit pairs from {}", pairs.len(), repo.repo_id());
    Ok(())
}
