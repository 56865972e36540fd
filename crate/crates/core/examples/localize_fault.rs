//! Break a function in a fixture project, then rank suspects by spectrum
//! (statements and functions) and by the failing trace.
//!
//! cargo run --example localize_fault

use std::path::PathBuf;

use repairkit::harness::{copy_project, Harness, SandboxConfig};
use repairkit::localize::{
    project_matrices, rank_functions_by_statements, rank_functions_by_trace, rank_statements, DStarParams,
    LocalizeConfig, ProjectIndex,
};
use repairkit::trace::parse_trace;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fixture = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/projects/weak");
    let dir = tempfile::tempdir()?;
    let project = dir.path().join("weak");
    copy_project(&fixture, &project)?;
    let guard = project.join("guard.py");
    std::fs::write(&guard, std::fs::read_to_string(&guard)?.replace(".lower()", ".upper()"))?;

    let harness = Harness::new(SandboxConfig::default())?;
    let runs = harness.run_suite(&project, true)?;
    for r in &runs {
        println!("{:<40} {:?}", r.test_id, r.outcome);
    }
    let index = ProjectIndex::load(&project, &LocalizeConfig::default())?;
    let statements = rank_statements(&project_matrices(&runs), DStarParams::default());
    println!("\nstatements");
    for s in statements.entries.iter().take(5) {
        println!("  {:<20} {}", s.unit.to_string(), s.score);
    }
    println!("functions by spectrum");
    for s in &rank_functions_by_statements(&statements, &index).entries {
        println!("  {:<30} {}", s.unit.to_string(), s.score);
    }
    if let Some(failing) = runs.iter().find(|r| r.outcome.is_failing()) {
        println!("functions by trace");
        for s in &rank_functions_by_trace(&parse_trace(&failing.raw_trace)?, &project, &index)?.entries {
            println!("  {:<30} {}", s.unit.to_string(), s.score);
        }
    }
    Ok(())
}
