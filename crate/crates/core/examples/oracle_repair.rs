//! Repair a broken function with the oracle generator, or with an external
//! generator command given after `--`.
//!
//! cargo run --example oracle_repair
//! cargo run --example oracle_repair -- python3 my_generator.py

use std::path::PathBuf;
use std::time::Duration;

use repairkit::harness::{copy_project, Harness, SandboxConfig};
use repairkit::repair::{repair_loop, Budgets, ExternalGenerator, LoopOptions, OracleGenerator, PatchGenerator, RepairTask};
use repairkit::skeleton::SkeletonConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let command: Vec<String> = std::env::args().skip(1).collect();
    let fixture = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/projects/algos");
    let dir = tempfile::tempdir()?;
    let project = dir.path().join("algos");
    copy_project(&fixture, &project)?;
    let file = project.join("algos/numeric.py");
    let text = std::fs::read_to_string(&file)?;
    std::fs::write(&file, text.replacen("if n < 0:", "if n > 0:", 1))?;

    let harness = Harness::new(SandboxConfig::default())?;
    let runs = harness.run_suite(&project, true)?;
    let task = RepairTask::new(&project, "algos/numeric.py", "sqrt_floor", &runs, &SkeletonConfig::default(), Budgets::default())?;
    let mut gen: Box<dyn PatchGenerator> = if command.is_empty() {
        Box::new(OracleGenerator)
    } else {
        Box::new(ExternalGenerator::new(command, Duration::from_secs(30)))
    };
    let opts = LoopOptions {
        stop_at_plausible: true,
        ..LoopOptions::default()
    };
    let (outcomes, metrics) = repair_loop(&harness, &task, gen.as_mut(), &opts)?;
    for o in &outcomes {
        println!("#{:<3} {:?} {:.2}s", o.candidate.sample_index, o.class, o.duration);
    }
    println!("{metrics:#?}");
    if let Some(fix) = outcomes.iter().find(|o| o.class.passes_tests()) {
        println!("{}", fix.candidate.text);
    }
    Ok(())
}
