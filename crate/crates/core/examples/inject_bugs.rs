//! Inject bugs into a project and keep those that break a passing test.
//!
//! cargo run --example inject_bugs -- [project] [count] [seed]

use std::path::PathBuf;

use repairkit::bench::inject_validated_bugs;
use repairkit::harness::{Harness, SandboxConfig};
use repairkit::mutate::OperatorWeights;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let project = args
        .next()
        .map_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/projects/algos"), PathBuf::from);
    let count: usize = args.next().map_or(Ok(5), |a| a.parse())?;
    let seed: u64 = args.next().map_or(Ok(1), |a| a.parse())?;
    let harness = Harness::new(SandboxConfig::default())?;
    for v in inject_validated_bugs(&harness, &project, count, &OperatorWeights::default(), seed)? {
        let b = &v.bug;
        println!(
            "{}::{} {} at {}:{} `{}` -> `{}`",
            b.original.file_path, b.original.qualified_name, b.operator, b.site.line, b.site.col, b.replaced, b.replacement
        );
        for t in &v.failing {
            println!("    breaks {}", t.test_id);
        }
    }
    Ok(())
}
