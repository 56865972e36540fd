//! Build a mutation benchmark from the bundled fixture projects and repair
//! every case with the oracle generator.
//!
//! cargo run --release --example run_bench -- [cases-per-project] [seed]

use std::path::PathBuf;
use std::time::Instant;

use repairkit::bench::{build_bench_from_mutations, run_bench, BenchConfig};
use repairkit::harness::{Harness, SandboxConfig};
use repairkit::mutate::OperatorWeights;
use repairkit::repair::OracleGenerator;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let per_project: usize = args.next().map_or(Ok(5), |a| a.parse())?;
    let seed: u64 = args.next().map_or(Ok(1), |a| a.parse())?;
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/projects");
    let harness = Harness::new(SandboxConfig::default())?;
    let out = tempfile::tempdir()?;
    let started = Instant::now();
    let mut cases = Vec::new();
    for name in ["algos", "inventory", "textkit"] {
        cases.extend(build_bench_from_mutations(
            &harness,
            &fixtures.join(name),
            out.path(),
            per_project,
            &OperatorWeights::non_lossy(),
            seed,
        )?);
    }
    println!("built {} cases in {:.1} s", cases.len(), started.elapsed().as_secs_f64());
    let cfg = BenchConfig {
        k_values: vec![1, 10, 100],
        ..BenchConfig::default()
    };
    let report = run_bench(&harness, &cases, &|| Box::new(OracleGenerator), &cfg);
    for row in &report.rows {
        println!(
            "{:<16} {:<14} trace_rank={:<4} verbatim={:<5} first={:<4} validated={:<3} {:.1}s {}",
            row.case_id,
            row.operator.map_or("-".into(), |o| o.to_string()),
            row.trace_rank.map_or("-".into(), |r| r.to_string()),
            row.verbatim,
            row.first_verbatim_index.map_or("-".into(), |i| i.to_string()),
            row.n_validated,
            row.elapsed,
            row.error.as_deref().unwrap_or(""),
        );
    }
    println!("\n{}", report.table());
    println!("total {:.1} s", started.elapsed().as_secs_f64());
    Ok(())
}
