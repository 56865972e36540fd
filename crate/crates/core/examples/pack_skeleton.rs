//! Pack a file skeleton around one function at several token budgets.
//!
//! cargo run --example pack_skeleton -- <file.py> <qualified-name> [budget...]

use repairkit::skeleton::{build_skeleton, SkeletonConfig};
use repairkit::structure::{find_function, index_file};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/skeleton/dposdb.py").into());
    let name = args.next().unwrap_or_else(|| "DbCursor.execute_and_fetchone".into());
    let mut budgets: Vec<usize> = args.map(|a| a.parse()).collect::<Result<_, _>>()?;
    if budgets.is_empty() {
        budgets = vec![200, 400, 1024];
    }
    let source = std::fs::read_to_string(&path)?;
    let index = index_file(&path, &source)?;
    let focal = find_function(&index, &name)?;
    for budget in budgets {
        match build_skeleton(&index, focal, None, &SkeletonConfig::with_budget(budget)) {
            Ok(s) => {
                println!("=== budget {budget}: {} tokens, {} elements", s.token_count, s.manifest.len());
                print!("{}", s.text);
            }
            Err(e) => println!("=== budget {budget}: {e}"),
        }
    }
    Ok(())
}
