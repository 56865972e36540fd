//! Print the normalized form of a Python file: literals replaced by
//! placeholders, comments dropped, whitespace canonical.
//!
//! cargo run --example normalize_source -- <file.py>

use repairkit::corpus::normalize;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/projects/textkit/textkit/parse.py").into());
    let source = std::fs::read_to_string(&path)?;
    print!("{}", normalize(&source)?);
    Ok(())
}
