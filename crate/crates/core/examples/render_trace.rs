//! Parse a pytest long-form failure and re-render it under token budgets.
//!
//! cargo run --example render_trace -- [trace.txt] [budget...]

use repairkit::tokenizer::BudgetTokenizer;
use repairkit::trace::{parse_trace, render_trace, TraceRenderConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/traces/recorded/textkit-000.txt").into());
    let mut budgets: Vec<usize> = args.map(|a| a.parse()).collect::<Result<_, _>>()?;
    if budgets.is_empty() {
        budgets = vec![64, 256, 896];
    }
    let trace = parse_trace(&std::fs::read_to_string(&path)?)?;
    let last = trace.last();
    println!(
        "{} frames, innermost {}:{} {}",
        trace.frames.len(),
        last.footer.file_path,
        last.footer.line_number,
        trace.error_name().unwrap_or("-")
    );
    let tokenizer = BudgetTokenizer::approximate();
    for budget in budgets {
        let cfg = TraceRenderConfig {
            budget_tokens: budget,
            ..TraceRenderConfig::default()
        };
        let text = render_trace(&trace, &tokenizer, &cfg)?;
        println!("=== budget {budget}: {} tokens\n{text}", tokenizer.count(&text)?);
    }
    Ok(())
}
