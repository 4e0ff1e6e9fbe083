//! Run the numerical property suite: every structural identity the
//! reconstruction relies on, measured on one random case.
//!
//! Run with `cargo run --example property_suite`.

use calderon::error::Result;
use calderon::verification::run_property_suite;

fn main() -> Result<()> {
    let (dim, size, seed) = (3, 3, 0);
    println!("property suite on d={dim}, n={size}, seed {seed}:\n");
    let suite = run_property_suite(dim, size, seed)?;
    for check in &suite.checks {
        println!(
            "{}  {:<42} observed {:9.3e}  bound {:9.3e}",
            if check.passed { "pass" } else { "FAIL" },
            check.name,
            check.observed,
            check.bound
        );
    }
    let failed = suite.failed().len();
    if failed == 0 {
        println!("\nall {} checks passed", suite.checks.len());
    } else {
        println!("\n{failed} of {} checks failed", suite.checks.len());
    }
    Ok(())
}
