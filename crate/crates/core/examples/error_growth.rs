//! How reconstruction error grows with lattice size.
//!
//! The inverse problem is severely ill-posed: the deepest edges lose
//! accuracy exponentially as the box grows, even with exact boundary data.
//! This example runs small sizes so it finishes in seconds; the `study`
//! subcommand of the bundled binary runs the full range.
//!
//! Run with `cargo run --release --example error_growth`.

use calderon::error::Result;
use calderon::verification::error_growth_study;

fn main() -> Result<()> {
    let sizes = [4, 5, 6, 7];
    let table = error_growth_study(3, &sizes, 1.0, 2.0, 0)?;
    println!("d=3, conductivities uniform in [1, 2), one draw per size:");
    println!("{:>4} {:>7} {:>12} {:>8} {:>9}", "n", "edges", "max err", "log10", "seconds");
    for row in &table.rows {
        println!(
            "{:>4} {:>7} {:>12.3e} {:>8.2} {:>9.2}",
            row.size, row.edges, row.max_abs_err, row.max_log10_err, row.seconds
        );
    }
    println!(
        "growth: {:.2} decades from n={} to n={}, trend {}",
        table.growth_decades(),
        sizes.first().unwrap(),
        sizes.last().unwrap(),
        if table.trend_monotone() { "monotone" } else { "not monotone" }
    );
    Ok(())
}
