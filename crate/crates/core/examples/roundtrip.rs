//! Full pipeline roundtrip: draw a random conductivity, compute its
//! boundary response, reconstruct from the response alone, and compare.
//!
//! Run with `cargo run --example roundtrip`.

use std::time::Instant;

use calderon::error::Result;
use calderon::forward::{assemble_dtn, ConductivityField};
use calderon::lattice::Lattice;
use calderon::reconstruction::{reconstruct, ReconstructOptions};
use calderon::verification::compare;

fn main() -> Result<()> {
    let lat = Lattice::build(3, 4)?;
    let g = ConductivityField::random_uniform(&lat, 0.5, 2.0, 0)?;
    println!(
        "d=3, n=4: {} edges, {} boundary nodes",
        lat.num_edges(),
        lat.num_boundary()
    );

    let start = Instant::now();
    let dtn = assemble_dtn(&lat, &g)?;
    println!("forward solve: {:.1?}", start.elapsed());

    // The reconstruction sees only the response matrix.  It works level by
    // level from every corner and keeps, per edge, the estimate from the
    // nearest one.
    let start = Instant::now();
    let opts = ReconstructOptions::default();
    let recon = reconstruct(&lat, &dtn, &opts)?;
    println!("reconstruction: {:.1?}", start.elapsed());
    println!(
        "covered {}/{} edges from {} corner runs up to level {}",
        recon.covered(),
        lat.num_edges(),
        recon.corner_runs.len(),
        recon.max_level
    );

    let degraded = recon
        .corner_runs
        .iter()
        .flat_map(|run| &run.slices)
        .filter(|s| s.degraded || s.rank_deficient)
        .count();
    let worst_residual = recon
        .corner_runs
        .iter()
        .flat_map(|run| &run.slices)
        .map(|s| s.lstsq_residual)
        .fold(0.0f64, f64::max);
    println!("degraded slices: {degraded}, worst flux residual: {worst_residual:.3e}");

    // Compare against the generating field, edge by edge.
    let report = compare(&lat, &g, &recon)?;
    println!("max abs error: {:.3e}", report.max_abs_err());
    println!("error by depth (L1 distance of the edge midpoint to its source corner):");
    for (band, count, median, max) in report.band_summary() {
        println!(
            "  band {band}: {count:3} edges, median log10 {median:6.2}, max log10 {max:6.2}"
        );
    }
    Ok(())
}
