//! The on-disk artifacts: problem, response and reconstruction files in
//! JSON, error reports in CSV, all round-tripping exactly.
//!
//! Run with `cargo run --example file_formats`.

use calderon::error::Result;
use calderon::forward::{assemble_dtn, ConductivityField};
use calderon::io::{
    load_json, save_json, write_error_report, DtnFile, ProblemFile, ProblemMetadata, ReconFile,
};
use calderon::lattice::Lattice;
use calderon::reconstruction::{reconstruct, ReconstructOptions};
use calderon::verification::compare;

fn main() -> Result<()> {
    let dir = std::env::temp_dir().join("calderon_file_formats");
    std::fs::create_dir_all(&dir)?;
    let lat = Lattice::build(2, 3)?;
    let g = ConductivityField::random_uniform(&lat, 0.5, 2.0, 1)?;

    // A problem file records the lattice shape, the per-edge values in
    // canonical order, and how they were drawn.
    let problem = ProblemFile::new(
        &lat,
        &g,
        Some(ProblemMetadata {
            seed: Some(1),
            distribution: Some("uniform 0.5,2".into()),
        }),
    );
    let problem_path = dir.join("problem.json");
    save_json(&problem_path, &problem)?;
    let back: ProblemFile = load_json(&problem_path)?;
    let g2 = back.conductivity(&lat)?;
    let exact = (0..lat.num_edges()).all(|e| g.at(e).to_bits() == g2.at(e).to_bits());
    println!("problem file: {} edges, bit-exact round-trip: {exact}", problem.edges.len());

    // The response file stores the full matrix with its boundary node
    // ordering spelled out, plus the measured invariant defects.
    let dtn = assemble_dtn(&lat, &g)?;
    let dtn_file = DtnFile::new(&lat, &dtn);
    let dtn_path = dir.join("dtn.json");
    save_json(&dtn_path, &dtn_file)?;
    let dtn2 = load_json::<DtnFile>(&dtn_path)?.to_dtn(&lat)?;
    println!(
        "response file: {}x{} matrix, symmetry defect {:.3e}, re-read equal: {}",
        lat.num_boundary(),
        lat.num_boundary(),
        dtn_file.metadata.symmetry_defect,
        dtn.matrix() == dtn2.matrix()
    );

    // Reconstruction files carry the estimates with their source corners
    // and the per-level diagnostics.
    let opts = ReconstructOptions::default();
    let recon = reconstruct(&lat, &dtn, &opts)?;
    let recon_file = ReconFile::new(&lat, &recon, &opts);
    let recon_path = dir.join("recon.json");
    save_json(&recon_path, &recon_file)?;
    let recon2 = load_json::<ReconFile>(&recon_path)?.to_reconstruction(&lat)?;
    println!(
        "reconstruction file: {} diagnostics records, estimates equal: {}",
        recon_file.diagnostics.len(),
        recon.estimates == recon2.estimates
    );

    // The error report is CSV, one row per edge.
    let report = compare(&lat, &g, &recon)?;
    let report_path = dir.join("report.csv");
    write_error_report(&report_path, &lat, &report)?;
    let lines = std::fs::read_to_string(&report_path)?.lines().count();
    println!("error report: {lines} lines (header + {} edges)", lat.num_edges());
    println!("artifacts written under {}", dir.display());
    Ok(())
}
