//! Command line front end: generate problems, compute boundary responses,
//! reconstruct conductivities, verify against ground truth and run the
//! built-in studies.
//!
//! Exit codes: 0 on success, 1 when inputs fail validation or a check
//! fails, 2 on file or schema problems.  Set `RAYON_NUM_THREADS` to cap
//! worker parallelism.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use calderon::error::Error;
use calderon::forward::{assemble_dtn, ConductivityField};
use calderon::io::{
    load_json, parse_corner_choice, save_json, write_error_report, write_study, DtnFile,
    ProblemFile, ProblemMetadata, ReconFile,
};
use calderon::lattice::Lattice;
use calderon::reconstruction::{reconstruct, ReconstructOptions};
use calderon::verification::{compare, error_growth_study, run_property_suite};

#[derive(Parser)]
#[command(
    name = "calderon",
    version,
    about = "Inverse conductivity toolkit for hypercubic lattice graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random conductivity problem.
    Generate(GenerateArgs),
    /// Compute the boundary response matrix of a problem.
    Dtn(DtnArgs),
    /// Reconstruct edge conductivities from a response matrix.
    Reconstruct(ReconstructArgs),
    /// Compare a reconstruction against the problem it came from.
    Verify(VerifyArgs),
    /// Run the numerical property suite on one random case.
    Selftest(SelftestArgs),
    /// Measure reconstruction error growth over a range of sizes.
    Study(StudyArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Lattice dimension (at least 2).
    #[arg(long)]
    dim: usize,
    /// Interior nodes per axis.
    #[arg(long)]
    n: usize,
    /// Uniform conductivity range as "lo,hi" with 0 < lo < hi.
    #[arg(long, value_parser = parse_pair, default_value = "0.5,2")]
    dist: (f64, f64),
    /// Seed for the edge value generator.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output problem file (JSON).
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct DtnArgs {
    /// Input problem file (JSON).
    #[arg(short, long)]
    input: PathBuf,
    /// Output response file (JSON).
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct ReconstructArgs {
    /// Input response file (JSON).
    #[arg(short, long)]
    input: PathBuf,
    /// Corner selection: "all" or "origin".
    #[arg(long, default_value = "all")]
    corners: String,
    /// Relative singular value threshold for kernel dimensions.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Output reconstruction file (JSON).
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Problem file holding the true conductivities (JSON).
    #[arg(short, long)]
    input: PathBuf,
    /// Reconstruction file to check (JSON).
    #[arg(long)]
    recon: PathBuf,
    /// Output error report (CSV).
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct StudyArgs {
    /// Lattice dimension.
    #[arg(long, default_value_t = 3)]
    dim: usize,
    /// Sizes to run: a range "8..13" (inclusive) or a comma list "8,10,12".
    #[arg(long = "n-list")]
    n_list: String,
    /// Uniform conductivity range as "lo,hi".
    #[arg(long, value_parser = parse_pair, default_value = "1,2")]
    dist: (f64, f64),
    /// Base seed; each size derives its own stream from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output study table (CSV).
    #[arg(short, long)]
    output: PathBuf,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected \"lo,hi\", got \"{s}\""));
    }
    let lo: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|e| format!("bad lower bound: {e}"))?;
    let hi: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|e| format!("bad upper bound: {e}"))?;
    Ok((lo, hi))
}

fn parse_sizes(s: &str) -> Result<Vec<usize>, Error> {
    let bad = |msg: String| Error::InvalidParameter(msg);
    let sizes: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let lo: usize = a
            .trim()
            .parse()
            .map_err(|e| bad(format!("bad range start \"{a}\": {e}")))?;
        let hi: usize = b
            .trim()
            .parse()
            .map_err(|e| bad(format!("bad range end \"{b}\": {e}")))?;
        if lo > hi {
            return Err(bad(format!("empty size range {lo}..{hi}")));
        }
        (lo..=hi).collect()
    } else {
        s.split(',')
            .map(|part| {
                part.trim()
                    .parse()
                    .map_err(|e| bad(format!("bad size \"{part}\": {e}")))
            })
            .collect::<Result<_, _>>()?
    };
    if sizes.is_empty() {
        return Err(bad("no sizes given".into()));
    }
    Ok(sizes)
}

fn cmd_generate(args: GenerateArgs) -> Result<(), Error> {
    let lat = Lattice::build(args.dim, args.n)?;
    let (lo, hi) = args.dist;
    let g = ConductivityField::random_uniform(&lat, lo, hi, args.seed)?;
    let metadata = ProblemMetadata {
        seed: Some(args.seed),
        distribution: Some(format!("uniform {lo},{hi}")),
    };
    let file = ProblemFile::new(&lat, &g, Some(metadata));
    save_json(&args.output, &file)?;
    println!(
        "wrote problem d={} n={} with {} edges to {}",
        args.dim,
        args.n,
        lat.num_edges(),
        args.output.display()
    );
    Ok(())
}

fn cmd_dtn(args: DtnArgs) -> Result<(), Error> {
    let problem: ProblemFile = load_json(&args.input)?;
    let lat = problem.lattice()?;
    let g = problem.conductivity(&lat)?;
    let dtn = assemble_dtn(&lat, &g)?;
    let file = DtnFile::new(&lat, &dtn);
    save_json(&args.output, &file)?;
    println!(
        "wrote {}x{} response (symmetry defect {:.3e}, row sum defect {:.3e}) to {}",
        lat.num_boundary(),
        lat.num_boundary(),
        file.metadata.symmetry_defect,
        file.metadata.row_sum_defect,
        args.output.display()
    );
    Ok(())
}

fn cmd_reconstruct(args: ReconstructArgs) -> Result<(), Error> {
    let file: DtnFile = load_json(&args.input)?;
    let lat = file.lattice()?;
    let dtn = file.to_dtn(&lat)?;
    let opts = ReconstructOptions {
        rank_tol: args.tol,
        corners: parse_corner_choice(&args.corners)?,
        ..ReconstructOptions::default()
    };
    let recon = reconstruct(&lat, &dtn, &opts)?;
    let covered = recon.covered();
    let degraded = recon
        .corner_runs
        .iter()
        .flat_map(|run| &run.slices)
        .filter(|d| d.degraded || d.rank_deficient)
        .count();
    let out = ReconFile::new(&lat, &recon, &opts);
    save_json(&args.output, &out)?;
    println!(
        "reconstructed {covered}/{} edges up to level {} ({} degraded slices) to {}",
        lat.num_edges(),
        recon.max_level,
        degraded,
        args.output.display()
    );
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Error> {
    let problem: ProblemFile = load_json(&args.input)?;
    let lat = problem.lattice()?;
    let g = problem.conductivity(&lat)?;
    let recon_file: ReconFile = load_json(&args.recon)?;
    let recon = recon_file.to_reconstruction(&lat)?;
    let report = compare(&lat, &g, &recon)?;
    write_error_report(&args.output, &lat, &report)?;
    println!(
        "covered {}/{} edges, max abs err {:.3e}, wrote {}",
        report.covered(),
        lat.num_edges(),
        report.max_abs_err(),
        args.output.display()
    );
    for (band, count, med, max) in report.band_summary() {
        println!(
            "depth band {band}: {count} edges, median log10 err {med:.2}, max {max:.2}"
        );
    }
    Ok(())
}

fn cmd_selftest(args: SelftestArgs) -> Result<ExitCode, Error> {
    let suite = run_property_suite(args.dim, args.n, args.seed)?;
    for check in &suite.checks {
        println!(
            "{}  {:<42} observed {:.3e}  bound {:.3e}",
            if check.passed { "pass" } else { "FAIL" },
            check.name,
            check.observed,
            check.bound
        );
    }
    let failed = suite.failed().len();
    if failed == 0 {
        println!("all {} checks passed", suite.checks.len());
        Ok(ExitCode::SUCCESS)
    } else {
        println!("{failed} of {} checks failed", suite.checks.len());
        Ok(ExitCode::from(1))
    }
}

fn cmd_study(args: StudyArgs) -> Result<(), Error> {
    let sizes = parse_sizes(&args.n_list)?;
    let (lo, hi) = args.dist;
    let table = error_growth_study(args.dim, &sizes, lo, hi, args.seed)?;
    write_study(&args.output, &table)?;
    for row in &table.rows {
        println!(
            "n={}: max err {:.3e} (log10 {:+.2}), {:.2}s",
            row.size, row.max_abs_err, row.max_log10_err, row.seconds
        );
    }
    println!(
        "growth {:.2} decades over {} sizes, trend {}",
        table.growth_decades(),
        table.rows.len(),
        if table.trend_monotone() {
            "monotone"
        } else {
            "not monotone"
        }
    );
    Ok(())
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Io(_) | Error::Json(_) | Error::Csv(_) | Error::Schema(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(args) => cmd_generate(args).map(|()| ExitCode::SUCCESS),
        Command::Dtn(args) => cmd_dtn(args).map(|()| ExitCode::SUCCESS),
        Command::Reconstruct(args) => cmd_reconstruct(args).map(|()| ExitCode::SUCCESS),
        Command::Verify(args) => cmd_verify(args).map(|()| ExitCode::SUCCESS),
        Command::Selftest(args) => cmd_selftest(args),
        Command::Study(args) => cmd_study(args).map(|()| ExitCode::SUCCESS),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
