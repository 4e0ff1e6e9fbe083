//! Acceptance checks for the full toolkit.  Each test prints one PASS or
//! FAIL line summarizing the measured quantity against its pinned bound;
//! run with `cargo test --test acceptance -- --nocapture` to see them.

use std::time::Instant;

use calderon::forward::{assemble_dtn, ConductivityField};
use calderon::lattice::{Corner, Lattice};
use calderon::reconstruction::{reconstruct, ReconstructOptions};
use calderon::verification::{compare, error_growth_study, run_property_suite};

fn verdict(ok: bool, name: &str, detail: &str) {
    println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{name}: {detail}");
}

/// Worst roundtrip error over several seeded random conductivities.
fn roundtrip_worst_error(dim: usize, size: usize, lo: f64, hi: f64, seeds: &[u64]) -> f64 {
    let lat = Lattice::build(dim, size).unwrap();
    let opts = ReconstructOptions::default();
    let mut worst = 0.0f64;
    for &seed in seeds {
        let g = ConductivityField::random_uniform(&lat, lo, hi, seed).unwrap();
        let dtn = assemble_dtn(&lat, &g).unwrap();
        let recon = reconstruct(&lat, &dtn, &opts).unwrap();
        let report = compare(&lat, &g, &recon).unwrap();
        assert_eq!(report.covered(), lat.num_edges(), "seed {seed} left gaps");
        worst = worst.max(report.max_abs_err());
    }
    worst
}

#[test]
fn roundtrip_exactness_3d() {
    let start = Instant::now();
    let seeds: Vec<u64> = (0..10).collect();
    let worst = roundtrip_worst_error(3, 4, 0.5, 2.0, &seeds);
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst <= 1e-8 && secs < 30.0,
        "roundtrip exactness d=3 n=4",
        &format!("max abs err {worst:.3e} over 10 seeds (bound 1e-8), {secs:.1}s (budget 30s)"),
    );
}

#[test]
fn roundtrip_exactness_2d() {
    let start = Instant::now();
    let seeds: Vec<u64> = (0..10).collect();
    let worst = roundtrip_worst_error(2, 5, 0.5, 2.0, &seeds);
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst <= 1e-8 && secs < 30.0,
        "roundtrip exactness d=2 n=5",
        &format!("max abs err {worst:.3e} over 10 seeds (bound 1e-8), {secs:.1}s (budget 30s)"),
    );
}

#[test]
fn error_growth_trend() {
    let start = Instant::now();
    let sizes = [8, 9, 10, 11, 12, 13];
    let table = error_growth_study(3, &sizes, 1.0, 2.0, 0).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let at8 = table.rows[0].max_abs_err;
    let decades = table.growth_decades();
    verdict(
        at8 <= 1e-6 && decades >= 6.0 && secs < 600.0,
        "error growth trend d=3 n=8..13",
        &format!(
            "max err {at8:.3e} at n=8 (bound 1e-6), {decades:.2} decades of growth \
             (bound 6), {secs:.0}s"
        ),
    );
}

#[test]
fn depth_resolution_profile() {
    let lat = Lattice::build(3, 10).unwrap();
    let g = ConductivityField::random_uniform(&lat, 1.0, 2.0, 0).unwrap();
    let dtn = assemble_dtn(&lat, &g).unwrap();
    let recon = reconstruct(&lat, &dtn, &ReconstructOptions::default()).unwrap();
    let report = compare(&lat, &g, &recon).unwrap();
    let shallow = report.median_abs_within_depth(3.0).unwrap();
    let deepest = report.deepest_band().unwrap();
    let deep = report.median_abs_in_band(deepest).unwrap();
    let separation = (deep / shallow.max(1e-300)).log10();
    verdict(
        separation >= 3.0,
        "depth resolution d=3 n=10",
        &format!(
            "median err {shallow:.3e} at depth <= 3 vs {deep:.3e} in band {deepest}, \
             separation {separation:.2} decades (bound 3)"
        ),
    );
}

#[test]
fn property_suite_grid() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut total = 0usize;
    for dim in [2, 3] {
        for size in [2, 3, 4] {
            for seed in [0, 1, 2] {
                let suite = run_property_suite(dim, size, seed).unwrap();
                total += suite.checks.len();
                for check in suite.failed() {
                    failures.push(format!(
                        "d={dim} n={size} seed={seed} {} ({:.3e} > {:.3e})",
                        check.name, check.observed, check.bound
                    ));
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        failures.is_empty() && secs < 60.0,
        "property suite d=2,3 n=2..4 seeds 0..2",
        &format!(
            "{total} checks, {} failures{}{}, {secs:.1}s (budget 60s)",
            failures.len(),
            if failures.is_empty() { "" } else { ": " },
            failures.join("; ")
        ),
    );
}

#[test]
fn reflection_and_scaling_invariance() {
    let mut worst_reflect = 0.0f64;
    let mut worst_scale = 0.0f64;
    for (dim, size, seed) in [(2, 4, 3), (3, 3, 5)] {
        let lat = Lattice::build(dim, size).unwrap();
        let g = ConductivityField::random_uniform(&lat, 0.5, 2.0, seed).unwrap();
        let dtn = assemble_dtn(&lat, &g).unwrap();
        let opts = ReconstructOptions::default();
        let base = reconstruct(&lat, &dtn, &opts).unwrap();
        let est = base.dense_estimates().unwrap();

        // Reflecting the conductivity through a corner must permute the
        // reconstruction the same way.
        let mut flags = vec![false; dim];
        flags[0] = true;
        flags[dim - 1] = true;
        let map = lat.corner_map(&Corner::new(flags)).unwrap();
        let reflected = assemble_dtn(&lat, &g.reflect(&map)).unwrap();
        let recon_reflected = reconstruct(&lat, &reflected, &opts).unwrap();
        let est_reflected = recon_reflected.dense_estimates().unwrap();
        for e in 0..lat.num_edges() {
            worst_reflect = worst_reflect.max((est_reflected[e] - est[map.edge_perm[e]]).abs());
        }

        // Scaling the conductivity must scale the reconstruction linearly.
        let factor = 3.25;
        let scaled = assemble_dtn(&lat, &g.scaled(factor).unwrap()).unwrap();
        let recon_scaled = reconstruct(&lat, &scaled, &opts).unwrap();
        let est_scaled = recon_scaled.dense_estimates().unwrap();
        for e in 0..lat.num_edges() {
            worst_scale = worst_scale.max((est_scaled[e] - factor * est[e]).abs() / factor);
        }
    }
    verdict(
        worst_reflect <= 1e-9 && worst_scale <= 1e-9,
        "reflection equivariance and scaling homogeneity",
        &format!(
            "reflection defect {worst_reflect:.3e}, scaling defect {worst_scale:.3e} \
             (bounds 1e-9)"
        ),
    );
}
