//! Forward problem: assemble the boundary response matrix and inspect its
//! invariants.
//!
//! Run with `cargo run --example forward_dtn`.

use nalgebra::DMatrix;

use calderon::error::Result;
use calderon::forward::{
    assemble_dtn, boundary_current, solve_dirichlet, BoundaryVector, ConductivityField,
};
use calderon::lattice::Lattice;

fn main() -> Result<()> {
    // The smallest box has a closed form: with unit conductivities the
    // response of the single-cell 2D lattice is (1/4) * ones - identity.
    let lat = Lattice::build(2, 1)?;
    let g = ConductivityField::uniform(&lat, 1.0)?;
    let dtn = assemble_dtn(&lat, &g)?;
    let nb = lat.num_boundary();
    let reference = DMatrix::from_element(nb, nb, 0.25) - DMatrix::<f64>::identity(nb, nb);
    let defect = (dtn.matrix() - &reference).amax();
    println!("single cell, unit conductivity:");
    println!("{}", dtn.matrix());
    println!("distance from (1/4)*ones - identity: {defect:.3e}");
    assert!(defect <= 1e-14);

    // A bigger random case, with the invariants every response matrix
    // satisfies: symmetry, zero row sums, and negative semidefinite sign
    // pattern (nonnegative off the diagonal, nonpositive on it).
    let lat = Lattice::build(3, 3)?;
    let g = ConductivityField::random_uniform(&lat, 0.5, 2.0, 42)?;
    let dtn = assemble_dtn(&lat, &g)?;
    println!("\nd=3, n=3 random conductivities in [0.5, 2):");
    println!("response is {}x{}", lat.num_boundary(), lat.num_boundary());
    println!("symmetry defect: {:.3e}", dtn.symmetry_defect());
    println!("row sum defect:  {:.3e}", dtn.row_sum_defect());
    println!("sign defect:     {:.3e}", dtn.sign_defect());

    // The matrix represents the map from boundary potentials to boundary
    // currents; applying it agrees with solving the Dirichlet problem and
    // reading the port currents directly.
    let b0 = lat.boundary_nodes().next().unwrap();
    let phi = BoundaryVector::unit(&lat, b0)?;
    let psi = dtn.apply(&lat, &phi)?;
    let u = solve_dirichlet(&lat, &g, &phi)?;
    let direct = boundary_current(&lat, &g, &u);
    let mut diff = 0.0f64;
    for b in lat.boundary_nodes() {
        diff = diff.max((psi.at(&lat, b) - direct.at(&lat, b)).abs());
    }
    println!("matrix application vs direct port currents: {diff:.3e}");

    // Total current through the boundary vanishes for any excitation.
    let total: f64 = lat.boundary_nodes().map(|b| psi.at(&lat, b)).sum();
    println!("net current through the boundary: {total:.3e}");
    Ok(())
}
