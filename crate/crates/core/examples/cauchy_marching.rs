//! Marching a potential into the interior from boundary data alone.
//!
//! Once the conductivities below a level are known, the potential of a
//! corner-confined excitation follows from its boundary data one node at a
//! time.  Run with `cargo run --example cauchy_marching`.

use nalgebra::DVector;

use calderon::error::Result;
use calderon::forward::{
    assemble_dtn, solve_dirichlet, BoundaryRole, BoundaryVector, ConductivityField,
};
use calderon::lattice::Lattice;
use calderon::operators::{far_response, kernel_basis};
use calderon::reconstruction::{propagate_cauchy, PartialConductivity};
use calderon::verification::dense_mixed_solve;

fn main() -> Result<()> {
    let lat = Lattice::build(3, 2)?;
    let g = ConductivityField::random_uniform(&lat, 0.5, 2.0, 4)?;
    let dtn = assemble_dtn(&lat, &g)?;

    // Pretend the conductivities are known everywhere, as they would be
    // below the level currently being recovered.
    let mut known = PartialConductivity::empty(&lat);
    for e in 0..lat.num_edges() {
        known.set(e, g.at(e));
    }

    let t = lat.dim() * lat.size() - 1;
    let far = far_response(&lat, &dtn, t)?;
    let kb = kernel_basis(&far, 1e-10)?;
    println!("marching at level {t} with a kernel excitation ({} directions)", kb.dim());

    // Boundary data of one kernel vector: potentials on the corner-side
    // ports, currents measured by the response matrix.
    let mut phi = DVector::zeros(lat.num_boundary());
    for (r, &b) in kb.cols.iter().enumerate() {
        phi[lat.boundary_position(b).unwrap()] = kb.basis[(r, 0)];
    }
    let phi = BoundaryVector::new(&lat, BoundaryRole::Potential, phi)?;
    let psi = dtn.apply(&lat, &phi)?;

    // March the potential inward.
    let exc = propagate_cauchy(&lat, &known, &phi, &psi, t)?;
    println!("worst equation residual after the march: {:.3e}", exc.march_residual);
    println!("values sanitized: {}", exc.sanitized);

    // Reference one: the same equations solved all at once, densely.
    let (dense, residual) = dense_mixed_solve(&lat, &known, &phi, &psi, t)?;
    let mut vs_dense = 0.0f64;
    for &(node, value) in &dense {
        vs_dense = vs_dense.max((exc.potential[node] - value).abs());
    }
    println!("marched vs dense mixed solve ({} unknowns, residual {:.3e}): {:.3e}",
        dense.len(), residual, vs_dense);

    // Reference two: the classical Dirichlet solution from the full
    // boundary potential, which the march never sees.
    let u = solve_dirichlet(&lat, &g, &phi)?;
    let mut vs_dirichlet = 0.0f64;
    for &(node, _) in &dense {
        vs_dirichlet = vs_dirichlet.max((exc.potential[node] - u.at(node)).abs());
    }
    println!("marched vs direct Dirichlet solution: {vs_dirichlet:.3e}");

    // Zero boundary data marches to the zero potential, exactly.
    let zero_phi = BoundaryVector::new(
        &lat,
        BoundaryRole::Potential,
        DVector::zeros(lat.num_boundary()),
    )?;
    let zero_psi = BoundaryVector::new(
        &lat,
        BoundaryRole::Current,
        DVector::zeros(lat.num_boundary()),
    )?;
    let zero = propagate_cauchy(&lat, &known, &zero_phi, &zero_psi, t)?;
    println!("zero data marches to max |u| = {:.3e}", zero.potential.amax());
    Ok(())
}
