//! Corner-confined excitations: boundary data in the kernel of the far
//! response produces potentials supported near one corner.
//!
//! Run with `cargo run --example corner_excitations`.

use calderon::error::Result;
use calderon::forward::{assemble_dtn, ConductivityField};
use calderon::lattice::Lattice;
use calderon::operators::{
    expected_kernel_dim, far_response, interface_trace, kernel_basis, localized_potentials,
    principal_angle, quotient_basis, upper_response,
};

fn main() -> Result<()> {
    let lat = Lattice::build(3, 2)?;
    let g = ConductivityField::random_uniform(&lat, 0.5, 2.0, 9)?;
    let dtn = assemble_dtn(&lat, &g)?;
    let d = lat.dim();
    let n = lat.size();

    // The far response maps potentials on the corner-side boundary ports
    // to currents measured on the rest of the boundary.  Its kernel grows
    // level by level, with dimension fixed by a counting identity.
    println!("kernel growth of the far response:");
    let mut prev = None;
    for t in (d - 1)..=(d * n - 1) {
        let far = far_response(&lat, &dtn, t)?;
        let kb = kernel_basis(&far, 1e-10)?;
        println!(
            "  t={t}: operator {}x{}, kernel dim {} (counting predicts {})",
            far.matrix.nrows(),
            far.matrix.ncols(),
            kb.dim(),
            expected_kernel_dim(&lat, t)?
        );
        assert_eq!(kb.dim(), expected_kernel_dim(&lat, t)?);

        // The same kernel appears in a forward-model route: currents far
        // from the corner vanish exactly when the potential traced onto
        // the next interior slice vanishes.
        let trace = interface_trace(&lat, &g, t)?;
        let tb = kernel_basis(&trace, 1e-10)?;
        let angle = principal_angle(&kb.basis, &tb.basis);
        println!("        principal angle between data and model kernels: {angle:.3e}");

        // The responses factor through that interface, and the outer
        // factor is injective, which is what makes the kernels equal.
        let upper = upper_response(&lat, &g, t)?;
        let residual = (&far.matrix - &upper.matrix * &trace.matrix).amax();
        println!("        factorization residual: {residual:.3e}");

        // New excitations at this level: kernel directions not already
        // present one level down.
        if let Some(prev_kb) = &prev {
            let fresh = quotient_basis(&kb, prev_kb, 1e-8)?;
            println!("        {} fresh directions beyond level {}", fresh.ncols(), t - 1);
        }

        // Kernel data excites a potential confined to the corner region:
        // outside the covered slices it is numerically zero.
        let loc = localized_potentials(&lat, &g, &kb)?;
        println!(
            "        localized on {} of {} nodes, leakage {:.3e}",
            loc.nodes.len(),
            lat.num_nodes(),
            loc.max_leakage
        );
        prev = Some(kb);
    }
    Ok(())
}
