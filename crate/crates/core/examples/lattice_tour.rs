//! Tour of the lattice geometry: nodes, edges, levels and corners.
//!
//! Run with `cargo run --example lattice_tour`.

use calderon::error::Result;
use calderon::lattice::{Corner, Lattice};

fn describe(dim: usize, size: usize) -> Result<()> {
    let lat = Lattice::build(dim, size)?;
    println!("== box with d={dim}, n={size} ==");
    println!(
        "{} interior nodes, {} boundary nodes, {} edges",
        lat.num_interior(),
        lat.num_boundary(),
        lat.num_edges()
    );

    // Every boundary node touches the interior through exactly one edge,
    // its port.
    let b = lat.boundary_nodes().next().unwrap();
    let (p, e) = lat.boundary_neighbor(b);
    println!(
        "boundary node {:?} connects through edge {e} to interior node {:?}",
        lat.coords(b),
        lat.coords(p)
    );

    // Levels grade nodes and edges by coordinate sum, diagonally across
    // the box.  An edge sits at the level of its lower endpoint.
    println!("level profile (interior / boundary nodes per level):");
    for t in 0..=lat.max_level() {
        let s = lat.slice_sets(t)?;
        if s.interior.is_empty() && s.boundary.is_empty() {
            continue;
        }
        println!(
            "  t={t:2}: {:3} interior, {:2} boundary ({} low, {} high)",
            s.interior.len(),
            s.boundary.len(),
            s.boundary_low.len(),
            s.boundary_high.len()
        );
    }

    // Corners index the 2^d reflection symmetries of the box.  Each one
    // induces an involution on nodes and edges.
    let corners = Corner::all(dim);
    println!("{} corners: {:?}", corners.len(), {
        corners.iter().map(|c| c.label()).collect::<Vec<_>>()
    });
    let map = lat.corner_map(corners.last().unwrap())?;
    let (a, bnode) = lat.edge(0);
    println!(
        "reflecting edge 0 ({:?}-{:?}) through corner {} gives edge {} ({:?}-{:?})",
        lat.coords(a),
        lat.coords(bnode),
        map.corner.label(),
        map.edge_perm[0],
        lat.coords(map.node_perm[a]),
        lat.coords(map.node_perm[bnode]),
    );
    println!();
    Ok(())
}

fn main() -> Result<()> {
    describe(2, 3)?;
    describe(3, 2)?;
    Ok(())
}
