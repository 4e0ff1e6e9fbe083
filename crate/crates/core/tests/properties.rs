//! Randomized structural properties of the lattice, the forward map and
//! the file formats.

use proptest::prelude::*;

use calderon::forward::{assemble_dtn, BoundaryVector, ConductivityField};
use calderon::io::ProblemFile;
use calderon::lattice::{Corner, Lattice};

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (2usize..=3).prop_flat_map(|d| {
        let max_n = if d == 2 { 4 } else { 3 };
        (Just(d), 1usize..=max_n)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn lattice_counts_match_closed_forms((d, n) in dims()) {
        let lat = Lattice::build(d, n).unwrap();
        prop_assert_eq!(lat.num_interior(), n.pow(d as u32));
        prop_assert_eq!(lat.num_boundary(), 2 * d * n.pow(d as u32 - 1));
        prop_assert_eq!(lat.num_edges(), d * n.pow(d as u32 - 1) * (n + 1));
        prop_assert_eq!(lat.num_nodes(), lat.num_interior() + lat.num_boundary());
    }

    #[test]
    fn corner_maps_are_adjacency_preserving_involutions(
        (d, n) in dims(),
        mask in 0usize..8,
    ) {
        let lat = Lattice::build(d, n).unwrap();
        let flags = (0..d).map(|i| mask >> i & 1 == 1).collect();
        let map = lat.corner_map(&Corner::new(flags)).unwrap();
        for v in 0..lat.num_nodes() {
            prop_assert_eq!(map.node_perm[map.node_perm[v]], v);
            prop_assert_eq!(lat.is_interior(map.node_perm[v]), lat.is_interior(v));
        }
        for e in 0..lat.num_edges() {
            prop_assert_eq!(map.edge_perm[map.edge_perm[e]], e);
            let (a, b) = lat.edge(e);
            let (ia, ib) = lat.edge(map.edge_perm[e]);
            let image = [map.node_perm[a], map.node_perm[b]];
            prop_assert!(image.contains(&ia) && image.contains(&ib));
        }
    }

    #[test]
    fn responses_keep_their_invariants((d, n) in dims(), seed in 0u64..1000) {
        let lat = Lattice::build(d, n).unwrap();
        let g = ConductivityField::random_uniform(&lat, 0.5, 2.0, seed).unwrap();
        let dtn = assemble_dtn(&lat, &g).unwrap();
        prop_assert!(dtn.symmetry_defect() <= 1e-12);
        prop_assert!(dtn.row_sum_defect() <= 1e-10);
        prop_assert!(dtn.sign_defect() <= 1e-12);

        // Applying the operator is the same as multiplying by the matrix.
        let b = lat.boundary_nodes().next().unwrap();
        let phi = BoundaryVector::unit(&lat, b).unwrap();
        let psi = dtn.apply(&lat, &phi).unwrap();
        let column = dtn.matrix() * phi.values();
        prop_assert!((psi.values() - column).amax() <= 1e-13);
    }

    #[test]
    fn scaling_the_conductivity_scales_the_response(
        (d, n) in dims(),
        seed in 0u64..1000,
        factor in 0.25f64..4.0,
    ) {
        let lat = Lattice::build(d, n).unwrap();
        let g = ConductivityField::random_uniform(&lat, 0.5, 2.0, seed).unwrap();
        let dtn = assemble_dtn(&lat, &g).unwrap();
        let scaled = assemble_dtn(&lat, &g.scaled(factor).unwrap()).unwrap();
        let defect = (scaled.matrix() - dtn.matrix() * factor).amax()
            / dtn.matrix().amax().max(1e-300);
        prop_assert!(defect <= 1e-12, "defect {}", defect);
    }

    #[test]
    fn problem_files_survive_serialization((d, n) in dims(), seed in 0u64..1000) {
        let lat = Lattice::build(d, n).unwrap();
        let g = ConductivityField::random_uniform(&lat, 0.5, 2.0, seed).unwrap();
        let file = ProblemFile::new(&lat, &g, None);
        let text = serde_json::to_string(&file).unwrap();
        let back: ProblemFile = serde_json::from_str(&text).unwrap();
        let g2 = back.conductivity(&lat).unwrap();
        for e in 0..lat.num_edges() {
            prop_assert_eq!(g.at(e).to_bits(), g2.at(e).to_bits());
        }
    }
}
