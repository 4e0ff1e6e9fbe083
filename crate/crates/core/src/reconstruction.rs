//! Layer-by-layer recovery of edge conductivities from the boundary
//! response matrix.
//!
//! The algorithm works one diagonal level at a time, starting next to a
//! corner of the box.  At level `t` the kernel of the far response supplies
//! boundary excitations whose potentials are confined to the corner region.
//! For each new excitation (one not already available at the previous
//! level) the interior potential on the known part of the region follows
//! from the boundary data alone by Cauchy propagation: the current balance
//! at an already-covered node determines the potential one step further
//! from the corner.  Kirchhoff balance on the frontier then yields a linear
//! system for the unknown conductivities of the level, solved in a least
//! squares sense.
//!
//! Running the same procedure from every corner of the box and keeping,
//! for each edge, the estimate from the nearest corner covers the whole
//! lattice.  Data from other corners is mapped to the origin pipeline by
//! exact permutation of the response matrix, so no accuracy is lost in the
//! change of frame.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forward::{BoundaryRole, BoundaryVector, DtnMatrix};
use crate::lattice::{Corner, EdgeId, Lattice, NodeId};
use crate::operators::{
    expected_kernel_dim, far_response, kernel_basis, quotient_basis_lenient, KernelBasis,
};

/// Which corners of the box the reconstruction starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CornerChoice {
    /// All `2^d` corners; estimates are merged by proximity and every edge
    /// is covered.
    All,
    /// The origin corner only; edges on the far side of the box stay
    /// unestimated.
    Origin,
}

/// Tuning knobs for the reconstruction.
#[derive(Debug, Clone)]
pub struct ReconstructOptions {
    /// Relative singular-value threshold for kernel and rank decisions.
    pub rank_tol: f64,
    /// Corners to run the pipeline from.
    pub corners: CornerChoice,
    /// Relative residual above which propagated potentials are flagged.
    pub march_residual_tol: f64,
    /// Containment defect above which the kernel nesting is flagged.
    pub containment_tol: f64,
    /// Highest level to recover, `None` for the automatic choice.
    pub max_level: Option<usize>,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        ReconstructOptions {
            rank_tol: 1e-10,
            corners: CornerChoice::All,
            march_residual_tol: 1e-6,
            containment_tol: 1e-8,
            max_level: None,
        }
    }
}

/// The default highest level recovered from each corner: deep enough that
/// the corner regions overlap, but never beyond the last level at which
/// the far response exists.
pub fn default_max_level(lat: &Lattice) -> usize {
    let d = lat.dim();
    let n = lat.size();
    (d * n.div_ceil(2)).min(d * n - 1)
}

/// Conductivity estimates indexed by edge id, filled in as levels are
/// recovered.  Values are stored as estimated, including nonpositive ones;
/// those are flagged in the slice diagnostics instead of being clamped.
#[derive(Debug, Clone)]
pub struct PartialConductivity {
    values: Vec<Option<f64>>,
}

impl PartialConductivity {
    pub fn empty(lat: &Lattice) -> Self {
        PartialConductivity {
            values: vec![None; lat.num_edges()],
        }
    }

    pub fn at(&self, e: EdgeId) -> Option<f64> {
        self.values[e]
    }

    pub fn set(&mut self, e: EdgeId, value: f64) {
        self.values[e] = Some(value);
    }

    pub fn known(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    fn require(&self, e: EdgeId) -> Result<f64> {
        self.values[e].ok_or_else(|| {
            Error::InconsistentData(format!("conductivity of edge {e} is needed but not yet known"))
        })
    }
}

/// A boundary excitation with its propagated interior potential.
#[derive(Debug, Clone)]
pub struct Excitation {
    /// Potential at every node: prescribed on the boundary, propagated on
    /// the covered interior, zero elsewhere.
    pub potential: DVector<f64>,
    /// Boundary current (boundary ordering) measured for this excitation.
    pub current: DVector<f64>,
    /// Largest relative residual of the equations used by propagation.
    pub march_residual: f64,
    /// Number of propagated values that came out non-finite and were
    /// replaced by zero.
    pub sanitized: usize,
}

/// Propagates a corner-confined excitation into the interior.
///
/// The boundary potential and current determine the interior potential on
/// all covered nodes (cumulative interior up to `t`), sweeping along the
/// first axis: the current balance at a node whose other neighbors are
/// already known has exactly one unknown, the potential one step further
/// along the axis.  Requires the conductivity on all edges of level below
/// `t`.  All equations used are afterwards re-evaluated as residuals.
pub fn propagate_cauchy(
    lat: &Lattice,
    known: &PartialConductivity,
    phi: &BoundaryVector,
    psi: &BoundaryVector,
    t: usize,
) -> Result<Excitation> {
    if phi.role != BoundaryRole::Potential || psi.role != BoundaryRole::Current {
        return Err(Error::InvalidParameter(
            "propagation needs a potential and a current vector in that order".into(),
        ));
    }
    let slices = lat.slice_sets(t)?;
    let mut u = DVector::zeros(lat.num_nodes());
    for b in lat.boundary_nodes() {
        u[b] = phi.at(lat, b);
    }
    // Sweep the covered interior in order of the first coordinate; the
    // balance at the node behind (one step back along axis 0) has its only
    // unknown here.
    let mut order = slices.interior_cum.clone();
    order.sort_by_key(|&p| (lat.coords(p)[0], p));
    let mut sanitized = 0usize;
    for &p in &order {
        let mut back = lat.coords(p).to_vec();
        back[0] -= 1;
        let q = lat
            .node_at(&back)
            .ok_or_else(|| Error::InconsistentData(format!("missing neighbor of node {p}")))?;
        let e_pq = lat.edge_between(p, q).expect("lattice neighbors share an edge");
        let g_pq = known.require(e_pq)?;
        let mut value = if lat.is_interior(q) {
            // Kirchhoff balance at q: all terms but the one toward p are
            // already known.
            let mut flux = 0.0;
            for &(s, e_qs) in lat.neighbors(q) {
                if s == p {
                    continue;
                }
                flux += known.require(e_qs)? * (u[q] - u[s]);
            }
            u[q] + flux / g_pq
        } else {
            // Port equation at the boundary node behind p.
            u[q] + psi.at(lat, q) / g_pq
        };
        if !value.is_finite() {
            value = 0.0;
            sanitized += 1;
        }
        u[p] = value;
    }
    // Re-evaluate every equation the sweep relied on.
    let mut residual = 0.0f64;
    if t >= 1 {
        let prev = lat.slice_sets(t - 1)?;
        for &q in &prev.interior_cum {
            let mut r = 0.0;
            let mut scale = 0.0;
            for &(s, e) in lat.neighbors(q) {
                let term = known.require(e)? * (u[s] - u[q]);
                r += term;
                scale += term.abs();
            }
            residual = residual.max(r.abs() / scale.max(1e-300));
        }
        for &b in &prev.corner_boundary_cum {
            let (p, e) = lat.boundary_neighbor(b);
            let flow = known.require(e)? * (u[p] - u[b]);
            let r = psi.at(lat, b) - flow;
            let scale = psi.at(lat, b).abs() + flow.abs();
            residual = residual.max(r.abs() / scale.max(1e-300));
        }
    }
    Ok(Excitation {
        potential: u,
        current: psi.values().clone(),
        march_residual: residual,
        sanitized,
    })
}

/// The stacked linear system determining the conductivities of one level.
#[derive(Debug, Clone)]
pub struct FluxSystem {
    pub level: usize,
    /// Edge ids of the unknowns, in canonical edge order.
    pub edges: Vec<EdgeId>,
    /// One block of rows per excitation.
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub rows_per_excitation: usize,
}

/// Edges of one level in canonical order.
pub fn edges_of_level(lat: &Lattice, t: usize) -> Vec<EdgeId> {
    (0..lat.num_edges())
        .filter(|&e| lat.edge_level(e) == t)
        .collect()
}

/// Assembles the balance and port equations that constrain the
/// conductivities of level `t`.
///
/// Rows come from the interior slices of level `t` and `t + 1` (Kirchhoff
/// balance) and the corner-boundary slice of level `t` (prescribed port
/// current).  For each row node, edges of level `t` contribute their
/// potential difference as a coefficient, edges below contribute their
/// known flux to the right-hand side, and edges above carry no flux for a
/// corner-confined excitation.
pub fn build_flux_system(
    lat: &Lattice,
    known: &PartialConductivity,
    t: usize,
    excitations: &[Excitation],
) -> Result<FluxSystem> {
    if excitations.is_empty() {
        return Err(Error::EmptyOperator(format!(
            "no excitations available for level {t}"
        )));
    }
    let edges = edges_of_level(lat, t);
    if edges.is_empty() {
        return Err(Error::EmptyOperator(format!("no edges at level {t}")));
    }
    let col_of: std::collections::HashMap<EdgeId, usize> =
        edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let here = lat.slice_sets(t)?;
    let next = lat.slice_sets(t + 1)?;
    let mut row_nodes: Vec<NodeId> = Vec::new();
    row_nodes.extend(&here.interior);
    row_nodes.extend(&next.interior);
    row_nodes.extend(&here.corner_boundary);
    let block = row_nodes.len();
    let mut matrix = DMatrix::zeros(block * excitations.len(), edges.len());
    let mut rhs = DVector::zeros(block * excitations.len());
    for (x, exc) in excitations.iter().enumerate() {
        for (i, &p) in row_nodes.iter().enumerate() {
            let row = x * block + i;
            if !lat.is_interior(p) {
                rhs[row] = -exc.current[lat.boundary_position(p).unwrap()];
            }
            for &(q, e) in lat.neighbors(p) {
                let diff = exc.potential[p] - exc.potential[q];
                match lat.edge_level(e).cmp(&t) {
                    std::cmp::Ordering::Equal => {
                        matrix[(row, col_of[&e])] += diff;
                    }
                    std::cmp::Ordering::Less => {
                        rhs[row] -= known.require(e)? * diff;
                    }
                    std::cmp::Ordering::Greater => {}
                }
            }
        }
    }
    Ok(FluxSystem {
        level: t,
        edges,
        matrix,
        rhs,
        rows_per_excitation: block,
    })
}

/// Least squares solution with rank detection, as (solution, rank,
/// residual norm).
fn solve_least_squares(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    rel_tol: f64,
) -> Result<(DVector<f64>, usize, f64)> {
    let ls = crate::numerics::least_squares(a, b, rel_tol)?;
    Ok((ls.solution, ls.rank, ls.residual))
}

/// Numerical health record of one recovered level.
#[derive(Debug, Clone)]
pub struct SliceDiagnostics {
    pub level: usize,
    /// Kernel dimension actually used for the excitations.
    pub kernel_dim: usize,
    /// Kernel dimension the singular-value threshold suggested.
    pub kernel_dim_by_tol: usize,
    /// Kernel dimension required by the slice counting identity.
    pub expected_dim: usize,
    /// Set when the threshold and the counting identity disagreed; the
    /// counting dimension wins and the slice is marked degraded.
    pub degraded: bool,
    /// Singular values straddling the kernel threshold when their ratio is
    /// below 10.
    pub gap_warning: Option<(f64, f64)>,
    /// Sine of the angle by which the previous kernel leaves the current.
    pub containment_defect: f64,
    /// Number of new excitations used at this level.
    pub excitations: usize,
    pub flux_rows: usize,
    pub flux_cols: usize,
    pub flux_rank: usize,
    /// Set when the flux system was rank deficient.
    pub rank_deficient: bool,
    /// Euclidean residual of the least squares solve.
    pub lstsq_residual: f64,
    /// Largest relative residual over all propagated excitations.
    pub max_march_residual: f64,
    /// Propagated values replaced after coming out non-finite.
    pub sanitized_values: usize,
    /// Estimates at or below zero (kept, but physically impossible).
    pub nonpositive_edges: usize,
}

/// Estimates for the edges of a single level.
#[derive(Debug, Clone)]
pub struct SliceRecovery {
    pub level: usize,
    pub edges: Vec<EdgeId>,
    pub estimates: Vec<f64>,
    pub diagnostics: SliceDiagnostics,
}

/// Recovers the conductivities of level `t`, given everything below it.
///
/// Returns the slice estimates and the kernel basis of this level, which
/// the caller feeds back in as `prev` when moving up.
pub fn recover_slice(
    lat: &Lattice,
    dtn: &DtnMatrix,
    known: &PartialConductivity,
    t: usize,
    prev: Option<&KernelBasis>,
    opts: &ReconstructOptions,
) -> Result<(SliceRecovery, KernelBasis)> {
    let far = far_response(lat, dtn, t)?;
    let mut kernel = kernel_basis(&far, opts.rank_tol)?;
    let expected = expected_kernel_dim(lat, t)?;
    let degraded = kernel.dim_by_tol != expected;
    if degraded {
        kernel = kernel.with_dim(expected);
    }
    let (new_basis, containment_defect) = match prev {
        Some(p) => quotient_basis_lenient(&kernel, p)?,
        None => (kernel.basis.clone(), 0.0),
    };
    // Fall back to the full kernel if no new directions appeared; the old
    // ones then still constrain the system.
    let basis = if new_basis.ncols() > 0 {
        new_basis
    } else {
        kernel.basis.clone()
    };
    let mut excitations = Vec::with_capacity(basis.ncols());
    for j in 0..basis.ncols() {
        let mut phi = DVector::zeros(lat.num_boundary());
        for (r, &b) in kernel.cols.iter().enumerate() {
            phi[lat.boundary_position(b).unwrap()] = basis[(r, j)];
        }
        let phi = BoundaryVector::new(lat, BoundaryRole::Potential, phi)?;
        let psi = dtn.apply(lat, &phi)?;
        excitations.push(propagate_cauchy(lat, known, &phi, &psi, t)?);
    }
    let system = build_flux_system(lat, known, t, &excitations)?;
    let (solution, rank, lstsq_residual) =
        solve_least_squares(&system.matrix, &system.rhs, opts.rank_tol)?;
    let estimates: Vec<f64> = solution.iter().copied().collect();
    let nonpositive = estimates.iter().filter(|&&g| g <= 0.0).count();
    let diagnostics = SliceDiagnostics {
        level: t,
        kernel_dim: kernel.dim(),
        kernel_dim_by_tol: kernel.dim_by_tol,
        expected_dim: expected,
        degraded: degraded || containment_defect > opts.containment_tol,
        gap_warning: kernel.gap_warning,
        containment_defect,
        excitations: excitations.len(),
        flux_rows: system.matrix.nrows(),
        flux_cols: system.matrix.ncols(),
        flux_rank: rank,
        rank_deficient: rank < system.edges.len(),
        lstsq_residual,
        max_march_residual: excitations
            .iter()
            .map(|e| e.march_residual)
            .fold(0.0, f64::max),
        sanitized_values: excitations.iter().map(|e| e.sanitized).sum(),
        nonpositive_edges: nonpositive,
    };
    Ok((
        SliceRecovery {
            level: t,
            edges: system.edges,
            estimates,
            diagnostics,
        },
        kernel,
    ))
}

/// Result of running the pipeline from one corner, already mapped back to
/// the parent frame.
#[derive(Debug, Clone)]
pub struct CornerReconstruction {
    pub corner: Corner,
    /// Highest level recovered, counted from this corner.
    pub max_level: usize,
    /// Estimates per parent edge id; `None` outside the covered region.
    pub estimates: Vec<Option<f64>>,
    pub slices: Vec<SliceDiagnostics>,
}

/// Runs the origin pipeline on the response matrix conjugated by the
/// corner reflection, then maps the estimates back through the edge
/// permutation.
pub fn reconstruct_from_corner(
    lat: &Lattice,
    dtn: &DtnMatrix,
    corner: &Corner,
    opts: &ReconstructOptions,
    max_level: usize,
) -> Result<CornerReconstruction> {
    let map = lat.corner_map(corner)?;
    let local = dtn.permuted(lat, &map);
    let mut known = PartialConductivity::empty(lat);
    let mut prev: Option<KernelBasis> = None;
    let mut slices = Vec::new();
    for t in (lat.dim() - 1)..=max_level {
        let (rec, kernel) = recover_slice(lat, &local, &known, t, prev.as_ref(), opts)?;
        for (i, &e) in rec.edges.iter().enumerate() {
            known.set(e, rec.estimates[i]);
        }
        slices.push(rec.diagnostics);
        prev = Some(kernel);
    }
    let mut estimates = vec![None; lat.num_edges()];
    for e in 0..lat.num_edges() {
        if let Some(v) = known.at(e) {
            estimates[map.edge_perm[e]] = Some(v);
        }
    }
    Ok(CornerReconstruction {
        corner: corner.clone(),
        max_level,
        estimates,
        slices,
    })
}

/// Merged reconstruction over one or more corners.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    /// Estimate per edge; `None` only when the requested corners cannot
    /// reach the edge.
    pub estimates: Vec<Option<f64>>,
    /// Corner whose estimate was kept for each edge.
    pub sources: Vec<Option<Corner>>,
    /// The per-corner runs the merge drew from.
    pub corner_runs: Vec<CornerReconstruction>,
    /// Highest level recovered from each corner.
    pub max_level: usize,
    /// Set when the level had to be raised beyond the default to cover
    /// every edge.
    pub auto_extended: bool,
}

impl Reconstruction {
    pub fn covered(&self) -> usize {
        self.estimates.iter().filter(|e| e.is_some()).count()
    }

    pub fn is_complete(&self) -> bool {
        self.estimates.iter().all(|e| e.is_some())
    }

    /// Estimates as a dense vector; errors when coverage is incomplete.
    pub fn dense_estimates(&self) -> Result<Vec<f64>> {
        self.estimates
            .iter()
            .map(|e| {
                e.ok_or_else(|| {
                    Error::InconsistentData("reconstruction does not cover every edge".into())
                })
            })
            .collect()
    }
}

fn merge(
    lat: &Lattice,
    runs: &[CornerReconstruction],
) -> (Vec<Option<f64>>, Vec<Option<Corner>>) {
    let mut estimates = vec![None; lat.num_edges()];
    let mut sources: Vec<Option<Corner>> = vec![None; lat.num_edges()];
    for e in 0..lat.num_edges() {
        let mid = lat.edge_midpoint(e);
        let mut best: Option<f64> = None;
        for run in runs {
            let Some(v) = run.estimates[e] else { continue };
            let dist = run.corner.l1_distance(lat.size(), &mid);
            // Strict improvement keeps the lexicographically first corner
            // on ties, since runs are in corner order.
            if best.is_none_or(|b| dist < b) {
                best = Some(dist);
                estimates[e] = Some(v);
                sources[e] = Some(run.corner.clone());
            }
        }
    }
    (estimates, sources)
}

/// Reconstructs the conductivity from the boundary response matrix.
///
/// With [`CornerChoice::All`] every edge is assigned the estimate from its
/// nearest corner; should the default depth ever leave an edge uncovered,
/// the depth is raised until it is.  With [`CornerChoice::Origin`] the
/// result covers only the levels reachable from the origin.
pub fn reconstruct(
    lat: &Lattice,
    dtn: &DtnMatrix,
    opts: &ReconstructOptions,
) -> Result<Reconstruction> {
    let top = lat.dim() * lat.size() - 1;
    let corners = match opts.corners {
        CornerChoice::All => Corner::all(lat.dim()),
        CornerChoice::Origin => vec![Corner::origin(lat.dim())],
    };
    let mut level = match opts.max_level {
        Some(l) => {
            if l < lat.dim() - 1 || l > top {
                return Err(Error::InvalidParameter(format!(
                    "maximum level {l} outside the valid range {}..={top}",
                    lat.dim() - 1
                )));
            }
            l
        }
        None => match opts.corners {
            CornerChoice::All => default_max_level(lat),
            CornerChoice::Origin => top,
        },
    };
    let may_extend = opts.max_level.is_none() && opts.corners == CornerChoice::All;
    let mut auto_extended = false;
    loop {
        let runs: Result<Vec<CornerReconstruction>> = corners
            .par_iter()
            .map(|c| reconstruct_from_corner(lat, dtn, c, opts, level))
            .collect();
        let runs = runs?;
        let (estimates, sources) = merge(lat, &runs);
        let complete = estimates.iter().all(|e| e.is_some());
        if complete || !may_extend || level >= top {
            if !complete && may_extend {
                return Err(Error::InconsistentData(
                    "edges remained uncovered at the maximum level".into(),
                ));
            }
            return Ok(Reconstruction {
                estimates,
                sources,
                corner_runs: runs,
                max_level: level,
                auto_extended,
            });
        }
        level += 1;
        auto_extended = true;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{assemble_dtn, ConductivityField};

    fn setup(dim: usize, size: usize, seed: u64) -> (Lattice, ConductivityField, DtnMatrix) {
        let lat = Lattice::build(dim, size).unwrap();
        let g = ConductivityField::random_uniform(&lat, 0.5, 2.0, seed).unwrap();
        let dtn = assemble_dtn(&lat, &g).unwrap();
        (lat, g, dtn)
    }

    #[test]
    fn base_level_matches_the_port_formula() {
        let (lat, g, dtn) = setup(3, 2, 0);
        let opts = ReconstructOptions::default();
        let known = PartialConductivity::empty(&lat);
        let t = lat.dim() - 1;
        let (rec, kernel) = recover_slice(&lat, &dtn, &known, t, None, &opts).unwrap();
        for (i, &e) in rec.edges.iter().enumerate() {
            let err = (rec.estimates[i] - g.at(e)).abs();
            assert!(err <= 1e-10, "edge {e}: error {err:.3e}");
        }
        // Every excitation reproduces the closed form current / potential
        // ratio at each port of the base level.
        let slices = lat.slice_sets(t).unwrap();
        for j in 0..kernel.dim() {
            let mut phi = DVector::zeros(lat.num_boundary());
            for (r, &b) in kernel.cols.iter().enumerate() {
                phi[lat.boundary_position(b).unwrap()] = kernel.basis[(r, j)];
            }
            let phi = BoundaryVector::new(&lat, BoundaryRole::Potential, phi).unwrap();
            let psi = dtn.apply(&lat, &phi).unwrap();
            for &b in &slices.corner_boundary {
                let val = phi.at(&lat, b);
                if val.abs() < 1e-6 {
                    continue;
                }
                let (_, e) = lat.boundary_neighbor(b);
                let closed = -psi.at(&lat, b) / val;
                assert!((closed - g.at(e)).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn levels_recover_in_sequence() {
        let (lat, g, dtn) = setup(3, 2, 1);
        let opts = ReconstructOptions::default();
        let mut known = PartialConductivity::empty(&lat);
        let mut prev: Option<KernelBasis> = None;
        for t in 2..=5 {
            let (rec, kernel) = recover_slice(&lat, &dtn, &known, t, prev.as_ref(), &opts).unwrap();
            assert!(!rec.diagnostics.degraded, "t={t}");
            assert!(!rec.diagnostics.rank_deficient, "t={t}");
            for (i, &e) in rec.edges.iter().enumerate() {
                known.set(e, rec.estimates[i]);
                let err = (rec.estimates[i] - g.at(e)).abs();
                assert!(err <= 1e-9, "t={t} edge {e}: error {err:.3e}");
            }
            prev = Some(kernel);
        }
        // Origin levels cover everything except the ports at the far
        // corner.
        assert_eq!(known.known(), lat.num_edges() - 3);
    }

    #[test]
    fn frozen_flux_shape() {
        let (lat, g, dtn) = setup(3, 2, 2);
        let opts = ReconstructOptions::default();
        let mut known = PartialConductivity::empty(&lat);
        let (rec2, k2) = recover_slice(&lat, &dtn, &known, 2, None, &opts).unwrap();
        for (i, &e) in rec2.edges.iter().enumerate() {
            known.set(e, rec2.estimates[i]);
        }
        let far = far_response(&lat, &dtn, 3).unwrap();
        let k3 = kernel_basis(&far, opts.rank_tol).unwrap();
        let (quot, _) = quotient_basis_lenient(&k3, &k2).unwrap();
        assert_eq!(quot.ncols(), 4);
        let mut excitations = Vec::new();
        for j in 0..quot.ncols() {
            let mut phi = DVector::zeros(lat.num_boundary());
            for (r, &b) in k3.cols.iter().enumerate() {
                phi[lat.boundary_position(b).unwrap()] = quot[(r, j)];
            }
            let phi = BoundaryVector::new(&lat, BoundaryRole::Potential, phi).unwrap();
            let psi = dtn.apply(&lat, &phi).unwrap();
            excitations.push(propagate_cauchy(&lat, &known, &phi, &psi, 3).unwrap());
        }
        let system = build_flux_system(&lat, &known, 3, &excitations).unwrap();
        assert_eq!(system.rows_per_excitation, 10);
        assert_eq!(system.edges.len(), 9);
        assert_eq!(system.matrix.shape(), (40, 9));
        let (solution, rank, _) =
            solve_least_squares(&system.matrix, &system.rhs, opts.rank_tol).unwrap();
        assert_eq!(rank, 9);
        for (i, &e) in system.edges.iter().enumerate() {
            assert!((solution[i] - g.at(e)).abs() <= 1e-9);
        }
    }

    #[test]
    fn propagation_matches_the_direct_solution() {
        let (lat, g, dtn) = setup(3, 2, 3);
        let mut known = PartialConductivity::empty(&lat);
        for e in 0..lat.num_edges() {
            known.set(e, g.at(e));
        }
        for t in [3usize, 4, 5] {
            let far = far_response(&lat, &dtn, t).unwrap();
            let kernel = kernel_basis(&far, 1e-10).unwrap();
            for j in 0..kernel.dim() {
                let mut phi = DVector::zeros(lat.num_boundary());
                for (r, &b) in kernel.cols.iter().enumerate() {
                    phi[lat.boundary_position(b).unwrap()] = kernel.basis[(r, j)];
                }
                let phi = BoundaryVector::new(&lat, BoundaryRole::Potential, phi).unwrap();
                let psi = dtn.apply(&lat, &phi).unwrap();
                let exc = propagate_cauchy(&lat, &known, &phi, &psi, t).unwrap();
                assert!(exc.march_residual <= 1e-10, "t={t}: {:.3e}", exc.march_residual);
                let direct = crate::forward::solve_dirichlet(&lat, &g, &phi).unwrap();
                let covered = &lat.slice_sets(t).unwrap().interior_cum;
                for &p in covered {
                    assert!(
                        (exc.potential[p] - direct.at(p)).abs() <= 1e-10,
                        "t={t} node {p}"
                    );
                }
            }
        }
    }

    #[test]
    fn full_reconstruction_on_small_lattices() {
        for (dim, size, seed) in [(2, 2, 4), (2, 3, 5), (3, 2, 6)] {
            let (lat, g, dtn) = setup(dim, size, seed);
            let recon = reconstruct(&lat, &dtn, &ReconstructOptions::default()).unwrap();
            assert!(recon.is_complete(), "d={dim} n={size}");
            assert!(!recon.auto_extended);
            let estimates = recon.dense_estimates().unwrap();
            for e in 0..lat.num_edges() {
                let err = (estimates[e] - g.at(e)).abs();
                assert!(err <= 1e-9, "d={dim} n={size} edge {e}: error {err:.3e}");
            }
            for run in &recon.corner_runs {
                for s in &run.slices {
                    assert!(!s.rank_deficient);
                    assert!(s.nonpositive_edges == 0);
                }
            }
        }
    }

    #[test]
    fn single_cell_box_needs_every_corner() {
        let (lat, g, dtn) = setup(2, 1, 7);
        assert_eq!(default_max_level(&lat), 1);
        let recon = reconstruct(&lat, &dtn, &ReconstructOptions::default()).unwrap();
        assert!(recon.is_complete());
        let estimates = recon.dense_estimates().unwrap();
        for e in 0..lat.num_edges() {
            assert!((estimates[e] - g.at(e)).abs() <= 1e-10);
        }
    }

    #[test]
    fn origin_choice_leaves_the_far_ports_uncovered() {
        let (lat, g, dtn) = setup(2, 2, 8);
        let opts = ReconstructOptions {
            corners: CornerChoice::Origin,
            ..Default::default()
        };
        let recon = reconstruct(&lat, &dtn, &opts).unwrap();
        assert!(!recon.is_complete());
        let top_edges = edges_of_level(&lat, lat.dim() * lat.size());
        assert_eq!(recon.covered(), lat.num_edges() - top_edges.len());
        for e in 0..lat.num_edges() {
            if let Some(v) = recon.estimates[e] {
                assert!((v - g.at(e)).abs() <= 1e-9);
                assert!(recon.sources[e].as_ref().unwrap().is_origin());
            }
        }
    }

    #[test]
    fn merge_prefers_the_nearest_corner() {
        let (lat, _, dtn) = setup(2, 3, 9);
        let recon = reconstruct(&lat, &dtn, &ReconstructOptions::default()).unwrap();
        for e in 0..lat.num_edges() {
            let mid = lat.edge_midpoint(e);
            let chosen = recon.sources[e].as_ref().unwrap();
            let chosen_dist = chosen.l1_distance(lat.size(), &mid);
            for run in &recon.corner_runs {
                if run.estimates[e].is_some() {
                    let dist = run.corner.l1_distance(lat.size(), &mid);
                    assert!(chosen_dist <= dist + 1e-12);
                }
            }
        }
    }

    #[test]
    fn max_level_is_validated() {
        let (lat, _, dtn) = setup(2, 2, 10);
        let opts = ReconstructOptions {
            max_level: Some(99),
            ..Default::default()
        };
        assert!(matches!(
            reconstruct(&lat, &dtn, &opts),
            Err(Error::InvalidParameter(_))
        ));
    }
}
