//! Level operators: boundary response blocks, interface operators on
//! subgraphs, and kernel machinery.
//!
//! Fix a diagonal level `t`.  The corner boundary accumulated up to `t`
//! carries the boundary data that determines the conductivities in the
//! corner region; the complementary boundary nodes observe the far-field
//! response.  Three operators organize this split:
//!
//! * the far response: the block of the boundary response matrix from
//!   cumulative corner-boundary potentials to the currents at all other
//!   boundary nodes;
//! * the interface trace: the map from those same potentials to the interior
//!   potential on the next diagonal slice (requires the conductivity);
//! * the upper response: the response block of the subgraph above the
//!   interface, mapping interface potentials to far-field currents.
//!
//! The far response factors exactly through the interface: far response =
//! upper response composed with interface trace.  Its kernel, computed here
//! by SVD with a relative rank threshold, consists of the boundary
//! potentials whose induced interior potential is confined to the corner
//! region; these are the excitations the reconstruction feeds on.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::forward::{BoundaryRole, BoundaryVector, ConductivityField, DirichletSolver, DtnMatrix};
use crate::lattice::{EdgeId, Lattice, NodeId};

/// A dense block of a larger operator, together with the node ids indexing
/// its rows and columns (in canonical order) and the level it belongs to.
#[derive(Debug, Clone)]
pub struct SubmatrixOperator {
    pub level: usize,
    pub rows: Vec<NodeId>,
    pub cols: Vec<NodeId>,
    pub matrix: DMatrix<f64>,
}

/// Checks that a response matrix belongs to the given lattice.
fn check_dtn(lat: &Lattice, dtn: &DtnMatrix) -> Result<()> {
    if dtn.dim() != lat.dim() || dtn.size() != lat.size() {
        return Err(Error::LatticeMismatch(format!(
            "response matrix for dimension {} size {}, lattice has dimension {} size {}",
            dtn.dim(),
            dtn.size(),
            lat.dim(),
            lat.size()
        )));
    }
    Ok(())
}

/// The response block from cumulative corner-boundary potentials at level
/// `t` to the currents at the remaining boundary nodes.
///
/// Rows and columns are both subsets of the boundary in canonical order.
/// Errors when either set is empty, which happens exactly outside
/// `d - 1 <= t <= d n - 1`.
pub fn far_response(lat: &Lattice, dtn: &DtnMatrix, t: usize) -> Result<SubmatrixOperator> {
    check_dtn(lat, dtn)?;
    let slices = lat.slice_sets(t)?;
    let cols = slices.corner_boundary_cum.clone();
    let in_cols: std::collections::HashSet<NodeId> = cols.iter().copied().collect();
    let rows: Vec<NodeId> = lat
        .boundary_nodes()
        .filter(|v| !in_cols.contains(v))
        .collect();
    if cols.is_empty() || rows.is_empty() {
        return Err(Error::EmptyOperator(format!(
            "far response at level {t} has {} rows and {} columns; \
             valid levels are {} through {}",
            rows.len(),
            cols.len(),
            lat.dim() - 1,
            lat.dim() * lat.size() - 1
        )));
    }
    let matrix = DMatrix::from_fn(rows.len(), cols.len(), |i, j| {
        let r = lat.boundary_position(rows[i]).unwrap();
        let c = lat.boundary_position(cols[j]).unwrap();
        dtn.matrix()[(r, c)]
    });
    Ok(SubmatrixOperator {
        level: t,
        rows,
        cols,
        matrix,
    })
}

/// The map from cumulative corner-boundary potentials at level `t` to the
/// solved interior potential on the slice of level `t + 1`.
pub fn interface_trace(lat: &Lattice, g: &ConductivityField, t: usize) -> Result<SubmatrixOperator> {
    let cols = lat.slice_sets(t)?.corner_boundary_cum.clone();
    let rows = lat.slice_sets(t + 1)?.interior.clone();
    if cols.is_empty() || rows.is_empty() {
        return Err(Error::EmptyOperator(format!(
            "interface trace at level {t} has {} rows and {} columns",
            rows.len(),
            cols.len()
        )));
    }
    let solver = DirichletSolver::new(lat, g)?;
    let mut matrix = DMatrix::zeros(rows.len(), cols.len());
    for (j, &b) in cols.iter().enumerate() {
        let phi = BoundaryVector::unit(lat, b)?;
        let u = solver.solve(lat, &phi)?;
        for (i, &p) in rows.iter().enumerate() {
            matrix[(i, j)] = u.at(p);
        }
    }
    Ok(SubmatrixOperator {
        level: t,
        rows,
        cols,
        matrix,
    })
}

/// Which induced subgraph a [`Subgraph`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubgraphKind {
    /// Everything strictly above the interface slice of level `t`.
    Upper,
    /// The corner region up to level `t`, with its interface as boundary.
    Corner,
    /// The corner region with one interface node and its edges removed.
    Reduced,
}

/// An induced subgraph with a designated interior/boundary split.
///
/// Edges are those of the parent lattice with both endpoints in the node
/// set.  Within a subgraph two boundary nodes may be adjacent; such edges
/// carry current directly between boundary nodes.  Boundary nodes without
/// any incident edge are isolated: their current is identically zero.
#[derive(Debug, Clone)]
pub struct Subgraph {
    pub kind: SubgraphKind,
    pub level: usize,
    /// Interior nodes, sorted by id.
    pub interior: Vec<NodeId>,
    /// Boundary nodes, sorted by id.
    pub boundary: Vec<NodeId>,
    /// Edges with both endpoints in the subgraph, in canonical edge order.
    pub edges: Vec<EdgeId>,
}

fn induced_edges(lat: &Lattice, member: &[bool]) -> Vec<EdgeId> {
    (0..lat.num_edges())
        .filter(|&e| {
            let (a, b) = lat.edge(e);
            member[a] && member[b]
        })
        .collect()
}

/// The subgraph above the interface of level `t`: interior nodes of level
/// `>= t + 2`, with the slice of level `t + 1` and the non-corner boundary
/// as its boundary.
pub fn upper_subgraph(lat: &Lattice, t: usize) -> Result<Subgraph> {
    let slices = lat.slice_sets(t)?;
    let next = lat.slice_sets(t + 1)?;
    let mut member = vec![false; lat.num_nodes()];
    let mut interior = Vec::new();
    let mut boundary = Vec::new();
    let cum_next: std::collections::HashSet<NodeId> =
        next.interior_cum.iter().copied().collect();
    for v in lat.interior_nodes() {
        if !cum_next.contains(&v) {
            member[v] = true;
            interior.push(v);
        } else if next.interior.contains(&v) {
            member[v] = true;
            boundary.push(v);
        }
    }
    let corner_cum: std::collections::HashSet<NodeId> =
        slices.corner_boundary_cum.iter().copied().collect();
    for v in lat.boundary_nodes() {
        if !corner_cum.contains(&v) {
            member[v] = true;
            boundary.push(v);
        }
    }
    boundary.sort_unstable();
    let edges = induced_edges(lat, &member);
    Ok(Subgraph {
        kind: SubgraphKind::Upper,
        level: t,
        interior,
        boundary,
        edges,
    })
}

/// The corner subgraph at level `t`: interior nodes of level `<= t - 1`,
/// bounded by the cumulative corner boundary of level `t - 1` and the slice
/// of level `t`.
pub fn corner_subgraph(lat: &Lattice, t: usize) -> Result<Subgraph> {
    if t == 0 {
        return Err(Error::InvalidParameter(
            "corner subgraph requires a level of at least 1".into(),
        ));
    }
    let prev = lat.slice_sets(t - 1)?;
    let here = lat.slice_sets(t)?;
    let mut member = vec![false; lat.num_nodes()];
    let interior = prev.interior_cum.clone();
    let mut boundary = prev.corner_boundary_cum.clone();
    boundary.extend(&here.interior);
    boundary.sort_unstable();
    for &v in interior.iter().chain(&boundary) {
        member[v] = true;
    }
    let edges = induced_edges(lat, &member);
    Ok(Subgraph {
        kind: SubgraphKind::Corner,
        level: t,
        interior,
        boundary,
        edges,
    })
}

/// The corner subgraph at level `t` with interface node `p` removed: the
/// neighbors of `p` below the interface are re-designated as boundary and
/// all edges at `p` are dropped.  Boundary nodes isolated by the removal
/// keep a zero current row.
pub fn reduced_corner_subgraph(lat: &Lattice, t: usize, p: NodeId) -> Result<Subgraph> {
    let here = lat.slice_sets(t)?;
    if !here.interior.contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "node {p} is not an interior node of level {t}"
        )));
    }
    let base = corner_subgraph(lat, t)?;
    let lower: Vec<NodeId> = lat
        .neighbors(p)
        .iter()
        .map(|&(q, _)| q)
        .filter(|&q| lat.level_of(q) + 1 == t)
        .collect();
    let interior: Vec<NodeId> = base
        .interior
        .iter()
        .copied()
        .filter(|v| !lower.contains(v))
        .collect();
    let mut boundary: Vec<NodeId> = base
        .boundary
        .iter()
        .copied()
        .filter(|&v| v != p)
        .collect();
    boundary.extend(lower.iter().copied().filter(|&q| lat.is_interior(q)));
    boundary.sort_unstable();
    boundary.dedup();
    let edges: Vec<EdgeId> = base
        .edges
        .iter()
        .copied()
        .filter(|&e| {
            let (a, b) = lat.edge(e);
            a != p && b != p
        })
        .collect();
    Ok(Subgraph {
        kind: SubgraphKind::Reduced,
        level: t,
        interior,
        boundary,
        edges,
    })
}

/// Dense response matrix of a subgraph over its boundary ordering, computed
/// as the Schur complement of the interior block of the subgraph Laplacian.
/// Boundary-to-boundary edges contribute directly; isolated boundary nodes
/// produce zero rows and columns.
pub fn subgraph_dtn(lat: &Lattice, g: &ConductivityField, sub: &Subgraph) -> Result<DMatrix<f64>> {
    let ni = sub.interior.len();
    let nb = sub.boundary.len();
    let mut pos = vec![usize::MAX; lat.num_nodes()];
    for (i, &v) in sub.interior.iter().enumerate() {
        pos[v] = i;
    }
    for (i, &v) in sub.boundary.iter().enumerate() {
        pos[v] = ni + i;
    }
    let mut lap = DMatrix::<f64>::zeros(ni + nb, ni + nb);
    for &e in &sub.edges {
        let (a, b) = lat.edge(e);
        let (ia, ib) = (pos[a], pos[b]);
        let w = g.at(e);
        lap[(ia, ib)] += w;
        lap[(ib, ia)] += w;
        lap[(ia, ia)] -= w;
        lap[(ib, ib)] -= w;
    }
    let bb = lap.view((ni, ni), (nb, nb)).clone_owned();
    if ni == 0 {
        return Ok(bb);
    }
    let neg_ii = -lap.view((0, 0), (ni, ni)).clone_owned();
    let ib = lap.view((0, ni), (ni, nb)).clone_owned();
    let bi = lap.view((ni, 0), (nb, ni)).clone_owned();
    let chol = neg_ii.cholesky().ok_or_else(|| {
        Error::NumericalFailure("subgraph interior block is not positive definite".into())
    })?;
    let x = chol.solve(&ib);
    Ok(bb + bi * x)
}

/// The response block of the upper subgraph from interface potentials
/// (slice of level `t + 1`) to the currents at the non-corner boundary.
pub fn upper_response(lat: &Lattice, g: &ConductivityField, t: usize) -> Result<SubmatrixOperator> {
    let sub = upper_subgraph(lat, t)?;
    let dtn = subgraph_dtn(lat, g, &sub)?;
    let next = lat.slice_sets(t + 1)?;
    let cols_set: std::collections::HashSet<NodeId> = next.interior.iter().copied().collect();
    let mut rows = Vec::new();
    let mut cols = Vec::new();
    for (i, &v) in sub.boundary.iter().enumerate() {
        if cols_set.contains(&v) {
            cols.push((i, v));
        } else {
            rows.push((i, v));
        }
    }
    if rows.is_empty() || cols.is_empty() {
        return Err(Error::EmptyOperator(format!(
            "upper response at level {t} has {} rows and {} columns",
            rows.len(),
            cols.len()
        )));
    }
    let matrix = DMatrix::from_fn(rows.len(), cols.len(), |i, j| dtn[(rows[i].0, cols[j].0)]);
    Ok(SubmatrixOperator {
        level: t,
        rows: rows.into_iter().map(|(_, v)| v).collect(),
        cols: cols.into_iter().map(|(_, v)| v).collect(),
        matrix,
    })
}

/// The response block of the corner subgraph from interface potentials
/// (slice of level `t`) to the currents on the cumulative corner boundary
/// of level `t - 1`.
pub fn corner_response(lat: &Lattice, g: &ConductivityField, t: usize) -> Result<SubmatrixOperator> {
    let sub = corner_subgraph(lat, t)?;
    let dtn = subgraph_dtn(lat, g, &sub)?;
    let here = lat.slice_sets(t)?;
    let cols_set: std::collections::HashSet<NodeId> = here.interior.iter().copied().collect();
    let mut rows = Vec::new();
    let mut cols = Vec::new();
    for (i, &v) in sub.boundary.iter().enumerate() {
        if cols_set.contains(&v) {
            cols.push((i, v));
        } else {
            rows.push((i, v));
        }
    }
    if rows.is_empty() || cols.is_empty() {
        return Err(Error::EmptyOperator(format!(
            "corner response at level {t} has {} rows and {} columns",
            rows.len(),
            cols.len()
        )));
    }
    let matrix = DMatrix::from_fn(rows.len(), cols.len(), |i, j| dtn[(rows[i].0, cols[j].0)]);
    Ok(SubmatrixOperator {
        level: t,
        rows: rows.into_iter().map(|(_, v)| v).collect(),
        cols: cols.into_iter().map(|(_, v)| v).collect(),
        matrix,
    })
}

/// Number of kernel dimensions the far response must have at level `t`:
/// the cumulative corner boundary plus the cumulative interior up to `t`,
/// minus the cumulative interior up to `t + 1`.
pub fn expected_kernel_dim(lat: &Lattice, t: usize) -> Result<usize> {
    let here = lat.slice_sets(t)?;
    let next = lat.slice_sets(t + 1)?;
    let dim = here.corner_boundary_cum.len() as isize + here.interior_cum.len() as isize
        - next.interior_cum.len() as isize;
    debug_assert!(dim >= 0);
    Ok(dim.max(0) as usize)
}

/// An orthonormal kernel basis of an operator block with SVD diagnostics.
#[derive(Debug, Clone)]
pub struct KernelBasis {
    pub level: usize,
    /// Node ids indexing the kernel coordinates (the operator's columns).
    pub cols: Vec<NodeId>,
    /// Orthonormal basis vectors as matrix columns, `|cols| x dim`.
    pub basis: DMatrix<f64>,
    /// All singular values in descending order.
    pub singular_values: Vec<f64>,
    /// Kernel dimension selected by the relative threshold.
    pub dim_by_tol: usize,
    /// The relative threshold used.
    pub tol: f64,
    /// When the singular-value gap at the threshold is smaller than a
    /// factor of 10: (largest value below, smallest value above).
    pub gap_warning: Option<(f64, f64)>,
    full_v: FullV,
}

impl KernelBasis {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Rebuilds the basis from the same SVD data with a forced dimension:
    /// the `dim` directions with smallest singular values.  Used when the
    /// thresholded dimension disagrees with the structural dimension count.
    pub fn with_dim(&self, dim: usize) -> KernelBasis {
        let mut kb = self.clone();
        kb.basis = select_smallest(&self.full_v, &self.singular_values, dim);
        kb
    }
}

// The full right singular basis is kept privately so the dimension can be
// revised without recomputing the SVD.
#[derive(Debug, Clone)]
struct FullV(DMatrix<f64>);

impl std::ops::Deref for FullV {
    type Target = DMatrix<f64>;
    fn deref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

fn select_smallest(v: &DMatrix<f64>, sigma_desc: &[f64], dim: usize) -> DMatrix<f64> {
    // Singular values are sorted descending and `v`'s columns follow the
    // same order, so the kernel candidates sit at the tail.
    let k = v.ncols();
    let dim = dim.min(k);
    let mut basis = DMatrix::zeros(v.nrows(), dim);
    for j in 0..dim {
        basis.set_column(j, &v.column(k - dim + j));
    }
    debug_assert_eq!(sigma_desc.len(), k);
    basis
}

/// Computes an orthonormal kernel basis of `op.matrix` by SVD.  A singular
/// value is assigned to the kernel when it is at most `tol` times the
/// largest singular value.  For wide matrices the missing singular values
/// are zeros, so the trailing right singular vectors always span the
/// kernel.
pub fn kernel_basis(op: &SubmatrixOperator, tol: f64) -> Result<KernelBasis> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "kernel threshold must lie in (0, 1), got {tol}"
        )));
    }
    let k = op.matrix.ncols();
    let decomp = crate::numerics::svd(&op.matrix, false, true)?;
    let mut sigma = decomp.sigma;
    sigma.resize(k, 0.0);
    let v = decomp.v.expect("right singular vectors requested");
    let sigma_max = sigma.first().copied().unwrap_or(0.0);
    let threshold = tol * sigma_max;
    let dim_by_tol = if sigma_max == 0.0 {
        k
    } else {
        sigma.iter().filter(|&&s| s <= threshold).count()
    };
    let gap_warning = if dim_by_tol > 0 && dim_by_tol < k {
        let below = sigma[k - dim_by_tol];
        let above = sigma[k - dim_by_tol - 1];
        if below > 0.0 && above / below < 10.0 {
            Some((below, above))
        } else {
            None
        }
    } else {
        None
    };
    let basis = select_smallest(&v, &sigma, dim_by_tol);
    Ok(KernelBasis {
        level: op.level,
        cols: op.cols.clone(),
        basis,
        singular_values: sigma,
        dim_by_tol,
        tol,
        gap_warning,
        full_v: FullV(v),
    })
}

/// Smallest and largest singular value of a matrix.
pub fn singular_range(m: &DMatrix<f64>) -> Result<(f64, f64)> {
    let sigma = crate::numerics::singular_values(m)?;
    let max = sigma.first().copied().unwrap_or(0.0);
    let min = sigma.last().copied().unwrap_or(0.0);
    Ok((min, max))
}

/// Sine of the largest principal angle by which the span of `sub` sticks
/// out of the span of `sup`.  Both inputs must have orthonormal columns.
pub fn containment_defect(sub: &DMatrix<f64>, sup: &DMatrix<f64>) -> f64 {
    if sub.ncols() == 0 {
        return 0.0;
    }
    if sup.ncols() == 0 {
        return 1.0;
    }
    let projected = sub - sup * (sup.transpose() * sub);
    crate::numerics::spectral_norm(&projected)
        .map(|s| s.min(1.0))
        .unwrap_or(1.0)
}

/// Largest principal angle (radians) between two column spans with
/// orthonormal columns, measured in both directions.
pub fn principal_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    containment_defect(a, b)
        .max(containment_defect(b, a))
        .asin()
}

/// Zero-extends the columns of `prev` (indexed by `prev_ids`) into the
/// coordinate system of `target_ids`.  Every id of `prev_ids` must occur in
/// `target_ids`.
pub fn embed_columns(
    prev: &DMatrix<f64>,
    prev_ids: &[NodeId],
    target_ids: &[NodeId],
) -> Result<DMatrix<f64>> {
    let lookup: std::collections::HashMap<NodeId, usize> = target_ids
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i))
        .collect();
    let mut out = DMatrix::zeros(target_ids.len(), prev.ncols());
    for (r, &id) in prev_ids.iter().enumerate() {
        let target = *lookup.get(&id).ok_or_else(|| {
            Error::LatticeMismatch(format!(
                "node {id} of the previous kernel is missing from the current one"
            ))
        })?;
        for c in 0..prev.ncols() {
            out[(target, c)] = prev[(r, c)];
        }
    }
    Ok(out)
}

/// Orthonormal vectors extending the previous level's kernel (zero-extended
/// into the current coordinates) to a basis of the current kernel.
///
/// Errors when the extended previous kernel fails to be contained in the
/// current kernel to within `tol` (sine of the largest principal angle),
/// or when the dimensions shrink.
pub fn quotient_basis(
    curr: &KernelBasis,
    prev: &KernelBasis,
    tol: f64,
) -> Result<DMatrix<f64>> {
    let (m, defect) = quotient_basis_lenient(curr, prev)?;
    if defect > tol {
        return Err(Error::InconsistentData(format!(
            "previous kernel is not contained in the current one: defect {defect:.3e} > {tol:.3e}"
        )));
    }
    Ok(m)
}

/// Like [`quotient_basis`] but always returns a result, reporting the
/// containment defect instead of failing on it.
pub fn quotient_basis_lenient(
    curr: &KernelBasis,
    prev: &KernelBasis,
) -> Result<(DMatrix<f64>, f64)> {
    if prev.dim() > curr.dim() {
        return Err(Error::InconsistentData(format!(
            "kernel dimension shrank from {} to {}",
            prev.dim(),
            curr.dim()
        )));
    }
    let embedded = embed_columns(&prev.basis, &prev.cols, &curr.cols)?;
    let defect = containment_defect(&embedded, &curr.basis);
    let new_dims = curr.dim() - prev.dim();
    if new_dims == 0 {
        return Ok((DMatrix::zeros(curr.cols.len(), 0), defect));
    }
    // Project the current kernel away from the embedded previous kernel and
    // keep the dominant directions of the projection.
    let projected = &curr.basis - &embedded * (embedded.transpose() * &curr.basis);
    let decomp = crate::numerics::svd(&projected, true, false)?;
    let u = decomp.u.expect("left singular vectors requested");
    let mut out = DMatrix::zeros(curr.cols.len(), new_dims);
    for j in 0..new_dims {
        out.set_column(j, &u.column(j));
    }
    Ok((out, defect))
}

/// Harmonic potentials confined to the corner region: one Dirichlet solve
/// per kernel vector, restricted to the nodes where the potential may be
/// nonzero (cumulative interior and corner boundary of the kernel's level).
#[derive(Debug, Clone)]
pub struct LocalizedPotentials {
    pub level: usize,
    /// Cumulative interior nodes followed by cumulative corner-boundary
    /// nodes, each sorted by id.
    pub nodes: Vec<NodeId>,
    /// One column per kernel vector, rows aligned with `nodes`.
    pub fields: DMatrix<f64>,
    /// Largest potential magnitude observed outside `nodes`, relative to
    /// the largest magnitude overall.
    pub max_leakage: f64,
    /// Set when `max_leakage` exceeds the documented bound of `1e-8`.
    pub leakage_flag: bool,
}

/// Bound on acceptable support leakage for localized potentials.
pub const LEAKAGE_BOUND: f64 = 1e-8;

/// Solves the Dirichlet problem for every kernel vector of the far response
/// and restricts the solutions to the corner region.
pub fn localized_potentials(
    lat: &Lattice,
    g: &ConductivityField,
    kernel: &KernelBasis,
) -> Result<LocalizedPotentials> {
    let t = kernel.level;
    let slices = lat.slice_sets(t)?;
    let mut nodes = slices.interior_cum.clone();
    nodes.extend(&slices.corner_boundary_cum);
    let inside: std::collections::HashSet<NodeId> = nodes.iter().copied().collect();
    let solver = DirichletSolver::new(lat, g)?;
    let mut fields = DMatrix::zeros(nodes.len(), kernel.dim());
    let mut leakage = 0.0f64;
    let mut scale = 0.0f64;
    for j in 0..kernel.dim() {
        let mut phi = DVector::zeros(lat.num_boundary());
        for (r, &b) in kernel.cols.iter().enumerate() {
            phi[lat.boundary_position(b).unwrap()] = kernel.basis[(r, j)];
        }
        let phi = BoundaryVector::new(lat, BoundaryRole::Potential, phi)?;
        let u = solver.solve(lat, &phi)?;
        for v in 0..lat.num_nodes() {
            let a = u.at(v).abs();
            scale = scale.max(a);
            if !inside.contains(&v) {
                leakage = leakage.max(a);
            }
        }
        for (i, &v) in nodes.iter().enumerate() {
            fields[(i, j)] = u.at(v);
        }
    }
    let max_leakage = if scale > 0.0 { leakage / scale } else { 0.0 };
    Ok(LocalizedPotentials {
        level: t,
        nodes,
        fields,
        max_leakage,
        leakage_flag: max_leakage > LEAKAGE_BOUND,
    })
}

// Convenience re-export used by tests and the verification module.
pub use crate::forward::assemble_dtn;
