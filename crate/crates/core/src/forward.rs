//! Forward model: weighted graph Laplacian, Dirichlet solves and the
//! boundary response (Dirichlet-to-Neumann) matrix.
//!
//! A conductivity field assigns a positive weight to every edge.  The
//! associated Laplacian acts on node potentials by summing weighted
//! differences toward each neighbor.  Prescribing potentials on the boundary
//! and requiring the Laplacian to vanish at interior nodes yields a unique
//! interior potential; the current through the single edge of each boundary
//! node is the Neumann datum.  Composing solution and current extraction for
//! unit boundary excitations produces the dense boundary response matrix.
//!
//! Sign conventions: the current at a boundary node `p` with interior
//! neighbor `q` is `gamma_pq * (u_q - u_p)`, i.e. positive when current
//! flows out of the lattice through `p`.  Under this convention the
//! response matrix is symmetric with zero row sums, nonnegative
//! off-diagonal entries and nonpositive diagonal entries.

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix};
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::{CornerMap, EdgeId, Lattice, NodeId};

/// Whether a boundary vector carries prescribed potentials or measured
/// currents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryRole {
    Potential,
    Current,
}

/// A vector over the boundary nodes in canonical boundary order.
#[derive(Debug, Clone)]
pub struct BoundaryVector {
    pub role: BoundaryRole,
    values: DVector<f64>,
}

impl BoundaryVector {
    pub fn new(lat: &Lattice, role: BoundaryRole, values: DVector<f64>) -> Result<Self> {
        if values.len() != lat.num_boundary() {
            return Err(Error::LatticeMismatch(format!(
                "boundary vector has length {}, lattice has {} boundary nodes",
                values.len(),
                lat.num_boundary()
            )));
        }
        Ok(BoundaryVector { role, values })
    }

    /// All-zero vector with a unit entry at the given boundary node.
    pub fn unit(lat: &Lattice, node: NodeId) -> Result<Self> {
        let pos = lat.boundary_position(node).ok_or_else(|| {
            Error::InvalidParameter(format!("node {node} is not a boundary node"))
        })?;
        let mut values = DVector::zeros(lat.num_boundary());
        values[pos] = 1.0;
        Ok(BoundaryVector {
            role: BoundaryRole::Potential,
            values,
        })
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    /// Value at a boundary node id.
    pub fn at(&self, lat: &Lattice, node: NodeId) -> f64 {
        self.values[lat.boundary_position(node).expect("boundary node")]
    }
}

/// Potentials on every node: the boundary block holds the Dirichlet data,
/// the interior block the solved values.
#[derive(Debug, Clone)]
pub struct PotentialField {
    values: DVector<f64>,
}

impl PotentialField {
    pub fn new(lat: &Lattice, values: DVector<f64>) -> Result<Self> {
        if values.len() != lat.num_nodes() {
            return Err(Error::LatticeMismatch(format!(
                "potential field has length {}, lattice has {} nodes",
                values.len(),
                lat.num_nodes()
            )));
        }
        Ok(PotentialField { values })
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn at(&self, node: NodeId) -> f64 {
        self.values[node]
    }
}

/// Positive edge weights in canonical edge order.
#[derive(Debug, Clone)]
pub struct ConductivityField {
    values: Vec<f64>,
}

impl ConductivityField {
    pub fn from_values(lat: &Lattice, values: Vec<f64>) -> Result<Self> {
        if values.len() != lat.num_edges() {
            return Err(Error::LatticeMismatch(format!(
                "conductivity has {} values, lattice has {} edges",
                values.len(),
                lat.num_edges()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "conductivities must be positive and finite, got {bad}"
            )));
        }
        Ok(ConductivityField { values })
    }

    pub fn uniform(lat: &Lattice, value: f64) -> Result<Self> {
        Self::from_values(lat, vec![value; lat.num_edges()])
    }

    /// Independent uniform samples on `[lo, hi)`, one per edge in canonical
    /// order, from a seeded deterministic generator.
    pub fn random_uniform(lat: &Lattice, lo: f64, hi: f64, seed: u64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi) {
            return Err(Error::InvalidParameter(format!(
                "conductivity range must satisfy 0 < lo < hi, got [{lo}, {hi})"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = Uniform::new(lo, hi);
        let values = (0..lat.num_edges()).map(|_| dist.sample(&mut rng)).collect();
        Self::from_values(lat, values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, e: EdgeId) -> f64 {
        self.values[e]
    }

    /// Pullback along a corner reflection: the new value at an edge is the
    /// old value at the reflected edge.
    pub fn reflect(&self, map: &CornerMap) -> Self {
        let values = map.edge_perm.iter().map(|&img| self.values[img]).collect();
        ConductivityField { values }
    }

    /// Multiplies every edge weight by a positive constant.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scale factor must be positive, got {factor}"
            )));
        }
        Ok(ConductivityField {
            values: self.values.iter().map(|v| v * factor).collect(),
        })
    }
}

/// Assembles the full weighted Laplacian over all nodes (interior and
/// boundary) in canonical node order.
pub fn assemble_laplacian(lat: &Lattice, g: &ConductivityField) -> CscMatrix<f64> {
    let n = lat.num_nodes();
    let mut coo = CooMatrix::new(n, n);
    for e in 0..lat.num_edges() {
        let (a, b) = lat.edge(e);
        let w = g.at(e);
        coo.push(a, b, w);
        coo.push(b, a, w);
        coo.push(a, a, -w);
        coo.push(b, b, -w);
    }
    CscMatrix::from(&coo)
}

/// The Laplacian row of an interior node as a dense vector over all nodes:
/// the edge weight toward each neighbor, minus their sum at the node itself.
pub fn kirchhoff_row(lat: &Lattice, g: &ConductivityField, p: NodeId) -> DVector<f64> {
    let mut row = DVector::zeros(lat.num_nodes());
    let mut total = 0.0;
    for &(q, e) in lat.neighbors(p) {
        let w = g.at(e);
        row[q] = w;
        total += w;
    }
    row[p] = -total;
    row
}

/// Factorization of the interior block of the Laplacian, reusable across
/// many Dirichlet solves with different boundary data.
pub struct DirichletSolver {
    /// Negated interior block, symmetric positive definite.
    interior: CscMatrix<f64>,
    chol: CscCholesky<f64>,
    /// Interior neighbor and edge weight of every boundary node, in
    /// canonical boundary order.
    ports: Vec<(NodeId, f64)>,
}

impl DirichletSolver {
    pub fn new(lat: &Lattice, g: &ConductivityField) -> Result<Self> {
        let ni = lat.num_interior();
        let mut coo = CooMatrix::new(ni, ni);
        let mut degree = vec![0.0f64; ni];
        for e in 0..lat.num_edges() {
            let (a, b) = lat.edge(e);
            let w = g.at(e);
            if lat.is_interior(a) && lat.is_interior(b) {
                coo.push(a, b, -w);
                coo.push(b, a, -w);
            }
            if lat.is_interior(a) {
                degree[a] += w;
            }
            if lat.is_interior(b) {
                degree[b] += w;
            }
        }
        for (v, &d) in degree.iter().enumerate() {
            coo.push(v, v, d);
        }
        let interior = CscMatrix::from(&coo);
        let chol = CscCholesky::factor(&interior).map_err(|e| {
            Error::NumericalFailure(format!("interior block factorization failed: {e:?}"))
        })?;
        let ports = lat
            .boundary_nodes()
            .map(|b| {
                let (q, e) = lat.boundary_neighbor(b);
                (q, g.at(e))
            })
            .collect();
        Ok(DirichletSolver {
            interior,
            chol,
            ports,
        })
    }

    /// Solves the interior system for a block of right-hand sides with one
    /// step of iterative refinement.
    fn solve_block(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        let mut x = self.chol.solve(rhs);
        let residual = rhs - &self.interior * &x;
        x += self.chol.solve(&residual);
        x
    }

    /// Solves the Dirichlet problem for one boundary potential.
    pub fn solve(&self, lat: &Lattice, phi: &BoundaryVector) -> Result<PotentialField> {
        if phi.role != BoundaryRole::Potential {
            return Err(Error::InvalidParameter(
                "Dirichlet data must have the potential role".into(),
            ));
        }
        let ni = lat.num_interior();
        let mut rhs = DMatrix::zeros(ni, 1);
        for (pos, &(q, w)) in self.ports.iter().enumerate() {
            rhs[(q, 0)] += w * phi.values()[pos];
        }
        let x = self.solve_block(&rhs);
        let mut values = DVector::zeros(lat.num_nodes());
        values.rows_mut(0, ni).copy_from(&x.column(0));
        for (pos, b) in lat.boundary_nodes().enumerate() {
            values[b] = phi.values()[pos];
        }
        PotentialField::new(lat, values)
    }

    /// Interior solutions for all unit boundary excitations at once:
    /// column `j` holds the interior potential for a unit potential at the
    /// `j`-th boundary node.
    fn unit_solutions(&self, lat: &Lattice) -> DMatrix<f64> {
        let nb = lat.num_boundary();
        let mut rhs = DMatrix::zeros(lat.num_interior(), nb);
        for (pos, &(q, w)) in self.ports.iter().enumerate() {
            rhs[(q, pos)] += w;
        }
        self.solve_block(&rhs)
    }
}

/// Convenience wrapper: factorize and solve a single Dirichlet problem.
pub fn solve_dirichlet(
    lat: &Lattice,
    g: &ConductivityField,
    phi: &BoundaryVector,
) -> Result<PotentialField> {
    DirichletSolver::new(lat, g)?.solve(lat, phi)
}

/// Currents through the boundary edges of a potential field.
pub fn boundary_current(lat: &Lattice, g: &ConductivityField, u: &PotentialField) -> BoundaryVector {
    let values = DVector::from_iterator(
        lat.num_boundary(),
        lat.boundary_nodes().map(|b| {
            let (q, e) = lat.boundary_neighbor(b);
            g.at(e) * (u.at(q) - u.at(b))
        }),
    );
    BoundaryVector {
        role: BoundaryRole::Current,
        values,
    }
}

/// Dense boundary response matrix in canonical boundary order.
#[derive(Debug, Clone)]
pub struct DtnMatrix {
    dim: usize,
    size: usize,
    matrix: DMatrix<f64>,
    /// Largest absolute asymmetry observed before symmetrization, relative
    /// to the largest matrix entry.
    asymmetry: f64,
}

impl DtnMatrix {
    /// Wraps an externally produced matrix (file input); symmetry is the
    /// caller's responsibility and can be audited with [`DtnMatrix::symmetry_defect`].
    pub fn from_matrix(lat: &Lattice, matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != lat.num_boundary() || matrix.ncols() != lat.num_boundary() {
            return Err(Error::LatticeMismatch(format!(
                "response matrix is {}x{}, lattice has {} boundary nodes",
                matrix.nrows(),
                matrix.ncols(),
                lat.num_boundary()
            )));
        }
        Ok(DtnMatrix {
            dim: lat.dim(),
            size: lat.size(),
            matrix,
            asymmetry: 0.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn recorded_asymmetry(&self) -> f64 {
        self.asymmetry
    }

    /// Applies the response map to a boundary potential.
    pub fn apply(&self, lat: &Lattice, phi: &BoundaryVector) -> Result<BoundaryVector> {
        if phi.role != BoundaryRole::Potential {
            return Err(Error::InvalidParameter(
                "response map expects a boundary potential".into(),
            ));
        }
        BoundaryVector::new(lat, BoundaryRole::Current, &self.matrix * phi.values())
    }

    /// Conjugates the matrix by a corner reflection.  No arithmetic is
    /// performed, entries are only permuted, so the result is exactly the
    /// response matrix of the reflected conductivity up to the floating
    /// point error already present.
    pub fn permuted(&self, lat: &Lattice, map: &CornerMap) -> DtnMatrix {
        let nb = lat.num_boundary();
        let positions: Vec<usize> = lat
            .boundary_nodes()
            .map(|b| {
                lat.boundary_position(map.node_perm[b])
                    .expect("reflections preserve the boundary")
            })
            .collect();
        let mut out = DMatrix::zeros(nb, nb);
        for i in 0..nb {
            for j in 0..nb {
                out[(i, j)] = self.matrix[(positions[i], positions[j])];
            }
        }
        DtnMatrix {
            dim: self.dim,
            size: self.size,
            matrix: out,
            asymmetry: self.asymmetry,
        }
    }

    /// Largest absolute difference between the matrix and its transpose,
    /// relative to the largest absolute entry.
    pub fn symmetry_defect(&self) -> f64 {
        relative_asymmetry(&self.matrix)
    }

    /// Largest absolute row sum relative to the largest absolute entry.
    pub fn row_sum_defect(&self) -> f64 {
        let scale = self.matrix.amax().max(f64::MIN_POSITIVE);
        let ones = DVector::from_element(self.matrix.ncols(), 1.0);
        (&self.matrix * ones).amax() / scale
    }

    /// Largest violation of the sign pattern (nonpositive diagonal,
    /// nonnegative off-diagonal), relative to the largest absolute entry.
    pub fn sign_defect(&self) -> f64 {
        let scale = self.matrix.amax().max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for i in 0..self.matrix.nrows() {
            for j in 0..self.matrix.ncols() {
                let v = self.matrix[(i, j)];
                let violation = if i == j { v } else { -v };
                worst = worst.max(violation);
            }
        }
        worst / scale
    }
}

fn relative_asymmetry(m: &DMatrix<f64>) -> f64 {
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst / scale
}

/// Assembles the boundary response matrix column by column from unit
/// boundary excitations, then symmetrizes and records the asymmetry that
/// was averaged away.
pub fn assemble_dtn(lat: &Lattice, g: &ConductivityField) -> Result<DtnMatrix> {
    let solver = DirichletSolver::new(lat, g)?;
    let interior = solver.unit_solutions(lat);
    let nb = lat.num_boundary();
    let mut matrix = DMatrix::zeros(nb, nb);
    for (row, b) in lat.boundary_nodes().enumerate() {
        let (q, e) = lat.boundary_neighbor(b);
        let w = g.at(e);
        for col in 0..nb {
            let u_b = if row == col { 1.0 } else { 0.0 };
            matrix[(row, col)] = w * (interior[(q, col)] - u_b);
        }
    }
    let asymmetry = relative_asymmetry(&matrix);
    let symmetrized = (&matrix + matrix.transpose()) * 0.5;
    Ok(DtnMatrix {
        dim: lat.dim(),
        size: lat.size(),
        matrix: symmetrized,
        asymmetry,
    })
}
