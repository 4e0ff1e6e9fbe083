//! Dense spectral routines used by the kernel and least squares machinery.
//!
//! Kernel extraction and rank decisions here hinge on singular vectors of
//! blocks that are nearly rank deficient by construction, where a sloppy
//! SVD quietly returns vectors that are not singular vectors at all.  The
//! routines in this module wrap a backend that stays consistent (in the
//! sense that `U S V^T` reproduces the input to machine precision) on such
//! blocks, and present results in the container types used by the rest of
//! the crate.

use faer::prelude::SolveLstsq;
use faer::Mat;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

fn to_faer(m: &DMatrix<f64>) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// A singular value decomposition with values in descending order.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// All `min(rows, cols)` singular values, descending.
    pub sigma: Vec<f64>,
    /// Left singular vectors as columns, when requested.
    pub u: Option<DMatrix<f64>>,
    /// Right singular vectors as columns (`cols x cols`), when requested.
    pub v: Option<DMatrix<f64>>,
}

/// Full singular value decomposition.  The right factor always has as many
/// columns as the input, so the trailing columns span the kernel even for
/// wide inputs.
pub fn svd(m: &DMatrix<f64>, want_u: bool, want_v: bool) -> Result<SvdResult> {
    let decomp = to_faer(m)
        .svd()
        .map_err(|e| Error::NumericalFailure(format!("SVD failed: {e:?}")))?;
    let s = decomp.S();
    let k = m.nrows().min(m.ncols());
    let sigma: Vec<f64> = (0..k).map(|i| s[i]).collect();
    let u = want_u.then(|| {
        let fu = decomp.U();
        DMatrix::from_fn(fu.nrows(), fu.ncols(), |i, j| fu[(i, j)])
    });
    let v = want_v.then(|| {
        let fv = decomp.V();
        DMatrix::from_fn(fv.nrows(), fv.ncols(), |i, j| fv[(i, j)])
    });
    Ok(SvdResult { sigma, u, v })
}

/// Singular values only, descending.
pub fn singular_values(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    Ok(svd(m, false, false)?.sigma)
}

/// Largest singular value; zero for an empty matrix.
pub fn spectral_norm(m: &DMatrix<f64>) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

/// Outcome of a rank-aware least squares solve.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub solution: DVector<f64>,
    /// Effective rank at the relative threshold.
    pub rank: usize,
    /// Euclidean norm of the residual `A x - b`.
    pub residual: f64,
}

/// Solves `min |A x - b|` with column-pivoted QR.  The effective rank is
/// the number of diagonal entries of the pivoted triangular factor above
/// `rel_tol` times the largest; when the system is rank deficient (or
/// wider than tall) the solve falls back to a truncated SVD, dropping
/// singular values below the same relative threshold.
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>, rel_tol: f64) -> Result<LeastSquares> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(Error::InvalidParameter(format!(
            "least squares dimensions do not agree: {m} rows, {} right-hand entries",
            b.len()
        )));
    }
    if n == 0 || m == 0 {
        return Err(Error::EmptyOperator("empty least squares system".into()));
    }
    let fa = to_faer(a);
    if m >= n {
        let qr = fa.col_piv_qr();
        let r = qr.R();
        let scale = r[(0, 0)].abs();
        let rank = (0..n)
            .take_while(|&i| r[(i, i)].abs() > rel_tol * scale && scale > 0.0)
            .count();
        if rank == n {
            let rhs = Mat::from_fn(m, 1, |i, _| b[i]);
            let x = qr.solve_lstsq(&rhs);
            let solution = DVector::from_fn(n, |i, _| x[(i, 0)]);
            let residual = (a * &solution - b).norm();
            return Ok(LeastSquares {
                solution,
                rank,
                residual,
            });
        }
    }
    // Deficient or underdetermined: minimum-norm solution by truncated SVD.
    let decomp = svd(a, true, true)?;
    let u = decomp.u.as_ref().unwrap();
    let v = decomp.v.as_ref().unwrap();
    let sigma_max = decomp.sigma.first().copied().unwrap_or(0.0);
    let mut solution = DVector::zeros(n);
    let mut rank = 0;
    for (i, &s) in decomp.sigma.iter().enumerate() {
        if s <= rel_tol * sigma_max || s == 0.0 {
            break;
        }
        rank += 1;
        let coeff = u.column(i).dot(b) / s;
        solution.axpy(coeff, &v.column(i).clone_owned(), 1.0);
    }
    let residual = (a * &solution - b).norm();
    Ok(LeastSquares {
        solution,
        rank,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svd_is_consistent_on_nearly_rank_deficient_input() {
        // A tall block whose two columns are parallel to working precision.
        let c = [0.3023, -0.2816, 0.8703, -0.2669];
        let a = DMatrix::from_fn(4, 2, |i, j| {
            if j == 0 {
                c[i]
            } else {
                0.0233773 * c[i] + 1e-16 * i as f64
            }
        });
        let d = svd(&a, true, true).unwrap();
        let u = d.u.unwrap();
        let v = d.v.unwrap();
        let mut rebuilt = DMatrix::zeros(4, 2);
        for k in 0..2 {
            for i in 0..4 {
                for j in 0..2 {
                    rebuilt[(i, j)] += u[(i, k)] * d.sigma[k] * v[(j, k)];
                }
            }
        }
        assert!((rebuilt - &a).amax() <= 1e-14);
        assert!(d.sigma[1] <= 1e-15);
    }

    #[test]
    fn wide_svd_exposes_the_full_kernel() {
        let a = DMatrix::from_row_slice(1, 3, &[1.0, 2.0, 2.0]);
        let d = svd(&a, false, true).unwrap();
        let v = d.v.unwrap();
        assert_eq!(v.shape(), (3, 3));
        // Columns beyond the rank annihilate the matrix.
        for j in 1..3 {
            assert!((&a * v.column(j)).amax() <= 1e-14);
        }
    }

    #[test]
    fn least_squares_recovers_exact_solutions() {
        let a = DMatrix::from_fn(8, 3, |i, j| 1.0 / ((i + j + 1) as f64));
        let x_true = DVector::from_column_slice(&[1.5, -2.0, 0.25]);
        let b = &a * &x_true;
        let ls = least_squares(&a, &b, 1e-12).unwrap();
        assert_eq!(ls.rank, 3);
        assert!((ls.solution - x_true).amax() <= 1e-10);
        assert!(ls.residual <= 1e-10);
    }

    #[test]
    fn least_squares_flags_rank_deficiency() {
        // Third column is the sum of the first two.
        let base = DMatrix::from_fn(6, 2, |i, j| ((i * 2 + j) as f64).sin());
        let a = DMatrix::from_fn(6, 3, |i, j| {
            if j < 2 {
                base[(i, j)]
            } else {
                base[(i, 0)] + base[(i, 1)]
            }
        });
        let b = DVector::from_fn(6, |i, _| (i as f64).cos());
        let ls = least_squares(&a, &b, 1e-10).unwrap();
        assert_eq!(ls.rank, 2);
        // The minimum-norm solution must still be optimal: the residual is
        // orthogonal to the column space.
        let r = &a * &ls.solution - &b;
        assert!((a.transpose() * r).amax() <= 1e-10);
    }
}
