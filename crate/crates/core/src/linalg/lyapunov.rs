//! Lyapunov solves by Kronecker vectorization, and the Hurwitz test built on
//! them.

use nalgebra::{DMatrix, DVector};

use super::eig::{sym_eig, symmetrize_in_place};
use crate::error::{Error, Result};

/// Pivot ratio below which the vectorized operator is treated as singular.
const SINGULAR_PIVOT_RATIO: f64 = 1e-13;

/// Solves `A P + P Aᵀ + Q = 0` for symmetric `P`.
pub fn solve_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n || q.nrows() != n || q.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "lyapunov: A is {}x{}, Q is {}x{}",
            a.nrows(),
            a.ncols(),
            q.nrows(),
            q.ncols()
        )));
    }
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    // Column-major vec: vec(A P + P Aᵀ) = (I ⊗ A + A ⊗ I) vec(P).
    let nn = n * n;
    let mut op = DMatrix::<f64>::zeros(nn, nn);
    for j in 0..n {
        for i in 0..n {
            let row = i + j * n;
            for k in 0..n {
                op[(row, k + j * n)] += a[(i, k)];
                op[(row, i + k * n)] += a[(j, k)];
            }
        }
    }
    let rhs = DVector::from_iterator(nn, q.iter().map(|v| -v));
    let lu = op.full_piv_lu();
    let u = lu.u();
    let diag: Vec<f64> = (0..nn).map(|i| u[(i, i)].abs()).collect();
    let biggest = diag.iter().copied().fold(0.0, f64::max);
    let smallest = diag.iter().copied().fold(f64::INFINITY, f64::min);
    if biggest == 0.0 || smallest <= SINGULAR_PIVOT_RATIO * biggest {
        return Err(Error::SingularLyapunov);
    }
    let sol = lu.solve(&rhs).ok_or(Error::SingularLyapunov)?;
    let mut p = DMatrix::from_column_slice(n, n, sol.as_slice());
    symmetrize_in_place(&mut p);
    Ok(p)
}

/// Outcome of [`is_hurwitz`].
#[derive(Debug, Clone)]
pub struct HurwitzReport {
    pub hurwitz: bool,
    /// The Lyapunov operator was singular: some eigenvalue pair of `A` sums to
    /// zero, so `A` sits on (or beyond) the stability boundary.
    pub boundary: bool,
    /// `P ≻ 0` with `AᵀP + PA = −I` when Hurwitz.
    pub certificate: Option<DMatrix<f64>>,
    /// Eigenvector of the indefinite `P` along its most negative eigenvalue
    /// when not Hurwitz.
    pub direction: Option<DVector<f64>>,
}

impl HurwitzReport {
    fn not_hurwitz(boundary: bool, direction: Option<DVector<f64>>) -> Self {
        Self {
            hurwitz: false,
            boundary,
            certificate: None,
            direction,
        }
    }
}

/// Decides whether every eigenvalue of `A` has negative real part by solving
/// `AᵀP + PA = −I` and testing `P ≻ 0`.
pub fn is_hurwitz(a: &DMatrix<f64>) -> HurwitzReport {
    let n = a.nrows();
    let p = match solve_lyapunov(&a.transpose(), &DMatrix::identity(n, n)) {
        Ok(p) => p,
        Err(_) => return HurwitzReport::not_hurwitz(true, None),
    };
    let eig = match sym_eig(&p) {
        Ok(e) => e,
        Err(_) => return HurwitzReport::not_hurwitz(true, None),
    };
    if n == 0 || eig.values[0] > 0.0 {
        HurwitzReport {
            hurwitz: true,
            boundary: false,
            certificate: Some(p),
            direction: None,
        }
    } else {
        HurwitzReport::not_hurwitz(false, Some(eig.vectors.column(0).into_owned()))
    }
}
