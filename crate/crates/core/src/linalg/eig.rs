//! Cyclic Jacobi eigensolver for small dense symmetric matrices.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::tol::TOL;

const MAX_SWEEPS: usize = 64;

/// Eigendecomposition `S = Q diag(values) Qᵀ` with eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl EigenDecomposition {
    /// Rebuilds `Q diag(f(λ)) Qᵀ`.
    pub fn reconstruct_with(&self, f: impl Fn(usize, f64) -> f64) -> DMatrix<f64> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let w = f(j, self.values[j]);
            scaled.column_mut(j).scale_mut(w);
        }
        let mut out = &scaled * self.vectors.transpose();
        symmetrize_in_place(&mut out);
        out
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.reconstruct_with(|_, v| v)
    }
}

pub(crate) fn symmetrize_in_place(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

pub fn check_symmetric(s: &DMatrix<f64>) -> Result<()> {
    if s.nrows() != s.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            s.nrows(),
            s.ncols()
        )));
    }
    let n = s.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((s[(i, j)] - s[(j, i)]).abs());
        }
    }
    let scale = 1.0 + s.amax();
    if worst > TOL.symmetry * scale {
        return Err(Error::NotSymmetric(worst));
    }
    Ok(())
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
pub fn sym_eig(s: &DMatrix<f64>) -> Result<EigenDecomposition> {
    check_symmetric(s)?;
    Ok(jacobi(s.clone(), None))
}

/// Same as [`sym_eig`] but first rotates into the basis `guess`, which makes
/// the sweep count small when `s` is close to a matrix already diagonalized
/// by `guess` (as happens between consecutive projection iterates).
pub fn sym_eig_warm(s: &DMatrix<f64>, guess: &DMatrix<f64>) -> Result<EigenDecomposition> {
    check_symmetric(s)?;
    let mut rotated = guess.transpose() * s * guess;
    symmetrize_in_place(&mut rotated);
    Ok(jacobi(rotated, Some(guess.clone())))
}

fn off_diagonal_sq(a: &[f64], n: usize) -> f64 {
    let mut off = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            off += a[i * n + j] * a[i * n + j];
        }
    }
    off
}

fn jacobi(s: DMatrix<f64>, basis: Option<DMatrix<f64>>) -> EigenDecomposition {
    let n = s.nrows();
    // Row-major working copies; rows of `v` are eigenvector columns.
    let mut a: Vec<f64> = (0..n * n).map(|k| s[(k / n, k % n)]).collect();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let total: f64 = a.iter().map(|x| x * x).sum();
    let target = (f64::EPSILON * f64::EPSILON) * total.max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_sq(&a, n) <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - sn * akq;
                    a[k * n + q] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - sn * aqk;
                    a[q * n + k] = sn * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vpk = v[p * n + k];
                    let vqk = v[q * n + k];
                    v[p * n + k] = c * vpk - sn * vqk;
                    v[q * n + k] = sn * vpk + c * vqk;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| a[i * n + i]));
    let mut vectors = DMatrix::from_fn(n, n, |r, c| v[order[c] * n + r]);
    if let Some(b) = basis {
        vectors = b * vectors;
    }
    EigenDecomposition { values, vectors }
}

/// Smallest eigenvalue.
pub fn min_eig(s: &DMatrix<f64>) -> Result<f64> {
    let e = sym_eig(s)?;
    Ok(if e.values.is_empty() {
        0.0
    } else {
        e.values[0]
    })
}

/// Largest eigenvalue.
pub fn max_eig(s: &DMatrix<f64>) -> Result<f64> {
    let e = sym_eig(s)?;
    Ok(e.values.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

/// Nearest positive semidefinite matrix in Frobenius norm.
pub fn psd_project(s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let e = sym_eig(s)?;
    Ok(e.reconstruct_with(|_, v| v.max(0.0)))
}

/// Nearest PSD matrix of rank at most `r`: keeps the `r` largest positive
/// eigenvalues.
pub fn rank_psd_project(s: &DMatrix<f64>, r: usize) -> Result<DMatrix<f64>> {
    let e = sym_eig(s)?;
    Ok(truncate(&e, r))
}

pub(crate) fn truncate(e: &EigenDecomposition, r: usize) -> DMatrix<f64> {
    let n = e.values.len();
    let keep_from = n.saturating_sub(r);
    e.reconstruct_with(|j, v| if j >= keep_from { v.max(0.0) } else { 0.0 })
}
