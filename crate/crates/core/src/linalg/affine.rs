//! Euclidean projection onto affine sets `{x : C x = d}`.

use nalgebra::{DMatrix, DVector};

use super::eig::sym_eig;
use crate::error::{Error, Result};

/// Cached normal-equations factorization for one constraint matrix `C`.
/// The right-hand side is supplied per call so that families of problems
/// sharing `C` (for example a bisection over a bound) reuse the factor.
#[derive(Debug, Clone)]
pub struct AffineProjector {
    c: DMatrix<f64>,
    /// `Cᵀ (C Cᵀ)⁺`
    pinv: DMatrix<f64>,
    rank: usize,
}

impl AffineProjector {
    pub fn new(c: DMatrix<f64>) -> Result<Self> {
        let gram = &c * c.transpose();
        let eig = sym_eig(&gram)?;
        let top = eig.values.iter().copied().fold(0.0, f64::max);
        let cutoff = 1e-12 * top.max(f64::MIN_POSITIVE);
        let rank = eig.values.iter().filter(|&&v| v > cutoff).count();
        let gram_pinv = eig.reconstruct_with(|_, v| if v > cutoff { 1.0 / v } else { 0.0 });
        let pinv = c.transpose() * gram_pinv;
        Ok(Self { c, pinv, rank })
    }

    pub fn constraint_matrix(&self) -> &DMatrix<f64> {
        &self.c
    }

    /// `Cᵀ (C Cᵀ)⁺`
    pub fn pseudo_inverse(&self) -> &DMatrix<f64> {
        &self.pinv
    }

    pub fn num_constraints(&self) -> usize {
        self.c.nrows()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Fails with `InconsistentConstraints` when `C x = d` has no solution.
    pub fn check_consistent(&self, d: &DVector<f64>) -> Result<()> {
        if d.len() != self.c.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "affine rhs has length {}, expected {}",
                d.len(),
                self.c.nrows()
            )));
        }
        let x0 = &self.pinv * d;
        let resid = (&self.c * x0 - d).amax();
        if resid > 1e-9 * (1.0 + d.amax()) {
            return Err(Error::InconsistentConstraints(resid));
        }
        Ok(())
    }

    pub fn project(&self, v: &DVector<f64>, d: &DVector<f64>) -> DVector<f64> {
        let r = &self.c * v - d;
        v - &self.pinv * r
    }

    /// Largest absolute constraint violation `‖C v − d‖∞`.
    pub fn residual(&self, v: &DVector<f64>, d: &DVector<f64>) -> f64 {
        (&self.c * v - d).amax()
    }
}

/// One-shot projection of `v` onto `{x : C x = d}`.
pub fn lstsq_project(v: &DVector<f64>, c: &DMatrix<f64>, d: &DVector<f64>) -> Result<DVector<f64>> {
    if c.ncols() != v.len() {
        return Err(Error::DimensionMismatch(format!(
            "constraint matrix has {} columns, vector has length {}",
            c.ncols(),
            v.len()
        )));
    }
    let proj = AffineProjector::new(c.clone())?;
    proj.check_consistent(d)?;
    Ok(proj.project(v, d))
}
