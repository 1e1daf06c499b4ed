//! Dense numerics kernel sized for the small matrices this toolkit handles
//! (at most a few dozen rows).

mod affine;
mod eig;
mod lyapunov;
mod svec;

pub use affine::{lstsq_project, AffineProjector};
pub(crate) use eig::symmetrize_in_place;
pub use eig::{
    check_symmetric, max_eig, min_eig, psd_project, rank_psd_project, sym_eig, sym_eig_warm,
    EigenDecomposition,
};
pub use lyapunov::{is_hurwitz, solve_lyapunov, HurwitzReport};
pub use svec::{smat, svec, svec_index, svec_len};

use nalgebra::DMatrix;

/// `(M + Mᵀ)/2`
pub fn sym_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Block-diagonal concatenation of square or rectangular blocks.
pub fn block_diag(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(*b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}
