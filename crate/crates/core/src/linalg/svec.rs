//! Symmetric-matrix vectorization with `√2` off-diagonal weights, so that the
//! Euclidean norm of `svec(S)` equals the Frobenius norm of `S`.

use nalgebra::{DMatrix, DVector};
use std::f64::consts::SQRT_2;

pub fn svec_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Position of entry `(i, j)` (either order) inside `svec`; upper triangle,
/// row by row.
pub fn svec_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

pub fn svec(s: &DMatrix<f64>) -> DVector<f64> {
    let n = s.nrows();
    let mut out = DVector::zeros(svec_len(n));
    let mut k = 0;
    for i in 0..n {
        out[k] = s[(i, i)];
        k += 1;
        for j in (i + 1)..n {
            out[k] = SQRT_2 * 0.5 * (s[(i, j)] + s[(j, i)]);
            k += 1;
        }
    }
    out
}

pub fn smat(v: &[f64], n: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        out[(i, i)] = v[k];
        k += 1;
        for j in (i + 1)..n {
            let x = v[k] / SQRT_2;
            out[(i, j)] = x;
            out[(j, i)] = x;
            k += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn svec_is_isometric(vals in proptest::collection::vec(-5.0f64..5.0, 10)) {
            let v = DVector::from_vec(vals);
            let s = smat(v.as_slice(), 4);
            prop_assert!((s.norm() - v.norm()).abs() < 1e-12);
            prop_assert!((svec(&s) - &v).amax() < 1e-12);
        }
    }

    #[test]
    fn index_layout() {
        let n = 4;
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                assert_eq!(svec_index(n, i, j), k);
                assert_eq!(svec_index(n, j, i), k);
                k += 1;
            }
        }
    }
}
