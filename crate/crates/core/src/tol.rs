//! Numerical tolerances shared across the crate.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Largest admissible `|S_ij − S_ji|` (scaled by `1 + max|S|`).
    pub symmetry: f64,
    /// Linear-solve residuals.
    pub residual: f64,
    /// PSD margin used when judging eigenvalue signs.
    pub psd_margin: f64,
    /// Imaginary residual allowed in a drift matrix built from doubled-up couplings.
    pub drift_imag: f64,
    /// Imaginary part allowed in `Tr(X B_w)` for real symmetric `X`.
    pub trace_imag: f64,
    /// Relative scale of the strict-inequality margin `ε`.
    pub strictness: f64,
}

pub const TOL: Tolerances = Tolerances {
    symmetry: 1e-9,
    residual: 1e-8,
    psd_margin: 1e-10,
    drift_imag: 1e-10,
    trace_imag: 1e-10,
    strictness: 1e-6,
};
