use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("matrix is not symmetric (asymmetry {0:.3e})")]
    NotSymmetric(f64),
    #[error("drift has imaginary residual {0:.3e}; coupling is not in doubled-up form")]
    NonRealDrift(f64),
    #[error("Lyapunov equation is singular (eigenvalue pair sums to zero)")]
    SingularLyapunov,
    #[error("affine constraints are inconsistent (residual {0:.3e})")]
    InconsistentConstraints(f64),
    #[error("Schur pivot block is not negative definite (largest eigenvalue {0:.3e})")]
    PivotNotDefinite(f64),
    #[error("upper bound beta = {0} is not feasible")]
    UpperBoundInfeasible(f64),
    #[error("invalid bracket: {0}")]
    BracketInvalid(String),
    #[error("feasibility is not monotone over the pre-sweep: {0}")]
    NonMonotone(String),
    #[error("closed-loop matrix is not Hurwitz")]
    NotHurwitz,
    #[error("certificate is not valid; outcome cannot be trusted")]
    UntrustedCertificate,
}

pub type Result<T> = std::result::Result<T, Error>;
