//! Block LMIs for robust analysis, static synthesis and dynamic synthesis,
//! plus an independent certificate checker.
//!
//! Everything is assembled over real symmetric matrices. The complex
//! off-diagonal term `2XΣ†Eᵀ` is replaced by its real form `4XθᵀEᵀ`; both
//! Schur-reduce to the same quadratic term because `Σ†EᵀEΣ = 4θᵀEᵀEθ`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{is_hurwitz, max_eig, min_eig};
use crate::model::{AugmentedSystem, CMatrix};
use crate::tol::TOL;

/// Which certificate an LMI refers to: robust analysis, static or dynamic synthesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LmiKind {
    Analysis,
    Static,
    Dynamic,
}

impl LmiKind {
    pub fn name(self) -> &'static str {
        match self {
            LmiKind::Analysis => "analysis",
            LmiKind::Static => "static",
            LmiKind::Dynamic => "dynamic",
        }
    }
}

/// Decision variables `(X, K, Y)` and the trace bound `λ = Tr(X Re B_w)`.
#[derive(Debug, Clone)]
pub struct CandidateSolution {
    pub x: DMatrix<f64>,
    pub k: DMatrix<f64>,
    pub y: DMatrix<f64>,
    pub lambda: f64,
}

impl CandidateSolution {
    /// Builds a solution and fills in `λ` from `X`.
    pub fn new(
        sys: &AugmentedSystem,
        x: DMatrix<f64>,
        k: DMatrix<f64>,
        y: DMatrix<f64>,
    ) -> Result<Self> {
        let lambda = lambda_of(&x, &noise_for(sys, x.nrows())?)?;
        Ok(Self { x, k, y, lambda })
    }

    /// `K = 0`, `Y = 0`: the uncontrolled plant.
    pub fn uncontrolled(sys: &AugmentedSystem, x: DMatrix<f64>) -> Result<Self> {
        let m = x.nrows();
        Self::new(sys, x, DMatrix::zeros(m, m), DMatrix::zeros(m, m))
    }

    pub fn m(&self) -> usize {
        self.x.nrows()
    }
}

/// Diagnostics proving (or refuting) that a candidate meets its LMI.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub kind: LmiKind,
    pub x_min_eig: f64,
    pub lmi_max_eig: f64,
    /// `‖Y − KF̄ΘᵀX‖_F`
    pub equality_residual: f64,
    pub equality_tol: f64,
    pub hurwitz_ok: bool,
    pub epsilon: f64,
    pub lambda: f64,
    /// `λ + δ`
    pub bound: f64,
    pub valid: bool,
}

fn dims(what: &str, got: (usize, usize), want: (usize, usize)) -> Result<()> {
    if got != want {
        return Err(Error::DimensionMismatch(format!(
            "{what} is {}x{}, expected {}x{}",
            got.0, got.1, want.0, want.1
        )));
    }
    Ok(())
}

/// Plant-only data `(A, θ, E, R)` of an augmented system.
pub(crate) fn plant_blocks(
    sys: &AugmentedSystem,
) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let d = 2 * sys.plant_modes;
    (
        sys.plant_drift.clone(),
        sys.theta.view((0, 0), (d, d)).into_owned(),
        sys.e_bar.view((0, 0), (d, d)).into_owned(),
        sys.r_bar.view((0, 0), (d, d)).into_owned(),
    )
}

pub(crate) fn noise_for(sys: &AugmentedSystem, m: usize) -> Result<CMatrix> {
    if m == sys.m {
        Ok(sys.noise.clone())
    } else if m == 2 * sys.plant_modes {
        Ok(sys.noise.view((0, 0), (m, m)).into_owned())
    } else {
        Err(Error::DimensionMismatch(format!(
            "X has dimension {m}, system has {}",
            sys.m
        )))
    }
}

/// `[[AᵀX + XA + EᵀE/γ² + R, 4XθᵀEᵀ], [4EθX, −I]]` on the plant alone.
pub fn assemble_analysis(sys: &AugmentedSystem, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (a, theta, e, r) = plant_blocks(sys);
    let d = a.nrows();
    dims("X", x.shape(), (d, d))?;
    let p = e.nrows();
    let g2 = sys.gamma * sys.gamma;
    let top = a.transpose() * x + x * &a + e.transpose() * &e / g2 + r;
    let off = x * theta.transpose() * e.transpose() * 4.0;
    let mut out = DMatrix::zeros(d + p, d + p);
    out.view_mut((0, 0), (d, d)).copy_from(&top);
    out.view_mut((0, d), (d, p)).copy_from(&off);
    out.view_mut((d, 0), (p, d)).copy_from(&off.transpose());
    out.view_mut((d, d), (p, p)).fill_with_identity();
    out.view_mut((d, d), (p, p)).neg_mut();
    Ok(out)
}

/// Static-controller LMI. `sys` must have no controller modes.
pub fn assemble_static(
    sys: &AugmentedSystem,
    x: &DMatrix<f64>,
    k: &DMatrix<f64>,
    y: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    if !sys.is_static() {
        return Err(Error::DimensionMismatch(format!(
            "static LMI needs a system without controller modes, got {}",
            sys.controller_modes
        )));
    }
    assemble_block(sys, x, k, y)
}

/// Dynamic-controller LMI on the augmented system.
pub fn assemble_dynamic(
    sys: &AugmentedSystem,
    x: &DMatrix<f64>,
    k: &DMatrix<f64>,
    y: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    assemble_block(sys, x, k, y)
}

/// `[[B, 4XΘᵀĒᵀ, F̄ᵀKF̄], [4ĒΘX, −I, 0], [F̄ᵀKF̄, 0, −I/ρ]]` with
/// `B = ĀᵀX + XĀ + 2F̄ᵀY + 2YᵀF̄ + ĒᵀĒ/γ² + R̄`.
fn assemble_block(
    sys: &AugmentedSystem,
    x: &DMatrix<f64>,
    k: &DMatrix<f64>,
    y: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let m = sys.m;
    dims("X", x.shape(), (m, m))?;
    dims("K", k.shape(), (m, m))?;
    dims("Y", y.shape(), (m, m))?;
    let p = sys.uncertainty_rows();
    let (a, f, e) = (&sys.a_bar, &sys.f_bar, &sys.e_bar);
    let g2 = sys.gamma * sys.gamma;
    let fy = f.transpose() * y * 2.0;
    let b = a.transpose() * x + x * a + &fy + fy.transpose() + e.transpose() * e / g2 + &sys.r_bar;
    let off = x * sys.theta.transpose() * e.transpose() * 4.0;
    let fkf = f.transpose() * k * f;
    let n = 2 * m + p;
    let mut out = DMatrix::zeros(n, n);
    out.view_mut((0, 0), (m, m)).copy_from(&b);
    out.view_mut((0, m), (m, p)).copy_from(&off);
    out.view_mut((m, 0), (p, m)).copy_from(&off.transpose());
    out.view_mut((0, m + p), (m, m)).copy_from(&fkf);
    out.view_mut((m + p, 0), (m, m)).copy_from(&fkf.transpose());
    for i in 0..p {
        out[(m + i, m + i)] = -1.0;
    }
    for i in 0..m {
        out[(m + p + i, m + p + i)] = -1.0 / sys.rho;
    }
    Ok(out)
}

/// Assembles the LMI of `kind`.
pub fn assemble(
    kind: LmiKind,
    sys: &AugmentedSystem,
    sol: &CandidateSolution,
) -> Result<DMatrix<f64>> {
    match kind {
        LmiKind::Analysis => assemble_analysis(sys, &sol.x),
        LmiKind::Static => assemble_static(sys, &sol.x, &sol.k, &sol.y),
        LmiKind::Dynamic => assemble_dynamic(sys, &sol.x, &sol.k, &sol.y),
    }
}

/// Eliminates the trailing `n − lead` rows and columns: `M₁₁ − M₁₂ M₂₂⁻¹ M₂₁`.
/// The pivot `M₂₂` must be negative definite.
pub fn schur_reduce(m: &DMatrix<f64>, lead: usize) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if m.ncols() != n || lead > n {
        return Err(Error::DimensionMismatch(format!(
            "cannot split {}x{} at {lead}",
            n,
            m.ncols()
        )));
    }
    let t = n - lead;
    let pivot = m.view((lead, lead), (t, t)).into_owned();
    let top = max_eig(&pivot)?;
    if top >= 0.0 {
        return Err(Error::PivotNotDefinite(top));
    }
    let neg = -pivot;
    let chol = neg.cholesky().ok_or(Error::PivotNotDefinite(top))?;
    let c = m.view((0, lead), (lead, t)).into_owned();
    // M₁₁ − C M₂₂⁻¹ Cᵀ = M₁₁ + C (−M₂₂)⁻¹ Cᵀ
    let w = chol.solve(&c.transpose());
    let mut out = m.view((0, 0), (lead, lead)) + c * w;
    crate::linalg::symmetrize_in_place(&mut out);
    Ok(out)
}

/// Closed form of the reduced synthesis LMI:
/// `B + 16XΘᵀĒᵀĒΘX + ρ(F̄ᵀKF̄)²`.
pub fn reduced_form(
    sys: &AugmentedSystem,
    x: &DMatrix<f64>,
    k: &DMatrix<f64>,
    y: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let full = assemble_block(sys, x, k, y)?;
    let m = sys.m;
    let b = full.view((0, 0), (m, m)).into_owned();
    let etx = &sys.e_bar * &sys.theta * x;
    let fkf = sys.f_bar.transpose() * k * &sys.f_bar;
    Ok(b + etx.transpose() * etx * 16.0 + &fkf * &fkf * sys.rho)
}

/// `Tr(X Re B_w)`, after checking that `Tr(X B_w)` is real.
pub fn lambda_of(x: &DMatrix<f64>, b_w: &CMatrix) -> Result<f64> {
    dims("X", x.shape(), b_w.shape())?;
    let (mut re, mut im) = (0.0, 0.0);
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            re += x[(i, j)] * b_w[(j, i)].re;
            im += x[(i, j)] * b_w[(j, i)].im;
        }
    }
    let scale = 1.0 + x.amax() * b_w.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if im.abs() > TOL.trace_imag * scale {
        return Err(Error::DimensionMismatch(format!(
            "Tr(X B_w) has imaginary part {im:e}; X must be real symmetric"
        )));
    }
    Ok(re)
}

/// Controlled drift `Ā + 2ΘF̄ᵀKF̄` (the plant drift for analysis).
pub fn controlled_drift(kind: LmiKind, sys: &AugmentedSystem, k: &DMatrix<f64>) -> DMatrix<f64> {
    match kind {
        LmiKind::Analysis => sys.plant_drift.clone(),
        _ => &sys.a_bar + &sys.theta * sys.f_bar.transpose() * k * &sys.f_bar * 2.0,
    }
}

/// `‖Y − KF̄ΘᵀX‖_F`
pub fn equality_residual(sys: &AugmentedSystem, sol: &CandidateSolution) -> f64 {
    if sol.m() != sys.m {
        return f64::NAN;
    }
    (&sol.y - &sol.k * &sys.f_bar * sys.theta.transpose() * &sol.x).norm()
}

/// Recomputes every margin of `sol` against the LMI of `kind`.
pub fn check_certificate(
    kind: LmiKind,
    sys: &AugmentedSystem,
    sol: &CandidateSolution,
) -> Certificate {
    let epsilon = sys.epsilon();
    let mut cert = Certificate {
        kind,
        x_min_eig: f64::NAN,
        lmi_max_eig: f64::NAN,
        equality_residual: f64::NAN,
        equality_tol: 1e-6 * (1.0 + sol.x.norm() * sol.k.norm()),
        hurwitz_ok: false,
        epsilon,
        lambda: f64::NAN,
        bound: f64::NAN,
        valid: false,
    };
    let m_expected = if kind == LmiKind::Analysis {
        2 * sys.plant_modes
    } else {
        sys.m
    };
    if sol.m() != m_expected || sol.k.shape() != sol.x.shape() || sol.y.shape() != sol.x.shape() {
        return cert;
    }
    cert.x_min_eig = min_eig(&sol.x).unwrap_or(f64::NAN);
    cert.lmi_max_eig = assemble(kind, sys, sol)
        .and_then(|l| max_eig(&l))
        .unwrap_or(f64::NAN);
    cert.equality_residual = match kind {
        LmiKind::Analysis => sol.k.norm() + sol.y.norm(),
        _ => equality_residual(sys, sol),
    };
    cert.hurwitz_ok = is_hurwitz(&controlled_drift(kind, sys, &sol.k)).hurwitz;
    if let Ok(lambda) = noise_for(sys, sol.m()).and_then(|b| lambda_of(&sol.x, &b)) {
        cert.lambda = lambda;
        cert.bound = lambda + sys.delta;
    }
    cert.valid = cert.x_min_eig > 0.0
        && cert.lmi_max_eig <= -epsilon / 2.0
        && cert.equality_residual <= cert.equality_tol
        && cert.hurwitz_ok
        && cert.lambda.is_finite();
    cert
}
