//! Lifting of the synthesis LMIs.
//!
//! The bilinear equality `Y = K F̄ Θᵀ X` is removed by introducing
//! `Z = V Vᵀ` with `V = [I; X; K; V₁; V₂]`. Block row `0` of `Z` then holds
//! the decision variables, the product `V₁ X` appears as block `(3, 1)`, and
//! the only non-convex constraint left is `rank(Z) ≤ m`.

use nalgebra::{DMatrix, DVector};

use super::problem::{AffineLmi, Cone, Entry, ProblemBuilder, RcProblem};
use crate::error::{Error, Result};
use crate::linalg::{min_eig, psd_project, sym_eig, sym_part};
use crate::lmi::{
    assemble_analysis, assemble_dynamic, assemble_static, CandidateSolution, LmiKind,
};
use crate::model::AugmentedSystem;

/// Block rows of the lifted matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LiftedLayout {
    pub m: usize,
}

impl LiftedLayout {
    pub const IDENTITY: usize = 0;
    pub const X: usize = 1;
    pub const K: usize = 2;
    pub const V1: usize = 3;
    pub const V2: usize = 4;

    pub fn dim(&self) -> usize {
        5 * self.m
    }

    pub fn rank_bound(&self) -> usize {
        self.m
    }

    /// First row of block row `b`.
    pub fn row(&self, b: usize) -> usize {
        b * self.m
    }

    /// Block `(r, c)` of `z`.
    pub fn block(&self, z: &DMatrix<f64>, r: usize, c: usize) -> DMatrix<f64> {
        z.view((self.row(r), self.row(c)), (self.m, self.m))
            .into_owned()
    }
}

/// A certificate LMI written as equalities plus cones, with an optional trace
/// bound `Tr(X Re B_w) ≤ β`.
#[derive(Debug, Clone)]
pub struct LmiProblem {
    pub kind: LmiKind,
    /// Present for the lifted synthesis problems.
    pub layout: Option<LiftedLayout>,
    pub problem: RcProblem,
    pub epsilon: f64,
    pub beta: Option<f64>,
    /// Size of `X`.
    pub m: usize,
    var_block: usize,
    lmi: AffineLmi,
    lmi_slack: usize,
    x_slack: usize,
    trace: Option<(usize, usize)>,
    noise: DMatrix<f64>,
    /// `F̄ Θᵀ`
    g: DMatrix<f64>,
}

fn z_entry(layout: &LiftedLayout, br: usize, i: usize, bc: usize, j: usize) -> Entry {
    Entry::new(0, layout.row(br) + i, layout.row(bc) + j)
}

/// Lifted static or dynamic synthesis problem.
pub fn build_lifted(
    sys: &AugmentedSystem,
    kind: LmiKind,
    epsilon: f64,
    with_trace: bool,
) -> Result<LmiProblem> {
    if kind == LmiKind::Analysis {
        return Err(Error::DimensionMismatch(
            "analysis is not lifted; use build_analysis".into(),
        ));
    }
    if kind == LmiKind::Static && !sys.is_static() {
        return Err(Error::DimensionMismatch(
            "static lifting needs a system without controller modes".into(),
        ));
    }
    let m = sys.m;
    let layout = LiftedLayout { m };
    let mut b = ProblemBuilder::new();
    let z = b.add_block(layout.dim(), Cone::RankPsd(layout.rank_bound()));
    debug_assert_eq!(z, 0);

    for i in 0..m {
        for j in i..m {
            let e = z_entry(&layout, 0, i, 0, j);
            b.add_constraint(vec![(e, 1.0)], if i == j { 1.0 } else { 0.0 });
        }
    }
    for blk in [LiftedLayout::X, LiftedLayout::K] {
        for i in 0..m {
            for j in (i + 1)..m {
                b.add_constraint(
                    vec![
                        (z_entry(&layout, blk, i, 0, j), 1.0),
                        (z_entry(&layout, blk, j, 0, i), -1.0),
                    ],
                    0.0,
                );
            }
        }
    }
    // Z_v1 = Z_x2 F̄ Θᵀ
    let g = &sys.f_bar * sys.theta.transpose();
    for i in 0..m {
        for j in 0..m {
            let mut terms = vec![(z_entry(&layout, LiftedLayout::V1, i, 0, j), 1.0)];
            for k in 0..m {
                if g[(k, j)] != 0.0 {
                    terms.push((z_entry(&layout, LiftedLayout::K, i, 0, k), -g[(k, j)]));
                }
            }
            b.add_constraint(terms, 0.0);
        }
    }
    // block(v2, 0) = block(v1, x1)
    for i in 0..m {
        for j in 0..m {
            b.add_constraint(
                vec![
                    (z_entry(&layout, LiftedLayout::V2, i, 0, j), 1.0),
                    (
                        z_entry(&layout, LiftedLayout::V1, i, LiftedLayout::X, j),
                        -1.0,
                    ),
                ],
                0.0,
            );
        }
    }

    let zero = DMatrix::zeros(m, m);
    let assemble = |x: &DMatrix<f64>, k: &DMatrix<f64>, y: &DMatrix<f64>| match kind {
        LmiKind::Static => assemble_static(sys, x, k, y),
        _ => assemble_dynamic(sys, x, k, y),
    };
    let lx = AffineLmi::probe(m, 0, (layout.row(LiftedLayout::X), 0), true, &|x| {
        assemble(x, &zero, &zero)
    })?;
    let lk = AffineLmi::probe(m, 0, (layout.row(LiftedLayout::K), 0), true, &|k| {
        assemble(&zero, k, &zero)
    })?;
    let ly = AffineLmi::probe(m, 0, (layout.row(LiftedLayout::V2), 0), false, &|y| {
        assemble(&zero, &zero, y)
    })?;
    let lmi = lx.merge(lk).merge(ly);
    finish(
        b,
        sys,
        kind,
        Some(layout),
        0,
        (layout.row(LiftedLayout::X), 0),
        lmi,
        epsilon,
        with_trace,
    )
}

/// Convex analysis problem in `X` alone.
pub fn build_analysis(sys: &AugmentedSystem, epsilon: f64, with_trace: bool) -> Result<LmiProblem> {
    let m = 2 * sys.plant_modes;
    let mut b = ProblemBuilder::new();
    let xb = b.add_block(m, Cone::Free);
    let lmi = AffineLmi::probe(m, xb, (0, 0), true, &|x| assemble_analysis(sys, x))?;
    finish(
        b,
        sys,
        LmiKind::Analysis,
        None,
        xb,
        (0, 0),
        lmi,
        epsilon,
        with_trace,
    )
}

#[allow(clippy::too_many_arguments)]
fn finish(
    mut b: ProblemBuilder,
    sys: &AugmentedSystem,
    kind: LmiKind,
    layout: Option<LiftedLayout>,
    var_block: usize,
    x_origin: (usize, usize),
    lmi: AffineLmi,
    epsilon: f64,
    with_trace: bool,
) -> Result<LmiProblem> {
    let m = if kind == LmiKind::Analysis {
        2 * sys.plant_modes
    } else {
        sys.m
    };
    let lmi_slack = b.add_lmi(&lmi, epsilon);
    // X ⪰ εI
    let neg_x = AffineLmi::probe(m, var_block, x_origin, true, &|x| Ok(-x))?;
    let x_slack = b.add_lmi(&neg_x, epsilon);
    let noise = sys.noise_real().view((0, 0), (m, m)).into_owned();
    let trace = if with_trace {
        let s = b.add_block(1, Cone::Psd);
        let mut terms = Vec::new();
        for i in 0..m {
            for j in 0..m {
                if noise[(j, i)] != 0.0 {
                    terms.push((
                        Entry::new(var_block, x_origin.0 + i, x_origin.1 + j),
                        noise[(j, i)],
                    ));
                }
            }
        }
        terms.push((Entry::new(s, 0, 0), 1.0));
        let row = b.add_constraint(terms, 0.0);
        Some((row, s))
    } else {
        None
    };
    Ok(LmiProblem {
        kind,
        layout,
        problem: b.build()?,
        epsilon,
        beta: if with_trace { Some(0.0) } else { None },
        m,
        var_block,
        lmi,
        lmi_slack,
        x_slack,
        trace,
        noise,
        g: if kind == LmiKind::Analysis {
            DMatrix::zeros(m, m)
        } else {
            &sys.f_bar * sys.theta.transpose()
        },
    })
}

impl LmiProblem {
    pub fn has_trace(&self) -> bool {
        self.trace.is_some()
    }

    /// Same problem with the trace bound set to `beta`.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        let (row, _) = self.trace.ok_or_else(|| {
            Error::DimensionMismatch("problem was built without a trace bound".into())
        })?;
        let mut out = self.clone();
        out.problem = self.problem.with_rhs(row, beta)?;
        out.beta = Some(beta);
        Ok(out)
    }

    /// The lifted matrix `Z` (or `X` for analysis).
    pub fn z(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.problem.block(x, self.var_block)
    }

    fn xky(&self, x: &DVector<f64>) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
        let z = self.z(x);
        match &self.layout {
            None => (
                sym_part(&z),
                DMatrix::zeros(self.m, self.m),
                DMatrix::zeros(self.m, self.m),
            ),
            Some(l) => (
                sym_part(&l.block(&z, LiftedLayout::X, 0)),
                sym_part(&l.block(&z, LiftedLayout::K, 0)),
                l.block(&z, LiftedLayout::V2, 0),
            ),
        }
    }

    /// Extracts `(X, K, Y)` from a solver iterate.
    pub fn candidate(&self, sys: &AugmentedSystem, x: &DVector<f64>) -> Result<CandidateSolution> {
        let (xm, k, y) = self.xky(x);
        CandidateSolution::new(sys, xm, k, y)
    }

    /// `Tr(X Re B_w)` at a solver iterate.
    pub fn trace_value(&self, x: &DVector<f64>) -> f64 {
        let (xm, _, _) = self.xky(x);
        (xm * &self.noise).trace()
    }

    /// Certificate LMI evaluated at a solver iterate.
    pub fn lmi_value(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.lmi.evaluate(&self.problem, x)
    }

    /// Variable vector representing `sol` exactly (slacks projected onto
    /// their cones). Used to warm-start from a known solution.
    pub fn embed(&self, sol: &CandidateSolution) -> Result<DVector<f64>> {
        let m = self.m;
        if sol.m() != m {
            return Err(Error::DimensionMismatch(format!(
                "solution has size {}, problem needs {m}",
                sol.m()
            )));
        }
        let mut mats: Vec<DMatrix<f64>> = self
            .problem
            .blocks
            .iter()
            .map(|b| DMatrix::zeros(b.dim, b.dim))
            .collect();
        mats[self.var_block] = match &self.layout {
            None => sol.x.clone(),
            Some(l) => {
                let mut v = DMatrix::zeros(l.dim(), m);
                let v1 = &sol.k * &self.g;
                let v2 = &v1 * &sol.x;
                for (b, blk) in [
                    DMatrix::identity(m, m),
                    sol.x.clone(),
                    sol.k.clone(),
                    v1,
                    v2,
                ]
                .iter()
                .enumerate()
                {
                    v.view_mut((l.row(b), 0), (m, m)).copy_from(blk);
                }
                &v * v.transpose()
            }
        };
        let mut x = self.problem.pack(&mats)?;
        let lmi = self.lmi_value(&x);
        let eps = DMatrix::identity(lmi.nrows(), lmi.ncols()) * self.epsilon;
        mats[self.lmi_slack] = psd_project(&(-lmi - eps))?;
        mats[self.x_slack] = psd_project(&(&sol.x - DMatrix::identity(m, m) * self.epsilon))?;
        if let (Some((_, s)), Some(beta)) = (self.trace, self.beta) {
            mats[s][(0, 0)] = (beta - self.trace_value(&x)).max(0.0);
        }
        x = self.problem.pack(&mats)?;
        Ok(x)
    }

    /// Independent re-check of a lifted iterate against its literal
    /// constraints.
    pub fn lifted_check(&self, x: &DVector<f64>) -> Result<LiftedCheck> {
        let layout = self.layout.ok_or_else(|| {
            Error::DimensionMismatch("analysis problems carry no lifted matrix".into())
        })?;
        let z = self.z(x);
        let m = layout.m;
        let eig = sym_eig(&z)?;
        let n = eig.values.len();
        // Z ≈ V Vᵀ from the top m eigenpairs
        let mut v = DMatrix::zeros(n, m);
        for c in 0..m {
            let lam = eig.values[n - m + c].max(0.0).sqrt();
            v.set_column(c, &(eig.vectors.column(n - m + c) * lam));
        }
        let zf = &v * v.transpose();
        let zx1 = layout.block(&zf, LiftedLayout::X, 0);
        let zx2 = layout.block(&zf, LiftedLayout::K, 0);
        let zv1 = layout.block(&zf, LiftedLayout::V1, 0);
        let zv2 = layout.block(&zf, LiftedLayout::V2, 0);
        let lmi = self.lmi_value(x);
        Ok(LiftedCheck {
            dim: layout.dim(),
            rank_bound: layout.rank_bound(),
            equality_residual: self.problem.residual(x),
            z_min_eig: eig.values[0],
            rank_excess: if n > m {
                eig.values[n - m - 1].max(0.0)
            } else {
                0.0
            },
            identity_residual: (layout.block(&zf, 0, 0) - DMatrix::identity(m, m)).norm(),
            v1_residual: (&zv1 - &zx2 * &self.g).norm(),
            bilinear_residual: (&zv2 - &zv1 * &zx1).norm(),
            lmi_max_eig: crate::linalg::max_eig(&lmi)?,
            x_min_eig: min_eig(&sym_part(&zx1))?,
        })
    }
}

/// Literal constraints of the lifted problem re-evaluated on `Z ≈ VVᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedCheck {
    pub dim: usize,
    pub rank_bound: usize,
    pub equality_residual: f64,
    pub z_min_eig: f64,
    /// Eigenvalue `m + 1` (from the top) of `Z`.
    pub rank_excess: f64,
    pub identity_residual: f64,
    /// `‖Z_v1 − Z_x2 F̄ Θᵀ‖_F`
    pub v1_residual: f64,
    /// `‖Z_v2 − Z_v1 Z_x1‖_F`
    pub bilinear_residual: f64,
    pub lmi_max_eig: f64,
    pub x_min_eig: f64,
}

impl LiftedCheck {
    /// All literal constraints hold to `10·tol` and the LMI keeps half its margin.
    pub fn passes(&self, tol: f64, epsilon: f64) -> bool {
        let t = 10.0 * tol;
        self.equality_residual <= t
            && self.z_min_eig >= -t
            && self.rank_excess <= t
            && self.identity_residual <= t
            && self.v1_residual <= t
            && self.bilinear_residual <= t
            && self.lmi_max_eig <= -epsilon / 2.0
            && self.x_min_eig > 0.0
    }
}
