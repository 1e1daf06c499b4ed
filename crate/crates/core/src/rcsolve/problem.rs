//! Generic feasibility problem: a stacked vector of matrix blocks, each in a
//! cone, subject to linear equalities on the block entries.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{smat, svec, svec_index, svec_len, sym_eig, sym_eig_warm, AffineProjector};

use std::f64::consts::FRAC_1_SQRT_2;

/// Set a block is projected onto.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cone {
    Free,
    Psd,
    /// PSD with rank at most the given bound.
    RankPsd(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeBlock {
    pub dim: usize,
    pub offset: usize,
    pub cone: Cone,
}

impl ConeBlock {
    pub fn len(&self) -> usize {
        svec_len(self.dim)
    }

    pub fn is_empty(&self) -> bool {
        self.dim == 0
    }
}

/// Symmetric entry `(i, j)` of block `block`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Entry {
    pub block: usize,
    pub i: usize,
    pub j: usize,
}

impl Entry {
    pub fn new(block: usize, i: usize, j: usize) -> Self {
        Self { block, i, j }
    }
}

/// `Σ coef · entry = rhs`
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearConstraint {
    pub terms: Vec<(Entry, f64)>,
    pub rhs: f64,
}

/// Affine symmetric-matrix map `L = L₀ + Σ value(entry) · Lₖ`.
#[derive(Debug, Clone)]
pub struct AffineLmi {
    pub constant: DMatrix<f64>,
    pub terms: Vec<(Entry, DMatrix<f64>)>,
}

impl AffineLmi {
    pub fn dim(&self) -> usize {
        self.constant.nrows()
    }

    /// Builds the map by probing an affine function of one symmetric matrix
    /// variable whose entries live in `block` starting at `(row0, col0)`.
    /// When `symmetric` the variable is `sym(W)`; otherwise `W` itself.
    pub fn probe(
        n: usize,
        block: usize,
        origin: (usize, usize),
        symmetric: bool,
        f: &dyn Fn(&DMatrix<f64>) -> Result<DMatrix<f64>>,
    ) -> Result<Self> {
        let constant = f(&DMatrix::zeros(n, n))?;
        let mut terms = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let mut e = DMatrix::zeros(n, n);
                if symmetric {
                    e[(i, j)] += 0.5;
                    e[(j, i)] += 0.5;
                } else {
                    e[(i, j)] = 1.0;
                }
                let delta = f(&e)? - &constant;
                if delta.amax() > 0.0 {
                    terms.push((Entry::new(block, origin.0 + i, origin.1 + j), delta));
                }
            }
        }
        Ok(Self { constant, terms })
    }

    /// Sum of maps with a shared constant term counted once.
    pub fn merge(mut self, other: AffineLmi) -> Self {
        self.terms.extend(other.terms);
        self
    }

    pub fn evaluate(&self, problem: &RcProblem, x: &DVector<f64>) -> DMatrix<f64> {
        let mut out = self.constant.clone();
        for (e, m) in &self.terms {
            out += m * problem.entry_value(x, *e);
        }
        out
    }
}

/// Collects blocks and constraints, then factors the equality system once.
#[derive(Debug, Default)]
pub struct ProblemBuilder {
    blocks: Vec<ConeBlock>,
    constraints: Vec<LinearConstraint>,
    nvars: usize,
}

impl ProblemBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_block(&mut self, dim: usize, cone: Cone) -> usize {
        self.blocks.push(ConeBlock {
            dim,
            offset: self.nvars,
            cone,
        });
        self.nvars += svec_len(dim);
        self.blocks.len() - 1
    }

    /// Returns the constraint's row index.
    pub fn add_constraint(&mut self, terms: Vec<(Entry, f64)>, rhs: f64) -> usize {
        self.constraints.push(LinearConstraint { terms, rhs });
        self.constraints.len() - 1
    }

    /// Adds `L + S + εI = 0` with a fresh PSD slack block `S`, i.e. `L ⪯ −εI`.
    /// Returns the slack block index.
    pub fn add_lmi(&mut self, lmi: &AffineLmi, epsilon: f64) -> usize {
        let n = lmi.dim();
        let slack = self.add_block(n, Cone::Psd);
        for p in 0..n {
            for q in p..n {
                let mut terms: Vec<(Entry, f64)> = lmi
                    .terms
                    .iter()
                    .filter(|(_, m)| m[(p, q)] != 0.0)
                    .map(|(e, m)| (*e, m[(p, q)]))
                    .collect();
                terms.push((Entry::new(slack, p, q), 1.0));
                let shift = if p == q { epsilon } else { 0.0 };
                self.add_constraint(terms, -lmi.constant[(p, q)] - shift);
            }
        }
        slack
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn build(self) -> Result<RcProblem> {
        let mut c = DMatrix::zeros(self.constraints.len(), self.nvars);
        let mut d = DVector::zeros(self.constraints.len());
        for (row, con) in self.constraints.iter().enumerate() {
            for (e, coef) in &con.terms {
                let b = self.blocks.get(e.block).ok_or_else(|| {
                    Error::DimensionMismatch(format!(
                        "constraint {row} names missing block {}",
                        e.block
                    ))
                })?;
                if e.i >= b.dim || e.j >= b.dim {
                    return Err(Error::DimensionMismatch(format!(
                        "constraint {row} entry ({}, {}) outside block of size {}",
                        e.i, e.j, b.dim
                    )));
                }
                let w = if e.i == e.j { 1.0 } else { FRAC_1_SQRT_2 };
                c[(row, b.offset + svec_index(b.dim, e.i, e.j))] += coef * w;
            }
            d[row] = con.rhs;
        }
        let projector = AffineProjector::new(c)?;
        projector.check_consistent(&d)?;
        Ok(RcProblem {
            blocks: self.blocks,
            nvars: self.nvars,
            projector: Arc::new(projector),
            rhs: d,
        })
    }
}

/// Equalities plus cones. The factored equality system is shared between
/// clones, so re-targeting a right-hand side is cheap.
#[derive(Debug, Clone)]
pub struct RcProblem {
    pub blocks: Vec<ConeBlock>,
    pub nvars: usize,
    projector: Arc<AffineProjector>,
    rhs: DVector<f64>,
}

impl RcProblem {
    pub fn num_constraints(&self) -> usize {
        self.rhs.len()
    }

    pub fn constraint_rank(&self) -> usize {
        self.projector.rank()
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.rhs
    }

    /// Copy with row `row` of the right-hand side replaced.
    pub fn with_rhs(&self, row: usize, value: f64) -> Result<Self> {
        let mut out = self.clone();
        out.rhs[row] = value;
        out.projector.check_consistent(&out.rhs)?;
        Ok(out)
    }

    /// No rank-restricted blocks: alternating projections then converge to
    /// a feasible point or certify a positive gap.
    pub fn is_convex(&self) -> bool {
        self.blocks
            .iter()
            .all(|b| !matches!(b.cone, Cone::RankPsd(r) if r < b.dim))
    }

    pub fn block(&self, x: &DVector<f64>, index: usize) -> DMatrix<f64> {
        let b = &self.blocks[index];
        smat(&x.as_slice()[b.offset..b.offset + b.len()], b.dim)
    }

    pub fn entry_value(&self, x: &DVector<f64>, e: Entry) -> f64 {
        let b = &self.blocks[e.block];
        let w = if e.i == e.j { 1.0 } else { FRAC_1_SQRT_2 };
        x[b.offset + svec_index(b.dim, e.i, e.j)] * w
    }

    /// Assembles a full variable vector from per-block matrices.
    pub fn pack(&self, mats: &[DMatrix<f64>]) -> Result<DVector<f64>> {
        if mats.len() != self.blocks.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} blocks supplied, problem has {}",
                mats.len(),
                self.blocks.len()
            )));
        }
        let mut x = DVector::zeros(self.nvars);
        for (b, m) in self.blocks.iter().zip(mats) {
            if m.shape() != (b.dim, b.dim) {
                return Err(Error::DimensionMismatch(format!(
                    "block of size {} given a {}x{} matrix",
                    b.dim,
                    m.nrows(),
                    m.ncols()
                )));
            }
            x.rows_mut(b.offset, b.len()).copy_from(&svec(m));
        }
        Ok(x)
    }

    /// `C x − d`
    pub fn constraint_violation(&self, x: &DVector<f64>) -> DVector<f64> {
        self.projector.constraint_matrix() * x - &self.rhs
    }

    /// `‖C x − d‖∞`
    pub fn residual(&self, x: &DVector<f64>) -> f64 {
        self.projector.residual(x, &self.rhs)
    }

    pub fn project_affine(&self, x: &DVector<f64>) -> DVector<f64> {
        self.projector.project(x, &self.rhs)
    }

    /// Affine projection given a precomputed violation `C x − d`.
    pub(crate) fn project_affine_from(
        &self,
        x: &DVector<f64>,
        violation: &DVector<f64>,
    ) -> DVector<f64> {
        x - self.projector.pseudo_inverse() * violation
    }

    /// Projects every block onto its cone. `warm` carries eigenbases between
    /// calls and may be empty.
    pub fn project_cones(
        &self,
        x: &DVector<f64>,
        warm: &mut Vec<Option<DMatrix<f64>>>,
    ) -> DVector<f64> {
        warm.resize(self.blocks.len(), None);
        let mut out = x.clone();
        for (k, b) in self.blocks.iter().enumerate() {
            let keep = match b.cone {
                Cone::Free => continue,
                Cone::Psd => b.dim,
                Cone::RankPsd(r) => r.min(b.dim),
            };
            if b.dim == 1 {
                out[b.offset] = if keep == 0 { 0.0 } else { x[b.offset].max(0.0) };
                continue;
            }
            let s = smat(&x.as_slice()[b.offset..b.offset + b.len()], b.dim);
            let eig = match &warm[k] {
                Some(basis) => sym_eig_warm(&s, basis),
                None => sym_eig(&s),
            }
            .expect("smat output is symmetric");
            let cut = b.dim - keep;
            let projected = eig.reconstruct_with(|j, v| if j >= cut { v.max(0.0) } else { 0.0 });
            out.rows_mut(b.offset, b.len()).copy_from(&svec(&projected));
            warm[k] = Some(eig.vectors);
        }
        out
    }
}
