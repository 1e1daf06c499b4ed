//! Alternating projections between the affine equality set and the cones.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::problem::{AffineLmi, Cone, ProblemBuilder, RcProblem};
use crate::error::Result;
use crate::par::derive_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Iteration cap for a single start.
    pub max_iter: usize,
    /// Bound on the equality residual of the cone iterate.
    pub tol: f64,
    /// Extra random starts after the first one stalls.
    pub restarts: usize,
    pub seed: u64,
    /// A start is stalled when the gap fails to shrink by `stall_ratio`
    /// over this many iterations.
    pub stall_window: usize,
    pub stall_ratio: f64,
    /// Standard deviation of random starting points.
    pub start_scale: f64,
    /// Over-relaxed affine step `x + α (P_affine x − x)`; `1` is plain alternation.
    pub relaxation: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iter: 20_000,
            tol: 1e-7,
            restarts: 20,
            seed: 0,
            stall_window: 500,
            stall_ratio: 0.99,
            start_scale: 1.0,
            relaxation: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Feasible,
    /// Budget exhausted without convergence; says nothing about feasibility.
    MaxIterations,
    /// Only returned for convex problems.
    Infeasible,
}

impl SolveStatus {
    pub fn name(self) -> &'static str {
        match self {
            SolveStatus::Feasible => "feasible",
            SolveStatus::MaxIterations => "max_iterations",
            SolveStatus::Infeasible => "infeasible",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// Final cone iterate (the stacked variable vector).
    pub x: DVector<f64>,
    pub iterations: usize,
    pub restarts: usize,
    /// Distance between the last affine and cone iterates.
    pub final_gap: f64,
    /// `‖C x − d‖∞` at `x`.
    pub residual: f64,
}

impl SolveReport {
    pub fn is_feasible(&self) -> bool {
        self.status == SolveStatus::Feasible
    }
}

enum Attempt {
    Converged,
    Stalled,
    Exhausted,
}

fn random_start(n: usize, scale: f64, seed: u64) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DVector::from_fn(n, |_, _| {
        let g: f64 = StandardNormal.sample(&mut rng);
        g * scale
    })
}

/// Runs alternating projections from `warm` (or a seeded random point),
/// restarting from fresh seeded points when progress stalls.
pub fn alternating_solve(
    problem: &RcProblem,
    opts: &SolverOptions,
    warm: Option<&DVector<f64>>,
) -> SolveReport {
    let convex = problem.is_convex();
    let mut total = 0;
    let mut best: Option<(f64, DVector<f64>, f64)> = None;
    for attempt in 0..=opts.restarts {
        let start = match (attempt, warm) {
            (0, Some(w)) if w.len() == problem.nvars => w.clone(),
            _ => random_start(
                problem.nvars,
                opts.start_scale,
                derive_seed(opts.seed, attempt as u64),
            ),
        };
        let (outcome, x, gap, residual, iters) = run_attempt(problem, opts, start);
        total += iters;
        match outcome {
            Attempt::Converged => {
                return SolveReport {
                    status: SolveStatus::Feasible,
                    x,
                    iterations: total,
                    restarts: attempt,
                    final_gap: gap,
                    residual,
                };
            }
            Attempt::Stalled if convex => {
                // The gap of a convex pair converges to the set distance; a
                // plateau well above tolerance separates the sets.
                return SolveReport {
                    status: if gap > 10.0 * opts.tol {
                        SolveStatus::Infeasible
                    } else {
                        SolveStatus::MaxIterations
                    },
                    x,
                    iterations: total,
                    restarts: attempt,
                    final_gap: gap,
                    residual,
                };
            }
            _ => {
                if best.as_ref().is_none_or(|(g, _, _)| gap < *g) {
                    best = Some((gap, x, residual));
                }
                if convex {
                    break;
                }
            }
        }
    }
    let (gap, x, residual) = best.expect("at least one attempt runs");
    SolveReport {
        status: SolveStatus::MaxIterations,
        x,
        iterations: total,
        restarts: if convex { 0 } else { opts.restarts },
        final_gap: gap,
        residual,
    }
}

fn run_attempt(
    problem: &RcProblem,
    opts: &SolverOptions,
    start: DVector<f64>,
) -> (Attempt, DVector<f64>, f64, f64, usize) {
    let mut warm: Vec<Option<DMatrix<f64>>> = Vec::new();
    let mut x = problem.project_cones(&start, &mut warm);
    let mut window_gap = f64::INFINITY;
    let mut gap = f64::INFINITY;
    for it in 0..opts.max_iter {
        let violation = problem.constraint_violation(&x);
        let residual = violation.amax();
        if residual <= opts.tol {
            return (Attempt::Converged, x, gap.min(residual), residual, it);
        }
        let mut a = problem.project_affine_from(&x, &violation);
        if opts.relaxation != 1.0 {
            a = &x + (&a - &x) * opts.relaxation;
        }
        let c = problem.project_cones(&a, &mut warm);
        gap = (&c - &a).norm();
        x = c;
        if !gap.is_finite() {
            return (Attempt::Stalled, x, gap, residual, it + 1);
        }
        if (it + 1) % opts.stall_window == 0 {
            if gap > opts.stall_ratio * window_gap {
                return (Attempt::Stalled, x, gap, residual, it + 1);
            }
            window_gap = gap;
        }
    }
    let residual = problem.residual(&x);
    if residual <= opts.tol {
        return (Attempt::Converged, x, gap, residual, opts.max_iter);
    }
    (Attempt::Exhausted, x, gap, residual, opts.max_iter)
}

/// Feasibility of `L(X) ⪯ −εI` for an affine map in one free symmetric
/// variable of size `n` (block `0`).
pub fn convex_feasibility(
    lmi: &AffineLmi,
    n: usize,
    epsilon: f64,
    opts: &SolverOptions,
) -> Result<SolveReport> {
    let mut b = ProblemBuilder::new();
    b.add_block(n, Cone::Free);
    b.add_lmi(lmi, epsilon);
    let problem = b.build()?;
    Ok(alternating_solve(&problem, opts, None))
}
