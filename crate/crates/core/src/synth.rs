//! Synthesis pipelines: robust analysis, static and dynamic synthesis,
//! and the feasibility threshold over a plant parameter.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{is_hurwitz, min_eig, solve_lyapunov};
use crate::lmi::{check_certificate, CandidateSolution, Certificate, LmiKind};
use crate::model::{build_drift, AugmentedSystem, DynamicControllerSpec, PlantModel};
use crate::par::{derive_seed, map_ordered, Execution};
use crate::rcsolve::{
    alternating_solve, bisect_beta, build_analysis, build_lifted, LiftedCheck, LmiProblem,
    SolveReport, SolveStatus, SolverOptions,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions {
    pub solver: SolverOptions,
    /// Bisection resolution on `β`.
    pub tol_beta: f64,
    /// Bisect `β` after the first feasible point (otherwise report its `λ`).
    pub minimize_bound: bool,
    /// Random restarts per `β` probe (the warm start always runs first).
    pub probe_restarts: usize,
    /// Random restarts per warm-started `κ` probe of a threshold search on
    /// static problems (dynamic probes rely on continuation alone).
    pub continuation_restarts: usize,
    /// Seed static synthesis with the analysis solution (`K = 0`) and
    /// dynamic synthesis with the static controller embedded in the
    /// augmented system. Guarantees dynamic ≤ static ≤ analysis bounds up to
    /// the embedding margin.
    pub warm_start: bool,
    /// Overrides the strictness margin `ε`.
    pub epsilon: Option<f64>,
    pub execution: Execution,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            tol_beta: 1e-3,
            minimize_bound: true,
            probe_restarts: 0,
            continuation_restarts: 2,
            warm_start: true,
            epsilon: None,
            execution: Execution::default(),
        }
    }
}

impl SynthOptions {
    fn epsilon(&self, sys: &AugmentedSystem) -> f64 {
        self.epsilon.unwrap_or_else(|| sys.epsilon())
    }

    fn probe_solver(&self, seed_key: u64) -> SolverOptions {
        SolverOptions {
            restarts: self.probe_restarts,
            seed: derive_seed(self.solver.seed, seed_key),
            ..self.solver.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomeStatus {
    /// Certified solution.
    Feasible,
    /// Refuted (convex analysis problem or a non-Hurwitz drift).
    Infeasible,
    /// The heuristic gave up; nothing is claimed.
    Unknown,
}

impl OutcomeStatus {
    pub fn name(self) -> &'static str {
        match self {
            OutcomeStatus::Feasible => "feasible",
            OutcomeStatus::Infeasible => "infeasible",
            OutcomeStatus::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthesisOutcome {
    pub kind: LmiKind,
    pub status: OutcomeStatus,
    pub controller: Option<CandidateSolution>,
    pub certificate: Option<Certificate>,
    /// Certified `λ + δ` (NaN unless feasible).
    pub bound: f64,
    /// Final bisection value (NaN unless feasible).
    pub beta_star: f64,
    /// Solver report that produced the returned controller (or the last failure).
    pub diagnostics: Option<SolveReport>,
    pub lifted: Option<LiftedCheck>,
    pub epsilon: f64,
    pub probes: usize,
    pub iterations: usize,
}

impl SynthesisOutcome {
    fn failed(
        kind: LmiKind,
        status: OutcomeStatus,
        epsilon: f64,
        report: Option<SolveReport>,
    ) -> Self {
        let iterations = report.as_ref().map_or(0, |r| r.iterations);
        Self {
            kind,
            status,
            controller: None,
            certificate: None,
            bound: f64::NAN,
            beta_star: f64::NAN,
            diagnostics: report,
            lifted: None,
            epsilon,
            probes: 0,
            iterations,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.status == OutcomeStatus::Feasible
    }

    /// Wraps a solution obtained elsewhere (e.g. loaded from disk). The
    /// status is `Feasible` only if the certificate re-checks.
    pub fn from_solution(kind: LmiKind, sys: &AugmentedSystem, sol: CandidateSolution) -> Self {
        let cert = check_certificate(kind, sys, &sol);
        let status = if cert.valid {
            OutcomeStatus::Feasible
        } else {
            OutcomeStatus::Unknown
        };
        Self {
            kind,
            status,
            bound: if cert.valid { cert.bound } else { f64::NAN },
            beta_star: f64::NAN,
            controller: Some(sol),
            certificate: Some(cert),
            diagnostics: None,
            lifted: None,
            epsilon: sys.epsilon(),
            probes: 0,
            iterations: 0,
        }
    }
}

/// A certified point of one LMI problem.
#[derive(Debug, Clone)]
struct Witness {
    sol: CandidateSolution,
    cert: Certificate,
    /// Checked against the problem that produced the witness.
    lifted: Option<LiftedCheck>,
    report: SolveReport,
}

fn certify(
    tp: &LmiProblem,
    sys: &AugmentedSystem,
    tol: f64,
    report: SolveReport,
) -> std::result::Result<Witness, SolveReport> {
    if report.status != SolveStatus::Feasible {
        return Err(report);
    }
    let Ok(sol) = tp.candidate(sys, &report.x) else {
        return Err(report);
    };
    let cert = check_certificate(tp.kind, sys, &sol);
    // The lifted literal constraints must hold as well.
    let lifted = tp.lifted_check(&report.x).ok();
    let lifted_ok = lifted.as_ref().is_none_or(|c| c.passes(tol, tp.epsilon));
    if cert.valid && lifted_ok {
        Ok(Witness {
            sol,
            cert,
            lifted,
            report,
        })
    } else {
        Err(report)
    }
}

fn problem_for(kind: LmiKind, sys: &AugmentedSystem, eps: f64, trace: bool) -> Result<LmiProblem> {
    match kind {
        LmiKind::Analysis => build_analysis(sys, eps, trace),
        _ => build_lifted(sys, kind, eps, trace),
    }
}

/// Feasibility solve, then bisection on `β` seeded by each new witness.
fn run_pipeline(
    kind: LmiKind,
    sys: &AugmentedSystem,
    opts: &SynthOptions,
    warm: Option<&CandidateSolution>,
) -> Result<SynthesisOutcome> {
    let eps = opts.epsilon(sys);
    if kind == LmiKind::Analysis && !is_hurwitz(&sys.plant_drift).hurwitz {
        return Ok(SynthesisOutcome::failed(
            kind,
            OutcomeStatus::Infeasible,
            eps,
            None,
        ));
    }
    let base = problem_for(kind, sys, eps, false)?;
    let mut start = None;
    if let Some(w) = warm {
        start = Some(base.embed(w)?);
    }
    let first = alternating_solve(&base.problem, &opts.solver, start.as_ref());
    let refuted = first.status == SolveStatus::Infeasible;
    let witness = match certify(&base, sys, opts.solver.tol, first) {
        Ok(w) => w,
        Err(report) => {
            let status = if refuted {
                OutcomeStatus::Infeasible
            } else {
                OutcomeStatus::Unknown
            };
            return Ok(SynthesisOutcome::failed(kind, status, eps, Some(report)));
        }
    };
    let mut iterations = witness.report.iterations;
    let mut best = witness;
    let mut beta_star = best.cert.lambda;
    let mut probes = 0;

    if opts.minimize_bound {
        let traced = problem_for(kind, sys, eps, true)?;
        let hi = best.cert.lambda.max(0.0);
        let mut current = best.clone();
        let mut count = 0u64;
        let mut probe = |beta: f64| -> Option<Witness> {
            count += 1;
            let tp = traced.with_beta(beta).ok()?;
            let start = tp.embed(&current.sol).ok()?;
            let report = alternating_solve(&tp.problem, &opts.probe_solver(count), Some(&start));
            iterations += report.iterations;
            let w = certify(&tp, sys, opts.solver.tol, report).ok()?;
            current = w.clone();
            Some(w)
        };
        let result = bisect_beta(&mut probe, 0.0, hi, opts.tol_beta)?;
        probes = result.probes;
        beta_star = result.beta;
        best = result.witness;
    }

    Ok(SynthesisOutcome {
        kind,
        status: OutcomeStatus::Feasible,
        lifted: best.lifted,
        bound: best.cert.bound,
        beta_star,
        controller: Some(best.sol),
        certificate: Some(best.cert),
        diagnostics: Some(best.report),
        epsilon: eps,
        probes,
        iterations,
    })
}

fn plant_only(plant: &PlantModel) -> Result<AugmentedSystem> {
    let d = plant.dim();
    build_drift(
        plant,
        &DynamicControllerSpec::static_controller(DMatrix::identity(d, d), 1.0)?,
    )
}

/// The structural data an LMI problem of `kind` is posed on (the
/// controller is ignored for analysis).
pub fn system_for(
    kind: LmiKind,
    plant: &PlantModel,
    ctrl: &DynamicControllerSpec,
) -> Result<AugmentedSystem> {
    match kind {
        LmiKind::Analysis => plant_only(plant),
        _ => build_drift(plant, ctrl),
    }
}

/// Robust performance of the uncontrolled plant.
pub fn analyze(plant: &PlantModel, opts: &SynthOptions) -> Result<SynthesisOutcome> {
    run_pipeline(LmiKind::Analysis, &plant_only(plant)?, opts, None)
}

/// Static controller `H_K = ½ xᵀ Fᵀ K F x`.
pub fn synthesize_static(
    plant: &PlantModel,
    ctrl: &DynamicControllerSpec,
    opts: &SynthOptions,
) -> Result<SynthesisOutcome> {
    synthesize_static_from(plant, ctrl, opts, None)
}

/// Static synthesis seeded by an analysis outcome for the same plant (with
/// `warm_start` set and no `warm`, the analysis problem is solved first).
pub fn synthesize_static_from(
    plant: &PlantModel,
    ctrl: &DynamicControllerSpec,
    opts: &SynthOptions,
    warm: Option<&SynthesisOutcome>,
) -> Result<SynthesisOutcome> {
    if !ctrl.is_static() {
        return Err(Error::InvalidModel(
            "static synthesis needs a controller without modes".into(),
        ));
    }
    let sys = build_drift(plant, ctrl)?;
    let computed;
    let warm = match warm {
        Some(w) => Some(w),
        None if opts.warm_start => {
            computed = analyze(plant, opts)?;
            Some(&computed)
        }
        None => None,
    };
    if let Some(seed) = warm.and_then(|w| w.controller.as_ref()) {
        let out = run_pipeline(LmiKind::Static, &sys, opts, Some(seed))?;
        if out.is_feasible() {
            return Ok(out);
        }
    }
    run_pipeline(LmiKind::Static, &sys, opts, None)
}

/// Dynamic controller. `warm` may carry a static outcome for the same plant;
/// with `warm_start` set and no `warm`, a static problem is solved first.
pub fn synthesize_dynamic(
    plant: &PlantModel,
    ctrl: &DynamicControllerSpec,
    opts: &SynthOptions,
    warm: Option<&SynthesisOutcome>,
) -> Result<SynthesisOutcome> {
    if ctrl.is_static() {
        return Err(Error::InvalidModel(
            "dynamic synthesis needs at least one controller mode".into(),
        ));
    }
    let sys = build_drift(plant, ctrl)?;
    let computed;
    let warm = match warm {
        Some(w) => Some(w),
        None if opts.warm_start => {
            let st = DynamicControllerSpec::static_controller(ctrl.interface.clone(), ctrl.rho)?;
            computed = synthesize_static(plant, &st, opts)?;
            Some(&computed)
        }
        None => None,
    };
    let embedded = warm
        .and_then(|w| w.controller.as_ref())
        .and_then(|s| embed_static(&sys, s, opts.epsilon(&sys)).ok());
    if let Some(seed) = &embedded {
        let out = run_pipeline(LmiKind::Dynamic, &sys, opts, Some(seed))?;
        if out.is_feasible() {
            return Ok(out);
        }
    }
    run_pipeline(LmiKind::Dynamic, &sys, opts, None)
}

/// Embeds a static solution into the augmented system with `K₁₂ = K₂₂ = 0`
/// and a small `X₂₂` that makes the controller block strictly stable.
pub fn embed_static(
    sys: &AugmentedSystem,
    sol: &CandidateSolution,
    epsilon: f64,
) -> Result<CandidateSolution> {
    let dp = 2 * sys.plant_modes;
    if sol.m() != dp {
        return Err(Error::DimensionMismatch(format!(
            "static solution has size {}, plant has {dp}",
            sol.m()
        )));
    }
    let x22 = idle_controller_block(sys, epsilon)?;
    let dk = x22.nrows();
    let mut x = DMatrix::zeros(sys.m, sys.m);
    x.view_mut((0, 0), (dp, dp)).copy_from(&sol.x);
    x.view_mut((dp, dp), (dk, dk)).copy_from(&x22);
    let mut k = DMatrix::zeros(sys.m, sys.m);
    k.view_mut((0, 0), (dp, dp)).copy_from(&sol.k);
    let y = &k * &sys.f_bar * sys.theta.transpose() * &x;
    CandidateSolution::new(sys, x, k, y)
}

/// `X₂₂ = tP` with `AₖᵀP + PAₖ = −I`, the smallest multiple for which the
/// decoupled controller block meets both strict margins.
fn idle_controller_block(sys: &AugmentedSystem, epsilon: f64) -> Result<DMatrix<f64>> {
    let dp = 2 * sys.plant_modes;
    let dk = sys.m - dp;
    let a_k = sys.a_bar.view((dp, dp), (dk, dk)).into_owned();
    let p = solve_lyapunov(&a_k.transpose(), &DMatrix::identity(dk, dk))?;
    let pmin = min_eig(&p)?;
    if pmin <= 0.0 {
        return Err(Error::NotHurwitz);
    }
    // Aₖᵀ(tP) + (tP)Aₖ = −tI ⪯ −2εI and tP ⪰ 2εI
    let t = 2.0 * epsilon * (1.0f64).max(1.0 / pmin);
    Ok(p * t)
}

/// Bound increase `Tr(X₂₂ Re B_w)` that [`embed_static`] pays for keeping
/// the idle controller modes strictly inside the LMI. A dynamic bound
/// obtained from an embedded static solution can exceed the static bound by
/// this much.
pub fn embedding_cost(sys: &AugmentedSystem, epsilon: f64) -> Result<f64> {
    let dp = 2 * sys.plant_modes;
    let x22 = idle_controller_block(sys, epsilon)?;
    let dk = x22.nrows();
    let b = sys.noise_real().view((dp, dp), (dk, dk)).into_owned();
    Ok((x22 * b).trace())
}

/// Seeds the plant/controller cross block of `K` with small deterministic
/// noise. A warm start with `K₁₂ = 0` is a fixed point of the controller
/// sign flip, and both projections commute with that flip, so alternating
/// projections started there never leave the decoupled subspace.
pub fn break_symmetry(
    sys: &AugmentedSystem,
    sol: &CandidateSolution,
    scale: f64,
    seed: u64,
) -> Result<CandidateSolution> {
    use rand::{Rng, SeedableRng};
    let dp = 2 * sys.plant_modes;
    let dk = sys.m - dp;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut k = sol.k.clone();
    for i in 0..dp {
        for j in dp..dp + dk {
            let v = scale * rng.random_range(-1.0..1.0);
            k[(i, j)] += v;
            k[(j, i)] += v;
        }
    }
    let y = &k * &sys.f_bar * sys.theta.transpose() * &sol.x;
    CandidateSolution::new(sys, sol.x.clone(), k, y)
}

/// Outcome of a threshold search.
#[derive(Debug, Clone)]
pub struct ThresholdResult {
    pub kind: LmiKind,
    /// Smallest parameter value certified feasible.
    pub threshold: f64,
    /// Largest value found infeasible (or not certified).
    pub lower: f64,
    pub presweep: Vec<(f64, bool)>,
    pub probes: usize,
    /// Certified solution at `threshold`.
    pub witness: CandidateSolution,
}

/// Parameter family `κ ↦ (plant, controller)`.
pub trait PlantFamily: Sync {
    fn plant(&self, kappa: f64) -> Result<PlantModel>;
    fn controller(&self, kind: LmiKind) -> Result<DynamicControllerSpec>;
}

const CROSS_SEED_SCALE: f64 = 0.3;

/// Feasibility only (no bound minimization). With `warm`, a continuation
/// attempt from that nearby solution plus `continuation_restarts` random
/// starts; without it, the full warm-start chain.
pub fn certify_feasible(
    kind: LmiKind,
    plant: &PlantModel,
    ctrl: &DynamicControllerSpec,
    opts: &SynthOptions,
    warm: Option<&CandidateSolution>,
) -> Result<Option<CandidateSolution>> {
    let opts = SynthOptions {
        minimize_bound: false,
        ..opts.clone()
    };
    let sys = system_for(kind, plant, ctrl)?;
    let out = match warm {
        Some(w) => {
            let with_restarts = |restarts| SynthOptions {
                solver: SolverOptions {
                    restarts,
                    ..opts.solver.clone()
                },
                ..opts.clone()
            };
            let quick = with_restarts(opts.continuation_restarts);
            let own = if kind == LmiKind::Dynamic {
                with_restarts(0)
            } else {
                quick.clone()
            };
            let start = if kind == LmiKind::Dynamic && !sys.is_static() {
                break_symmetry(&sys, w, CROSS_SEED_SCALE, opts.solver.seed)?
            } else {
                w.clone()
            };
            let out = run_pipeline(kind, &sys, &own, Some(&start))?;
            if out.is_feasible() || kind != LmiKind::Dynamic {
                out
            } else {
                // Static continuation from the plant block, then embed.
                let dp = 2 * plant.modes;
                let static_ctrl =
                    DynamicControllerSpec::static_controller(ctrl.interface.clone(), ctrl.rho)?;
                let static_sys = build_drift(plant, &static_ctrl)?;
                let plant_block = CandidateSolution::new(
                    &static_sys,
                    w.x.view((0, 0), (dp, dp)).into_owned(),
                    w.k.view((0, 0), (dp, dp)).into_owned(),
                    w.y.view((0, 0), (dp, dp)).into_owned(),
                )?;
                let st = run_pipeline(LmiKind::Static, &static_sys, &quick, Some(&plant_block))?;
                match st.controller.as_ref().filter(|_| st.is_feasible()) {
                    Some(c) => run_pipeline(
                        kind,
                        &sys,
                        &own,
                        Some(&embed_static(&sys, c, quick.epsilon(&sys))?),
                    )?,
                    None => out,
                }
            }
        }
        None => match kind {
            LmiKind::Analysis => analyze(plant, &opts)?,
            LmiKind::Static => synthesize_static(plant, ctrl, &opts)?,
            LmiKind::Dynamic => synthesize_dynamic(plant, ctrl, &opts, None)?,
        },
    };
    let ok = out.is_feasible();
    Ok(out.controller.filter(|_| ok))
}

fn feasible_at<F: PlantFamily>(
    kind: LmiKind,
    family: &F,
    kappa: f64,
    opts: &SynthOptions,
    warm: Option<&CandidateSolution>,
) -> Result<Option<CandidateSolution>> {
    let probe_opts = SynthOptions {
        solver: SolverOptions {
            seed: derive_seed(opts.solver.seed, kappa.to_bits()),
            ..opts.solver.clone()
        },
        ..opts.clone()
    };
    certify_feasible(
        kind,
        &family.plant(kappa)?,
        &family.controller(kind)?,
        &probe_opts,
        warm,
    )
}

/// Bisection on `κ` for the boundary of the feasible range `(κ*, hi]`.
/// A five-point pre-sweep checks that feasibility is monotone.
pub fn feasibility_threshold<F: PlantFamily>(
    kind: LmiKind,
    family: &F,
    lo: f64,
    hi: f64,
    tol_kappa: f64,
    opts: &SynthOptions,
) -> Result<ThresholdResult> {
    if !(lo < hi && tol_kappa > 0.0) {
        return Err(Error::BracketInvalid(format!(
            "need lo < hi and tol > 0, got [{lo}, {hi}], tol {tol_kappa}"
        )));
    }
    let points: Vec<f64> = (0..5).map(|i| lo + (hi - lo) * i as f64 / 4.0).collect();
    let results: Vec<Result<Option<CandidateSolution>>> =
        map_ordered(opts.execution, &points, |&k| {
            feasible_at(kind, family, k, opts, None)
        });
    let mut sweep = Vec::with_capacity(5);
    for (k, r) in points.iter().zip(results) {
        sweep.push((*k, r?));
    }
    let presweep: Vec<(f64, bool)> = sweep.iter().map(|(k, w)| (*k, w.is_some())).collect();
    if !presweep[4].1 {
        return Err(Error::BracketInvalid(format!(
            "upper end {hi} is not feasible"
        )));
    }
    if presweep[0].1 {
        return Err(Error::BracketInvalid(format!(
            "lower end {lo} is already feasible"
        )));
    }
    let first = presweep
        .iter()
        .position(|(_, f)| *f)
        .expect("upper end is feasible");
    if presweep[first..].iter().any(|(_, f)| !f) {
        return Err(Error::NonMonotone(format!("pre-sweep {presweep:?}")));
    }
    let (mut a, mut b) = (points[first - 1], points[first]);
    let mut witness = sweep
        .swap_remove(first)
        .1
        .expect("feasible point carries a witness");
    let mut probes = 5;
    while b - a > tol_kappa {
        let mid = 0.5 * (a + b);
        probes += 1;
        match feasible_at(kind, family, mid, opts, Some(&witness))? {
            Some(w) => {
                b = mid;
                witness = w;
            }
            None => a = mid,
        }
    }
    Ok(ThresholdResult {
        kind,
        threshold: b,
        lower: a,
        presweep,
        probes,
        witness,
    })
}
