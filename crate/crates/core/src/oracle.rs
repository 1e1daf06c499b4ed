//! Ground truth for the guaranteed bounds: sample admissible perturbations,
//! form the perturbed closed loop and compute its stationary cost from a
//! Lyapunov equation.
//!
//! The diffusion term of the covariance equation is taken to be `Re(B_w)`.
//! That identification is checked by [`self_validate`] rather than assumed:
//! for any `X` feasible for the analysis LMI, `Tr(W P) ≤ Tr(X Re B_w) + δ`
//! must hold for every admissible `Δ`. The value checked is the stationary
//! covariance cost; for a Hurwitz closed loop it equals the long-run average.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{is_hurwitz, min_eig, solve_lyapunov};
use crate::lmi::{
    check_certificate, lambda_of, noise_for, plant_blocks, CandidateSolution, LmiKind,
};
use crate::model::{
    build_drift, AugmentedSystem, DynamicControllerSpec, PlantModel, UncertaintySample, C64,
};
use crate::par::{derive_seed, map_ordered, Execution};
use crate::synth::SynthesisOutcome;

/// Random symmetric `p × p` perturbation: GOE direction scaled to norm
/// `u·(2/γ)` with `u` uniform on `[0, 1]`.
pub fn sample_delta(p: usize, gamma: f64, seed: u64) -> Result<UncertaintySample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::<f64>::from_fn(p, p, |_, _| rng.sample(StandardNormal));
    let s = (&g + g.transpose()) * 0.5;
    let norm = s.symmetric_eigenvalues().amax();
    let u: f64 = rng.random_range(0.0..=1.0);
    let delta = if norm > 0.0 {
        s * (u * 2.0 / gamma / norm)
    } else {
        s
    };
    UncertaintySample::new(delta, gamma)
}

/// `n` samples for one sweep. The first two are always `±(2/γ)I`.
pub fn sample_batch(p: usize, gamma: f64, n: usize, seed: u64) -> Result<Vec<UncertaintySample>> {
    let edge = DMatrix::identity(p, p) * (2.0 / gamma);
    let mut out = vec![
        UncertaintySample::new(edge.clone(), gamma)?,
        UncertaintySample::new(-edge, gamma)?,
    ];
    for i in 2..n.max(2) {
        out.push(sample_delta(p, gamma, derive_seed(seed, i as u64))?);
    }
    Ok(out)
}

/// The blocks of `sys` a solution of size `d` lives on: the full loop, or
/// the plant alone for analysis.
struct Loop {
    a: DMatrix<f64>,
    theta: DMatrix<f64>,
    e: DMatrix<f64>,
    r: DMatrix<f64>,
    f: DMatrix<f64>,
}

fn loop_for(sys: &AugmentedSystem, d: usize) -> Result<Loop> {
    if d == sys.m {
        Ok(Loop {
            a: sys.a_bar.clone(),
            theta: sys.theta.clone(),
            e: sys.e_bar.clone(),
            r: sys.r_bar.clone(),
            f: sys.f_bar.clone(),
        })
    } else if d == 2 * sys.plant_modes {
        let (a, theta, e, r) = plant_blocks(sys);
        let f = sys.f_bar.view((0, 0), (d, d)).into_owned();
        Ok(Loop { a, theta, e, r, f })
    } else {
        Err(Error::DimensionMismatch(format!(
            "controller has dimension {d}, system has {}",
            sys.m
        )))
    }
}

/// `Ā + 2Θ(ĒᵀΔĒ + F̄ᵀKF̄)`. `K` may be plant-sized, in which case the
/// plant loop alone is formed.
pub fn closed_loop(
    sys: &AugmentedSystem,
    k: &DMatrix<f64>,
    delta: &UncertaintySample,
) -> Result<DMatrix<f64>> {
    let l = loop_for(sys, k.nrows())?;
    if k.ncols() != k.nrows()
        || delta.delta.nrows() != l.e.nrows()
        || delta.delta.ncols() != l.e.nrows()
    {
        return Err(Error::DimensionMismatch(format!(
            "K is {}x{}, Δ is {}x{}, E has {} rows",
            k.nrows(),
            k.ncols(),
            delta.delta.nrows(),
            delta.delta.ncols(),
            l.e.nrows()
        )));
    }
    let h = l.e.transpose() * &delta.delta * &l.e + l.f.transpose() * k * &l.f;
    Ok(&l.a + &l.theta * h * 2.0)
}

/// `W = R̄ + ρ(F̄ᵀKF̄)²`
pub fn cost_weight(sys: &AugmentedSystem, k: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let l = loop_for(sys, k.nrows())?;
    let fkf = l.f.transpose() * k * &l.f;
    Ok(l.r + &fkf * &fkf * sys.rho)
}

/// `Tr(W P)` with `A P + P Aᵀ + B = 0`.
pub fn true_cost(a_cl: &DMatrix<f64>, b_w: &DMatrix<f64>, w: &DMatrix<f64>) -> Result<f64> {
    if !is_hurwitz(a_cl).hurwitz {
        return Err(Error::NotHurwitz);
    }
    let p = solve_lyapunov(a_cl, b_w)?;
    Ok((w * p).trace())
}

#[derive(Debug, Clone)]
pub struct CostEvaluation {
    pub delta: UncertaintySample,
    pub closed_loop_a: DMatrix<f64>,
    pub hurwitz: bool,
    /// NaN when the closed loop is not Hurwitz.
    pub true_cost: f64,
    pub bound: f64,
    pub margin: f64,
}

impl CostEvaluation {
    /// Hurwitz and `true_cost ≤ bound + 1e−6·(1 + bound)`.
    pub fn sound(&self) -> bool {
        self.hurwitz && self.true_cost <= self.bound + 1e-6 * (1.0 + self.bound)
    }
}

/// Evaluates `sol` against one perturbation.
pub fn evaluate(
    sys: &AugmentedSystem,
    sol: &CandidateSolution,
    bound: f64,
    delta: UncertaintySample,
) -> Result<CostEvaluation> {
    let a = closed_loop(sys, &sol.k, &delta)?;
    let b = noise_for(sys, sol.m())?.map(|z| z.re);
    let w = cost_weight(sys, &sol.k)?;
    let (hurwitz, cost) = match true_cost(&a, &b, &w) {
        Ok(c) => (true, c),
        Err(Error::NotHurwitz | Error::SingularLyapunov) => (false, f64::NAN),
        Err(e) => return Err(e),
    };
    Ok(CostEvaluation {
        delta,
        closed_loop_a: a,
        hurwitz,
        true_cost: cost,
        bound,
        margin: bound - cost,
    })
}

/// `n_samples` perturbations (including both extremal ones) against a
/// feasible outcome. Refuses outcomes whose certificate does not re-check.
pub fn robustness_sweep(
    sys: &AugmentedSystem,
    outcome: &SynthesisOutcome,
    n_samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<CostEvaluation>> {
    let sol = outcome
        .controller
        .as_ref()
        .filter(|_| outcome.is_feasible())
        .ok_or(Error::UntrustedCertificate)?;
    let cert = check_certificate(outcome.kind, sys, sol);
    if !cert.valid {
        return Err(Error::UntrustedCertificate);
    }
    let batch = sample_batch(sys.uncertainty_rows(), sys.gamma, n_samples, seed)?;
    map_ordered(exec, &batch, |d| evaluate(sys, sol, cert.bound, d.clone()))
        .into_iter()
        .collect()
}

/// One randomly drawn analysis problem with a feasible `X`.
#[derive(Debug, Clone)]
pub struct ValidationInstance {
    pub system: AugmentedSystem,
    pub solution: CandidateSolution,
    pub lambda: f64,
    /// Largest `Tr(W P)` over the sampled perturbations.
    pub worst_cost: f64,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub instances: Vec<ValidationInstance>,
    /// Draws rejected before a feasible `X` was found.
    pub rejected: usize,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.instances
            .iter()
            .all(|i| i.worst_cost <= i.lambda + i.system.delta + 1e-9 * (1.0 + i.lambda))
    }
}

fn random_plant(rng: &mut ChaCha8Rng) -> Result<PlantModel> {
    let n = rng.random_range(1..=2usize);
    let d = 2 * n;
    let mut normal = || -> f64 { rng.sample(StandardNormal) };
    let h = DMatrix::from_fn(d, d, |_, _| normal());
    let h = (&h + h.transpose()) * 0.5;
    // damping channels w·(q + ip) plus a small arbitrary part; a generic
    // complex row amplifies about half the time
    let w = DMatrix::from_fn(d, n, |_, _| C64::new(normal(), normal()) * 0.8);
    let coupling = DMatrix::from_fn(d, d, |i, j| {
        let base = if j < n {
            w[(i, j)]
        } else {
            w[(i, j - n)] * C64::new(0.0, 1.0)
        };
        base + C64::new(normal(), normal()) * 0.15
    });
    let e = DMatrix::from_fn(d, d, |_, _| normal() * 0.3);
    let gamma = 1.0 + 3.0 * normal().abs().min(1.0);
    let r = DMatrix::identity(d, d) * (0.05 + 0.5 * normal().abs().min(1.0));
    PlantModel::new(h, coupling, e, gamma, 0.0, r)
}

/// Builds `X = sP` with `AᵀP + PA = −I`, shrinking `E` until the reduced
/// analysis LMI `−sI + C + 16s²D ≺ 0` has a solution.
fn feasible_x(
    plant: &mut PlantModel,
    rng: &mut ChaCha8Rng,
) -> Result<Option<(AugmentedSystem, CandidateSolution)>> {
    let d = plant.dim();
    for _ in 0..8 {
        let sys = build_drift(
            plant,
            &DynamicControllerSpec::static_controller(DMatrix::identity(d, d), 1.0)?,
        )?;
        let (a, theta, e, r) = plant_blocks(&sys);
        let hr = is_hurwitz(&a);
        let Some(p) = hr.certificate else {
            return Ok(None);
        };
        let c = e.transpose() * &e / (sys.gamma * sys.gamma) + r;
        let et = &e * &theta * &p;
        let dn = (et.transpose() * et).symmetric_eigenvalues().amax();
        let cn = c.symmetric_eigenvalues().amax();
        if 64.0 * cn * dn < 0.9 {
            // s between the roots of 16·dn·s² − s + cn, close to the lower one
            let t: f64 = rng.random_range(0.02..0.3);
            let s = if dn > 0.0 {
                let root = (1.0 - 64.0 * cn * dn).sqrt();
                ((1.0 - root) + 2.0 * root * t) / (32.0 * dn)
            } else {
                cn * (1.0 + t)
            };
            let x = &p * s;
            let sol = CandidateSolution::uncontrolled(&sys, x)?;
            if check_certificate(LmiKind::Analysis, &sys, &sol).valid {
                return Ok(Some((sys, sol)));
            }
        }
        plant.uncertainty *= 0.5;
    }
    Ok(None)
}

/// Checks the oracle against `count` random analysis problems with a known
/// feasible `X`, built without the solver.
pub fn self_validate(count: usize, samples: usize, seed: u64) -> Result<ValidationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut instances = Vec::with_capacity(count);
    let mut rejected = 0;
    while instances.len() < count {
        if rejected > 50 * count.max(1) {
            return Err(Error::InvalidModel(
                "could not draw feasible validation instances".into(),
            ));
        }
        let mut plant = random_plant(&mut rng)?;
        let Some((sys, sol)) = feasible_x(&mut plant, &mut rng)? else {
            rejected += 1;
            continue;
        };
        let lambda = lambda_of(&sol.x, &noise_for(&sys, sol.m())?)?;
        let batch = sample_batch(sys.uncertainty_rows(), sys.gamma, samples, rng.random())?;
        let mut worst = f64::NEG_INFINITY;
        for delta in batch {
            let ev = evaluate(&sys, &sol, lambda + sys.delta, delta)?;
            worst = worst.max(if ev.hurwitz {
                ev.true_cost
            } else {
                f64::INFINITY
            });
        }
        instances.push(ValidationInstance {
            system: sys,
            solution: sol,
            lambda,
            worst_cost: worst,
        });
    }
    Ok(ValidationReport {
        instances,
        rejected,
    })
}

/// Smallest eigenvalue of `Re(B_w)`; the covariance inhomogeneity must be PSD.
pub fn diffusion_min_eig(sys: &AugmentedSystem) -> Result<f64> {
    min_eig(&sys.noise_real())
}
