//! Mode dispatch.

use std::path::{Path, PathBuf};

use cohsyn::lmi::{CandidateSolution, LmiKind};
use cohsyn::oracle::robustness_sweep;
use cohsyn::par::{derive_seed, map_ordered, with_jobs};
use cohsyn::rcsolve::SolverOptions;
use cohsyn::synth::{
    analyze, feasibility_threshold, synthesize_dynamic, synthesize_static_from, system_for,
    SynthOptions, SynthesisOutcome,
};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{load_config, JobConfig, Kind, Mode};
use crate::output::{rows_of, write_csv, write_json, Cell};
use crate::CliError;

/// Relative tolerance on `cost ≤ bound` applied by `CostEvaluation::sound`.
pub const SOUNDNESS_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct RunArgs {
    pub mode: Mode,
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// Output written, but something was infeasible, unknown or unsound.
    Undecided,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Success => 0,
            Outcome::Undecided => 2,
        }
    }
}

#[derive(Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    mode: &'static str,
    seed: u64,
    csv: String,
    config: &'a JobConfig,
    tolerances: Value,
    result: Value,
}

#[derive(Debug, Serialize, Deserialize)]
struct SavedSolution {
    x: Vec<Vec<f64>>,
    k: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
}

/// The part of a single-run `result` record that `validate` reads back.
#[derive(Debug, Deserialize)]
struct SavedOutcome {
    kind: Kind,
    kappa: Option<f64>,
    solution: Option<SavedSolution>,
}

#[derive(Debug, Deserialize)]
struct SavedMetadata {
    result: SavedOutcome,
}

fn matrix(field: &str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>, CliError> {
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != c) {
        return Err(CliError::Config(format!(
            "{field}: rows have different lengths"
        )));
    }
    Ok(DMatrix::from_fn(rows.len(), c, |i, j| rows[i][j]))
}

fn status_of(o: &SynthesisOutcome) -> Outcome {
    if o.is_feasible() {
        Outcome::Success
    } else {
        Outcome::Undecided
    }
}

fn outcome_json(o: &SynthesisOutcome, kappa: Option<f64>) -> Value {
    let cert = o.certificate.as_ref();
    json!({
        "kind": Kind::from(o.kind),
        "kappa": kappa,
        "status": o.status.name(),
        "bound": o.bound,
        "beta_star": o.beta_star,
        "epsilon": o.epsilon,
        "probes": o.probes,
        "iterations": o.iterations,
        "certificate": cert.map(|c| json!({
            "x_min_eig": c.x_min_eig,
            "lmi_max_eig": c.lmi_max_eig,
            "equality_residual": c.equality_residual,
            "equality_tol": c.equality_tol,
            "hurwitz": c.hurwitz_ok,
            "lambda": c.lambda,
            "valid": c.valid,
        })),
        "solution": o.controller.as_ref().map(|s| SavedSolution { x: rows_of(&s.x), k: rows_of(&s.k), y: rows_of(&s.y) }),
    })
}

const SINGLE_HEADER: [&str; 12] = [
    "kind",
    "kappa",
    "status",
    "bound",
    "beta_star",
    "epsilon",
    "x_min_eig",
    "lmi_max_eig",
    "equality_residual",
    "hurwitz",
    "probes",
    "iterations",
];

fn single_row(o: &SynthesisOutcome, kappa: Option<f64>) -> Vec<Cell> {
    let cert = o.certificate.as_ref();
    let num = |f: fn(&cohsyn::lmi::Certificate) -> f64| Cell::Num(cert.map_or(f64::NAN, f));
    vec![
        Cell::Text(o.kind.name().into()),
        Cell::Num(kappa.unwrap_or(f64::NAN)),
        Cell::Text(o.status.name().into()),
        Cell::Num(o.bound),
        Cell::Num(o.beta_star),
        Cell::Num(o.epsilon),
        num(|c| c.x_min_eig),
        num(|c| c.lmi_max_eig),
        num(|c| c.equality_residual),
        Cell::Bool(cert.is_some_and(|c| c.hurwitz_ok)),
        Cell::Int(o.probes),
        Cell::Int(o.iterations),
    ]
}

struct Written {
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
    result: Value,
    outcome: Outcome,
}

/// Runs one job. Output files are written whenever the problem was posed
/// correctly, even if the answer is infeasible.
pub fn run(args: &RunArgs) -> Result<Outcome, CliError> {
    let cfg = load_config(&args.config)?;
    cfg.check_mode(args.mode)?;
    let base_dir = args
        .config
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let out = match (&args.out, &cfg.out) {
        (Some(o), _) => o.clone(),
        (None, Some(o)) if o.is_relative() => base_dir.join(o),
        (None, Some(o)) => o.clone(),
        (None, None) => PathBuf::from(format!("{}.csv", args.mode.name())),
    };
    let meta_path = out.with_extension("json");
    if meta_path == out {
        return Err(CliError::Config(format!(
            "--out {}: metadata would overwrite the CSV",
            out.display()
        )));
    }
    if same_file(&meta_path, &args.config) {
        return Err(CliError::Config(format!(
            "--out {}: metadata would overwrite the config",
            out.display()
        )));
    }
    let opts = cfg.synth_options(args.seed);
    let effective = cfg.effective(args.mode, args.seed)?;

    let w = with_jobs(args.jobs, || match args.mode {
        Mode::Analyze => single(&cfg, Kind::Analysis, &opts),
        Mode::Static => single(&cfg, Kind::Static, &opts),
        Mode::Dynamic => single(&cfg, Kind::Dynamic, &opts),
        Mode::Sweep => sweep(&cfg, &opts),
        Mode::Threshold => threshold(&cfg, &opts),
        Mode::Validate => validate(&cfg, &opts, &base_dir),
    })?;

    write_csv(&out, &w.header, &w.rows)?;
    let meta = Metadata {
        tool: "cohsyn",
        version: env!("CARGO_PKG_VERSION"),
        mode: args.mode.name(),
        seed: opts.solver.seed,
        csv: out
            .file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_default(),
        config: &effective,
        tolerances: json!({
            "solver_tol": opts.solver.tol,
            "tol_beta": opts.tol_beta,
            "tol_kappa": cfg.threshold.tol_kappa,
            "epsilon": opts.epsilon,
            "soundness": SOUNDNESS_TOL,
        }),
        result: w.result,
    };
    write_json(&meta_path, &meta)?;
    Ok(w.outcome)
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(a), Ok(b)) => a == b,
        _ => a == b,
    }
}

fn solve(
    cfg: &JobConfig,
    kind: Kind,
    kappa: f64,
    opts: &SynthOptions,
) -> Result<SynthesisOutcome, CliError> {
    let plant = cfg.plant_at(kappa)?;
    let out = match kind {
        Kind::Analysis => analyze(&plant, opts)?,
        Kind::Static => {
            synthesize_static_from(&plant, &cfg.controller_for(Kind::Static)?, opts, None)?
        }
        Kind::Dynamic => {
            synthesize_dynamic(&plant, &cfg.controller_for(Kind::Dynamic)?, opts, None)?
        }
    };
    Ok(out)
}

fn single(cfg: &JobConfig, kind: Kind, opts: &SynthOptions) -> Result<Written, CliError> {
    let o = solve(cfg, kind, cfg.kappa.unwrap_or(1.0), opts)?;
    Ok(Written {
        header: SINGLE_HEADER.to_vec(),
        rows: vec![single_row(&o, cfg.kappa)],
        result: outcome_json(&o, cfg.kappa),
        outcome: status_of(&o),
    })
}

struct SweepPoint {
    kappa: f64,
    outcomes: Vec<(Kind, SynthesisOutcome)>,
}

/// Warm-start chain at one `κ`: analysis, then static from it, then dynamic
/// from the static controller.
fn chain(
    cfg: &JobConfig,
    kappa: f64,
    kinds: &[Kind],
    opts: &SynthOptions,
) -> Result<SweepPoint, CliError> {
    let opts = SynthOptions {
        solver: SolverOptions {
            seed: derive_seed(opts.solver.seed, kappa.to_bits()),
            ..opts.solver.clone()
        },
        ..opts.clone()
    };
    let plant = cfg.plant_at(kappa)?;
    let analysis = analyze(&plant, &opts)?;
    let need_static = kinds.iter().any(|k| *k != Kind::Analysis);
    let stat = if need_static {
        Some(synthesize_static_from(
            &plant,
            &cfg.controller_for(Kind::Static)?,
            &opts,
            Some(&analysis),
        )?)
    } else {
        None
    };
    let dynamic = if kinds.contains(&Kind::Dynamic) {
        Some(synthesize_dynamic(
            &plant,
            &cfg.controller_for(Kind::Dynamic)?,
            &opts,
            stat.as_ref(),
        )?)
    } else {
        None
    };
    let mut outcomes = Vec::new();
    let (mut a, mut s, mut d) = (Some(analysis), stat, dynamic);
    for k in kinds {
        let o = match k {
            Kind::Analysis => a.take(),
            Kind::Static => s.take(),
            Kind::Dynamic => d.take(),
        };
        if let Some(o) = o {
            outcomes.push((*k, o));
        }
    }
    Ok(SweepPoint { kappa, outcomes })
}

fn kind_name(k: Kind) -> &'static str {
    LmiKind::from(k).name()
}

fn sweep(cfg: &JobConfig, opts: &SynthOptions) -> Result<Written, CliError> {
    let mut kinds = Vec::new();
    for k in &cfg.sweep.kinds {
        if !kinds.contains(k) {
            kinds.push(*k);
        }
    }
    let kappas = cfg.kappas();
    let points: Vec<SweepPoint> =
        map_ordered(opts.execution, &kappas, |&k| chain(cfg, k, &kinds, opts))
            .into_iter()
            .collect::<Result<_, _>>()?;

    let mut header = vec!["kappa"];
    for k in &kinds {
        header.push(match k {
            Kind::Analysis => "analysis_bound",
            Kind::Static => "static_bound",
            Kind::Dynamic => "dynamic_bound",
        });
    }
    for k in &kinds {
        header.push(match k {
            Kind::Analysis => "analysis_status",
            Kind::Static => "static_status",
            Kind::Dynamic => "dynamic_status",
        });
    }
    let mut rows = Vec::new();
    let mut all_feasible = true;
    let mut result = Vec::new();
    for p in &points {
        let mut row = vec![Cell::Num(p.kappa)];
        row.extend(p.outcomes.iter().map(|(_, o)| Cell::Num(o.bound)));
        row.extend(
            p.outcomes
                .iter()
                .map(|(_, o)| Cell::Text(o.status.name().into())),
        );
        all_feasible &= p.outcomes.iter().all(|(_, o)| o.is_feasible());
        rows.push(row);
        let mut entry = serde_json::Map::new();
        entry.insert("kappa".into(), json!(p.kappa));
        for (k, o) in &p.outcomes {
            entry.insert(
                kind_name(*k).into(),
                json!({ "status": o.status.name(), "bound": o.bound, "probes": o.probes }),
            );
        }
        result.push(Value::Object(entry));
    }
    Ok(Written {
        header,
        rows,
        result: Value::Array(result),
        outcome: if all_feasible {
            Outcome::Success
        } else {
            Outcome::Undecided
        },
    })
}

fn threshold(cfg: &JobConfig, opts: &SynthOptions) -> Result<Written, CliError> {
    let [lo, hi] = cfg.kappa_bracket.expect("checked by check_mode");
    let kind = cfg.threshold.kind;
    let tol = cfg.threshold.tol_kappa;
    let t = feasibility_threshold(kind.into(), cfg, lo, hi, tol, opts)?;
    let w = &t.witness;
    Ok(Written {
        header: vec![
            "kind",
            "threshold",
            "lower",
            "tol_kappa",
            "probes",
            "lambda",
        ],
        rows: vec![vec![
            Cell::Text(kind_name(kind).into()),
            Cell::Num(t.threshold),
            Cell::Num(t.lower),
            Cell::Num(tol),
            Cell::Int(t.probes),
            Cell::Num(w.lambda),
        ]],
        result: json!({
            "kind": kind,
            "threshold": t.threshold,
            "lower": t.lower,
            "probes": t.probes,
            "presweep": t.presweep.iter().map(|(k, f)| json!({ "kappa": k, "feasible": f })).collect::<Vec<_>>(),
            "witness": SavedSolution { x: rows_of(&w.x), k: rows_of(&w.k), y: rows_of(&w.y) },
        }),
        outcome: Outcome::Success,
    })
}

fn validate(cfg: &JobConfig, opts: &SynthOptions, base_dir: &Path) -> Result<Written, CliError> {
    let v = cfg.validate.as_ref().expect("checked by check_mode");
    let path = if v.outcome.is_relative() {
        base_dir.join(&v.outcome)
    } else {
        v.outcome.clone()
    };
    let text = std::fs::read_to_string(&path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    let saved: SavedMetadata = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let saved = saved.result;
    let sol = saved.solution.ok_or_else(|| {
        CliError::Config(format!(
            "{}: outcome has no solution to validate",
            path.display()
        ))
    })?;
    let kappa = saved.kappa.or(cfg.kappa).unwrap_or(1.0);
    let kind: LmiKind = saved.kind.into();
    let plant = cfg.plant_at(kappa)?;
    let sys = system_for(kind, &plant, &cfg.controller_for(saved.kind)?)?;
    let cand = CandidateSolution::new(
        &sys,
        matrix("x", &sol.x)?,
        matrix("k", &sol.k)?,
        matrix("y", &sol.y)?,
    )?;
    let outcome = SynthesisOutcome::from_solution(kind, &sys, cand);
    let evals = robustness_sweep(&sys, &outcome, v.samples, opts.solver.seed, opts.execution)?;

    let mut rows = Vec::with_capacity(evals.len());
    let mut unsound = 0;
    let mut worst = f64::INFINITY;
    for (i, e) in evals.iter().enumerate() {
        let ok = e.sound();
        unsound += usize::from(!ok);
        worst = worst.min(e.margin);
        rows.push(vec![
            Cell::Int(i),
            Cell::Num(e.delta.norm()),
            Cell::Bool(e.hurwitz),
            Cell::Num(e.true_cost),
            Cell::Num(e.bound),
            Cell::Num(e.margin),
            Cell::Bool(ok),
        ]);
    }
    Ok(Written {
        header: vec![
            "sample",
            "delta_norm",
            "hurwitz",
            "true_cost",
            "bound",
            "margin",
            "sound",
        ],
        rows,
        result: json!({
            "kind": saved.kind,
            "kappa": kappa,
            "bound": outcome.bound,
            "samples": evals.len(),
            "unsound": unsound,
            "min_margin": if evals.is_empty() { f64::NAN } else { worst },
        }),
        outcome: if unsound == 0 {
            Outcome::Success
        } else {
            Outcome::Undecided
        },
    })
}
