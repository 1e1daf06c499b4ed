//! JSON job configuration. Complex matrices are `{"re": [[..]], "im": [[..]]}`;
//! real matrices are arrays of rows. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use cohsyn::lmi::LmiKind;
use cohsyn::model::{CMatrix, DynamicControllerSpec, PlantModel, C64};
use cohsyn::rcsolve::SolverOptions;
use cohsyn::synth::{PlantFamily, SynthOptions};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Analyze,
    Static,
    Dynamic,
    Sweep,
    Threshold,
    Validate,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Analyze => "analyze",
            Mode::Static => "static",
            Mode::Dynamic => "dynamic",
            Mode::Sweep => "sweep",
            Mode::Threshold => "threshold",
            Mode::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Analysis,
    Static,
    Dynamic,
}

impl From<Kind> for LmiKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Analysis => LmiKind::Analysis,
            Kind::Static => LmiKind::Static,
            Kind::Dynamic => LmiKind::Dynamic,
        }
    }
}

impl From<LmiKind> for Kind {
    fn from(k: LmiKind) -> Self {
        match k {
            LmiKind::Analysis => Kind::Analysis,
            LmiKind::Static => Kind::Static,
            LmiKind::Dynamic => Kind::Dynamic,
        }
    }
}

pub type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexRows {
    pub re: Rows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Rows>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantConfig {
    /// `M_P`
    pub hamiltonian: Rows,
    /// `Ñ_P` at `κ = 1` for the rows listed in `kappa_rows`.
    pub coupling: ComplexRows,
    /// Coupling rows multiplied by `√κ`.
    #[serde(default)]
    pub kappa_rows: Vec<usize>,
    /// `E`
    pub uncertainty: Rows,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default)]
    pub delta: f64,
    /// `R`; identity when omitted.
    #[serde(default)]
    pub cost_weight: Option<Rows>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicConfig {
    pub modes: usize,
    /// `Ñ_K`
    pub coupling: ComplexRows,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerConfig {
    /// `F`; identity when omitted.
    #[serde(default)]
    pub interface: Option<Rows>,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub dynamic: Option<DynamicConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KappaGrid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_sweep_kinds")]
    pub kinds: Vec<Kind>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            kinds: default_sweep_kinds(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdConfig {
    #[serde(default = "default_threshold_kind")]
    pub kind: Kind,
    #[serde(default = "default_tol_kappa")]
    pub tol_kappa: f64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            kind: default_threshold_kind(),
            tol_kappa: default_tol_kappa(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    /// Metadata file written by an `analyze`, `static` or `dynamic` run.
    pub outcome: PathBuf,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

/// Every field optional; missing values take the toolkit defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub restarts: Option<usize>,
    pub epsilon: Option<f64>,
    pub tol_beta: Option<f64>,
    pub probe_restarts: Option<usize>,
    pub continuation_restarts: Option<usize>,
    pub stall_window: Option<usize>,
    pub stall_ratio: Option<f64>,
    pub relaxation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    pub plant: PlantConfig,
    #[serde(default)]
    pub controller: ControllerConfig,
    /// Single-run `κ` (required when `plant.kappa_rows` is non-empty).
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub kappa_grid: Option<KappaGrid>,
    #[serde(default)]
    pub kappa_bracket: Option<[f64; 2]>,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub threshold: ThresholdConfig,
    #[serde(default)]
    pub validate: Option<ValidateConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    /// CSV path used when `--out` is absent; relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

fn default_gamma() -> f64 {
    2.0
}
fn default_sweep_kinds() -> Vec<Kind> {
    vec![Kind::Static, Kind::Dynamic]
}
fn default_threshold_kind() -> Kind {
    Kind::Analysis
}
fn default_tol_kappa() -> f64 {
    0.01
}
fn default_samples() -> usize {
    100
}

pub const DEFAULT_RHO: f64 = 0.1;

fn err(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

fn real(field: &str, rows: &Rows) -> Result<DMatrix<f64>, CliError> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(err(field, "rows have different lengths"));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(err(field, "entries must be finite"));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

fn complex(field: &str, m: &ComplexRows) -> Result<CMatrix, CliError> {
    let re = real(&format!("{field}.re"), &m.re)?;
    let im = match &m.im {
        Some(rows) => real(&format!("{field}.im"), rows)?,
        None => DMatrix::zeros(re.nrows(), re.ncols()),
    };
    if im.shape() != re.shape() {
        return Err(err(
            field,
            format!(
                "re is {}x{} but im is {}x{}",
                re.nrows(),
                re.ncols(),
                im.nrows(),
                im.ncols()
            ),
        ));
    }
    Ok(CMatrix::from_fn(re.nrows(), re.ncols(), |i, j| {
        C64::new(re[(i, j)], im[(i, j)])
    }))
}

fn to_rows(m: &DMatrix<f64>) -> Rows {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

pub fn load_config(path: &Path) -> Result<JobConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<JobConfig, CliError> {
    let cfg: JobConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    cfg.check()?;
    Ok(cfg)
}

impl JobConfig {
    /// Structural checks that do not need `κ`.
    fn check(&self) -> Result<(), CliError> {
        let coupling = complex("plant.coupling", &self.plant.coupling)?;
        for &r in &self.plant.kappa_rows {
            if r >= coupling.nrows() {
                return Err(err(
                    "plant.kappa_rows",
                    format!(
                        "row {r} out of range (coupling has {} rows)",
                        coupling.nrows()
                    ),
                ));
            }
        }
        if let Some(k) = self.kappa {
            if !(k > 0.0 && k.is_finite()) {
                return Err(err("kappa", "must be positive"));
            }
        }
        // building the plant at a representative κ surfaces dimension errors early
        self.plant_at(self.kappa.unwrap_or(1.0))?;
        self.controller_for(Kind::Static)?;
        if self.controller.dynamic.is_some() {
            self.controller_for(Kind::Dynamic)?;
        }
        if let Some(KappaGrid::Range { start, stop, step }) = &self.kappa_grid {
            if !(*step > 0.0 && stop >= start && *start > 0.0) {
                return Err(err("kappa_grid", "need 0 < start <= stop and step > 0"));
            }
        }
        if let Some(KappaGrid::List(v)) = &self.kappa_grid {
            if v.iter().any(|k| !(*k > 0.0 && k.is_finite())) {
                return Err(err("kappa_grid", "values must be positive"));
            }
        }
        if let Some([lo, hi]) = self.kappa_bracket {
            if !(lo > 0.0 && hi > lo) {
                return Err(err("kappa_bracket", "need 0 < lo < hi"));
            }
        }
        if self.threshold.tol_kappa.is_nan() || self.threshold.tol_kappa <= 0.0 {
            return Err(err("threshold.tol_kappa", "must be positive"));
        }
        Ok(())
    }

    /// Checks that the fields `mode` needs are present.
    pub fn check_mode(&self, mode: Mode) -> Result<(), CliError> {
        if let Some(m) = self.mode {
            if m != mode {
                return Err(err(
                    "mode",
                    format!("config says {} but {} was requested", m.name(), mode.name()),
                ));
            }
        }
        let needs_kappa = !self.plant.kappa_rows.is_empty();
        match mode {
            Mode::Analyze | Mode::Static | Mode::Dynamic | Mode::Validate
                if needs_kappa && self.kappa.is_none() =>
            {
                Err(err("kappa", "required because plant.kappa_rows is set"))
            }
            Mode::Sweep if self.kappa_grid.is_none() => {
                Err(err("kappa_grid", "required for sweep"))
            }
            Mode::Sweep if !needs_kappa => {
                Err(err("plant.kappa_rows", "a sweep needs rows scaled by √κ"))
            }
            Mode::Sweep if self.sweep.kinds.is_empty() => {
                Err(err("sweep.kinds", "must not be empty"))
            }
            Mode::Threshold if self.kappa_bracket.is_none() => {
                Err(err("kappa_bracket", "required for threshold"))
            }
            Mode::Threshold if !needs_kappa => Err(err(
                "plant.kappa_rows",
                "a threshold search needs rows scaled by √κ",
            )),
            Mode::Validate if self.validate.is_none() => {
                Err(err("validate", "required for validate"))
            }
            Mode::Dynamic if self.controller.dynamic.is_none() => {
                Err(err("controller.dynamic", "required for dynamic synthesis"))
            }
            Mode::Sweep | Mode::Threshold => {
                let dynamic = self.sweep.kinds.contains(&Kind::Dynamic) && mode == Mode::Sweep
                    || self.threshold.kind == Kind::Dynamic && mode == Mode::Threshold;
                if dynamic && self.controller.dynamic.is_none() {
                    Err(err("controller.dynamic", "required for dynamic synthesis"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    pub fn plant_at(&self, kappa: f64) -> Result<PlantModel, CliError> {
        let p = &self.plant;
        let h = real("plant.hamiltonian", &p.hamiltonian)?;
        let mut n = complex("plant.coupling", &p.coupling)?;
        let s = kappa.sqrt();
        for &r in &p.kappa_rows {
            n.row_mut(r).scale_mut(s);
        }
        let e = real("plant.uncertainty", &p.uncertainty)?;
        let r = match &p.cost_weight {
            Some(rows) => real("plant.cost_weight", rows)?,
            None => DMatrix::identity(h.nrows(), h.nrows()),
        };
        PlantModel::new(h, n, e, p.gamma, p.delta, r).map_err(|e| err("plant", e))
    }

    pub fn controller_for(&self, kind: Kind) -> Result<DynamicControllerSpec, CliError> {
        let d = self.plant.hamiltonian.len();
        let f = match &self.controller.interface {
            Some(rows) => real("controller.interface", rows)?,
            None => DMatrix::identity(d, d),
        };
        let rho = self.controller.rho.unwrap_or(DEFAULT_RHO);
        let spec = match (kind, &self.controller.dynamic) {
            (Kind::Dynamic, Some(dy)) => DynamicControllerSpec::new(
                dy.modes,
                complex("controller.dynamic.coupling", &dy.coupling)?,
                f,
                rho,
            ),
            (Kind::Dynamic, None) => {
                return Err(err("controller.dynamic", "required for dynamic synthesis"))
            }
            _ => DynamicControllerSpec::static_controller(f, rho),
        };
        spec.map_err(|e| err("controller", e))
    }

    pub fn kappas(&self) -> Vec<f64> {
        match &self.kappa_grid {
            Some(KappaGrid::List(v)) => v.clone(),
            Some(KappaGrid::Range { start, stop, step }) => {
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                // rounded so that 7 + 0.25·i prints as 7.25, not 7.250000000000001
                (0..=n)
                    .map(|i| ((start + step * i as f64) * 1e12).round() / 1e12)
                    .collect()
            }
            None => Vec::new(),
        }
    }

    pub fn synth_options(&self, seed_override: Option<u64>) -> SynthOptions {
        let s = &self.solver;
        let d = SynthOptions::default();
        let ds = SolverOptions::default();
        SynthOptions {
            solver: SolverOptions {
                max_iter: s.max_iter.unwrap_or(ds.max_iter),
                tol: s.tol.unwrap_or(ds.tol),
                restarts: s.restarts.unwrap_or(ds.restarts),
                seed: seed_override.or(s.seed).unwrap_or(ds.seed),
                stall_window: s.stall_window.unwrap_or(ds.stall_window),
                stall_ratio: s.stall_ratio.unwrap_or(ds.stall_ratio),
                relaxation: s.relaxation.unwrap_or(ds.relaxation),
                ..ds
            },
            tol_beta: s.tol_beta.unwrap_or(d.tol_beta),
            probe_restarts: s.probe_restarts.unwrap_or(d.probe_restarts),
            continuation_restarts: s.continuation_restarts.unwrap_or(d.continuation_restarts),
            epsilon: s.epsilon.or(d.epsilon),
            ..d
        }
    }

    /// The configuration with every default written out, for metadata.
    pub fn effective(&self, mode: Mode, seed_override: Option<u64>) -> Result<JobConfig, CliError> {
        let mut c = self.clone();
        c.mode = Some(mode);
        let d = self.plant.hamiltonian.len();
        if c.plant.cost_weight.is_none() {
            c.plant.cost_weight = Some(to_rows(&DMatrix::identity(d, d)));
        }
        if c.controller.interface.is_none() {
            c.controller.interface = Some(to_rows(&DMatrix::identity(d, d)));
        }
        c.controller.rho.get_or_insert(DEFAULT_RHO);
        if c.plant.coupling.im.is_none() {
            c.plant.coupling.im = Some(vec![
                vec![
                    0.0;
                    c.plant.coupling.re.first().map_or(0, Vec::len)
                ];
                c.plant.coupling.re.len()
            ]);
        }
        let o = self.synth_options(seed_override);
        c.solver = SolverConfig {
            seed: Some(o.solver.seed),
            tol: Some(o.solver.tol),
            max_iter: Some(o.solver.max_iter),
            restarts: Some(o.solver.restarts),
            epsilon: o.epsilon,
            tol_beta: Some(o.tol_beta),
            probe_restarts: Some(o.probe_restarts),
            continuation_restarts: Some(o.continuation_restarts),
            stall_window: Some(o.solver.stall_window),
            stall_ratio: Some(o.solver.stall_ratio),
            relaxation: Some(o.solver.relaxation),
        };
        Ok(c)
    }
}

impl PlantFamily for JobConfig {
    fn plant(&self, kappa: f64) -> cohsyn::Result<PlantModel> {
        self.plant_at(kappa)
            .map_err(|e| cohsyn::Error::InvalidModel(e.to_string()))
    }
    fn controller(&self, kind: LmiKind) -> cohsyn::Result<DynamicControllerSpec> {
        self.controller_for(kind.into())
            .map_err(|e| cohsyn::Error::InvalidModel(e.to_string()))
    }
}
