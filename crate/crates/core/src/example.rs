//! The two-quadrature benchmark plant: an oscillator with Hamiltonian
//! `diag(−0.55, 0.55)`, coupling `½[√κ, √κ i]`, uncertainty channel
//! `E = [[1, 0.5], [0.5, 1]]`, and a one-mode controller with coupling
//! `½[√0.5, √0.5 i]`.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::model::{CMatrix, DynamicControllerSpec, PlantModel, C64};

/// Free knobs of the benchmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExampleParams {
    pub gamma: f64,
    pub delta: f64,
    /// `R = r·I`
    pub r: f64,
    pub rho: f64,
    /// Controller coupling strength (`N_K = ½[√c, √c i]`).
    pub controller_damping: f64,
}

impl ExampleParams {
    /// `γ = 2, R = I, ρ = 0.1, δ = 0`.
    pub const fn nominal() -> Self {
        Self {
            gamma: 2.0,
            delta: 0.0,
            r: 1.0,
            rho: 0.1,
            controller_damping: 0.5,
        }
    }

    /// Values that place the three feasibility thresholds near 8.2, 7.1 and 7.0.
    pub const fn calibrated() -> Self {
        Self {
            gamma: 4.0,
            delta: 0.0,
            r: 0.73549,
            rho: 0.1,
            controller_damping: 0.5,
        }
    }
}

impl Default for ExampleParams {
    fn default() -> Self {
        Self::nominal()
    }
}

/// `½[√c, √c i]`
pub fn quadrature_coupling(c: f64) -> CMatrix {
    let s = c.sqrt() / 2.0;
    CMatrix::from_row_slice(1, 2, &[C64::new(s, 0.0), C64::new(0.0, s)])
}

pub fn example_plant(kappa: f64, params: &ExampleParams) -> Result<PlantModel> {
    PlantModel::new(
        DMatrix::from_row_slice(2, 2, &[-0.55, 0.0, 0.0, 0.55]),
        quadrature_coupling(kappa),
        DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]),
        params.gamma,
        params.delta,
        DMatrix::identity(2, 2) * params.r,
    )
}

/// `F = I` with no controller modes.
pub fn example_static(params: &ExampleParams) -> Result<DynamicControllerSpec> {
    DynamicControllerSpec::static_controller(DMatrix::identity(2, 2), params.rho)
}

/// One controller mode, `F = I`.
pub fn example_dynamic(params: &ExampleParams) -> Result<DynamicControllerSpec> {
    DynamicControllerSpec::new(
        1,
        quadrature_coupling(params.controller_damping),
        DMatrix::identity(2, 2),
        params.rho,
    )
}
