//! System data and the structural matrices every inequality is built from.
//!
//! Quadrature ordering is `[q; p]` for the plant and `[q; p; q_K; p_K]` for
//! the plant coupled to a dynamic controller. Commutators are `Σ = 2iθ`
//! with no rescaling.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::linalg::{block_diag, check_symmetric, min_eig, sym_eig};
use crate::tol::TOL;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// `θ = [[0, I_n], [−I_n, 0]]`
pub fn theta(n: usize) -> DMatrix<f64> {
    let mut t = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        t[(i, n + i)] = 1.0;
        t[(n + i, i)] = -1.0;
    }
    t
}

/// `Σ = 2iθ`
pub fn sigma(n: usize) -> CMatrix {
    commutator(&theta(n))
}

fn commutator(theta: &DMatrix<f64>) -> CMatrix {
    theta.map(|v| C64::new(0.0, 2.0 * v))
}

/// `J = diag(I_m, −I_m)`
pub fn structural_j(m: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        j[(i, i)] = 1.0;
        j[(m + i, m + i)] = -1.0;
    }
    j
}

/// Permutation `P` with `P·a = [a_1..a_n, a_{n+m+1}..a_{2n+m}, a_{n+1}..a_{n+m}, a_{2n+m+1}..a_{2(n+m)}]`.
/// It regroups a doubled-up joint coupling `[L_P; L_K; L_P#; L_K#]` into
/// `[L_P; L_P#; L_K; L_K#]`.
pub fn permutation(n: usize, m: usize) -> DMatrix<f64> {
    let dim = 2 * (n + m);
    let source: Vec<usize> = (0..n)
        .chain(n + m..2 * n + m)
        .chain(n..n + m)
        .chain(2 * n + m..dim)
        .collect();
    let mut p = DMatrix::zeros(dim, dim);
    for (row, &col) in source.iter().enumerate() {
        p[(row, col)] = 1.0;
    }
    p
}

/// `[Ñ; Ñ#]`: stacks coupling rows `[N₁ N₂]` over their entrywise conjugate.
pub fn double_up(n_tilde: &CMatrix) -> CMatrix {
    let (r, c) = n_tilde.shape();
    let mut out = CMatrix::zeros(2 * r, c);
    out.rows_mut(0, r).copy_from(n_tilde);
    out.rows_mut(r, r).copy_from(&n_tilde.map(|z| z.conj()));
    out
}

fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|v| C64::new(v, 0.0))
}

/// Scattering matrix tag. Only the identity is supported and it enters no
/// computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scattering {
    #[default]
    Identity,
}

/// Nominal plant `(S, L, H)` with its uncertainty channel and cost weight.
#[derive(Debug, Clone)]
pub struct PlantModel {
    pub modes: usize,
    /// `M_P`, real symmetric `2n_P × 2n_P`.
    pub hamiltonian: DMatrix<f64>,
    /// `Ñ_P = [N₁ N₂]`, complex `m_P × 2n_P`.
    pub coupling: CMatrix,
    /// `E`, real `2n_P × 2n_P`.
    pub uncertainty: DMatrix<f64>,
    pub gamma: f64,
    pub delta: f64,
    /// `R ≻ 0`
    pub cost_weight: DMatrix<f64>,
    pub scattering: Scattering,
}

impl PlantModel {
    pub fn new(
        hamiltonian: DMatrix<f64>,
        coupling: CMatrix,
        uncertainty: DMatrix<f64>,
        gamma: f64,
        delta: f64,
        cost_weight: DMatrix<f64>,
    ) -> Result<Self> {
        let dim = hamiltonian.nrows();
        if dim == 0 || !dim.is_multiple_of(2) || hamiltonian.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "M_P must be 2n_P x 2n_P with n_P >= 1, got {}x{}",
                hamiltonian.nrows(),
                hamiltonian.ncols()
            )));
        }
        check_symmetric(&hamiltonian)?;
        if coupling.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "coupling has {} columns, expected {dim}",
                coupling.ncols()
            )));
        }
        if uncertainty.shape() != (dim, dim) {
            return Err(Error::DimensionMismatch(format!(
                "E must be {dim}x{dim}, got {}x{}",
                uncertainty.nrows(),
                uncertainty.ncols()
            )));
        }
        if cost_weight.shape() != (dim, dim) {
            return Err(Error::DimensionMismatch(format!(
                "R must be {dim}x{dim}, got {}x{}",
                cost_weight.nrows(),
                cost_weight.ncols()
            )));
        }
        check_symmetric(&cost_weight)?;
        if min_eig(&cost_weight)? <= 0.0 {
            return Err(Error::InvalidModel("R must be positive definite".into()));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "delta must be nonnegative, got {delta}"
            )));
        }
        Ok(Self {
            modes: dim / 2,
            hamiltonian,
            coupling,
            uncertainty,
            gamma,
            delta,
            cost_weight,
            scattering: Scattering::Identity,
        })
    }

    pub fn dim(&self) -> usize {
        2 * self.modes
    }

    /// Admissible uncertainty radius `2/γ`.
    pub fn delta_radius(&self) -> f64 {
        2.0 / self.gamma
    }
}

/// Directly coupled controller. `modes == 0` is the static controller,
/// whose only contribution is the Hamiltonian term `FᵀKF`.
#[derive(Debug, Clone)]
pub struct DynamicControllerSpec {
    pub modes: usize,
    /// `Ñ_K`, complex `m_K × 2n_K` (empty when static).
    pub coupling: CMatrix,
    /// `F`, real `2n_P × 2n_P`.
    pub interface: DMatrix<f64>,
    pub rho: f64,
}

impl DynamicControllerSpec {
    pub fn new(modes: usize, coupling: CMatrix, interface: DMatrix<f64>, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "rho must be positive, got {rho}"
            )));
        }
        if interface.nrows() != interface.ncols() || !interface.nrows().is_multiple_of(2) {
            return Err(Error::DimensionMismatch(format!(
                "F must be square 2n_P x 2n_P, got {}x{}",
                interface.nrows(),
                interface.ncols()
            )));
        }
        if modes == 0 && coupling.nrows() != 0 {
            return Err(Error::InvalidModel(
                "a static controller carries no coupling rows".into(),
            ));
        }
        if coupling.nrows() > 0 && coupling.ncols() != 2 * modes {
            return Err(Error::DimensionMismatch(format!(
                "controller coupling has {} columns, expected {}",
                coupling.ncols(),
                2 * modes
            )));
        }
        Ok(Self {
            modes,
            coupling,
            interface,
            rho,
        })
    }

    pub fn static_controller(interface: DMatrix<f64>, rho: f64) -> Result<Self> {
        Self::new(0, CMatrix::zeros(0, 0), interface, rho)
    }

    pub fn is_static(&self) -> bool {
        self.modes == 0
    }
}

/// Closed-loop data derived from a plant and a controller structure.
#[derive(Debug, Clone)]
pub struct AugmentedSystem {
    pub plant_modes: usize,
    pub controller_modes: usize,
    /// `m = 2n_P + 2n_K`
    pub m: usize,
    /// Nominal plant drift `A = −iΣM_P − ½ΣN_P†JN_P` (real).
    pub plant_drift: DMatrix<f64>,
    /// `Ā = diag(A, −½Σ_K N_K†JN_K)`
    pub a_bar: DMatrix<f64>,
    /// `F̄ = diag(F, I)`
    pub f_bar: DMatrix<f64>,
    /// `Ē = [E 0]`
    pub e_bar: DMatrix<f64>,
    /// `R̄ = diag(R, 0)`
    pub r_bar: DMatrix<f64>,
    /// `Θ = diag(θ_P, θ_K)`
    pub theta: DMatrix<f64>,
    /// `Ξ = 2iΘ`
    pub xi: CMatrix,
    /// Doubled-up joint coupling with rows `[L_P; L_K; L_P#; L_K#]`.
    pub coupling: CMatrix,
    /// `B_w = Ξ N† diag(I, 0) N Ξ`
    pub noise: CMatrix,
    pub gamma: f64,
    pub delta: f64,
    pub rho: f64,
    /// `max |entry|` over the defining plant and controller data.
    pub data_norm: f64,
}

impl AugmentedSystem {
    /// Strict-inequality margin `ε = 1e−6·(1 + ‖data‖∞)`.
    pub fn epsilon(&self) -> f64 {
        TOL.strictness * (1.0 + self.data_norm)
    }

    /// `Re(B_w)`
    pub fn noise_real(&self) -> DMatrix<f64> {
        self.noise.map(|z| z.re)
    }

    pub fn is_static(&self) -> bool {
        self.controller_modes == 0
    }

    /// Number of rows of `Ē`.
    pub fn uncertainty_rows(&self) -> usize {
        self.e_bar.nrows()
    }
}

/// `−iΣM − ½ΣN†JN`, asserted real.
fn real_drift(
    hamiltonian: Option<&DMatrix<f64>>,
    doubled: &CMatrix,
    modes: usize,
) -> Result<DMatrix<f64>> {
    let sig = sigma(modes);
    let rows = doubled.nrows() / 2;
    let j = to_complex(&structural_j(rows));
    let mut drift = (&sig * doubled.adjoint() * j * doubled) * C64::new(-0.5, 0.0);
    if let Some(h) = hamiltonian {
        drift += &sig * to_complex(h) * C64::new(0.0, -1.0);
    }
    let imag = drift.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if imag > TOL.drift_imag {
        return Err(Error::NonRealDrift(imag));
    }
    Ok(drift.map(|z| z.re))
}

fn cmax(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Assembles the closed-loop structural data for `plant` coupled to `ctrl`.
pub fn build_drift(plant: &PlantModel, ctrl: &DynamicControllerSpec) -> Result<AugmentedSystem> {
    let dp = plant.dim();
    if ctrl.interface.nrows() != dp {
        return Err(Error::DimensionMismatch(format!(
            "F is {}x{}, plant dimension is {dp}",
            ctrl.interface.nrows(),
            ctrl.interface.ncols()
        )));
    }
    let dk = 2 * ctrl.modes;
    let m = dp + dk;

    let n_p = double_up(&plant.coupling);
    let plant_drift = real_drift(Some(&plant.hamiltonian), &n_p, plant.modes)?;

    let (mp, mk) = (plant.coupling.nrows(), ctrl.coupling.nrows());
    let mut a_bar = DMatrix::zeros(m, m);
    a_bar.view_mut((0, 0), (dp, dp)).copy_from(&plant_drift);
    if ctrl.modes > 0 && mk > 0 {
        let n_k = double_up(&ctrl.coupling);
        let block = real_drift(None, &n_k, ctrl.modes)?;
        a_bar.view_mut((dp, dp), (dk, dk)).copy_from(&block);
    }

    // Joint doubled-up coupling, rows [L_P; L_K; L_P#; L_K#].
    let rows = mp + mk;
    let mut coupling = CMatrix::zeros(2 * rows, m);
    coupling
        .view_mut((0, 0), (mp, dp))
        .copy_from(&plant.coupling);
    coupling
        .view_mut((rows, 0), (mp, dp))
        .copy_from(&plant.coupling.map(|z| z.conj()));
    if mk > 0 {
        coupling
            .view_mut((mp, dp), (mk, dk))
            .copy_from(&ctrl.coupling);
        coupling
            .view_mut((rows + mp, dp), (mk, dk))
            .copy_from(&ctrl.coupling.map(|z| z.conj()));
    }

    let theta_bar = if ctrl.modes > 0 {
        block_diag(&[&theta(plant.modes), &theta(ctrl.modes)])
    } else {
        theta(plant.modes)
    };
    let xi = commutator(&theta_bar);
    let f_bar = block_diag(&[&ctrl.interface, &DMatrix::identity(dk, dk)]);
    let mut e_bar = DMatrix::zeros(dp, m);
    e_bar
        .view_mut((0, 0), (dp, dp))
        .copy_from(&plant.uncertainty);
    let r_bar = block_diag(&[&plant.cost_weight, &DMatrix::zeros(dk, dk)]);

    let noise = noise_from(&xi, &coupling);

    let data_norm = [
        plant.hamiltonian.amax(),
        cmax(&plant.coupling),
        plant.uncertainty.amax(),
        plant.cost_weight.amax(),
        ctrl.interface.amax(),
        cmax(&ctrl.coupling),
    ]
    .into_iter()
    .fold(0.0, f64::max);

    Ok(AugmentedSystem {
        plant_modes: plant.modes,
        controller_modes: ctrl.modes,
        m,
        plant_drift,
        a_bar,
        f_bar,
        e_bar,
        r_bar,
        theta: theta_bar,
        xi,
        coupling,
        noise,
        gamma: plant.gamma,
        delta: plant.delta,
        rho: ctrl.rho,
        data_norm,
    })
}

fn noise_from(xi: &CMatrix, coupling: &CMatrix) -> CMatrix {
    let rows = coupling.nrows() / 2;
    let mut select = CMatrix::zeros(2 * rows, 2 * rows);
    for i in 0..rows {
        select[(i, i)] = C64::new(1.0, 0.0);
    }
    let nx = coupling * xi;
    let mut b = nx.adjoint() * select * nx;
    // exact Hermitian symmetry
    let n = b.nrows();
    for i in 0..n {
        b[(i, i)].im = 0.0;
        for j in (i + 1)..n {
            let v = (b[(i, j)] + b[(j, i)].conj()) * 0.5;
            b[(i, j)] = v;
            b[(j, i)] = v.conj();
        }
    }
    b
}

/// `B_w = Ξ N† diag(I, 0) N Ξ`, Hermitian positive semidefinite.
pub fn noise_matrix(sys: &AugmentedSystem) -> CMatrix {
    noise_from(&sys.xi, &sys.coupling)
}

/// Symmetric `Δ` with `‖Δ‖₂ ≤ 2/γ`.
#[derive(Debug, Clone)]
pub struct UncertaintySample {
    pub delta: DMatrix<f64>,
}

impl UncertaintySample {
    pub fn new(delta: DMatrix<f64>, gamma: f64) -> Result<Self> {
        check_symmetric(&delta)?;
        let norm = spectral_norm_sym(&delta)?;
        let radius = 2.0 / gamma;
        if norm > radius * (1.0 + 1e-12) {
            return Err(Error::InvalidModel(format!(
                "uncertainty norm {norm} exceeds the admissible radius {radius}"
            )));
        }
        Ok(Self { delta })
    }

    pub fn norm(&self) -> f64 {
        spectral_norm_sym(&self.delta).unwrap_or(f64::NAN)
    }
}

pub(crate) fn spectral_norm_sym(s: &DMatrix<f64>) -> Result<f64> {
    let e = sym_eig(s)?;
    Ok(e.values.iter().map(|v| v.abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn example_coupling(kappa: f64) -> CMatrix {
        let s = kappa.sqrt() / 2.0;
        CMatrix::from_row_slice(1, 2, &[c(s, 0.0), c(0.0, s)])
    }

    fn example(kappa: f64) -> PlantModel {
        PlantModel::new(
            DMatrix::from_row_slice(2, 2, &[-0.55, 0.0, 0.0, 0.55]),
            example_coupling(kappa),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]),
            2.0,
            0.0,
            DMatrix::identity(2, 2),
        )
        .unwrap()
    }

    #[test]
    fn theta_instances() {
        assert_eq!(
            theta(1),
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])
        );
        let t2 = theta(2);
        assert_eq!(t2[(0, 2)], 1.0);
        assert_eq!(t2[(1, 3)], 1.0);
        assert_eq!(t2[(2, 0)], -1.0);
        assert_eq!(t2[(3, 1)], -1.0);
        assert_eq!(t2.iter().filter(|v| **v != 0.0).count(), 4);
        for n in 1..=4 {
            assert_eq!(theta(n).transpose(), -theta(n));
            let s = sigma(n);
            assert_eq!(s.adjoint(), s);
        }
    }

    #[test]
    fn j_instances() {
        assert_eq!(
            structural_j(1),
            DMatrix::from_diagonal(&nalgebra::dvector![1.0, -1.0])
        );
        assert_eq!(
            structural_j(2),
            DMatrix::from_diagonal(&nalgebra::dvector![1.0, 1.0, -1.0, -1.0])
        );
        let j = structural_j(3);
        assert_eq!(&j * &j, DMatrix::identity(6, 6));
    }

    #[test]
    fn permutation_examples() {
        let p = permutation(1, 1);
        let a = nalgebra::dvector![1.0, 2.0, 3.0, 4.0];
        assert_eq!(&p * a, nalgebra::dvector![1.0, 3.0, 2.0, 4.0]);
        for (n, m) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            let p = permutation(n, m);
            let d = 2 * (n + m);
            assert_eq!(&p * p.transpose(), DMatrix::identity(d, d));
            assert_eq!(p.transpose() * &p, DMatrix::identity(d, d));
            // regrouped J
            let target = block_diag(&[&structural_j(n), &structural_j(m)]);
            assert_eq!(&p * structural_j(n + m) * p.transpose(), target);
        }
        let p = permutation(1, 1);
        assert_eq!(
            p.transpose() * structural_j(2) * &p,
            block_diag(&[&structural_j(1), &structural_j(1)])
        );
    }

    #[test]
    fn double_up_examples() {
        let k = 7.0f64;
        let s = k.sqrt() / 2.0;
        let n = double_up(&example_coupling(k));
        let expected =
            CMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(0.0, s), c(s, 0.0), c(0.0, -s)]);
        assert_eq!(n, expected);
        let real = CMatrix::from_row_slice(1, 2, &[c(1.0, 0.0), c(-2.0, 0.0)]);
        let d = double_up(&real);
        assert_eq!(d.row(0), d.row(1));
    }

    #[test]
    fn example_drift() {
        for kappa in [2.0, 7.0, 10.0] {
            let sys = build_drift(
                &example(kappa),
                &DynamicControllerSpec::static_controller(DMatrix::identity(2, 2), 0.1).unwrap(),
            )
            .unwrap();
            let expected = DMatrix::from_row_slice(2, 2, &[-kappa / 2.0, 1.1, 1.1, -kappa / 2.0]);
            assert_relative_eq!(sys.plant_drift, expected, epsilon = 1e-12);
            assert_eq!(sys.a_bar, sys.plant_drift);
        }
    }

    #[test]
    fn controller_block_and_noise() {
        let plant = example(9.0);
        let s = 0.5f64.sqrt() / 2.0;
        let nk = CMatrix::from_row_slice(1, 2, &[c(s, 0.0), c(0.0, s)]);
        let ctrl = DynamicControllerSpec::new(1, nk, DMatrix::identity(2, 2), 0.1).unwrap();
        let sys = build_drift(&plant, &ctrl).unwrap();
        assert_relative_eq!(
            sys.a_bar.view((2, 2), (2, 2)).into_owned(),
            DMatrix::identity(2, 2) * -0.25,
            epsilon = 1e-14
        );
        assert_eq!(sys.m, 4);
        // plant block of B_w = κ [[1, i], [−i, 1]], controller block uses 0.5
        let b = &sys.noise;
        assert_relative_eq!(b[(0, 0)].re, 9.0, epsilon = 1e-12);
        assert_relative_eq!(b[(0, 1)].im, 9.0, epsilon = 1e-12);
        assert_relative_eq!(b[(1, 0)].im, -9.0, epsilon = 1e-12);
        assert_relative_eq!(b[(2, 2)].re, 0.5, epsilon = 1e-12);
        assert_relative_eq!(b[(0, 2)].norm(), 0.0, epsilon = 1e-12);
        // Ξ = diag(Σ, Σ) when n_P = n_K
        let sig = sigma(1);
        assert_eq!(sys.xi.view((0, 0), (2, 2)), sig.view((0, 0), (2, 2)));
        assert_eq!(sys.xi.view((2, 2), (2, 2)), sig.view((0, 0), (2, 2)));
    }

    #[test]
    fn plant_noise_matrix_closed_form() {
        let sys = build_drift(
            &example(4.0),
            &DynamicControllerSpec::static_controller(DMatrix::identity(2, 2), 0.1).unwrap(),
        )
        .unwrap();
        let expected =
            CMatrix::from_row_slice(2, 2, &[c(4.0, 0.0), c(0.0, 4.0), c(0.0, -4.0), c(4.0, 0.0)]);
        assert_relative_eq!(
            (noise_matrix(&sys) - expected)
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn zero_data() {
        let plant = PlantModel::new(
            DMatrix::zeros(2, 2),
            CMatrix::zeros(1, 2),
            DMatrix::identity(2, 2),
            1.0,
            0.0,
            DMatrix::identity(2, 2),
        )
        .unwrap();
        let sys = build_drift(
            &plant,
            &DynamicControllerSpec::static_controller(DMatrix::identity(2, 2), 1.0).unwrap(),
        )
        .unwrap();
        assert_eq!(sys.a_bar, DMatrix::zeros(2, 2));
        assert_eq!(sys.noise.iter().map(|z| z.norm()).fold(0.0, f64::max), 0.0);
    }

    #[test]
    fn malformed_coupling_is_rejected() {
        // A coupling block that is not of the form [Ñ; Ñ#] leaves an imaginary drift.
        let bad =
            CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 1.0), c(0.3, 0.0), c(0.0, 0.7)]);
        assert!(matches!(
            real_drift(None, &bad, 1),
            Err(Error::NonRealDrift(_))
        ));
    }

    #[test]
    fn random_couplings_give_real_drift_and_psd_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for trial in 0..120 {
            let np = 1 + trial % 2;
            let nk = trial % 3;
            let mp = 1 + trial % 2;
            let mk = if nk > 0 { 1 } else { 0 };
            let mut cm = |r: usize, cols: usize| {
                CMatrix::from_fn(r, cols, |_, _| {
                    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                })
            };
            let np_c = cm(mp, 2 * np);
            let nk_c = cm(mk, 2 * nk);
            let h = {
                let g = DMatrix::from_fn(2 * np, 2 * np, |_, _| rng.random_range(-1.0..1.0));
                (&g + g.transpose()) * 0.5
            };
            let plant = PlantModel::new(
                h,
                np_c,
                DMatrix::identity(2 * np, 2 * np),
                1.0,
                0.0,
                DMatrix::identity(2 * np, 2 * np),
            )
            .unwrap();
            let ctrl = if nk == 0 {
                DynamicControllerSpec::static_controller(DMatrix::identity(2 * np, 2 * np), 1.0)
                    .unwrap()
            } else {
                DynamicControllerSpec::new(nk, nk_c.clone(), DMatrix::identity(2 * np, 2 * np), 1.0)
                    .unwrap()
            };
            let sys = build_drift(&plant, &ctrl).unwrap();
            let b = noise_matrix(&sys);
            // Hermitian PSD: realify [[Re, −Im], [Im, Re]] and check its spectrum
            let n = b.nrows();
            let mut real = DMatrix::zeros(2 * n, 2 * n);
            for i in 0..n {
                for j in 0..n {
                    real[(i, j)] = b[(i, j)].re;
                    real[(i + n, j + n)] = b[(i, j)].re;
                    real[(i, j + n)] = -b[(i, j)].im;
                    real[(i + n, j)] = b[(i, j)].im;
                }
            }
            assert!(min_eig(&real).unwrap() >= -1e-10);
            // Tr(X B_w) is real for real symmetric X
            let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let x = to_complex(&((&g + g.transpose()) * 0.5));
            assert!((x * &b).trace().im.abs() <= 1e-12);
            // joint coupling is Pᵀ diag(N_P, N_K) and the joint drift is block diagonal
            if nk > 0 {
                let p = to_complex(&permutation(mp, mk));
                let np_d = double_up(&plant.coupling);
                let nk_d = double_up(&ctrl.coupling);
                let mut d = CMatrix::zeros(np_d.nrows() + nk_d.nrows(), sys.m);
                d.view_mut((0, 0), np_d.shape()).copy_from(&np_d);
                d.view_mut((np_d.nrows(), 2 * np), nk_d.shape())
                    .copy_from(&nk_d);
                let diff = (&p * &sys.coupling - &d)
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
                assert!(diff < 1e-15);
                let joint = (&sys.xi
                    * sys.coupling.adjoint()
                    * to_complex(&structural_j(mp + mk))
                    * &sys.coupling)
                    * c(-0.5, 0.0);
                let ham = block_diag(&[&plant.hamiltonian, &DMatrix::zeros(2 * nk, 2 * nk)]);
                let joint = joint + &sys.xi * to_complex(&ham) * c(0.0, -1.0);
                let diff = (joint.map(|z| z.re) - &sys.a_bar).amax();
                assert!(diff < 1e-12);
                assert!(joint.iter().map(|z| z.im.abs()).fold(0.0, f64::max) <= 1e-10);
            }
        }
    }

    #[test]
    fn uncertainty_bound() {
        assert!(UncertaintySample::new(DMatrix::identity(2, 2), 2.0).is_ok());
        assert!(UncertaintySample::new(DMatrix::identity(2, 2) * 1.1, 2.0).is_err());
    }
}
