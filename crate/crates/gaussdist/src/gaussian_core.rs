//! Phase-space representations of Gaussian states and symplectic operations.
//!
//! A Gaussian state is the pair (mean vector, covariance matrix) with
//! quadratures interleaved per mode as `(q₁, p₁, …, q_M, p_M)`. The vacuum
//! has covariance `diag(1/2, 1/2)` per mode and a coherent state with
//! amplitude `α` has mean `(√2 Re α, √2 Im α)`.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

/// Minimum allowed eigenvalue of `Σ + (i/2)Δ` (uncertainty relation check).
pub const PSD_TOL: f64 = -1e-10;
/// Relative tolerance on `det(2Σ) = 1` for the purity flag.
pub const PURITY_RTOL: f64 = 1e-9;
/// Entrywise tolerance on `SᵀΔS = Δ` for symplectic matrices.
pub const SYMPLECTIC_TOL: f64 = 1e-10;

/// The symplectic form Δ: block diagonal with `[[0, 1], [-1, 0]]` per mode.
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut delta = DMatrix::zeros(2 * modes, 2 * modes);
    for j in 0..modes {
        delta[(2 * j, 2 * j + 1)] = 1.0;
        delta[(2 * j + 1, 2 * j)] = -1.0;
    }
    delta
}

/// A Gaussian state of `M` bosonic modes.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    modes: usize,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    /// Validates dimensions and the uncertainty relation, symmetrizing the
    /// covariance as `(Σ + Σᵀ)/2` to absorb round-off from upstream solvers.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 || dim % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "mean vector length must be a positive even number, got {dim}"
            )));
        }
        if cov.nrows() != dim || cov.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: cov.nrows().max(cov.ncols()),
            });
        }
        if mean.iter().any(|x| !x.is_finite()) || cov.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite entries".into()));
        }
        let modes = dim / 2;
        let cov = (&cov + cov.transpose()) * 0.5;

        // Σ + (i/2)Δ is Hermitian; the uncertainty relation is its positivity.
        let delta = symplectic_form(modes);
        let mut herm = DMatrix::<Complex64>::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                herm[(i, j)] = Complex64::new(cov[(i, j)], 0.5 * delta[(i, j)]);
            }
        }
        let eig = SymmetricEigen::new(herm);
        let min_eig = eig
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < PSD_TOL {
            return Err(Error::UncertaintyViolated {
                min_eigenvalue: min_eig,
            });
        }

        Ok(Self { modes, mean, cov })
    }

    /// Vacuum state of `modes` modes.
    pub fn vacuum(modes: usize) -> Self {
        Self {
            modes,
            mean: DVector::zeros(2 * modes),
            cov: DMatrix::identity(2 * modes, 2 * modes) * 0.5,
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn det_two_sigma(&self) -> f64 {
        (&self.cov * 2.0).determinant()
    }

    /// Purity flag: `det(2Σ) = 1` within relative tolerance.
    pub fn is_pure(&self) -> bool {
        (self.det_two_sigma() - 1.0).abs() <= PURITY_RTOL
    }

    /// Total expected photon number `⟨Σⱼ aⱼ†aⱼ⟩ = -M/2 + Tr Σ / 2 + ‖m‖²/2`.
    pub fn energy(&self) -> f64 {
        -(self.modes as f64) / 2.0 + 0.5 * self.cov.trace() + 0.5 * self.mean.norm_squared()
    }

    /// Expected photon number of the single-mode marginal of `mode`.
    pub fn marginal_energy(&self, mode: usize) -> Result<f64> {
        if mode >= self.modes {
            return Err(Error::InvalidInput(format!(
                "mode {mode} out of range for {} modes",
                self.modes
            )));
        }
        let q = 2 * mode;
        let tr = self.cov[(q, q)] + self.cov[(q + 1, q + 1)];
        let m2 = self.mean[q] * self.mean[q] + self.mean[q + 1] * self.mean[q + 1];
        Ok(-0.5 + 0.5 * tr + 0.5 * m2)
    }

    /// Phase-space rotation `e^{-iθ a†a}` of a single-mode state.
    pub fn rotate(&self, theta: f64) -> Result<Self> {
        if self.modes != 1 {
            return Err(Error::InvalidInput(format!(
                "rotate expects a single-mode state, got {} modes; use rotate_modes",
                self.modes
            )));
        }
        self.rotate_modes(&[theta])
    }

    /// Per-mode phase-space rotations. Energy is invariant.
    pub fn rotate_modes(&self, thetas: &[f64]) -> Result<Self> {
        if thetas.len() != self.modes {
            return Err(Error::DimensionMismatch {
                expected: self.modes,
                actual: thetas.len(),
            });
        }
        let dim = 2 * self.modes;
        let mut rot = DMatrix::zeros(dim, dim);
        for (j, &theta) in thetas.iter().enumerate() {
            let (s, c) = theta.sin_cos();
            rot[(2 * j, 2 * j)] = c;
            rot[(2 * j, 2 * j + 1)] = s;
            rot[(2 * j + 1, 2 * j)] = -s;
            rot[(2 * j + 1, 2 * j + 1)] = c;
        }
        let mean = &rot * &self.mean;
        let cov = &rot * &self.cov * rot.transpose();
        let out = Self::new(mean, cov)?;
        debug_assert!(
            (out.energy() - self.energy()).abs() <= 1e-12 * (1.0 + self.energy().abs()),
            "rotation changed the energy"
        );
        Ok(out)
    }

    /// Conjugation by a symplectic matrix: `m → Sm`, `Σ → SΣSᵀ`.
    pub fn apply_symplectic(&self, s: &SymplecticMatrix) -> Result<Self> {
        if s.dim() != 2 * self.modes {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.modes,
                actual: s.dim(),
            });
        }
        let m = s.matrix();
        Self::new(m * &self.mean, m * &self.cov * m.transpose())
    }

    /// Characteristic function `χ(z) = exp(-½ zᵀΣz + i mᵀz)`.
    pub fn characteristic_function(&self, point: &[f64]) -> Result<Complex64> {
        if point.len() != 2 * self.modes {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.modes,
                actual: point.len(),
            });
        }
        let z = DVector::from_column_slice(point);
        let quad = (z.transpose() * &self.cov * &z)[(0, 0)];
        let lin = self.mean.dot(&z);
        Ok(Complex64::new(-0.5 * quad, lin).exp())
    }

    /// Tensor product with another state (block-diagonal covariance).
    pub fn tensor(&self, other: &Self) -> Self {
        let modes = self.modes + other.modes;
        let dim = 2 * modes;
        let d1 = 2 * self.modes;
        let mut mean = DVector::zeros(dim);
        mean.rows_mut(0, d1).copy_from(&self.mean);
        mean.rows_mut(d1, 2 * other.modes).copy_from(&other.mean);
        let mut cov = DMatrix::zeros(dim, dim);
        cov.view_mut((0, 0), (d1, d1)).copy_from(&self.cov);
        cov.view_mut((d1, d1), (2 * other.modes, 2 * other.modes))
            .copy_from(&other.cov);
        Self { modes, mean, cov }
    }
}

/// Displacement and squeezing of one mode: the state `D(α)S(z)|0⟩` with
/// `z = |z| e^{iθ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureStateParams {
    pub displacement: Complex64,
    pub squeeze_magnitude: f64,
    pub squeeze_phase: f64,
}

impl PureStateParams {
    pub fn new(
        displacement: Complex64,
        squeeze_magnitude: f64,
        squeeze_phase: f64,
    ) -> Result<Self> {
        if !displacement.re.is_finite()
            || !displacement.im.is_finite()
            || !squeeze_magnitude.is_finite()
            || !squeeze_phase.is_finite()
        {
            return Err(Error::InvalidInput("non-finite state parameters".into()));
        }
        if squeeze_magnitude < 0.0 {
            return Err(Error::InvalidInput(format!(
                "squeeze magnitude must be non-negative, got {squeeze_magnitude}"
            )));
        }
        Ok(Self {
            displacement,
            squeeze_magnitude,
            squeeze_phase: squeeze_phase.rem_euclid(2.0 * std::f64::consts::PI),
        })
    }

    /// From complex `α` and `z`: magnitude `|z|` and phase `Arg z`.
    pub fn from_alpha_z(alpha: Complex64, z: Complex64) -> Result<Self> {
        let mag = z.norm();
        let phase = if mag == 0.0 { 0.0 } else { z.arg() };
        Self::new(alpha, mag, phase)
    }

    /// Coherent state `D(α)|0⟩`.
    pub fn coherent(alpha: Complex64) -> Result<Self> {
        Self::new(alpha, 0.0, 0.0)
    }

    /// Expected photon number `|α|² + sinh²|z|`.
    pub fn energy(&self) -> f64 {
        self.displacement.norm_sqr() + self.squeeze_magnitude.sinh().powi(2)
    }

    /// Mean vector `(√2 Re α, √2 Im α)` of this mode.
    pub fn mean(&self) -> [f64; 2] {
        let s = std::f64::consts::SQRT_2;
        [s * self.displacement.re, s * self.displacement.im]
    }

    /// Single-mode covariance matrix of `D(α)S(z)|0⟩`.
    pub fn covariance(&self) -> [[f64; 2]; 2] {
        let ch = (2.0 * self.squeeze_magnitude).cosh();
        let sh = (2.0 * self.squeeze_magnitude).sinh();
        let (st, ct) = self.squeeze_phase.sin_cos();
        [
            [0.5 * (ch - ct * sh), -0.5 * st * sh],
            [-0.5 * st * sh, 0.5 * (ch + ct * sh)],
        ]
    }
}

/// Builds the `M`-mode Gaussian state `⊗ⱼ D(αⱼ)S(zⱼ)|0⟩`.
pub fn state_from_params(params: &[PureStateParams]) -> Result<GaussianState> {
    if params.is_empty() {
        return Err(Error::InvalidInput("at least one mode required".into()));
    }
    let modes = params.len();
    let mut mean = DVector::zeros(2 * modes);
    let mut cov = DMatrix::zeros(2 * modes, 2 * modes);
    for (j, p) in params.iter().enumerate() {
        let m = p.mean();
        let c = p.covariance();
        mean[2 * j] = m[0];
        mean[2 * j + 1] = m[1];
        for a in 0..2 {
            for b in 0..2 {
                cov[(2 * j + a, 2 * j + b)] = c[a][b];
            }
        }
    }
    GaussianState::new(mean, cov)
}

/// An element of `Sp(2M, ℝ)`: preserves the form Δ.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    entries: DMatrix<f64>,
}

impl SymplecticMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let dim = entries.nrows();
        if dim == 0 || dim % 2 != 0 || entries.ncols() != dim {
            return Err(Error::NotSymplectic(format!(
                "matrix must be square with even dimension, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let delta = symplectic_form(dim / 2);
        let residual = entries.transpose() * &delta * &entries - &delta;
        let max_res = residual.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if max_res > SYMPLECTIC_TOL {
            return Err(Error::NotSymplectic(format!(
                "max |SᵀΔS - Δ| = {max_res:.3e}"
            )));
        }
        let det = entries.determinant();
        if (det - 1.0).abs() > 1e-9 {
            return Err(Error::NotSymplectic(format!("det S = {det}")));
        }
        // Positive definite symplectic matrices have spectrum in {λ, 1/λ} pairs.
        if entries == entries.transpose() {
            let eig = SymmetricEigen::new(entries.clone());
            let mut vals: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
            if vals.iter().all(|&v| v > 0.0) {
                vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
                for i in 0..dim / 2 {
                    let prod = vals[i] * vals[dim - 1 - i];
                    if (prod - 1.0).abs() > 1e-9 {
                        return Err(Error::NotSymplectic(format!(
                            "positive definite spectrum not reciprocal-paired: λ·λ' = {prod}"
                        )));
                    }
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn identity(modes: usize) -> Self {
        Self {
            entries: DMatrix::identity(2 * modes, 2 * modes),
        }
    }

    /// Real symplectic-orthogonal representation of an `M×M` unitary acting
    /// on the mode operators: each entry `u` maps to the 2×2 block
    /// `[[Re u, -Im u], [Im u, Re u]]`.
    pub fn from_unitary(u: &DMatrix<Complex64>) -> Result<Self> {
        let m = u.nrows();
        if u.ncols() != m || m == 0 {
            return Err(Error::InvalidInput("unitary must be square".into()));
        }
        let mut s = DMatrix::zeros(2 * m, 2 * m);
        for j in 0..m {
            for l in 0..m {
                let v = u[(j, l)];
                s[(2 * j, 2 * l)] = v.re;
                s[(2 * j, 2 * l + 1)] = -v.im;
                s[(2 * j + 1, 2 * l)] = v.im;
                s[(2 * j + 1, 2 * l + 1)] = v.re;
            }
        }
        Self::new(s)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn modes(&self) -> usize {
        self.dim() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn squeezed_vacuum(x: f64, theta: f64) -> GaussianState {
        state_from_params(&[PureStateParams::new(Complex64::new(0.0, 0.0), x, theta).unwrap()])
            .unwrap()
    }

    #[test]
    fn vacuum_params_give_vacuum_state() {
        let s = state_from_params(&[PureStateParams::coherent(Complex64::new(0.0, 0.0)).unwrap()])
            .unwrap();
        assert_eq!(s.mean().as_slice(), &[0.0, 0.0]);
        assert_abs_diff_eq!(s.cov()[(0, 0)], 0.5);
        assert_abs_diff_eq!(s.cov()[(1, 1)], 0.5);
        assert_abs_diff_eq!(s.cov()[(0, 1)], 0.0);
        assert!(s.is_pure());
    }

    #[test]
    fn q_squeezed_covariance() {
        let x = 0.7;
        let s = squeezed_vacuum(x, 0.0);
        assert_abs_diff_eq!(s.cov()[(0, 0)], (-2.0 * x).exp() / 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.cov()[(1, 1)], (2.0 * x).exp() / 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.cov()[(0, 1)], 0.0);
    }

    #[test]
    fn coherent_mean() {
        let s = state_from_params(&[PureStateParams::coherent(Complex64::new(1.0, 0.0)).unwrap()])
            .unwrap();
        assert_abs_diff_eq!(s.mean()[0], std::f64::consts::SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(s.mean()[1], 0.0);
        assert_abs_diff_eq!(s.energy(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn energy_examples() {
        assert_abs_diff_eq!(GaussianState::vacuum(1).energy(), 0.0);
        let sq = squeezed_vacuum(1.0f64.asinh(), 0.0);
        assert_abs_diff_eq!(sq.energy(), 1.0, epsilon = 1e-13);
    }

    #[test]
    fn params_energy_round_trip() {
        let p = PureStateParams::new(Complex64::new(0.4, -0.9), 0.8, 1.3).unwrap();
        let s = state_from_params(&[p]).unwrap();
        assert_abs_diff_eq!(s.energy(), p.energy(), epsilon = 1e-12);
    }

    #[test]
    fn rotate_parity_and_identity() {
        let s = state_from_params(&[PureStateParams::coherent(Complex64::new(1.0, 0.0)).unwrap()])
            .unwrap();
        let r = s.rotate(std::f64::consts::PI).unwrap();
        assert_abs_diff_eq!(r.mean()[0], -std::f64::consts::SQRT_2, epsilon = 1e-14);
        assert_abs_diff_eq!(r.mean()[1], 0.0, epsilon = 1e-14);
        let id = s.rotate(0.0).unwrap();
        assert_eq!(id.mean(), s.mean());
    }

    #[test]
    fn rotate_quarter_turn_swaps_squeezed_variances() {
        // Oracle: conjugating diag(e^{-2x}/2, e^{2x}/2) by a 90° rotation
        // exchanges the diagonal entries.
        let s = squeezed_vacuum(0.6, 0.0);
        let r = s.rotate(std::f64::consts::FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(r.cov()[(0, 0)], s.cov()[(1, 1)], epsilon = 1e-13);
        assert_abs_diff_eq!(r.cov()[(1, 1)], s.cov()[(0, 0)], epsilon = 1e-13);
    }

    #[test]
    fn characteristic_function_values() {
        let vac = GaussianState::vacuum(1);
        let one = vac.characteristic_function(&[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(one.re, 1.0);
        assert_abs_diff_eq!(one.im, 0.0);
        // exp(-½·(1/2)·4) = e^{-1}
        let v = vac.characteristic_function(&[2.0, 0.0]).unwrap();
        assert_abs_diff_eq!(v.re, (-1.0f64).exp(), epsilon = 1e-15);
        // coherent α=1: m = (√2, 0) so mᵀz = 0 at z=(0,1)
        let coh =
            state_from_params(&[PureStateParams::coherent(Complex64::new(1.0, 0.0)).unwrap()])
                .unwrap();
        let c = coh.characteristic_function(&[0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(c.re, (-0.25f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(c.im, 0.0);
        assert!(vac.characteristic_function(&[1.0]).is_err());
    }

    #[test]
    fn squeeze_phase_zero_and_pi_swap_quadratures() {
        let a = squeezed_vacuum(0.5, 0.0);
        let b = squeezed_vacuum(0.5, std::f64::consts::PI);
        assert_abs_diff_eq!(a.cov()[(0, 0)], b.cov()[(1, 1)], epsilon = 1e-13);
        assert_abs_diff_eq!(a.cov()[(1, 1)], b.cov()[(0, 0)], epsilon = 1e-13);
    }

    #[test]
    fn non_finite_params_rejected() {
        assert!(PureStateParams::new(Complex64::new(f64::NAN, 0.0), 0.0, 0.0).is_err());
        assert!(PureStateParams::new(Complex64::new(0.0, 0.0), f64::INFINITY, 0.0).is_err());
        assert!(PureStateParams::new(Complex64::new(0.0, 0.0), -0.1, 0.0).is_err());
    }

    #[test]
    fn uncertainty_violation_rejected() {
        let cov = DMatrix::from_diagonal(&DVector::from_column_slice(&[0.1, 0.1]));
        assert!(matches!(
            GaussianState::new(DVector::zeros(2), cov),
            Err(Error::UncertaintyViolated { .. })
        ));
    }

    #[test]
    fn symplectic_validation() {
        // Single-mode squeeze diag(e^w, e^{-w}) is symplectic and PD.
        let w = 0.9f64;
        let s = DMatrix::from_diagonal(&DVector::from_column_slice(&[w.exp(), (-w).exp()]));
        assert!(SymplecticMatrix::new(s).is_ok());
        // A scaling is not.
        let bad = DMatrix::identity(2, 2) * 2.0;
        assert!(SymplecticMatrix::new(bad).is_err());
    }

    #[test]
    fn dft_unitary_maps_to_orthogonal_symplectic() {
        let m = 3;
        let mut u = DMatrix::<Complex64>::zeros(m, m);
        for j in 0..m {
            for l in 0..m {
                let phase = -2.0 * std::f64::consts::PI * (j * l) as f64 / m as f64;
                u[(j, l)] = Complex64::from_polar(1.0 / (m as f64).sqrt(), phase);
            }
        }
        let s = SymplecticMatrix::from_unitary(&u).unwrap();
        let prod = s.matrix().transpose() * s.matrix();
        let id = DMatrix::identity(2 * m, 2 * m);
        assert!((prod - id).iter().all(|x| x.abs() < 1e-12));
    }

    proptest! {
        #[test]
        fn purity_holds_for_all_pure_params(
            re in -2.0f64..2.0, im in -2.0f64..2.0,
            mag in 0.0f64..1.5, phase in 0.0f64..6.28,
        ) {
            let p = PureStateParams::new(Complex64::new(re, im), mag, phase).unwrap();
            let s = state_from_params(&[p]).unwrap();
            prop_assert!(s.is_pure());
            prop_assert!((s.det_two_sigma() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn rotation_preserves_energy(
            re in -2.0f64..2.0, mag in 0.0f64..1.5,
            phase in 0.0f64..6.28, theta in 0.0f64..6.28,
        ) {
            let p = PureStateParams::new(Complex64::new(re, 0.3), mag, phase).unwrap();
            let s = state_from_params(&[p]).unwrap();
            let r = s.rotate(theta).unwrap();
            prop_assert!((r.energy() - s.energy()).abs() < 1e-12 * (1.0 + s.energy()));
        }

        #[test]
        fn symplectic_conjugation_preserves_uncertainty(
            w in -1.0f64..1.0, theta in 0.0f64..6.28,
            re in -1.0f64..1.0, mag in 0.0f64..1.0,
        ) {
            // Rotation · squeeze is a generic single-mode symplectic.
            let (st, ct) = theta.sin_cos();
            let rot = DMatrix::from_row_slice(2, 2, &[ct, st, -st, ct]);
            let sq = DMatrix::from_diagonal(&DVector::from_column_slice(&[w.exp(), (-w).exp()]));
            let s = SymplecticMatrix::new(rot * sq).unwrap();
            let p = PureStateParams::new(Complex64::new(re, 0.0), mag, 0.0).unwrap();
            let state = state_from_params(&[p]).unwrap();
            // `new` inside apply_symplectic re-checks Σ + (i/2)Δ ⪰ 0.
            prop_assert!(state.apply_symplectic(&s).is_ok());
        }
    }
}
