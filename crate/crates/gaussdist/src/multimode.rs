//! Multimode results: the isocovariant lower bound, the spectral optimum for
//! `M` modes with per-mode energy budget `E`, the all-energy-in-one-mode
//! construction, the symmetric-subspace transform, and restricted
//! separable-product minima.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::gaussian_core::{state_from_params, GaussianState, PureStateParams, SymplecticMatrix};
use crate::minimize;
use crate::optimum::optimal_pair;
use crate::{Error, Result};

/// Optimal isocovariant pair for `M` modes with total energy `ME`.
#[derive(Debug, Clone)]
pub struct MultimodeOptimum {
    pub modes: usize,
    pub energy_per_mode: f64,
    pub fidelity: f64,
    /// Eigenvalues of `SᵀS` at the optimum, sorted descending:
    /// `2ME+1`, then `2M-2` ones, then `1/(2ME+1)`.
    pub lambda_spectrum: Vec<f64>,
    pub pair: (GaussianState, GaussianState),
}

/// Minima of the two restricted separable-product problems.
#[derive(Debug, Clone, Copy)]
pub struct SeparableProductMin {
    /// Over symmetric products `|ω⟩^{⊗M}` vs `|σ⟩^{⊗M}`: `e^{-4ME²-4ME}`.
    pub symmetric: f64,
    /// Over general per-mode-constrained products: `e^{-4M²E²-4ME}`.
    pub general: f64,
}

fn validate_modes_energy(modes: usize, energy: f64) -> Result<()> {
    if modes == 0 {
        return Err(Error::InvalidInput("mode count must be at least 1".into()));
    }
    if !(energy > 0.0 && energy.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "per-mode energy must be positive and finite, got {energy}"
        )));
    }
    Ok(())
}

/// The pair that puts the whole budget `ME` into the last mode: vacuum on
/// modes `1..M-1` tensored with the single-mode optimal pair at energy `ME`.
pub fn allin_pair(modes: usize, energy: f64) -> Result<(GaussianState, GaussianState)> {
    validate_modes_energy(modes, energy)?;
    let single = optimal_pair(modes as f64 * energy)?;
    let vacuum = PureStateParams::coherent(Complex64::new(0.0, 0.0))?;
    let mut params1 = vec![vacuum; modes];
    let mut params2 = vec![vacuum; modes];
    params1[modes - 1] = single.state1;
    params2[modes - 1] = single.state2;
    Ok((state_from_params(&params1)?, state_from_params(&params2)?))
}

/// The isocovariant lower-bound integrand `e^{-‖Σ⁻¹‖(2ME+M-TrΣ)}` for a pure
/// covariance `Σ` shared by both states.
pub fn isocovariant_bound(sigma: &DMatrix<f64>, modes: usize, energy: f64) -> Result<f64> {
    validate_modes_energy(modes, energy)?;
    let dim = 2 * modes;
    if sigma.nrows() != dim || sigma.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: sigma.nrows().max(sigma.ncols()),
        });
    }
    // Validates the uncertainty relation for Σ.
    let state = GaussianState::new(DVector::zeros(dim), sigma.clone())?;
    if !state.is_pure() {
        return Err(Error::NotPure {
            det_two_sigma: state.det_two_sigma(),
        });
    }
    let budget = 2.0 * modes as f64 * energy + modes as f64;
    let trace = sigma.trace();
    if trace > budget + 1e-12 {
        return Err(Error::InfeasibleCovariance { trace, budget });
    }
    // ‖Σ⁻¹‖ is the reciprocal of the least eigenvalue of Σ.
    let eig = SymmetricEigen::new(state.cov().clone());
    let min_eig = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    Ok((-(budget - trace).max(0.0) / min_eig).exp())
}

/// Minimizes `exp(-2λ₁(2ME+M-½Σⱼ(λⱼ+λⱼ⁻¹)))` over symplectic spectra
/// `λⱼ ≥ 1` with `Σⱼ(λⱼ+λⱼ⁻¹) ≤ 4ME+2M`, both by the stationarity closed
/// form and by numerical descent; the two routes must agree to 1e-8.
pub fn spectrum_minimize(modes: usize, energy: f64) -> Result<MultimodeOptimum> {
    validate_modes_energy(modes, energy)?;
    let m = modes as f64;
    let total = m * energy;
    let budget = 4.0 * total + 2.0 * m;

    let exponent = |lambdas: &[f64]| -> f64 {
        let sum: f64 = lambdas.iter().map(|l| l + 1.0 / l).sum();
        if sum > budget {
            return 1e6 * (sum - budget);
        }
        let lmax = lambdas.iter().cloned().fold(1.0f64, f64::max);
        -2.0 * lmax * (2.0 * total + m - 0.5 * sum)
    };
    // λⱼ = 1 + sⱼ² keeps the λ ≥ 1 constraint exact.
    let objective = |s: &[f64]| {
        let lambdas: Vec<f64> = s.iter().map(|v| 1.0 + v * v).collect();
        exponent(&lambdas)
    };

    let mut best_exponent = f64::INFINITY;
    for start in 0..4 {
        let mut s0 = vec![0.3; modes];
        s0[start % modes] = 1.0 + 0.5 * start as f64;
        let nm = minimize::nelder_mead(&objective, &s0, &vec![0.3; modes], 1e-14, 6000);
        // Snap near-unit eigenvalues to the boundary and polish the single
        // active eigenvalue; the reduced objective is quadratic in it.
        let mut lambdas: Vec<f64> = nm.x.iter().map(|v| 1.0 + v * v).collect();
        let (imax, _) = lambdas
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .expect("nonempty");
        for (i, l) in lambdas.iter_mut().enumerate() {
            if i != imax && *l - 1.0 < 1e-3 {
                *l = 1.0;
            }
        }
        if lambdas
            .iter()
            .enumerate()
            .all(|(i, &l)| i == imax || l == 1.0)
        {
            // exponent(t) = t² - 2(2ME+1)t + 1 in the active eigenvalue
            let t = lambdas[imax];
            let newton = t - (2.0 * t - 2.0 * (2.0 * total + 1.0)) / 2.0;
            if newton >= 1.0 {
                let mut trial = lambdas.clone();
                trial[imax] = newton;
                if exponent(&trial) <= exponent(&lambdas) {
                    lambdas = trial;
                }
            }
        }
        best_exponent = best_exponent.min(exponent(&lambdas));
    }
    let numeric_fidelity = best_exponent.exp();

    let closed_fidelity = (-4.0 * total * total - 4.0 * total).exp();
    let rel = (numeric_fidelity - closed_fidelity).abs() / closed_fidelity;
    if rel > 1e-8 {
        return Err(Error::ConvergenceFailure(format!(
            "spectral descent disagrees with stationarity closed form: \
             numeric {numeric_fidelity:e}, closed {closed_fidelity:e}, relative {rel:e}"
        )));
    }

    let lambda_1 = 2.0 * total + 1.0;
    let mut lambda_spectrum = vec![lambda_1];
    lambda_spectrum.extend(std::iter::repeat(1.0).take(2 * modes - 2));
    lambda_spectrum.push(1.0 / lambda_1);

    Ok(MultimodeOptimum {
        modes,
        energy_per_mode: energy,
        fidelity: closed_fidelity,
        lambda_spectrum,
        pair: allin_pair(modes, energy)?,
    })
}

/// The discrete-Fourier passive transform on mode operators, as a real
/// orthogonal symplectic matrix.
pub fn dft_symplectic(modes: usize) -> Result<SymplecticMatrix> {
    let m = modes;
    let mut u = DMatrix::<Complex64>::zeros(m, m);
    for j in 0..m {
        for l in 0..m {
            let phase = -2.0 * std::f64::consts::PI * (j * l) as f64 / m as f64;
            u[(j, l)] = Complex64::from_polar(1.0 / (m as f64).sqrt(), phase);
        }
    }
    SymplecticMatrix::from_unitary(&u)
}

/// Applies the mode-mixing Fourier transform to both states of a pair.
/// Preserves total energy and pairwise fidelity; spreads an all-in-one-mode
/// pair evenly over the modes.
pub fn symmetric_transform(
    pair: (&GaussianState, &GaussianState),
) -> Result<(GaussianState, GaussianState)> {
    if pair.0.modes() != pair.1.modes() {
        return Err(Error::DimensionMismatch {
            expected: pair.0.modes(),
            actual: pair.1.modes(),
        });
    }
    let s = dft_symplectic(pair.0.modes())?;
    Ok((pair.0.apply_symplectic(&s)?, pair.1.apply_symplectic(&s)?))
}

/// Minima of the two separable-product restrictions of the `M`-mode problem,
/// evaluated through the single-mode optimum.
pub fn separable_product_min(modes: usize, energy: f64) -> Result<SeparableProductMin> {
    validate_modes_energy(modes, energy)?;
    let per_mode = optimal_pair(energy)?.fidelity;
    Ok(SeparableProductMin {
        symmetric: per_mode.powi(modes as i32),
        general: optimal_pair(modes as f64 * energy)?.fidelity,
    })
}

/// Haar-like random orthogonal symplectic matrix (the real representation of
/// a random unitary obtained by QR of a complex Gaussian matrix).
pub fn random_orthogonal_symplectic<R: Rng>(modes: usize, rng: &mut R) -> Result<SymplecticMatrix> {
    let mut g = DMatrix::<Complex64>::zeros(modes, modes);
    for i in 0..modes {
        for j in 0..modes {
            g[(i, j)] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    let qr = g.qr();
    SymplecticMatrix::from_unitary(&qr.q())
}

/// Random symplectic via the Euler decomposition `O₁ · Z · O₂` with
/// per-mode squeezes `wⱼ ~ U(-w_scale, w_scale)`.
pub fn random_symplectic<R: Rng>(
    modes: usize,
    w_scale: f64,
    rng: &mut R,
) -> Result<SymplecticMatrix> {
    let o1 = random_orthogonal_symplectic(modes, rng)?;
    let o2 = random_orthogonal_symplectic(modes, rng)?;
    let mut z = DMatrix::zeros(2 * modes, 2 * modes);
    for j in 0..modes {
        let w: f64 = rng.gen_range(-w_scale..w_scale);
        z[(2 * j, 2 * j)] = w.exp();
        z[(2 * j + 1, 2 * j + 1)] = (-w).exp();
    }
    SymplecticMatrix::new(o1.matrix() * z * o2.matrix())
}

/// Random isocovariant, isoenergetic pure pair: common covariance
/// `Σ = ½SSᵀ` from a random symplectic, opposite mean vectors on the sphere
/// whose radius the energy constraint forces.
pub fn random_isocovariant_pair<R: Rng>(
    modes: usize,
    energy: f64,
    rng: &mut R,
) -> Result<(GaussianState, GaussianState)> {
    validate_modes_energy(modes, energy)?;
    let budget = 2.0 * modes as f64 * energy + modes as f64;
    let mut w_scale = 0.5f64.min(energy.sqrt());
    let sigma = loop {
        let s = random_symplectic(modes, w_scale, rng)?;
        let sigma = s.matrix() * s.matrix().transpose() * 0.5;
        // leave room for a nonzero displacement
        if sigma.trace() <= modes as f64 + 0.9 * (budget - modes as f64) {
            break sigma;
        }
        w_scale *= 0.8;
    };
    let radius_sq = budget - sigma.trace();
    let mut direction = DVector::from_fn(2 * modes, |_, _| rng.gen_range(-1.0f64..1.0));
    while direction.norm() < 1e-6 {
        direction = DVector::from_fn(2 * modes, |_, _| rng.gen_range(-1.0f64..1.0));
    }
    let m1 = direction.clone() * (radius_sq.sqrt() / direction.norm());
    let s1 = GaussianState::new(m1.clone(), sigma.clone())?;
    let s2 = GaussianState::new(-m1, sigma)?;
    Ok((s1, s2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fidelity::pure_fidelity;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn allin_reduces_to_single_mode() {
        let (a, b) = allin_pair(1, 0.5).unwrap();
        assert_relative_eq!(
            pure_fidelity(&a, &b).unwrap(),
            (-3.0f64).exp(),
            max_relative = 1e-10
        );
    }

    #[test]
    fn allin_closed_form_fidelity() {
        for (m, e, expected) in [(2, 0.5, -8.0f64), (3, 1.0, -48.0), (4, 0.25, -8.0)] {
            let (a, b) = allin_pair(m, e).unwrap();
            let me = m as f64 * e;
            assert_relative_eq!(
                pure_fidelity(&a, &b).unwrap(),
                expected.exp(),
                max_relative = 1e-9
            );
            assert_abs_diff_eq!(a.energy(), me, epsilon = 1e-10);
            assert_abs_diff_eq!(b.energy(), me, epsilon = 1e-10);
            assert_eq!(a.cov(), b.cov());
        }
        assert!(allin_pair(0, 0.5).is_err());
        assert!(allin_pair(2, 0.0).is_err());
    }

    #[test]
    fn isocovariant_bound_examples() {
        for m in [1usize, 2, 3] {
            let e = 0.5;
            let vac = DMatrix::identity(2 * m, 2 * m) * 0.5;
            assert_relative_eq!(
                isocovariant_bound(&vac, m, e).unwrap(),
                (-4.0 * m as f64 * e).exp(),
                max_relative = 1e-12
            );
            // the optimal covariance: one mode squeezed with d_c = 2ME+1
            let d_c = 2.0 * m as f64 * e + 1.0;
            let mut sigma = DMatrix::identity(2 * m, 2 * m) * 0.5;
            sigma[(0, 0)] = d_c / 2.0;
            sigma[(1, 1)] = 1.0 / (2.0 * d_c);
            let me = m as f64 * e;
            assert_relative_eq!(
                isocovariant_bound(&sigma, m, e).unwrap(),
                (-4.0 * me * me - 4.0 * me).exp(),
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn isocovariant_bound_saturated_budget() {
        // TrΣ equal to the budget leaves no displacement: bound is 1.
        let e = 0.7f64;
        let w = e.sqrt().asinh();
        let sigma = DMatrix::from_diagonal(&DVector::from_column_slice(&[
            (2.0 * w).exp() / 2.0,
            (-2.0 * w).exp() / 2.0,
        ]));
        assert_abs_diff_eq!(
            isocovariant_bound(&sigma, 1, e).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn isocovariant_bound_infeasible() {
        let w = 2.0f64;
        let sigma = DMatrix::from_diagonal(&DVector::from_column_slice(&[
            (2.0 * w).exp() / 2.0,
            (-2.0 * w).exp() / 2.0,
        ]));
        assert!(matches!(
            isocovariant_bound(&sigma, 1, 0.1),
            Err(Error::InfeasibleCovariance { .. })
        ));
    }

    #[test]
    fn spectrum_minimize_cases() {
        for (m, e) in [(1usize, 1.0), (2, 0.5), (3, 1.0), (4, 0.25)] {
            let opt = spectrum_minimize(m, e).unwrap();
            let me = m as f64 * e;
            assert_relative_eq!(
                opt.fidelity,
                (-4.0 * me * me - 4.0 * me).exp(),
                max_relative = 1e-10
            );
            assert_abs_diff_eq!(opt.lambda_spectrum[0], 2.0 * me + 1.0, epsilon = 1e-12);
            for l in &opt.lambda_spectrum[1..2 * m - 1] {
                assert_abs_diff_eq!(*l, 1.0);
            }
            assert_abs_diff_eq!(
                opt.lambda_spectrum[2 * m - 1],
                1.0 / (2.0 * me + 1.0),
                epsilon = 1e-12
            );
        }
        // M = 1 agrees with the single-mode optimum exactly
        let e = 0.8;
        assert_eq!(
            spectrum_minimize(1, e).unwrap().fidelity,
            optimal_pair(e).unwrap().fidelity
        );
    }

    #[test]
    fn unsqueezed_spectrum_value() {
        // all λⱼ = 1 gives e^{-4ME}
        let (m, e) = (3usize, 0.5);
        let total = m as f64 * e;
        let lambdas = vec![1.0; m];
        let sum: f64 = lambdas.iter().map(|l| l + 1.0 / l).sum();
        let exponent = -2.0 * 1.0 * (2.0 * total + m as f64 - 0.5 * sum);
        assert_relative_eq!(exponent.exp(), (-4.0 * total).exp(), max_relative = 1e-14);
    }

    #[test]
    fn symmetric_transform_properties() {
        // M = 1 is the identity
        let (a, b) = allin_pair(1, 0.5).unwrap();
        let (ta, _) = symmetric_transform((&a, &b)).unwrap();
        assert!((ta.mean() - a.mean()).norm() < 1e-14);

        // M = 2: energy and fidelity preserved, marginals equalized
        let (a, b) = allin_pair(2, 0.5).unwrap();
        let f_before = pure_fidelity(&a, &b).unwrap();
        let (ta, tb) = symmetric_transform((&a, &b)).unwrap();
        assert_relative_eq!(
            pure_fidelity(&ta, &tb).unwrap(),
            f_before,
            max_relative = 1e-10
        );
        assert_abs_diff_eq!(ta.energy(), a.energy(), epsilon = 1e-10);
        for state in [&ta, &tb] {
            assert_abs_diff_eq!(state.marginal_energy(0).unwrap(), 0.5, epsilon = 1e-10);
            assert_abs_diff_eq!(state.marginal_energy(1).unwrap(), 0.5, epsilon = 1e-10);
        }

        // vacuum pair is fixed
        let vac = GaussianState::vacuum(3);
        let (tv, _) = symmetric_transform((&vac, &vac)).unwrap();
        assert!((tv.cov() - vac.cov()).iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn separable_product_values() {
        let one = separable_product_min(1, 0.7).unwrap();
        assert_eq!(one.symmetric, one.general);

        let two = separable_product_min(2, 0.5).unwrap();
        assert_relative_eq!(two.symmetric, (-6.0f64).exp(), max_relative = 1e-12);
        assert_relative_eq!(two.general, (-8.0f64).exp(), max_relative = 1e-12);

        let three = separable_product_min(3, 1.0).unwrap();
        assert_relative_eq!(three.symmetric, (-24.0f64).exp(), max_relative = 1e-12);
        assert_relative_eq!(three.general, (-48.0f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn lemma3_chain_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let modes = rng.gen_range(1..=3);
            let energy = rng.gen_range(0.2..2.0);
            let (s1, s2) = random_isocovariant_pair(modes, energy, &mut rng).unwrap();
            let me = modes as f64 * energy;
            assert_abs_diff_eq!(s1.energy(), me, epsilon = 1e-9);
            assert_abs_diff_eq!(s2.energy(), me, epsilon = 1e-9);
            // det(Σ₁+Σ₂) = 1 for isocovariant pure pairs
            assert_abs_diff_eq!((s1.cov() + s2.cov()).determinant(), 1.0, epsilon = 1e-9);
            let f = pure_fidelity(&s1, &s2).unwrap();
            let bound = isocovariant_bound(s1.cov(), modes, energy).unwrap();
            assert!(f >= bound - 1e-12, "f = {f}, bound = {bound}");
        }
    }

    #[test]
    fn passive_transforms_preserve_energy_and_fidelity() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let (a, b) = allin_pair(3, 0.4).unwrap();
        let f = pure_fidelity(&a, &b).unwrap();
        for _ in 0..20 {
            let o = random_orthogonal_symplectic(3, &mut rng).unwrap();
            let ta = a.apply_symplectic(&o).unwrap();
            let tb = b.apply_symplectic(&o).unwrap();
            assert_abs_diff_eq!(ta.energy(), a.energy(), epsilon = 1e-10);
            assert_abs_diff_eq!(tb.energy(), b.energy(), epsilon = 1e-10);
            assert_relative_eq!(pure_fidelity(&ta, &tb).unwrap(), f, max_relative = 1e-10);
        }
    }
}
