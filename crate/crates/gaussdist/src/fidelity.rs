//! Closed-form fidelity, trace distance, and Helstrom error probability for
//! pure Gaussian states.

use crate::gaussian_core::GaussianState;
use crate::{Error, Result};

/// Fidelity, trace distance, and minimal discrimination error for a pair of
/// equiprobable pure states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscriminationResult {
    pub fidelity: f64,
    pub trace_distance: f64,
    pub p_err: f64,
}

impl DiscriminationResult {
    pub fn from_fidelity(fidelity: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&fidelity) {
            return Err(Error::InvalidInput(format!(
                "fidelity must lie in [0, 1], got {fidelity}"
            )));
        }
        let trace_distance = 2.0 * (1.0 - fidelity).sqrt();
        Ok(Self {
            fidelity,
            trace_distance,
            p_err: 0.5 - 0.25 * trace_distance,
        })
    }
}

fn require_pure(state: &GaussianState) -> Result<()> {
    if !state.is_pure() {
        return Err(Error::NotPure {
            det_two_sigma: state.det_two_sigma(),
        });
    }
    Ok(())
}

/// `|⟨φ₁|φ₂⟩|² = exp(-½ δᵀ(Σ₁+Σ₂)⁻¹δ) / √det(Σ₁+Σ₂)` with `δ = m₁-m₂`.
pub fn pure_fidelity(s1: &GaussianState, s2: &GaussianState) -> Result<f64> {
    if s1.modes() != s2.modes() {
        return Err(Error::DimensionMismatch {
            expected: s1.modes(),
            actual: s2.modes(),
        });
    }
    require_pure(s1)?;
    require_pure(s2)?;

    let sum = s1.cov() + s2.cov();
    let delta = s1.mean() - s2.mean();
    let (quad, det) = if s1.modes() == 1 {
        // closed-form 2×2 inverse via adjugate/determinant
        let det = sum[(0, 0)] * sum[(1, 1)] - sum[(0, 1)] * sum[(1, 0)];
        let quad = (sum[(1, 1)] * delta[0] * delta[0] - 2.0 * sum[(0, 1)] * delta[0] * delta[1]
            + sum[(0, 0)] * delta[1] * delta[1])
            / det;
        (quad, det)
    } else {
        let det = sum.determinant();
        let lu = sum.clone().lu();
        let solved = lu
            .solve(&delta)
            .ok_or_else(|| Error::InvalidInput("singular Σ₁+Σ₂".into()))?;
        (delta.dot(&solved), det)
    };
    if det <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "det(Σ₁+Σ₂) = {det} is not positive"
        )));
    }

    let value = (-0.5 * quad).exp() / det.sqrt();
    Ok(clamp_fidelity(value))
}

fn clamp_fidelity(value: f64) -> f64 {
    if !(0.0..=1.0).contains(&value) {
        if value < -1e-9 || value > 1.0 + 1e-9 {
            log::warn!("fidelity {value} outside [0,1] beyond round-off; clamping");
        }
        return value.clamp(0.0, 1.0);
    }
    value
}

/// Helstrom bound `½(1 - √(1-F))` for equiprobable pure states with
/// fidelity `F`.
pub fn helstrom_error(fidelity: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&fidelity) {
        return Err(Error::InvalidInput(format!(
            "fidelity must lie in [0, 1], got {fidelity}"
        )));
    }
    // For tiny F the direct form cancels catastrophically.
    if fidelity < 1e-8 {
        Ok(fidelity / (2.0 * (1.0 + (1.0 - fidelity).sqrt())))
    } else {
        Ok(0.5 * (1.0 - (1.0 - fidelity).sqrt()))
    }
}

/// Fidelity of `D(r₁)S(z₁)|0⟩` and `D(r₂)S(z₂)|0⟩` with real displacements
/// and real squeezing, parameterized by `dⱼ = e^{2zⱼ}`.
pub fn squeezed_pair_fidelity(r1: f64, r2: f64, d1: f64, d2: f64) -> Result<f64> {
    if d1 <= 0.0 || d2 <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "squeeze parameters d must be positive, got d1={d1}, d2={d2}"
        )));
    }
    let sum = d1 + d2;
    let value = (2.0 * (d1 * d2).sqrt() / sum) * (-2.0 * d1 * d2 * (r2 - r1).powi(2) / sum).exp();
    Ok(clamp_fidelity(value))
}

/// Fidelity of the opposite-phase branch: one state squeezed along `q`, the
/// other along `p`, displacements `±√(E - (b-1)²/(4b))` with `b = e^{2x}`.
pub fn opposite_phase_squeeze_fidelity(b: f64, energy: f64) -> Result<f64> {
    let b_max = 2.0 * energy + 1.0 + 2.0 * (energy * energy + energy).sqrt();
    if !(1.0..=b_max).contains(&b) {
        return Err(Error::InvalidInput(format!(
            "b = {b} outside the valid interval [1, {b_max}] for energy {energy}"
        )));
    }
    let pre = 2.0 * b / (1.0 + b * b);
    let value = pre * (-4.0 * pre * (energy - (b - 1.0).powi(2) / (4.0 * b))).exp();
    Ok(clamp_fidelity(value))
}

/// Fidelity `1/cosh(w₁-w₂)` of two centered squeezed vacua `S(wⱼ)|0⟩`.
pub fn centered_squeezed_fidelity(w1: f64, w2: f64) -> f64 {
    1.0 / (w1 - w2).cosh()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian_core::{state_from_params, PureStateParams};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn pure_state(re: f64, im: f64, mag: f64, phase: f64) -> GaussianState {
        state_from_params(&[PureStateParams::new(Complex64::new(re, im), mag, phase).unwrap()])
            .unwrap()
    }

    #[test]
    fn self_fidelity_is_one() {
        let s = pure_state(0.3, -0.2, 0.7, 1.1);
        assert_abs_diff_eq!(pure_fidelity(&s, &s).unwrap(), 1.0, epsilon = 1e-13);
    }

    #[test]
    fn opposite_coherent_fidelity() {
        let e = 1.25f64;
        let a = pure_state(e.sqrt(), 0.0, 0.0, 0.0);
        let b = pure_state(-e.sqrt(), 0.0, 0.0, 0.0);
        assert_abs_diff_eq!(
            pure_fidelity(&a, &b).unwrap(),
            (-4.0 * e).exp(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn opposite_squeezed_vacua_fidelity() {
        // S(x)|0⟩ vs S(-x)|0⟩ with per-state energy E: F = 1/(2E+1).
        let e = 0.8f64;
        let x = e.sqrt().asinh();
        let a = pure_state(0.0, 0.0, x, 0.0);
        let b = pure_state(0.0, 0.0, x, std::f64::consts::PI);
        assert_abs_diff_eq!(
            pure_fidelity(&a, &b).unwrap(),
            1.0 / (2.0 * e + 1.0),
            epsilon = 1e-13
        );
    }

    #[test]
    fn impure_input_rejected() {
        use nalgebra::{DMatrix, DVector};
        let thermal = GaussianState::new(DVector::zeros(2), DMatrix::identity(2, 2) * 1.5).unwrap();
        let vac = GaussianState::vacuum(1);
        assert!(matches!(
            pure_fidelity(&thermal, &vac),
            Err(Error::NotPure { .. })
        ));
    }

    #[test]
    fn helstrom_values() {
        assert_abs_diff_eq!(helstrom_error(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(helstrom_error(1.0).unwrap(), 0.5);
        // frozen from 40-digit evaluation of ½(1-√(1-e⁻³))
        assert_abs_diff_eq!(
            helstrom_error((-3.0f64).exp()).unwrap(),
            0.012605670008324764,
            epsilon = 1e-15
        );
        assert!(helstrom_error(1.5).is_err());
        assert!(helstrom_error(-0.1).is_err());
    }

    #[test]
    fn helstrom_small_fidelity_stable() {
        // p = F/(2(1+√(1-F))) = F/4 + F²/16 + O(F³); the naive ½(1-√(1-F))
        // would lose all digits here
        let f = 1e-12;
        let p = helstrom_error(f).unwrap();
        assert_relative_eq!(p, f / 4.0, max_relative = 1e-9);
        assert!(p > 0.0);
    }

    #[test]
    fn squeezed_pair_examples() {
        assert_abs_diff_eq!(squeezed_pair_fidelity(0.4, 0.4, 2.0, 2.0).unwrap(), 1.0);
        // equal d: F = e^{-d(r2-r1)²}
        let (d, r) = (3.0, 0.5);
        assert_abs_diff_eq!(
            squeezed_pair_fidelity(-r, r, d, d).unwrap(),
            (-d * (2.0 * r).powi(2)).exp(),
            epsilon = 1e-15
        );
        // Optimal-pair parameters: d = 2E+1, r = √((E²+E)/(2E+1))
        let e = 0.5f64;
        let d = 2.0 * e + 1.0;
        let r = ((e * e + e) / d).sqrt();
        assert_abs_diff_eq!(
            squeezed_pair_fidelity(-r, r, d, d).unwrap(),
            (-4.0 * e * e - 4.0 * e).exp(),
            epsilon = 1e-15
        );
        assert!(squeezed_pair_fidelity(0.0, 0.0, -1.0, 2.0).is_err());
    }

    #[test]
    fn opposite_phase_examples() {
        let e = 0.7f64;
        assert_abs_diff_eq!(
            opposite_phase_squeeze_fidelity(1.0, e).unwrap(),
            (-4.0 * e).exp(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(opposite_phase_squeeze_fidelity(1.0, 0.0).unwrap(), 1.0);
        // frozen from 40-digit evaluation of 0.8·e^{-1.2}
        assert_abs_diff_eq!(
            opposite_phase_squeeze_fidelity(2.0, 0.5).unwrap(),
            0.24095536952976168,
            epsilon = 1e-15
        );
        let err = opposite_phase_squeeze_fidelity(100.0, 0.5).unwrap_err();
        assert!(err.to_string().contains("interval"));
    }

    #[test]
    fn centered_squeezed_examples() {
        assert_abs_diff_eq!(centered_squeezed_fidelity(0.3, 0.3), 1.0);
        let e = 1.4f64;
        let w = e.sqrt().asinh();
        assert_abs_diff_eq!(
            centered_squeezed_fidelity(-w, w),
            1.0 / (2.0 * e + 1.0),
            epsilon = 1e-14
        );
        // cosh(ln 2) = 5/4
        assert_abs_diff_eq!(
            centered_squeezed_fidelity(0.0, 2.0f64.ln()),
            0.8,
            epsilon = 1e-15
        );
    }

    #[test]
    fn discrimination_result_identities() {
        let r = DiscriminationResult::from_fidelity(0.3).unwrap();
        assert_abs_diff_eq!(r.trace_distance, 2.0 * (0.7f64).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(r.p_err, 0.5 - 0.25 * r.trace_distance, epsilon = 1e-15);
        assert!(DiscriminationResult::from_fidelity(1.2).is_err());
    }

    #[test]
    fn consistency_with_closed_forms() {
        // squeezed_pair_fidelity against the general formula
        let (r1, r2, z1, z2) = (-0.4, 0.6, 0.3, 0.55);
        let s1 = pure_state(r1, 0.0, z1, 0.0);
        let s2 = pure_state(r2, 0.0, z2, 0.0);
        let via_general = pure_fidelity(&s1, &s2).unwrap();
        let via_closed =
            squeezed_pair_fidelity(r1, r2, (2.0 * z1).exp(), (2.0 * z2).exp()).unwrap();
        assert_abs_diff_eq!(via_general, via_closed, epsilon = 1e-12);

        // centered_squeezed_fidelity against the general formula. S(w)|0⟩
        // with w < 0 is S(|w|e^{iπ})|0⟩ in magnitude-phase form.
        let (w1, w2) = (-0.5f64, 0.9f64);
        let c1 = pure_state(0.0, 0.0, w1.abs(), std::f64::consts::PI);
        let c2 = pure_state(0.0, 0.0, w2.abs(), 0.0);
        assert_abs_diff_eq!(
            pure_fidelity(&c1, &c2).unwrap(),
            centered_squeezed_fidelity(w1, w2),
            epsilon = 1e-12
        );
    }

    proptest! {
        #[test]
        fn fidelity_symmetric(
            r1 in -1.5f64..1.5, r2 in -1.5f64..1.5,
            m1 in 0.0f64..1.2, m2 in 0.0f64..1.2,
            t1 in 0.0f64..6.28, t2 in 0.0f64..6.28,
        ) {
            let a = pure_state(r1, 0.1, m1, t1);
            let b = pure_state(r2, -0.2, m2, t2);
            let fab = pure_fidelity(&a, &b).unwrap();
            let fba = pure_fidelity(&b, &a).unwrap();
            prop_assert_eq!(fab, fba);
            prop_assert!((0.0..=1.0).contains(&fab));
        }

        #[test]
        fn fidelity_rotation_invariant(
            r1 in -1.5f64..1.5, m1 in 0.0f64..1.2, t1 in 0.0f64..6.28,
            r2 in -1.5f64..1.5, m2 in 0.0f64..1.2, t2 in 0.0f64..6.28,
            theta in 0.0f64..6.28,
        ) {
            let a = pure_state(r1, 0.0, m1, t1);
            let b = pure_state(r2, 0.0, m2, t2);
            let f = pure_fidelity(&a, &b).unwrap();
            let fr = pure_fidelity(
                &a.rotate(theta).unwrap(),
                &b.rotate(theta).unwrap(),
            ).unwrap();
            prop_assert!((f - fr).abs() < 1e-10);
        }

        #[test]
        fn fidelity_multiplicative_under_tensor(
            r1 in -1.0f64..1.0, m1 in 0.0f64..1.0,
            r2 in -1.0f64..1.0, m2 in 0.0f64..1.0,
            r3 in -1.0f64..1.0, m3 in 0.0f64..1.0,
            r4 in -1.0f64..1.0, m4 in 0.0f64..1.0,
        ) {
            let a1 = pure_state(r1, 0.0, m1, 0.0);
            let a2 = pure_state(r2, 0.0, m2, 0.0);
            let b1 = pure_state(r3, 0.0, m3, 0.0);
            let b2 = pure_state(r4, 0.0, m4, 0.0);
            let product = pure_fidelity(&a1.tensor(&a2), &b1.tensor(&b2)).unwrap();
            let factors = pure_fidelity(&a1, &b1).unwrap() * pure_fidelity(&a2, &b2).unwrap();
            prop_assert!((product - factors).abs() < 1e-12);
        }
    }
}
