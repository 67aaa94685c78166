//! Single-mode energy-constrained fidelity minimization: the closed-form
//! optimal pair, the reduced two-parameter objective with its quartic
//! critical-point system and polar curves, a finite-difference Hessian
//! verification, and an independent multi-start numerical minimizer over the
//! full displaced-squeezed family.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fidelity::{helstrom_error, pure_fidelity};
use crate::gaussian_core::{state_from_params, PureStateParams};
use crate::minimize;
use crate::workers;
use crate::{Error, Result};

const NUM_STARTS: usize = 32;

/// The maximally trace-distant isoenergetic pair at energy `E`: both states
/// squeezed along `q` with `d_c = 2E+1`, displaced by `∓r`.
#[derive(Debug, Clone, Copy)]
pub struct OptimalPair {
    pub energy: f64,
    pub d_c: f64,
    pub r: f64,
    pub state1: PureStateParams,
    pub state2: PureStateParams,
    pub fidelity: f64,
    pub p_err: f64,
}

/// One refined intersection of the polar curves.
#[derive(Debug, Clone, Copy)]
pub struct PolarIntersection {
    pub theta: f64,
    pub radius: f64,
    /// |R₁(ϑ) - R₂(ϑ)| after refinement.
    pub residual: f64,
    /// |g(d₁,d₂)| and |g(d₂,d₁)| at the reconstructed point.
    pub quartic_residuals: (f64, f64),
    /// Scale factor (sum of quartic term magnitudes) for relative comparison.
    pub quartic_scale: f64,
}

#[derive(Debug, Clone)]
pub struct PolarSolveReport {
    pub energy: f64,
    pub intersections: Vec<PolarIntersection>,
}

#[derive(Debug, Clone, Copy)]
pub struct StartSummary {
    pub start: usize,
    pub objective: f64,
    pub converged: bool,
}

/// Result of the multi-start numerical minimization.
#[derive(Debug, Clone)]
pub struct OptimumReport {
    pub energy: f64,
    pub state1: PureStateParams,
    pub state2: PureStateParams,
    pub fidelity: f64,
    pub p_err: f64,
    pub gradient_norm: f64,
    pub function_evals: usize,
    pub starts: Vec<StartSummary>,
}

fn require_positive_energy(energy: f64) -> Result<()> {
    if !(energy > 0.0 && energy.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "energy must be positive and finite, got {energy} \
             (E = 0 admits only the vacuum, so no state pair exists)"
        )));
    }
    Ok(())
}

/// Closed-form optimal pair: `d_c = 2E+1`, `r = √((E²+E)/(2E+1))`,
/// fidelity `e^{-4E²-4E}`.
pub fn optimal_pair(energy: f64) -> Result<OptimalPair> {
    require_positive_energy(energy)?;
    let d_c = 2.0 * energy + 1.0;
    let r = ((energy * energy + energy) / d_c).sqrt();
    let z = 0.5 * d_c.ln();
    let state1 = PureStateParams::new(Complex64::new(-r, 0.0), z, 0.0)?;
    let state2 = PureStateParams::new(Complex64::new(r, 0.0), z, 0.0)?;
    let fidelity = (-4.0 * energy * energy - 4.0 * energy).exp();
    Ok(OptimalPair {
        energy,
        d_c,
        r,
        state1,
        state2,
        fidelity,
        p_err: helstrom_error(fidelity)?,
    })
}

fn d_max(energy: f64) -> f64 {
    2.0 * energy + 1.0 + 2.0 * (energy * energy + energy).sqrt()
}

/// Fidelity along the equal-squeezing slice: `F(d) = e^{d²-(4E+2)d+1}` for
/// `d ∈ [1, 2E+1+2√(E²+E)]`.
pub fn equal_d_fidelity(d: f64, energy: f64) -> Result<f64> {
    let hi = d_max(energy);
    if !(1.0..=hi).contains(&d) {
        return Err(Error::InvalidInput(format!(
            "d = {d} outside [1, {hi}] for energy {energy}"
        )));
    }
    Ok((d * d - (4.0 * energy + 2.0) * d + 1.0).exp())
}

/// The quartic whose simultaneous vanishing (with arguments swapped) marks
/// critical points of the reduced objective:
/// `g = 2(d₁d₂³+d₁³d₂) + d₂² - d₁² - d₁d₂²(16E+8) + 4d₁²d₂²`.
pub fn quartic_g(d1: f64, d2: f64, energy: f64) -> f64 {
    2.0 * (d1 * d2.powi(3) + d1.powi(3) * d2) + d2 * d2
        - d1 * d1
        - d1 * d2 * d2 * (16.0 * energy + 8.0)
        + 4.0 * d1 * d1 * d2 * d2
}

/// Sum of the magnitudes of the quartic's terms, for scaled residual checks.
pub fn quartic_scale(d1: f64, d2: f64, energy: f64) -> f64 {
    let s = 2.0 * (d1 * d2.powi(3)).abs()
        + 2.0 * (d1.powi(3) * d2).abs()
        + d2 * d2
        + d1 * d1
        + (d1 * d2 * d2 * (16.0 * energy + 8.0)).abs()
        + 4.0 * d1 * d1 * d2 * d2;
    s.max(1.0)
}

fn squeeze_energy_term(d: f64) -> f64 {
    (d - 1.0) * (d - 1.0) / (4.0 * d)
}

/// Fidelity of the antipodal-mean reduced problem as a function of the two
/// squeezing parameters, with the displacement eliminated by the total-energy
/// constraint: `(2√(d₁d₂)/(d₁+d₂)) exp(-(8d₁d₂/(d₁+d₂))(E - f/2))`.
pub fn reduced_fidelity(d1: f64, d2: f64, energy: f64) -> f64 {
    let sum = d1 + d2;
    let p = 8.0 * d1 * d2 / sum;
    let q = energy - 0.5 * (squeeze_energy_term(d1) + squeeze_energy_term(d2));
    (2.0 * (d1 * d2).sqrt() / sum) * (-p * q).exp()
}

/// Log of [`reduced_fidelity`].
pub fn reduced_log_fidelity(d1: f64, d2: f64, energy: f64) -> f64 {
    let sum = d1 + d2;
    let p = 8.0 * d1 * d2 / sum;
    let q = energy - 0.5 * (squeeze_energy_term(d1) + squeeze_energy_term(d2));
    0.5 * (4.0 * d1 * d2).ln() - sum.ln() - p * q
}

/// Analytic gradient of [`reduced_log_fidelity`] in `(d₁, d₂)`.
pub fn reduced_log_gradient(d1: f64, d2: f64, energy: f64) -> (f64, f64) {
    let sum = d1 + d2;
    let p = 8.0 * d1 * d2 / sum;
    let q = energy - 0.5 * (squeeze_energy_term(d1) + squeeze_energy_term(d2));
    let g1 =
        0.5 / d1 - 1.0 / sum - 8.0 * d2 * d2 / (sum * sum) * q + p * (1.0 - 1.0 / (d1 * d1)) / 8.0;
    let g2 =
        0.5 / d2 - 1.0 / sum - 8.0 * d1 * d1 / (sum * sum) * q + p * (1.0 - 1.0 / (d2 * d2)) / 8.0;
    (g1, g2)
}

/// The two polar curves whose intersections in `ϑ ∈ (0, π/4]` solve the
/// quartic system. `None` marks a negative radicand (curve undefined there).
pub fn polar_curves(energy: f64, theta: f64) -> Result<(Option<f64>, Option<f64>)> {
    if !(theta > 0.0 && theta < std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidInput(format!(
            "theta = {theta} outside (0, π/2)"
        )));
    }
    let s2 = (2.0 * theta).sin();
    let c2 = (2.0 * theta).cos();
    let denom = s2 + s2 * s2;
    let common = 4.0 * c2 * denom;
    let a = 8.0 * energy + 4.0;

    // Rᵢ = ((4E+2)·trig·sin2ϑ + ½√radᵢ) / (sin2ϑ + sin²2ϑ)
    let rad1 = a * a * theta.sin().powi(2) * s2 * s2 + common;
    let r1 = (rad1 >= 0.0).then(|| ((0.5 * a) * theta.sin() * s2 + 0.5 * rad1.sqrt()) / denom);

    let rad2 = a * a * theta.cos().powi(2) * s2 * s2 - common;
    let r2 = (rad2 >= 0.0).then(|| ((0.5 * a) * theta.cos() * s2 + 0.5 * rad2.sqrt()) / denom);

    Ok((r1, r2))
}

fn curve_gap(energy: f64, theta: f64) -> Option<f64> {
    match polar_curves(energy, theta).ok()? {
        (Some(r1), Some(r2)) => Some(r1 - r2),
        _ => None,
    }
}

fn make_intersection(energy: f64, theta: f64) -> PolarIntersection {
    let (r1, r2) = polar_curves(energy, theta).expect("theta in range");
    let r1 = r1.expect("R1 defined at an intersection");
    let r2 = r2.expect("R2 defined at an intersection");
    let radius = 0.5 * (r1 + r2);
    let d1 = radius * theta.cos();
    let d2 = radius * theta.sin();
    PolarIntersection {
        theta,
        radius,
        residual: (r1 - r2).abs(),
        quartic_residuals: (
            quartic_g(d1, d2, energy).abs(),
            quartic_g(d2, d1, energy).abs(),
        ),
        quartic_scale: quartic_scale(d1, d2, energy),
    }
}

/// Scans `ϑ ∈ (0, π/4]` for intersections of the polar curves, refining each
/// sign change by bisection. `ϑ = π/4` is always reported.
pub fn find_intersections(energy: f64, grid_points: usize) -> Result<PolarSolveReport> {
    require_positive_energy(energy)?;
    if grid_points < 64 {
        return Err(Error::InvalidInput(format!(
            "grid_points must be at least 64, got {grid_points}"
        )));
    }
    let quarter = std::f64::consts::FRAC_PI_4;
    let step = quarter / grid_points as f64;

    let refine = |mut lo: f64, mut hi: f64, mut g_lo: f64| -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let g_mid = curve_gap(energy, mid).unwrap_or(0.0);
            if g_mid == 0.0 || (hi - lo) < 1e-16 {
                return mid;
            }
            if g_lo * g_mid < 0.0 {
                hi = mid;
            } else {
                lo = mid;
                g_lo = g_mid;
            }
        }
        0.5 * (lo + hi)
    };

    let mut intersections = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    // treat the open left endpoint as an undefined node so a root right next
    // to a definition boundary in the first cell is still bracketed
    let mut prev_undefined: Option<f64> = Some(step * 1e-6);
    for k in 1..=grid_points {
        let theta = k as f64 * step;
        let Some(gap) = curve_gap(energy, theta) else {
            prev = None;
            prev_undefined = Some(theta);
            continue;
        };
        if let Some((t_prev, gap_prev)) = prev {
            if gap_prev == 0.0 {
                intersections.push(t_prev);
            } else if gap_prev * gap < 0.0 {
                intersections.push(refine(t_prev, theta, gap_prev));
            }
        } else if let Some(t_undef) = prev_undefined {
            // A curve becomes defined inside this cell. Bisect toward the
            // definition boundary and check for a root hiding between the
            // boundary and the first defined grid node: the curves meet at a
            // square-root branch point, so the gap can flip sign there.
            let (mut lo, mut hi) = (t_undef, theta);
            let mut g_hi = gap;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                match curve_gap(energy, mid) {
                    Some(g) => {
                        hi = mid;
                        g_hi = g;
                    }
                    None => lo = mid,
                }
                if hi - lo < 1e-15 {
                    break;
                }
            }
            if g_hi * gap < 0.0 {
                intersections.push(refine(hi, theta, g_hi));
            }
        }
        prev = Some((theta, gap));
        prev_undefined = None;
    }

    // the symmetric solution at π/4 is exact by construction
    intersections.retain(|&t| (t - quarter).abs() > 1e-8);
    intersections.push(quarter);
    intersections.sort_by(|a, b| a.partial_cmp(b).unwrap());

    Ok(PolarSolveReport {
        energy,
        intersections: intersections
            .into_iter()
            .map(|t| make_intersection(energy, t))
            .collect(),
    })
}

/// Closed-form determinant of the Hessian of the reduced fidelity at the
/// symmetric critical point: `e^{-8E²-8E}(8E²+8E+1)/(2(2E+1)²)`.
pub fn hessian_determinant_closed_form(energy: f64) -> f64 {
    (-8.0 * energy * energy - 8.0 * energy).exp() * (8.0 * energy * energy + 8.0 * energy + 1.0)
        / (2.0 * (2.0 * energy + 1.0).powi(2))
}

/// Central finite-difference Hessian determinant of the reduced fidelity at
/// `d₁ = d₂ = 2E+1`, with step `1e-4·(2E+1)`.
pub fn hessian_check(energy: f64) -> Result<f64> {
    require_positive_energy(energy)?;
    let t = 2.0 * energy + 1.0;
    let h = 1e-4 * t;
    let f = |x: &[f64]| reduced_fidelity(x[0], x[1], energy);
    let hess = minimize::fd_hessian(&f, &[t, t], &[h, h]);
    Ok(hess[(0, 0)] * hess[(1, 1)] - hess[(0, 1)] * hess[(1, 0)])
}

/// Objective for the full single-mode family: `x = (r₁, r₂, θ₁, θ₂)` with
/// each `|zⱼ| = asinh√(E - rⱼ²)` forced by the per-state energy constraint.
/// Returns `log` fidelity, which the minimizer drives as negative as it can.
fn constrained_log_fidelity(energy: f64, x: &[f64]) -> f64 {
    let mut params = [PureStateParams::coherent(Complex64::new(0.0, 0.0)).unwrap(); 2];
    for j in 0..2 {
        let slack = energy - x[j] * x[j];
        if slack < 0.0 {
            return 1e6 + slack.abs();
        }
        let mag = slack.sqrt().asinh();
        match PureStateParams::new(Complex64::new(x[j], 0.0), mag, x[2 + j]) {
            Ok(p) => params[j] = p,
            Err(_) => return 1e6,
        }
    }
    let s1 = state_from_params(&params[..1]);
    let s2 = state_from_params(&params[1..]);
    match (s1, s2) {
        (Ok(a), Ok(b)) => match pure_fidelity(&a, &b) {
            Ok(f) if f > 0.0 => f.ln(),
            _ => 1e6,
        },
        _ => 1e6,
    }
}

/// Multi-start numerical minimization of the fidelity over the full
/// energy-constrained displaced-squeezed family. Independent of the closed
/// forms above.
pub fn numeric_minimize(energy: f64, seed: u64) -> Result<OptimumReport> {
    require_positive_energy(energy)?;
    let r_max = energy.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<[f64; 4]> = (0..NUM_STARTS)
        .map(|_| {
            [
                rng.gen_range(-0.95 * r_max..0.95 * r_max),
                rng.gen_range(-0.95 * r_max..0.95 * r_max),
                rng.gen_range(0.0..2.0 * std::f64::consts::PI),
                rng.gen_range(0.0..2.0 * std::f64::consts::PI),
            ]
        })
        .collect();

    let objective = move |x: &[f64]| constrained_log_fidelity(energy, x);
    let grad_h = [1e-5 * (1.0 + r_max); 4];
    let hess_h = [1e-4 * (1.0 + r_max); 4];

    struct StartOutcome {
        start: usize,
        x: Vec<f64>,
        fx: f64,
        grad_norm: f64,
        evals: usize,
        converged: bool,
    }

    let run_start = |i: usize| -> Vec<StartOutcome> {
        let scale = [0.1 * r_max.max(0.05); 4];
        let nm = minimize::nelder_mead(&objective, &starts[i], &scale, 1e-13, 4000);
        let x = minimize::newton_polish(&objective, &nm.x, &grad_h, &hess_h, 12);
        let fx = objective(&x);
        let grad = minimize::fd_gradient(&objective, &x, &grad_h);
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        vec![StartOutcome {
            start: i,
            x,
            fx,
            grad_norm,
            evals: nm.evals,
            converged: nm.converged,
        }]
    };

    let mut outcomes = workers::map_reduce(NUM_STARTS, run_start, |mut a, mut b| {
        a.append(&mut b);
        a
    })
    .unwrap_or_default();
    outcomes.sort_by_key(|o| o.start);

    let starts_summary: Vec<StartSummary> = outcomes
        .iter()
        .map(|o| StartSummary {
            start: o.start,
            objective: o.fx,
            converged: o.converged,
        })
        .collect();
    let total_evals: usize = outcomes.iter().map(|o| o.evals).sum();

    let best = outcomes
        .iter()
        .filter(|o| o.grad_norm < 1e-8)
        .min_by(|a, b| a.fx.partial_cmp(&b.fx).unwrap());
    let Some(best) = best else {
        return Err(Error::ConvergenceFailure(format!(
            "no start reached gradient norm < 1e-8; per-start (objective, grad): {:?}",
            outcomes
                .iter()
                .map(|o| (o.fx, o.grad_norm))
                .collect::<Vec<_>>()
        )));
    };

    let fidelity = best.fx.exp();
    let mk = |j: usize| -> Result<PureStateParams> {
        let r = best.x[j];
        PureStateParams::new(
            Complex64::new(r, 0.0),
            (energy - r * r).max(0.0).sqrt().asinh(),
            best.x[2 + j],
        )
    };
    Ok(OptimumReport {
        energy,
        state1: mk(0)?,
        state2: mk(1)?,
        fidelity,
        p_err: helstrom_error(fidelity)?,
        gradient_norm: best.grad_norm,
        function_evals: total_evals,
        starts: starts_summary,
    })
}

/// Numerically minimizes the centered (zero-mean) two-state fidelity
/// `1/cosh(asinh√(2E - sinh²w₁) - w₁)` over `w₁`; the minimum is
/// `1/(2E+1)` at `w₁ = -asinh√E`.
pub fn centered_minimum(energy: f64) -> Result<(f64, f64)> {
    require_positive_energy(energy)?;
    let w_lim = (2.0 * energy).sqrt().asinh();
    let f = |w1: f64| {
        let slack = 2.0 * energy - w1.sinh().powi(2);
        if slack < 0.0 {
            return f64::INFINITY;
        }
        1.0 / (slack.sqrt().asinh() - w1).cosh()
    };
    let (w1, fidelity) = minimize::golden_section(&f, -w_lim, 0.0, 1e-11);
    Ok((w1, fidelity))
}
