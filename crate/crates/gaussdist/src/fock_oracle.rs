//! Brute-force verification layer in a truncated number basis. States are
//! built by exponentiating the truncated ladder-operator generators onto the
//! vacuum vector, so overlaps, energies, and trace distances here share no
//! code with the phase-space closed forms.

use num_complex::Complex64;

use crate::gaussian_core::PureStateParams;
use crate::workers;
use crate::{Error, Result};

/// Tail-mass acceptance threshold for the public constructor.
const TAIL_THRESHOLD: f64 = 1e-8;
/// Stricter internal threshold used by the auto-escalating constructor, so
/// that overlaps are trustworthy well below the 1e-8 comparison tolerances.
const AUTO_TAIL_THRESHOLD: f64 = 1e-16;

/// Amplitudes of a pure state on the number basis `|0⟩..|N⟩`.
#[derive(Debug, Clone)]
pub struct FockVector {
    cutoff: usize,
    amplitudes: Vec<Complex64>,
    renormalized: bool,
}

impl FockVector {
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Whether the amplitudes were rescaled to unit norm after truncation.
    pub fn is_renormalized(&self) -> bool {
        self.renormalized
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Probability mass above level `0.9 N`.
    pub fn tail_mass(&self) -> f64 {
        let start = (0.9 * self.cutoff as f64).floor() as usize + 1;
        self.amplitudes[start.min(self.amplitudes.len())..]
            .iter()
            .map(|c| c.norm_sqr())
            .sum()
    }

    /// Unit-norm copy, flagged as renormalized.
    pub fn renormalize(&self) -> Self {
        let n = self.norm();
        Self {
            cutoff: self.cutoff,
            amplitudes: self.amplitudes.iter().map(|c| c / n).collect(),
            renormalized: true,
        }
    }
}

/// Minimal cutoff for a state of energy `e`: `max(32, ⌈8(e+√e)+16⌉)`.
/// Photon-number tails of displaced-squeezed states decay sub-exponentially
/// at a rate controlled by the energy.
pub fn heuristic_cutoff(energy: f64) -> usize {
    let e = energy.max(0.0);
    32usize.max((8.0 * (e + e.sqrt()) + 16.0).ceil() as usize)
}

/// Applies `exp(G)` to `v` for a banded anti-Hermitian generator given by its
/// matrix-vector product, by Taylor summation over enough substeps that each
/// partial exponential converges fast. `gen_norm` bounds `‖G‖`.
fn exp_apply<F>(matvec: F, v: &[Complex64], gen_norm: f64) -> Vec<Complex64>
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let substeps = 1 + (gen_norm / 2.0).ceil() as usize;
    let scale = 1.0 / substeps as f64;
    let mut out = v.to_vec();
    for _ in 0..substeps {
        let mut acc = out.clone();
        let mut term = out;
        for k in 1..200 {
            let gv = matvec(&term);
            let factor = scale / k as f64;
            for (t, g) in term.iter_mut().zip(gv.iter()) {
                *t = g * factor;
            }
            let term_norm: f64 = term.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            for (a, t) in acc.iter_mut().zip(term.iter()) {
                *a += t;
            }
            if term_norm < 1e-20 {
                break;
            }
        }
        out = acc;
    }
    out
}

/// `½(z̄a² − za†²)` acting on a truncated vector.
fn squeeze_matvec(z: Complex64, v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let m = i as f64;
        if i + 2 < n {
            out[i] += z.conj() * 0.5 * ((m + 1.0) * (m + 2.0)).sqrt() * v[i + 2];
        }
        if i >= 2 {
            out[i] -= z * 0.5 * (m * (m - 1.0)).sqrt() * v[i - 2];
        }
    }
    out
}

/// `αa† − ᾱa` acting on a truncated vector.
fn displace_matvec(alpha: Complex64, v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let m = i as f64;
        if i >= 1 {
            out[i] += alpha * m.sqrt() * v[i - 1];
        }
        if i + 1 < n {
            out[i] -= alpha.conj() * (m + 1.0).sqrt() * v[i + 1];
        }
    }
    out
}

fn build_with_threshold(
    params: &PureStateParams,
    cutoff: usize,
    tail_threshold: f64,
) -> Result<FockVector> {
    let z = Complex64::from_polar(params.squeeze_magnitude, params.squeeze_phase);
    let alpha = params.displacement;
    let dim = cutoff + 1;
    let mut v = vec![Complex64::new(0.0, 0.0); dim];
    v[0] = Complex64::new(1.0, 0.0);
    // D(α)S(z)|0⟩: squeeze first, then displace.
    if params.squeeze_magnitude > 0.0 {
        let bound = params.squeeze_magnitude * dim as f64;
        v = exp_apply(|u| squeeze_matvec(z, u), &v, bound);
    }
    if alpha.norm() > 0.0 {
        let bound = 2.0 * alpha.norm() * (dim as f64).sqrt();
        v = exp_apply(|u| displace_matvec(alpha, u), &v, bound);
    }
    let vector = FockVector {
        cutoff,
        amplitudes: v,
        renormalized: false,
    };
    let tail = vector.tail_mass();
    if tail >= tail_threshold {
        return Err(Error::CutoffTooSmall {
            cutoff,
            tail_mass: tail,
            threshold: tail_threshold,
        });
    }
    Ok(vector)
}

/// Builds `D(α)S(z)|0⟩` at the given cutoff.
pub fn build_state(params: &PureStateParams, cutoff: usize) -> Result<FockVector> {
    let minimum = heuristic_cutoff(params.energy());
    if cutoff < minimum {
        return Err(Error::InvalidInput(format!(
            "cutoff {cutoff} below the heuristic minimum {minimum} for energy {}",
            params.energy()
        )));
    }
    build_with_threshold(params, cutoff, TAIL_THRESHOLD)
}

/// Builds the state at the heuristic cutoff, doubling until the tail mass is
/// negligible rather than merely acceptable.
pub fn build_state_auto(params: &PureStateParams) -> Result<FockVector> {
    let mut cutoff = heuristic_cutoff(params.energy());
    for _ in 0..8 {
        match build_with_threshold(params, cutoff, AUTO_TAIL_THRESHOLD) {
            Ok(v) => return Ok(v),
            Err(Error::CutoffTooSmall { .. }) => cutoff *= 2,
            Err(e) => return Err(e),
        }
    }
    Err(Error::ConvergenceFailure(format!(
        "tail mass would not fall below {AUTO_TAIL_THRESHOLD:e} by cutoff {cutoff}"
    )))
}

/// Builds every state at one shared cutoff (so they can be overlapped),
/// starting from the heuristic for the largest energy and doubling until all
/// tails are negligible.
pub fn build_states_auto(params: &[PureStateParams]) -> Result<Vec<FockVector>> {
    let max_energy = params.iter().map(|p| p.energy()).fold(0.0, f64::max);
    let mut cutoff = heuristic_cutoff(max_energy);
    'escalate: for _ in 0..8 {
        let mut out = Vec::with_capacity(params.len());
        for p in params {
            match build_with_threshold(p, cutoff, AUTO_TAIL_THRESHOLD) {
                Ok(v) => out.push(v),
                Err(Error::CutoffTooSmall { .. }) => {
                    cutoff *= 2;
                    continue 'escalate;
                }
                Err(e) => return Err(e),
            }
        }
        return Ok(out);
    }
    Err(Error::ConvergenceFailure(format!(
        "tail mass would not fall below {AUTO_TAIL_THRESHOLD:e} by cutoff {cutoff}"
    )))
}

/// `⟨v₁|v₂⟩ = Σ c̄¹ₙ c²ₙ`.
pub fn overlap(v1: &FockVector, v2: &FockVector) -> Result<Complex64> {
    if v1.cutoff != v2.cutoff {
        return Err(Error::InvalidInput(format!(
            "cutoff mismatch: {} vs {}",
            v1.cutoff, v2.cutoff
        )));
    }
    Ok(v1
        .amplitudes
        .iter()
        .zip(v2.amplitudes.iter())
        .map(|(a, b)| a.conj() * b)
        .sum())
}

/// Mean photon number `Σ n|cₙ|²`.
pub fn fock_energy(v: &FockVector) -> f64 {
    v.amplitudes
        .iter()
        .enumerate()
        .map(|(n, c)| n as f64 * c.norm_sqr())
        .sum()
}

/// Trace distance between the pure states `|v₁⟩⟨v₁|` and `|v₂⟩⟨v₂|`, from the
/// spectrum of their difference restricted to the span of the two vectors.
pub fn trace_distance_pure(v1: &FockVector, v2: &FockVector) -> Result<f64> {
    let s = overlap(v1, v2)?;
    // Orthonormalize {v₁, v₂}: e₁ = v₁, e₂ ∝ v₂ − ⟨v₁|v₂⟩v₁.
    let w: Vec<Complex64> = v1
        .amplitudes
        .iter()
        .zip(v2.amplitudes.iter())
        .map(|(a, b)| b - s * a)
        .collect();
    let w_norm: f64 = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if w_norm < 1e-12 {
        return Ok(0.0);
    }
    // In the {e₁, e₂} basis the difference operator is the Hermitian 2×2
    // [[1−|s|², −s·w̄ₙ-component], ...]; its eigenvalues come from trace and
    // determinant.
    let a11 = 1.0 - s.norm_sqr();
    let a12 = -s * w_norm;
    let a22 = -w_norm * w_norm;
    let trace = a11 + a22;
    let det = a11 * a22 - a12.norm_sqr();
    let disc = (trace * trace / 4.0 - det).max(0.0).sqrt();
    let l1 = trace / 2.0 + disc;
    let l2 = trace / 2.0 - disc;
    Ok(l1.abs() + l2.abs())
}

/// Default coarse squeeze-phase sweep: multiples of π/4, which contains the
/// critical phases 0 and π exactly.
fn coarse_angles() -> Vec<f64> {
    (0..8)
        .map(|k| k as f64 * std::f64::consts::FRAC_PI_4)
        .collect()
}

/// Exhaustive grid minimum of the pairwise fidelity over displaced-squeezed
/// pairs at energy `e`, with the squeeze magnitude eliminated by the energy
/// constraint and the coarse default phase sweep.
pub fn grid_bruteforce(energy: f64, resolution: usize) -> Result<f64> {
    grid_bruteforce_with_angles(energy, resolution, &coarse_angles())
}

/// Grid minimum with an explicit squeeze-phase grid (full-angle mode).
pub fn grid_bruteforce_with_angles(energy: f64, resolution: usize, angles: &[f64]) -> Result<f64> {
    if !(energy > 0.0 && energy.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "energy must be positive and finite, got {energy}"
        )));
    }
    if resolution < 32 {
        return Err(Error::InvalidInput(format!(
            "resolution must be at least 32, got {resolution}"
        )));
    }
    if angles.is_empty() {
        return Err(Error::InvalidInput("empty squeeze-phase grid".into()));
    }

    let r_max = energy.sqrt();
    let radial = |i: usize| -> f64 { i as f64 / (resolution - 1) as f64 * r_max };
    let params_at = |r: f64, theta: f64| -> Result<PureStateParams> {
        let squeeze = (energy - r * r).max(0.0).sqrt().asinh();
        PureStateParams::new(Complex64::new(r, 0.0), squeeze, theta)
    };

    // By the phase symmetry of the problem the first displacement can be
    // taken non-positive and the second non-negative; precompute one state
    // per distinct (r, θ) instead of per grid pair. All states share a
    // cutoff so overlaps are well defined.
    let na = angles.len();
    let mut all_params = Vec::with_capacity(2 * resolution * na);
    for i in 0..resolution {
        for &theta in angles {
            all_params.push(params_at(-radial(i), theta)?);
            all_params.push(params_at(radial(i), theta)?);
        }
    }
    let states = build_states_auto(&all_params)?;
    let (mut side1, mut side2) = (Vec::new(), Vec::new());
    for pair in states.chunks_exact(2) {
        side1.push(pair[0].clone());
        side2.push(pair[1].clone());
    }

    let n_pairs = side1.len() * side2.len();
    let eval = |flat: usize| -> (f64, usize) {
        let (i, j) = (flat / side2.len(), flat % side2.len());
        let f = overlap(&side1[i], &side2[j])
            .expect("uniform cutoff within a side")
            .norm_sqr();
        (f, flat)
    };
    // Minimum with a lexicographic tie-break so the result is independent of
    // the worker count.
    let best = workers::map_reduce(n_pairs, eval, |a, b| {
        if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
            b
        } else {
            a
        }
    })
    .expect("nonempty grid");
    Ok(best.0)
}
