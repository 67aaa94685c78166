//! Self-verification suite: every closed form in the library is replayed
//! against the independent Fock-basis oracle, the numeric minimizers, and
//! property checks. The CLI `verify` subcommand and the acceptance tests both
//! drive this module.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fidelity::pure_fidelity;
use crate::fock_oracle;
use crate::gaussian_core::{state_from_params, PureStateParams};
use crate::multimode;
use crate::optimum;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Fast,
    Full,
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

fn random_params(rng: &mut ChaCha8Rng, max_energy: f64) -> PureStateParams {
    loop {
        let p = PureStateParams::new(
            Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)),
            rng.gen_range(0.0..1.2),
            rng.gen_range(0.0..std::f64::consts::TAU),
        )
        .expect("finite parameters");
        if p.energy() <= max_energy && p.energy() > 1e-3 {
            return p;
        }
    }
}

fn oracle_equivalence(samples: usize, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_overlap = 0.0f64;
    let mut worst_energy = 0.0f64;
    for _ in 0..samples {
        let p1 = random_params(&mut rng, 4.0);
        let p2 = random_params(&mut rng, 4.0);
        let Ok(states) = fock_oracle::build_states_auto(&[p1, p2]) else {
            return CheckResult::new("oracle-equivalence", false, "state build failed".into());
        };
        let (a, b) = (&states[0], &states[1]);
        let oracle = fock_oracle::overlap(a, b)
            .expect("equal cutoffs")
            .norm_sqr();
        let closed = pure_fidelity(
            &state_from_params(&[p1]).expect("valid params"),
            &state_from_params(&[p2]).expect("valid params"),
        )
        .expect("matching dimensions");
        worst_overlap = worst_overlap.max((oracle - closed).abs());
        worst_energy = worst_energy.max((fock_oracle::fock_energy(a) - p1.energy()).abs());
    }
    CheckResult::new(
        "oracle-equivalence",
        worst_overlap < 1e-8 && worst_energy < 1e-8,
        format!(
            "{samples} samples; max |oracle - closed| = {worst_overlap:.3e}, \
             max energy gap = {worst_energy:.3e} (tolerance 1e-8)"
        ),
    )
}

fn single_mode_numeric_with(
    energies: &[f64],
    seed: u64,
    closed: &dyn Fn(f64) -> f64,
) -> CheckResult {
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for &e in energies {
        let rel = match optimum::numeric_minimize(e, seed) {
            Ok(report) => {
                let c = closed(e);
                (report.fidelity - c).abs() / c
            }
            Err(err) => {
                return CheckResult::new(
                    "single-mode-minimum",
                    false,
                    format!("minimizer failed at E={e}: {err}"),
                );
            }
        };
        worst = worst.max(rel);
        detail.push_str(&format!("E={e}: rel {rel:.2e}; "));
    }
    CheckResult::new(
        "single-mode-minimum",
        worst < 1e-6,
        format!("{detail}(tolerance 1e-6)"),
    )
}

fn single_mode_numeric(energies: &[f64], seed: u64) -> CheckResult {
    single_mode_numeric_with(energies, seed, &|e| (-4.0 * e * e - 4.0 * e).exp())
}

fn hessian(energies: &[f64]) -> CheckResult {
    let mut worst = 0.0f64;
    let mut positive = true;
    for &e in energies {
        let closed = optimum::hessian_determinant_closed_form(e);
        let fd = match optimum::hessian_check(e) {
            Ok(v) => v,
            Err(err) => {
                return CheckResult::new("hessian", false, format!("E={e}: {err}"));
            }
        };
        positive &= fd > 0.0;
        worst = worst.max((fd - closed).abs() / closed);
    }
    CheckResult::new(
        "hessian",
        worst < 1e-5 && positive,
        format!("max relative gap {worst:.3e} (tolerance 1e-5), positive: {positive}"),
    )
}

fn polar_quartic() -> CheckResult {
    let report = match optimum::find_intersections(0.5, 2048) {
        Ok(r) => r,
        Err(err) => return CheckResult::new("polar-quartic", false, err.to_string()),
    };
    let count = report.intersections.len();
    let mut worst_gap = 0.0f64;
    let mut worst_residual = 0.0f64;
    for inter in &report.intersections {
        worst_gap = worst_gap.max(inter.residual.abs());
        let scale = inter.quartic_scale;
        worst_residual = worst_residual
            .max(inter.quartic_residuals.0.abs() / scale)
            .max(inter.quartic_residuals.1.abs() / scale);
    }
    CheckResult::new(
        "polar-quartic",
        count == 2 && worst_gap < 1e-10 && worst_residual < 1e-6,
        format!(
            "{count} intersections in (0, π/4]; max |R₁-R₂| = {worst_gap:.2e}, \
             max scaled quartic residual = {worst_residual:.2e}"
        ),
    )
}

fn multimode_invariants(seed: u64, pairs: usize) -> CheckResult {
    let cases = [(1usize, 1.0f64), (2, 0.5), (3, 1.0), (4, 0.25)];
    for (m, e) in cases {
        let me = m as f64 * e;
        let closed = (-4.0 * me * me - 4.0 * me).exp();
        let opt = match multimode::spectrum_minimize(m, e) {
            Ok(o) => o,
            Err(err) => {
                return CheckResult::new("multimode", false, format!("M={m}, E={e}: {err}"));
            }
        };
        if (opt.lambda_spectrum[0] - (2.0 * me + 1.0)).abs() > 1e-8 {
            return CheckResult::new("multimode", false, format!("λ₁ wrong at M={m}, E={e}"));
        }
        let (a, b) = multimode::allin_pair(m, e).expect("valid arguments");
        let f = pure_fidelity(&a, &b).expect("matching modes");
        if (f - closed).abs() / closed > 1e-8 {
            return CheckResult::new(
                "multimode",
                false,
                format!("all-in pair fidelity off at M={m}, E={e}: {f:e} vs {closed:e}"),
            );
        }
        let (ta, tb) = multimode::symmetric_transform((&a, &b)).expect("matching modes");
        let tf = pure_fidelity(&ta, &tb).expect("matching modes");
        if (tf - f).abs() / f > 1e-8 {
            return CheckResult::new(
                "multimode",
                false,
                format!("symmetric transform changed fidelity at M={m}, E={e}"),
            );
        }
    }
    // random isocovariant pairs never beat the isocovariant bound
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d6d);
    for _ in 0..pairs {
        let modes = rng.gen_range(1..=3);
        let energy = rng.gen_range(0.2..2.0);
        let (s1, s2) =
            multimode::random_isocovariant_pair(modes, energy, &mut rng).expect("valid arguments");
        let f = pure_fidelity(&s1, &s2).expect("matching modes");
        let bound =
            multimode::isocovariant_bound(s1.cov(), modes, energy).expect("feasible covariance");
        if f < bound - 1e-10 {
            return CheckResult::new(
                "multimode",
                false,
                format!("isocovariant bound violated: F = {f:e} < {bound:e}"),
            );
        }
    }
    CheckResult::new(
        "multimode",
        true,
        format!(
            "spectrum/all-in/symmetric-transform agree on {} cases; \
             isocovariant bound holds on {pairs} random pairs",
            cases.len()
        ),
    )
}

fn property_batch(seed: u64, samples: usize) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x70726f70);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let p1 = random_params(&mut rng, 3.0);
        let p2 = random_params(&mut rng, 3.0);
        let s1 = state_from_params(&[p1]).expect("valid params");
        let s2 = state_from_params(&[p2]).expect("valid params");
        let f = pure_fidelity(&s1, &s2).expect("matching modes");

        // symmetry
        let f_rev = pure_fidelity(&s2, &s1).expect("matching modes");
        worst = worst.max((f - f_rev).abs());

        // rotation invariance
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        let r1 = s1.rotate(phi).expect("single mode");
        let r2 = s2.rotate(phi).expect("single mode");
        let f_rot = pure_fidelity(&r1, &r2).expect("matching modes");
        worst = worst.max((f - f_rot).abs() / f.max(1e-300));

        // multiplicativity over a tensor product
        let t1 = s1.tensor(&s2);
        let t2 = s2.tensor(&s1);
        let f_tensor = pure_fidelity(&t1, &t2).expect("matching modes");
        worst = worst.max((f_tensor - f * f).abs() / (f * f).max(1e-300));

        // passive transforms conserve energy and purity
        let o = multimode::random_orthogonal_symplectic(2, &mut rng).expect("valid modes");
        let moved = t1.apply_symplectic(&o).expect("matching dimension");
        worst = worst.max((moved.energy() - t1.energy()).abs());
        worst = worst.max((moved.det_two_sigma() - 1.0).abs());
    }
    // det(Σ₁+Σ₂) = 1 for isocovariant pure pairs
    for _ in 0..samples / 2 {
        let (s1, s2) = multimode::random_isocovariant_pair(2, rng.gen_range(0.3..1.5), &mut rng)
            .expect("valid arguments");
        worst = worst.max(((s1.cov() + s2.cov()).determinant() - 1.0).abs());
    }
    CheckResult::new(
        "property-batch",
        worst < 1e-8,
        format!("{samples} samples; worst deviation {worst:.3e} (tolerance 1e-8)"),
    )
}

fn centered(energies: &[f64]) -> CheckResult {
    let mut worst_f = 0.0f64;
    let mut worst_w = 0.0f64;
    for &e in energies {
        let (w1, f) = match optimum::centered_minimum(e) {
            Ok(v) => v,
            Err(err) => return CheckResult::new("centered-minimum", false, err.to_string()),
        };
        worst_f = worst_f.max((f - 1.0 / (2.0 * e + 1.0)).abs());
        worst_w = worst_w.max((w1 + e.sqrt().asinh()).abs());
    }
    CheckResult::new(
        "centered-minimum",
        worst_f < 1e-8 && worst_w < 1e-6,
        format!("max fidelity gap {worst_f:.2e} (tol 1e-8), max w₁ gap {worst_w:.2e} (tol 1e-6)"),
    )
}

fn scaling_hierarchy() -> CheckResult {
    let mut ok = true;
    let mut min_margin = f64::INFINITY;
    for i in 0..100 {
        let e = 0.05 + i as f64 * (5.0 - 0.05) / 99.0;
        let pair = match optimum::optimal_pair(e) {
            Ok(p) => p,
            Err(err) => return CheckResult::new("scaling-hierarchy", false, err.to_string()),
        };
        let neg_log_perr = -pair.p_err.ln();
        let coherent_curve = 4.0 * e;
        min_margin = min_margin.min(neg_log_perr - coherent_curve);
        ok &= neg_log_perr > coherent_curve;
    }
    CheckResult::new(
        "scaling-hierarchy",
        ok,
        format!("-log p_err exceeds 4E on 100 points in [0.05, 5]; min margin {min_margin:.3}"),
    )
}

fn bruteforce_floor(level: Level) -> CheckResult {
    let target = (-3.0f64).exp();
    let coarse = match fock_oracle::grid_bruteforce(0.5, 64) {
        Ok(v) => v,
        Err(err) => return CheckResult::new("bruteforce-floor", false, err.to_string()),
    };
    let gap = coarse - target;
    let mut passed = gap >= -1e-9 && gap.abs() < 1e-3;
    let mut detail = format!("resolution 64: gap {gap:.3e} (floor -1e-9, width 1e-3)");
    if level == Level::Full {
        let fine = match fock_oracle::grid_bruteforce(0.5, 128) {
            Ok(v) => v,
            Err(err) => return CheckResult::new("bruteforce-floor", false, err.to_string()),
        };
        let fine_gap = fine - target;
        passed &= fine_gap >= -1e-9 && fine_gap <= 0.5 * gap.max(0.0) + 1e-12;
        detail.push_str(&format!("; resolution 128: gap {fine_gap:.3e} (≤ half)"));
    }
    CheckResult::new("bruteforce-floor", passed, detail)
}

/// Runs the whole suite. `Fast` uses 50 random samples and the energy grid
/// {0.1, 0.5, 1}; `Full` uses 500 samples and {0.1, 0.5, 1, 2, 5}.
pub fn run(level: Level, seed: u64) -> Vec<CheckResult> {
    let (samples, energies): (usize, &[f64]) = match level {
        Level::Fast => (50, &[0.1, 0.5, 1.0]),
        Level::Full => (500, &[0.1, 0.5, 1.0, 2.0, 5.0]),
    };
    vec![
        oracle_equivalence(samples, seed),
        single_mode_numeric(energies, seed),
        hessian(&[0.5, 1.0, 2.0]),
        polar_quartic(),
        multimode_invariants(seed, samples.min(100)),
        property_batch(seed, samples),
        centered(&[0.5, 1.0, 5.0]),
        scaling_hierarchy(),
        bruteforce_floor(level),
    ]
}
