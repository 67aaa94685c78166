//! Small local-search primitives used by the optimizer modules: Nelder-Mead
//! simplex descent, golden-section line minimization, and finite-difference
//! derivatives with a Newton polish step.

use nalgebra::{DMatrix, DVector};

pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub evals: usize,
    pub converged: bool,
}

/// Downhill simplex minimization. `scale` sets the initial simplex extent per
/// coordinate; convergence is on the simplex function-value spread.
pub fn nelder_mead(
    f: &dyn Fn(&[f64]) -> f64,
    x0: &[f64],
    scale: &[f64],
    tol: f64,
    max_iter: usize,
) -> NelderMeadResult {
    let n = x0.len();
    let mut evals = 0usize;
    let eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        f(x)
    };

    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += scale[i];
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| eval(x, &mut evals)).collect();

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut converged = false;
    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        if (values[n] - values[0]).abs() <= tol * (1.0 + values[0].abs()) {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; n];
        for v in simplex.iter().take(n) {
            for i in 0..n {
                centroid[i] += v[i] / n as f64;
            }
        }

        let reflect: Vec<f64> = (0..n)
            .map(|i| centroid[i] + alpha * (centroid[i] - simplex[n][i]))
            .collect();
        let f_reflect = eval(&reflect, &mut evals);

        if f_reflect < values[0] {
            let expand: Vec<f64> = (0..n)
                .map(|i| centroid[i] + gamma * (reflect[i] - centroid[i]))
                .collect();
            let f_expand = eval(&expand, &mut evals);
            if f_expand < f_reflect {
                simplex[n] = expand;
                values[n] = f_expand;
            } else {
                simplex[n] = reflect;
                values[n] = f_reflect;
            }
        } else if f_reflect < values[n - 1] {
            simplex[n] = reflect;
            values[n] = f_reflect;
        } else {
            let contract: Vec<f64> = (0..n)
                .map(|i| centroid[i] + rho * (simplex[n][i] - centroid[i]))
                .collect();
            let f_contract = eval(&contract, &mut evals);
            if f_contract < values[n] {
                simplex[n] = contract;
                values[n] = f_contract;
            } else {
                // shrink toward the best vertex
                for k in 1..=n {
                    for i in 0..n {
                        simplex[k][i] = simplex[0][i] + sigma * (simplex[k][i] - simplex[0][i]);
                    }
                    values[k] = eval(&simplex[k].clone(), &mut evals);
                }
            }
        }
    }

    let mut best = 0;
    for k in 1..=n {
        if values[k] < values[best] {
            best = k;
        }
    }
    NelderMeadResult {
        x: simplex[best].clone(),
        evals,
        converged,
    }
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
pub fn golden_section(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Central-difference gradient with per-coordinate step `h`.
pub fn fd_gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: &[f64]) -> Vec<f64> {
    let mut grad = vec![0.0; x.len()];
    for i in 0..x.len() {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += h[i];
        xm[i] -= h[i];
        grad[i] = (f(&xp) - f(&xm)) / (2.0 * h[i]);
    }
    grad
}

/// Central-difference Hessian with per-coordinate step `h`.
pub fn fd_hessian(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let f0 = f(x);
    let mut hess = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += h[i];
        xm[i] -= h[i];
        hess[(i, i)] = (f(&xp) - 2.0 * f0 + f(&xm)) / (h[i] * h[i]);
        for j in (i + 1)..n {
            let mut xpp = x.to_vec();
            let mut xpm = x.to_vec();
            let mut xmp = x.to_vec();
            let mut xmm = x.to_vec();
            xpp[i] += h[i];
            xpp[j] += h[j];
            xpm[i] += h[i];
            xpm[j] -= h[j];
            xmp[i] -= h[i];
            xmp[j] += h[j];
            xmm[i] -= h[i];
            xmm[j] -= h[j];
            let v = (f(&xpp) - f(&xpm) - f(&xmp) + f(&xmm)) / (4.0 * h[i] * h[j]);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    hess
}

/// Newton iterations on finite-difference derivatives. Steps that do not
/// decrease the objective are halved; returns the refined point.
pub fn newton_polish(
    f: &dyn Fn(&[f64]) -> f64,
    x0: &[f64],
    grad_h: &[f64],
    hess_h: &[f64],
    iterations: usize,
) -> Vec<f64> {
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    for _ in 0..iterations {
        let grad = DVector::from_vec(fd_gradient(f, &x, grad_h));
        if grad.norm() < 1e-14 {
            break;
        }
        let hess = fd_hessian(f, &x, hess_h);
        let Some(step) = hess.lu().solve(&grad) else {
            break;
        };
        let mut damping = 1.0;
        let mut improved = false;
        for _ in 0..20 {
            let trial: Vec<f64> = (0..x.len()).map(|i| x[i] - damping * step[i]).collect();
            let ft = f(&trial);
            if ft.is_finite() && ft <= fx {
                x = trial;
                fx = ft;
                improved = true;
                break;
            }
            damping *= 0.5;
        }
        if !improved {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let f = |x: &[f64]| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2);
        let res = nelder_mead(&f, &[5.0, 5.0], &[1.0, 1.0], 1e-14, 2000);
        assert!(res.converged);
        assert_abs_diff_eq!(res.x[0], 1.0, epsilon = 1e-5);
        assert_abs_diff_eq!(res.x[1], -2.0, epsilon = 1e-5);
    }

    #[test]
    fn golden_section_minimum() {
        let (x, _) = golden_section(&|t: f64| (t - 0.3).powi(2), -1.0, 1.0, 1e-12);
        assert_abs_diff_eq!(x, 0.3, epsilon = 1e-10);
    }

    #[test]
    fn newton_polish_tightens() {
        let f = |x: &[f64]| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2);
        let x = newton_polish(&f, &[1.001, -2.002], &[1e-6, 1e-6], &[1e-4, 1e-4], 8);
        let g = fd_gradient(&f, &x, &[1e-6, 1e-6]);
        assert!((g[0].powi(2) + g[1].powi(2)).sqrt() < 1e-8);
    }
}
