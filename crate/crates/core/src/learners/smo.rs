//! Sequential minimal optimization for the C-SVC dual
//!
//! ```text
//! min_a  1/2 a'Qa - e'a   s.t.  0 <= a_i <= C,  y'a = 0,   Q_ij = y_i y_j K_ij
//! ```
//!
//! using maximal-violating-pair selection for the first index and
//! second-order gain for the second.

use crate::error::{Error, Result};
use crate::Scalar;

/// Curvature floor for non-PSD kernels (e.g. sigmoid).
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SmoSolution<T> {
    pub alpha: Vec<T>,
    /// Decision function is `sum_i alpha_i y_i K(x_i, x) + bias`.
    pub bias: T,
    pub iterations: usize,
    pub converged: bool,
    /// Maximal KKT violation (m(a) - M(a)) of the returned iterate.
    pub kkt_violation: T,
    /// Dual objective `e'a - 1/2 a'Qa` (maximisation form).
    pub dual_objective: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoConfig {
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SmoConfig {
    fn default() -> Self {
        SmoConfig {
            c: 1.0,
            tol: 1e-3,
            max_iter: 10_000,
        }
    }
}

/// Solves the dual for a precomputed row-major Gram matrix and labels in
/// {-1, +1}. Reaching `max_iter` returns the current iterate with
/// `converged = false`.
pub fn smo_solve<T: Scalar>(gram: &[T], labels: &[i8], cfg: &SmoConfig) -> Result<SmoSolution<T>> {
    let n = labels.len();
    if gram.len() != n * n {
        return Err(Error::Shape {
            expected: n * n,
            actual: gram.len(),
        });
    }
    if n == 0 {
        return Err(Error::InsufficientData("SMO needs at least one point".into()));
    }
    if labels.iter().any(|&y| y != 1 && y != -1) {
        return Err(Error::Data("SMO labels must be -1 or +1".into()));
    }
    if !(cfg.c > 0.0) || !(cfg.tol > 0.0) {
        return Err(Error::Config(format!("invalid SMO settings {cfg:?}")));
    }
    for i in 0..n {
        for j in 0..i {
            let (a, b) = (gram[i * n + j], gram[j * n + i]);
            if (a - b).abs() > T::of(1e-9) * (T::one() + a.abs()) {
                return Err(Error::Data(format!("kernel matrix not symmetric at ({i}, {j})")));
            }
        }
    }

    let c = T::of(cfg.c);
    let tol = T::of(cfg.tol);
    let tau = T::of(TAU);
    let y: Vec<T> = labels.iter().map(|&l| T::of(f64::from(l))).collect();
    let k = |i: usize, j: usize| gram[i * n + j];
    let q = |i: usize, j: usize| y[i] * y[j] * gram[i * n + j];

    let mut alpha = vec![T::zero(); n];
    let mut grad = vec![-T::one(); n];
    let is_up = |a: T, yi: T| (yi > T::zero() && a < c) || (yi < T::zero() && a > T::zero());
    let is_low = |a: T, yi: T| (yi > T::zero() && a > T::zero()) || (yi < T::zero() && a < c);

    let mut iterations = 0;
    let mut converged = false;
    let mut violation = T::infinity();
    while iterations < cfg.max_iter {
        // First index: maximal -y G over the "up" set.
        let mut gmax = T::neg_infinity();
        let mut i_sel = None;
        for t in 0..n {
            if is_up(alpha[t], y[t]) {
                let v = -y[t] * grad[t];
                if v > gmax {
                    gmax = v;
                    i_sel = Some(t);
                }
            }
        }
        // Second index: largest second-order decrease over the "low" set.
        let mut gmax2 = T::neg_infinity();
        let mut j_sel = None;
        let mut best_obj = T::infinity();
        if let Some(i) = i_sel {
            for t in 0..n {
                if !is_low(alpha[t], y[t]) {
                    continue;
                }
                let v = y[t] * grad[t];
                if v > gmax2 {
                    gmax2 = v;
                }
                let b = gmax + v;
                if b > T::zero() {
                    let mut a = k(i, i) + k(t, t) - T::of(2.0) * k(i, t);
                    if a <= T::zero() {
                        a = tau;
                    }
                    let obj = -(b * b) / a;
                    if obj < best_obj {
                        best_obj = obj;
                        j_sel = Some(t);
                    }
                }
            }
        }
        violation = if gmax2 == T::neg_infinity() || gmax == T::neg_infinity() {
            T::zero()
        } else {
            gmax + gmax2
        };
        let (i, j) = match (i_sel, j_sel) {
            (Some(i), Some(j)) if violation >= tol => (i, j),
            _ => {
                converged = true;
                break;
            }
        };
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let mut quad = k(i, i) + k(j, j) - T::of(2.0) * k(i, j);
        if quad <= T::zero() {
            quad = tau;
        }
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] = alpha[i] + delta;
            alpha[j] = alpha[j] + delta;
            if diff > T::zero() {
                if alpha[j] < T::zero() {
                    alpha[j] = T::zero();
                    alpha[i] = diff;
                }
            } else if alpha[i] < T::zero() {
                alpha[i] = T::zero();
                alpha[j] = -diff;
            }
            if diff > T::zero() {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] = alpha[i] - delta;
            alpha[j] = alpha[j] + delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < T::zero() {
                alpha[j] = T::zero();
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < T::zero() {
                alpha[i] = T::zero();
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] = grad[t] + q(t, i) * di + q(t, j) * dj;
        }
    }

    // Bias from free multipliers, or the midpoint of the feasible interval.
    let (mut ub, mut lb) = (T::infinity(), T::neg_infinity());
    let (mut free_sum, mut n_free) = (T::zero(), 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < T::zero() {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= T::zero() {
            if y[t] > T::zero() {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            free_sum = free_sum + yg;
        }
    }
    let rho = if n_free > 0 {
        free_sum / T::of_usize(n_free)
    } else if ub.is_finite() && lb.is_finite() {
        (ub + lb) / T::of(2.0)
    } else if ub.is_finite() {
        ub
    } else if lb.is_finite() {
        lb
    } else {
        T::zero()
    };

    let dual_objective = alpha
        .iter()
        .zip(&grad)
        .fold(T::zero(), |acc, (&a, &g)| acc - a * (g - T::one()) / T::of(2.0));

    Ok(SmoSolution {
        alpha,
        bias: -rho,
        iterations,
        converged,
        kkt_violation: violation.max(T::zero()),
        dual_objective,
    })
}

/// Dual objective `e'a - 1/2 a'Qa` of an arbitrary multiplier vector.
pub fn dual_objective<T: Scalar>(gram: &[T], labels: &[i8], alpha: &[T]) -> T {
    let n = labels.len();
    let mut quad = T::zero();
    for i in 0..n {
        for j in 0..n {
            let yy = T::of(f64::from(labels[i] * labels[j]));
            quad = quad + alpha[i] * alpha[j] * yy * gram[i * n + j];
        }
    }
    alpha.iter().copied().sum::<T>() - quad / T::of(2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_max_margin() {
        // x = -1 (y = -1), x = +1 (y = +1), linear kernel: the analytic optimum
        // puts a = 1/2 on both points and the boundary at 0.
        let gram = [1.0f64, -1.0, -1.0, 1.0];
        let sol = smo_solve(&gram, &[-1, 1], &SmoConfig::default()).unwrap();
        assert!((sol.alpha[0] - 0.5).abs() < 1e-12);
        assert!((sol.alpha[1] - 0.5).abs() < 1e-12);
        assert!(sol.bias.abs() < 1e-12);
        assert!(sol.converged);
        assert!((sol.dual_objective - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let gram = [1.0, 0.0, 0.0, 1.0];
        assert!(smo_solve(&gram, &[1, 0], &SmoConfig::default()).is_err());
        assert!(smo_solve(&gram[..3], &[1, -1], &SmoConfig::default()).is_err());
        let asym = [1.0, 0.5, 0.0, 1.0];
        assert!(smo_solve(&asym, &[1, -1], &SmoConfig::default()).is_err());
    }

    #[test]
    fn iteration_cap_flags_nonconvergence() {
        let xs = [-2.0, -1.0, -0.5, 0.3, 1.0, 2.5];
        let ys = [-1, -1, 1, -1, 1, 1];
        let n = xs.len();
        let gram: Vec<f64> = (0..n * n).map(|t| xs[t / n] * xs[t % n]).collect();
        let cfg = SmoConfig {
            max_iter: 1,
            ..SmoConfig::default()
        };
        let sol = smo_solve(&gram, &ys, &cfg).unwrap();
        assert!(!sol.converged);
        assert_eq!(sol.iterations, 1);
        let full = smo_solve(&gram, &ys, &SmoConfig::default()).unwrap();
        assert!(full.converged);
        assert!(full.kkt_violation <= 1e-3);
    }

    #[test]
    fn objective_helper_agrees_with_solver() {
        let xs = [[0.0, 1.0], [1.0, 0.5], [-1.0, -0.2], [0.4, -1.0]];
        let ys = [1, 1, -1, -1];
        let gram: Vec<f64> = (0..16)
            .map(|t| {
                let (a, b) = (xs[t / 4], xs[t % 4]);
                a[0] * b[0] + a[1] * b[1]
            })
            .collect();
        let sol = smo_solve(&gram, &ys, &SmoConfig::default()).unwrap();
        let direct = dual_objective(&gram, &ys, &sol.alpha);
        assert!((direct - sol.dual_objective).abs() < 1e-9);
    }
}
