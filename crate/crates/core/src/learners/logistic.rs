use super::FitInfo;
use crate::cohort::EncodedMatrix;
use crate::error::{Error, Result};
use crate::scalar::dot;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticParams {
    /// Inverse L2 strength: objective is `|w|^2 / 2 + c * sum(log-loss)`.
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            c: 1.0,
            tol: 1e-5,
            max_iter: 100,
        }
    }
}

impl LogisticParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) || !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::Config(format!("invalid logistic settings {self:?}")));
        }
        Ok(())
    }
}

/// L2-regularised logistic regression with an unpenalised intercept, fit by
/// damped Newton iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticRegression<T> {
    weights: Vec<T>,
    intercept: T,
}

struct Objective<T> {
    value: T,
    /// Gradient over (weights..., intercept).
    grad: Vec<T>,
    /// Row weights p (1 - p) for the Hessian.
    curvature: Vec<T>,
}

fn softplus<T: Scalar>(z: T) -> T {
    if z > T::zero() {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid<T: Scalar>(z: T) -> T {
    T::one() / (T::one() + (-z).exp())
}

fn evaluate<T: Scalar>(x: &EncodedMatrix<T>, c: T, w: &[T], b: T) -> Objective<T> {
    let p = x.n_cols();
    let mut grad: Vec<T> = w.to_vec();
    grad.push(T::zero());
    let mut value = dot(w, w) / T::of(2.0);
    let mut curvature = Vec::with_capacity(x.n_rows());
    for (row, &label) in x.rows().zip(x.labels()) {
        let y = T::of(f64::from(label));
        let z = dot(w, row) + b;
        value = value + c * (softplus(z) - y * z);
        let prob = sigmoid(z);
        let r = c * (prob - y);
        for j in 0..p {
            grad[j] = grad[j] + r * row[j];
        }
        grad[p] = grad[p] + r;
        curvature.push(c * prob * (T::one() - prob));
    }
    Objective {
        value,
        grad,
        curvature,
    }
}

fn max_abs<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

/// Solves `a x = b` for symmetric positive definite `a` (row-major).
fn cholesky_solve<T: Scalar>(a: &[T], b: &[T]) -> Option<Vec<T>> {
    let n = b.len();
    let mut l = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s = s - l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > T::zero()) {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut y = vec![T::zero(); n];
    for i in 0..n {
        let s = (0..i).fold(b[i], |s, k| s - l[i * n + k] * y[k]);
        y[i] = s / l[i * n + i];
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let s = (i + 1..n).fold(y[i], |s, k| s - l[k * n + i] * x[k]);
        x[i] = s / l[i * n + i];
    }
    Some(x)
}

impl<T: Scalar> LogisticRegression<T> {
    pub fn fit(params: &LogisticParams, x: &EncodedMatrix<T>) -> Result<(Self, FitInfo)> {
        params.validate()?;
        let [zeros, ones] = x.class_counts();
        if zeros == 0 || ones == 0 {
            return Err(Error::Imbalance("logistic regression needs both classes".into()));
        }
        let p = x.n_cols();
        let dim = p + 1;
        let c = T::of(params.c);
        let tol = T::of(params.tol);
        let mut w = vec![T::zero(); p];
        let mut b = T::zero();
        let mut obj = evaluate(x, c, &w, b);
        let mut iterations = 0;
        let mut converged = max_abs(&obj.grad) <= tol;
        while !converged && iterations < params.max_iter {
            iterations += 1;
            // Hessian of the augmented problem [X 1].
            let mut h = vec![T::zero(); dim * dim];
            for (row, &d) in x.rows().zip(&obj.curvature) {
                for i in 0..dim {
                    let xi = if i < p { row[i] } else { T::one() };
                    let dxi = d * xi;
                    for j in 0..=i {
                        let xj = if j < p { row[j] } else { T::one() };
                        h[i * dim + j] = h[i * dim + j] + dxi * xj;
                    }
                }
            }
            for i in 0..dim {
                if i < p {
                    h[i * dim + i] = h[i * dim + i] + T::one();
                }
                for j in 0..i {
                    h[j * dim + i] = h[i * dim + j];
                }
            }
            let mut jitter = T::zero();
            let step = loop {
                let mut hj = h.clone();
                for i in 0..dim {
                    hj[i * dim + i] = hj[i * dim + i] + jitter;
                }
                if let Some(s) = cholesky_solve(&hj, &obj.grad) {
                    break s;
                }
                jitter = if jitter == T::zero() { T::of(1e-10) } else { jitter * T::of(10.0) };
                if jitter > T::of(1e6) {
                    return Err(Error::Data("logistic Hessian is not positive definite".into()));
                }
            };
            // Backtracking on the Armijo condition.
            let slope = dot(&obj.grad, &step);
            let mut t = T::one();
            let mut accepted = false;
            for _ in 0..40 {
                let w_new: Vec<T> = w.iter().zip(&step).map(|(&wi, &si)| wi - t * si).collect();
                let b_new = b - t * step[p];
                let cand = evaluate(x, c, &w_new, b_new);
                if cand.value <= obj.value - T::of(1e-4) * t * slope {
                    w = w_new;
                    b = b_new;
                    obj = cand;
                    accepted = true;
                    break;
                }
                t = t / T::of(2.0);
            }
            converged = max_abs(&obj.grad) <= tol;
            if !accepted {
                break;
            }
        }
        let info = FitInfo {
            iterations,
            converged,
            objective: obj.value.as_f64(),
        };
        Ok((
            LogisticRegression {
                weights: w,
                intercept: b,
            },
            info,
        ))
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn intercept(&self) -> T {
        self.intercept
    }

    pub fn decision_function(&self, x: &[T]) -> T {
        dot(&self.weights, x) + self.intercept
    }

    /// Gradient of the regularised objective at the fitted parameters.
    pub fn gradient(&self, x: &EncodedMatrix<T>, c: f64) -> Vec<T> {
        evaluate(x, T::of(c), &self.weights, self.intercept).grad
    }

    pub fn predict_row(&self, x: &[T]) -> u8 {
        u8::from(self.decision_function(x) > T::zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solves_small_system() {
        let a = [4.0f64, 2.0, 2.0, 3.0];
        let x = cholesky_solve(&a, &[2.0, 1.0]).unwrap();
        assert!((4.0 * x[0] + 2.0 * x[1] - 2.0).abs() < 1e-12);
        assert!((2.0 * x[0] + 3.0 * x[1] - 1.0).abs() < 1e-12);
        assert!(cholesky_solve(&[0.0f64], &[1.0]).is_none());
    }

    #[test]
    fn symmetric_data_has_zero_intercept() {
        // Every (x, y) has a mirror (-x, 1 - y).
        let base: [[f64; 2]; 4] = [[0.3, 1.2], [1.5, -0.4], [-0.7, 0.9], [2.0, 0.1]];
        let lab = [1u8, 1, 0, 1];
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (r, &y) in base.iter().zip(&lab) {
            rows.push(r.to_vec());
            labels.push(y);
            rows.push(r.iter().map(|v| -v).collect());
            labels.push(1 - y);
        }
        let x = EncodedMatrix::from_rows(&rows, labels).unwrap();
        let (m, info) = LogisticRegression::fit(&LogisticParams::default(), &x).unwrap();
        assert!(info.converged);
        assert!(m.intercept().abs() < 1e-6, "intercept {}", m.intercept());
    }

    #[test]
    fn gradient_vanishes_at_solution() {
        let rows: Vec<Vec<f64>> = (0..25)
            .map(|i| vec![(i as f64 * 0.7).sin() * 2.0, (i as f64 * 1.3).cos()])
            .collect();
        let labels = rows.iter().map(|r| u8::from(r[0] - r[1] > 0.2)).collect();
        let x = EncodedMatrix::from_rows(&rows, labels).unwrap();
        let (m, info) = LogisticRegression::fit(&LogisticParams::default(), &x).unwrap();
        assert!(info.converged);
        let g = m.gradient(&x, 1.0);
        assert!(g.iter().all(|v| v.abs() <= 1e-5), "{g:?}");
    }
}
