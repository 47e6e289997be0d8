use super::kernel::{gram_matrix, kernel_eval, KernelKind, KernelParams};
use super::smo::{smo_solve, SmoConfig};
use super::FitInfo;
use crate::cohort::EncodedMatrix;
use crate::error::{Error, Result};
use crate::Scalar;

/// Kernel width selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gamma {
    /// `1 / (p * v)`, `v` the mean per-column variance of the training
    /// matrix (1 when that is zero).
    Scale,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    pub kernel: KernelKind,
    pub c: f64,
    pub gamma: Gamma,
    pub degree: u32,
    pub coef0: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl SvmParams {
    pub fn with_kernel(kernel: KernelKind) -> Self {
        SvmParams {
            kernel,
            c: 1.0,
            gamma: Gamma::Scale,
            degree: 3,
            coef0: 0.0,
            tol: 1e-3,
            max_iter: 10_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) {
            return Err(Error::Config(format!("svm C must be > 0, got {}", self.c)));
        }
        if let Gamma::Value(g) = self.gamma {
            if !(g > 0.0) {
                return Err(Error::Config(format!("svm gamma must be > 0, got {g}")));
            }
        }
        if self.degree < 1 || !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::Config(format!("invalid svm settings {self:?}")));
        }
        Ok(())
    }
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams::with_kernel(KernelKind::Rbf)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel<T> {
    kernel: KernelParams<T>,
    /// Multipliers for every training row, in training order.
    alpha: Vec<T>,
    support_indices: Vec<usize>,
    support_vectors: Vec<Vec<T>>,
    /// `alpha_i * y_i` for each support vector.
    dual_coef: Vec<T>,
    bias: T,
}

impl<T: Scalar> SvmModel<T> {
    pub fn fit(params: &SvmParams, x: &EncodedMatrix<T>) -> Result<(Self, FitInfo)> {
        params.validate()?;
        let gamma = match params.gamma {
            Gamma::Value(g) => T::of(g),
            Gamma::Scale => scale_gamma(x),
        };
        let kernel = KernelParams {
            kind: params.kernel,
            gamma,
            degree: params.degree,
            coef0: T::of(params.coef0),
        };
        kernel.validate()?;
        let rows: Vec<&[T]> = x.rows().collect();
        let gram = gram_matrix(&kernel, &rows);
        let labels: Vec<i8> = x.labels().iter().map(|&l| if l == 1 { 1 } else { -1 }).collect();
        let cfg = SmoConfig {
            c: params.c,
            tol: params.tol,
            max_iter: params.max_iter,
        };
        let sol = smo_solve(&gram, &labels, &cfg)?;
        let support_indices: Vec<usize> =
            (0..x.n_rows()).filter(|&i| sol.alpha[i] > T::zero()).collect();
        let model = SvmModel {
            kernel,
            support_vectors: support_indices.iter().map(|&i| x.row(i).to_vec()).collect(),
            dual_coef: support_indices
                .iter()
                .map(|&i| sol.alpha[i] * T::of(f64::from(labels[i])))
                .collect(),
            support_indices,
            alpha: sol.alpha,
            bias: sol.bias,
        };
        let info = FitInfo {
            iterations: sol.iterations,
            converged: sol.converged,
            objective: sol.dual_objective.as_f64(),
        };
        Ok((model, info))
    }

    pub fn kernel(&self) -> &KernelParams<T> {
        &self.kernel
    }

    pub fn alpha(&self) -> &[T] {
        &self.alpha
    }

    pub fn bias(&self) -> T {
        self.bias
    }

    /// Training rows with a nonzero multiplier.
    pub fn support_indices(&self) -> &[usize] {
        &self.support_indices
    }

    pub fn decision_function(&self, x: &[T]) -> T {
        self.support_vectors
            .iter()
            .zip(&self.dual_coef)
            .fold(self.bias, |acc, (sv, &c)| acc + c * kernel_eval(&self.kernel, sv, x))
    }

    /// A decision value of exactly 0 maps to label 1.
    pub fn predict_row(&self, x: &[T]) -> u8 {
        u8::from(self.decision_function(x) >= T::zero())
    }
}

/// The "scale" gamma: `1 / (p * mean column variance)`.
pub fn scale_gamma<T: Scalar>(x: &EncodedMatrix<T>) -> T {
    let (n, p) = (x.n_rows(), x.n_cols());
    if n == 0 || p == 0 {
        return T::one();
    }
    let mut total_var = 0.0;
    for j in 0..p {
        let col: Vec<f64> = x.rows().map(|r| r[j].as_f64()).collect();
        let mean = col.iter().sum::<f64>() / n as f64;
        total_var += col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    }
    let var = total_var / p as f64;
    if var > 0.0 {
        T::of(1.0 / (p as f64 * var))
    } else {
        T::one()
    }
}
