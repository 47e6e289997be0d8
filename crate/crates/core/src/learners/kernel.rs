use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::scalar::{dot, sq_dist};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    Linear,
    Poly,
    Rbf,
    Sigmoid,
}

impl KernelKind {
    pub const ALL: [KernelKind; 4] = [
        KernelKind::Linear,
        KernelKind::Poly,
        KernelKind::Rbf,
        KernelKind::Sigmoid,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            KernelKind::Linear => "linear",
            KernelKind::Poly => "poly",
            KernelKind::Rbf => "rbf",
            KernelKind::Sigmoid => "sigmoid",
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        KernelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown kernel {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams<T> {
    pub kind: KernelKind,
    pub gamma: T,
    pub degree: u32,
    pub coef0: T,
}

impl<T: Scalar> KernelParams<T> {
    pub fn linear() -> Self {
        KernelParams {
            kind: KernelKind::Linear,
            gamma: T::one(),
            degree: 1,
            coef0: T::zero(),
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.kind != KernelKind::Linear && !(self.gamma > T::zero()) {
            return Err(Error::Config(format!("kernel gamma must be > 0, got {}", self.gamma)));
        }
        if self.degree < 1 {
            return Err(Error::Config("kernel degree must be >= 1".into()));
        }
        Ok(())
    }

    pub fn eval(&self, x: &[T], z: &[T]) -> T {
        kernel_eval(self, x, z)
    }
}

/// linear: x.z; poly: (gamma x.z + coef0)^degree; rbf: exp(-gamma |x-z|^2);
/// sigmoid: tanh(gamma x.z + coef0).
pub fn kernel_eval<T: Scalar>(params: &KernelParams<T>, x: &[T], z: &[T]) -> T {
    debug_assert_eq!(x.len(), z.len());
    match params.kind {
        KernelKind::Linear => dot(x, z),
        KernelKind::Poly => (params.gamma * dot(x, z) + params.coef0).powi(params.degree as i32),
        KernelKind::Rbf => (-params.gamma * sq_dist(x, z)).exp(),
        KernelKind::Sigmoid => (params.gamma * dot(x, z) + params.coef0).tanh(),
    }
}

/// Row-major n x n Gram matrix.
pub fn gram_matrix<T: Scalar>(params: &KernelParams<T>, rows: &[&[T]]) -> Vec<T> {
    let n = rows.len();
    let mut k = vec![T::zero(); n * n];
    for i in 0..n {
        for j in i..n {
            let v = kernel_eval(params, rows[i], rows[j]);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(kind: KernelKind, gamma: f64, degree: u32, coef0: f64) -> KernelParams<f64> {
        KernelParams {
            kind,
            gamma,
            degree,
            coef0,
        }
    }

    #[test]
    fn rbf_of_identical_points_is_one() {
        for gamma in [0.01, 1.0, 37.0] {
            let p = params(KernelKind::Rbf, gamma, 3, 0.0);
            assert_eq!(p.eval(&[0.3, -2.0, 5.0], &[0.3, -2.0, 5.0]), 1.0);
        }
    }

    #[test]
    fn linear_orthogonal_is_zero() {
        assert_eq!(KernelParams::<f64>::linear().eval(&[1.0, 0.0], &[0.0, 1.0]), 0.0);
    }

    #[test]
    fn poly_cubes_the_dot_product() {
        // x.z = 2 with gamma 1, coef0 0, degree 3 -> 8.
        let p = params(KernelKind::Poly, 1.0, 3, 0.0);
        assert_eq!(p.eval(&[1.0, 1.0], &[1.0, 1.0]), 8.0);
    }

    #[test]
    fn sigmoid_is_tanh_of_affine_dot() {
        let p = params(KernelKind::Sigmoid, 0.5, 3, 0.25);
        let v = p.eval(&[1.0, 2.0], &[3.0, -1.0]);
        assert!((v - (0.5f64 * 1.0 + 0.25).tanh()).abs() < 1e-15);
    }

    #[test]
    fn nonpositive_gamma_rejected() {
        assert!(params(KernelKind::Rbf, 0.0, 3, 0.0).validate().is_err());
        assert!(params(KernelKind::Linear, 0.0, 1, 0.0).validate().is_ok());
    }
}
