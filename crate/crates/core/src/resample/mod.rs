//! Minority oversampling on the encoded feature space.
//!
//! All methods append synthetic minority rows after the untouched original
//! rows until both classes have the same count. Distances are Euclidean on
//! the encoded columns; distance ties go to the lower row index.

mod adasyn;
mod smote;

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::cohort::EncodedMatrix;
use crate::error::{Error, Result};
use crate::scalar::sq_dist;
use crate::{rng, Scalar};

pub use adasyn::{adasyn, adasyn_allocation, adasyn_weights};
pub use smote::{
    borderline_classes, borderline_smote, interpolate, smote, svm_smote, svm_smote_bases,
    BorderlineClass,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Random,
    Smote,
    BorderlineSmote,
    SvmSmote,
    Adasyn,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Random,
        Method::Smote,
        Method::BorderlineSmote,
        Method::SvmSmote,
        Method::Adasyn,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Random => "random",
            Method::Smote => "smote",
            Method::BorderlineSmote => "borderline_smote",
            Method::SvmSmote => "svm_smote",
            Method::Adasyn => "adasyn",
        }
    }

    fn tag(self) -> u64 {
        Method::ALL.iter().position(|&m| m == self).expect("listed") as u64
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown resampling method {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResampleConfig {
    pub method: Method,
    pub k_neighbors: usize,
    /// Neighbourhood size for the borderline danger test.
    pub m_neighbors: usize,
    /// Fraction of the class gap ADASYN fills, in `(0, 1]`.
    pub adasyn_beta: f64,
    pub seed: u64,
}

impl ResampleConfig {
    pub fn new(method: Method, seed: u64) -> Self {
        ResampleConfig {
            method,
            k_neighbors: 5,
            m_neighbors: 10,
            adasyn_beta: 1.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_neighbors < 1 {
            return Err(Error::Config("k_neighbors must be >= 1".into()));
        }
        if self.m_neighbors < self.k_neighbors {
            return Err(Error::Config(format!(
                "m_neighbors ({}) must be >= k_neighbors ({})",
                self.m_neighbors, self.k_neighbors
            )));
        }
        if !(self.adasyn_beta > 0.0 && self.adasyn_beta <= 1.0) {
            return Err(Error::Config(format!(
                "adasyn_beta must lie in (0, 1], got {}",
                self.adasyn_beta
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Original,
    /// Generated from (or copied from) original row `base`.
    Synthetic { base: usize },
}

impl Origin {
    pub fn is_synthetic(self) -> bool {
        matches!(self, Origin::Synthetic { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResampleResult<T> {
    pub matrix: EncodedMatrix<T>,
    pub n_synthetic: usize,
    /// One flag per output row.
    pub origins: Vec<Origin>,
}

impl<T: Scalar> ResampleResult<T> {
    fn unchanged(matrix: &EncodedMatrix<T>) -> Self {
        ResampleResult {
            matrix: matrix.clone(),
            n_synthetic: 0,
            origins: vec![Origin::Original; matrix.n_rows()],
        }
    }
}

/// Balances `matrix` with the configured method.
pub fn oversample<T: Scalar>(matrix: &EncodedMatrix<T>, cfg: &ResampleConfig) -> Result<ResampleResult<T>> {
    match cfg.method {
        Method::Random => random_oversample(matrix, cfg),
        Method::Smote => smote(matrix, cfg),
        Method::BorderlineSmote => borderline_smote(matrix, cfg),
        Method::SvmSmote => svm_smote(matrix, cfg),
        Method::Adasyn => adasyn(matrix, cfg),
    }
}

/// Class layout shared by every method.
#[derive(Debug, Clone)]
pub(crate) struct Classes {
    pub minority_label: u8,
    /// Minority row indices in input order.
    pub minority: Vec<usize>,
    pub n_majority: usize,
}

impl Classes {
    pub fn deficit(&self) -> usize {
        self.n_majority - self.minority.len()
    }
}

/// `Ok(None)` means the input is already balanced.
pub(crate) fn classes<T: Scalar>(
    matrix: &EncodedMatrix<T>,
    cfg: &ResampleConfig,
    min_minority: usize,
) -> Result<Option<Classes>> {
    cfg.validate()?;
    let [zeros, ones] = matrix.class_counts();
    if zeros == 0 || ones == 0 {
        return Err(Error::Imbalance(format!(
            "oversampling needs both classes, got {zeros} zeros and {ones} ones"
        )));
    }
    if zeros == ones {
        return Ok(None);
    }
    let minority_label = u8::from(ones < zeros);
    let minority: Vec<usize> = (0..matrix.n_rows())
        .filter(|&i| matrix.labels()[i] == minority_label)
        .collect();
    if minority.len() < min_minority {
        return Err(Error::InsufficientData(format!(
            "{} needs at least {min_minority} minority rows, got {}",
            cfg.method,
            minority.len()
        )));
    }
    Ok(Some(Classes {
        minority_label,
        n_majority: zeros.max(ones),
        minority,
    }))
}

pub(crate) fn method_rng(cfg: &ResampleConfig) -> ChaCha8Rng {
    rng::stream(cfg.seed, &[cfg.method.tag()])
}

/// The `k` candidates nearest to row `query`, excluding `query` itself,
/// nearest first with ties to the lower index.
pub(crate) fn nearest<T: Scalar>(
    matrix: &EncodedMatrix<T>,
    query: usize,
    candidates: &[usize],
    k: usize,
) -> Vec<usize> {
    let q = matrix.row(query);
    let mut d: Vec<(T, usize)> = candidates
        .iter()
        .filter(|&&c| c != query)
        .map(|&c| (sq_dist(q, matrix.row(c)), c))
        .collect();
    d.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite distances").then(a.1.cmp(&b.1)));
    d.truncate(k);
    d.into_iter().map(|(_, c)| c).collect()
}

/// Draws `need` base positions from `0..pool`: full round-robin passes
/// first, then the remainder without replacement.
pub(crate) fn round_robin_bases(pool: usize, need: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut out = Vec::with_capacity(need);
    for _ in 0..need / pool {
        out.extend(0..pool);
    }
    let rest = need % pool;
    if rest > 0 {
        let mut extra = index::sample(rng, pool, rest).into_vec();
        extra.sort_unstable();
        out.extend(extra);
    }
    out
}

pub(crate) fn append<T: Scalar>(
    matrix: &EncodedMatrix<T>,
    label: u8,
    synthetic: Vec<(usize, Vec<T>)>,
) -> Result<ResampleResult<T>> {
    let mut out = matrix.clone();
    let mut origins = vec![Origin::Original; matrix.n_rows()];
    for (base, row) in &synthetic {
        out.push_row(row, label)?;
        origins.push(Origin::Synthetic { base: *base });
    }
    Ok(ResampleResult {
        matrix: out,
        n_synthetic: synthetic.len(),
        origins,
    })
}

/// Copies minority rows drawn uniformly with replacement. Unlike the
/// interpolating methods this accepts a single minority row.
pub fn random_oversample<T: Scalar>(
    matrix: &EncodedMatrix<T>,
    cfg: &ResampleConfig,
) -> Result<ResampleResult<T>> {
    let Some(cls) = classes(matrix, cfg, 1)? else {
        return Ok(ResampleResult::unchanged(matrix));
    };
    let mut rng = method_rng(cfg);
    let synthetic = (0..cls.deficit())
        .map(|_| {
            let base = cls.minority[rng.random_range(0..cls.minority.len())];
            (base, matrix.row(base).to_vec())
        })
        .collect();
    append(matrix, cls.minority_label, synthetic)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<f64>], labels: &[u8]) -> EncodedMatrix<f64> {
        EncodedMatrix::from_rows(rows, labels.to_vec()).unwrap()
    }

    #[test]
    fn random_single_minority_point() {
        let x = m(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 1.0], vec![3.0, 1.0]], &[1, 0, 0, 0]);
        let r = random_oversample(&x, &ResampleConfig::new(Method::Random, 3)).unwrap();
        assert_eq!(r.n_synthetic, 2);
        assert_eq!(r.matrix.row(4), &[0.0, 0.0]);
        assert_eq!(r.matrix.row(5), &[0.0, 0.0]);
        assert_eq!(r.matrix.class_counts(), [3, 3]);
    }

    #[test]
    fn interpolating_methods_need_two_minority_rows() {
        let x = m(&[vec![0.0], vec![1.0], vec![2.0]], &[1, 0, 0]);
        for method in [Method::Smote, Method::BorderlineSmote, Method::SvmSmote, Method::Adasyn] {
            let err = oversample(&x, &ResampleConfig::new(method, 0)).unwrap_err();
            assert!(matches!(err, Error::InsufficientData(_)), "{method}");
        }
    }

    #[test]
    fn single_class_and_balanced_inputs() {
        let one = m(&[vec![0.0], vec![1.0]], &[1, 1]);
        let bal = m(&[vec![0.0], vec![1.0]], &[0, 1]);
        for method in Method::ALL {
            let cfg = ResampleConfig::new(method, 0);
            assert!(matches!(oversample(&one, &cfg), Err(Error::Imbalance(_))));
            let r = oversample(&bal, &cfg).unwrap();
            assert_eq!(r.n_synthetic, 0);
            assert_eq!(r.matrix, bal);
        }
    }

    #[test]
    fn round_robin_covers_every_base_before_repeating() {
        let mut rng = rng::stream(0, &[]);
        let b = round_robin_bases(3, 8, &mut rng);
        assert_eq!(&b[..6], &[0, 1, 2, 0, 1, 2]);
        assert_eq!(b.len(), 8);
        assert_ne!(b[6], b[7]);
    }

    #[test]
    fn config_validation() {
        let mut c = ResampleConfig::new(Method::Smote, 0);
        c.m_neighbors = 2;
        assert!(c.validate().is_err());
        let mut c = ResampleConfig::new(Method::Adasyn, 0);
        c.adasyn_beta = 0.0;
        assert!(c.validate().is_err());
        assert_eq!("svm_smote".parse::<Method>().unwrap(), Method::SvmSmote);
    }
}
