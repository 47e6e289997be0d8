use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{append, classes, method_rng, nearest, round_robin_bases, Classes, ResampleConfig, ResampleResult};
use crate::cohort::EncodedMatrix;
use crate::error::Result;
use crate::learners::{KernelKind, SvmModel, SvmParams};
use crate::Scalar;

/// `x + u * (z - x)`.
pub fn interpolate<T: Scalar>(x: &[T], z: &[T], u: T) -> Vec<T> {
    x.iter().zip(z).map(|(&a, &b)| a + u * (b - a)).collect()
}

/// Interpolates from each base toward a uniformly chosen one of its `k`
/// nearest minority neighbours.
pub(crate) fn synthesize<T: Scalar>(
    matrix: &EncodedMatrix<T>,
    minority: &[usize],
    bases: &[usize],
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<(usize, Vec<T>)> {
    let mut cache: HashMap<usize, Vec<usize>> = HashMap::new();
    bases
        .iter()
        .map(|&b| {
            let nn = cache.entry(b).or_insert_with(|| nearest(matrix, b, minority, k));
            let z = nn[rng.random_range(0..nn.len())];
            let u = T::of(rng.random::<f64>());
            (b, interpolate(matrix.row(b), matrix.row(z), u))
        })
        .collect()
}

fn effective_k(cfg: &ResampleConfig, cls: &Classes) -> usize {
    cfg.k_neighbors.min(cls.minority.len() - 1)
}

fn smote_from<T: Scalar>(
    matrix: &EncodedMatrix<T>,
    cfg: &ResampleConfig,
    cls: &Classes,
    pool: &[usize],
    rng: &mut ChaCha8Rng,
) -> Result<ResampleResult<T>> {
    let k = effective_k(cfg, cls);
    let picks = round_robin_bases(pool.len(), cls.deficit(), rng);
    let bases: Vec<usize> = picks.into_iter().map(|p| pool[p]).collect();
    let synthetic = synthesize(matrix, &cls.minority, &bases, k, rng);
    append(matrix, cls.minority_label, synthetic)
}

/// SMOTE with every minority row as a base.
pub fn smote<T: Scalar>(matrix: &EncodedMatrix<T>, cfg: &ResampleConfig) -> Result<ResampleResult<T>> {
    let Some(cls) = classes(matrix, cfg, 2)? else {
        return Ok(ResampleResult::unchanged(matrix));
    };
    let mut rng = method_rng(cfg);
    smote_from(matrix, cfg, &cls, &cls.minority, &mut rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BorderlineClass {
    Safe,
    Danger,
    Noise,
}

/// Classifies every minority row (in input order) by the number `c` of
/// majority rows among its `m` nearest neighbours: NOISE when `c = m`,
/// DANGER when `m/2 <= c < m`, SAFE otherwise.
pub fn borderline_classes<T: Scalar>(
    matrix: &EncodedMatrix<T>,
    minority_label: u8,
    m: usize,
) -> Vec<(usize, BorderlineClass)> {
    let all: Vec<usize> = (0..matrix.n_rows()).collect();
    let m = m.min(matrix.n_rows() - 1);
    all.iter()
        .filter(|&&i| matrix.labels()[i] == minority_label)
        .map(|&i| {
            let c = nearest(matrix, i, &all, m)
                .into_iter()
                .filter(|&j| matrix.labels()[j] != minority_label)
                .count();
            let class = if c == m {
                BorderlineClass::Noise
            } else if 2 * c >= m {
                BorderlineClass::Danger
            } else {
                BorderlineClass::Safe
            };
            (i, class)
        })
        .collect()
}

/// SMOTE restricted to DANGER bases; plain SMOTE when there are none.
pub fn borderline_smote<T: Scalar>(
    matrix: &EncodedMatrix<T>,
    cfg: &ResampleConfig,
) -> Result<ResampleResult<T>> {
    let Some(cls) = classes(matrix, cfg, 2)? else {
        return Ok(ResampleResult::unchanged(matrix));
    };
    let danger: Vec<usize> = borderline_classes(matrix, cls.minority_label, cfg.m_neighbors)
        .into_iter()
        .filter(|&(_, c)| c == BorderlineClass::Danger)
        .map(|(i, _)| i)
        .collect();
    let mut rng = method_rng(cfg);
    if danger.is_empty() {
        log::warn!("borderline_smote: no DANGER minority rows, falling back to smote");
        return smote_from(matrix, cfg, &cls, &cls.minority, &mut rng);
    }
    smote_from(matrix, cfg, &cls, &danger, &mut rng)
}

/// Minority support vectors of a linear SVM (C = 1) fitted on `matrix`,
/// excluding NOISE rows. Empty when the input is balanced.
pub fn svm_smote_bases<T: Scalar>(matrix: &EncodedMatrix<T>, cfg: &ResampleConfig) -> Result<Vec<usize>> {
    let Some(cls) = classes(matrix, cfg, 2)? else {
        return Ok(Vec::new());
    };
    let (svm, info) = SvmModel::fit(&SvmParams::with_kernel(KernelKind::Linear), matrix)?;
    if !info.converged {
        log::warn!("svm_smote: internal SVM stopped after {} iterations", info.iterations);
    }
    let noise: Vec<usize> = borderline_classes(matrix, cls.minority_label, cfg.m_neighbors)
        .into_iter()
        .filter(|&(_, c)| c == BorderlineClass::Noise)
        .map(|(i, _)| i)
        .collect();
    Ok(svm
        .support_indices()
        .iter()
        .copied()
        .filter(|&i| matrix.labels()[i] == cls.minority_label && !noise.contains(&i))
        .collect())
}

/// SMOTE from the minority support vectors of a linear SVM; plain SMOTE
/// when there are none.
pub fn svm_smote<T: Scalar>(matrix: &EncodedMatrix<T>, cfg: &ResampleConfig) -> Result<ResampleResult<T>> {
    let Some(cls) = classes(matrix, cfg, 2)? else {
        return Ok(ResampleResult::unchanged(matrix));
    };
    let bases = svm_smote_bases(matrix, cfg)?;
    let mut rng = method_rng(cfg);
    if bases.is_empty() {
        log::warn!("svm_smote: no minority support vectors, falling back to smote");
        return smote_from(matrix, cfg, &cls, &cls.minority, &mut rng);
    }
    smote_from(matrix, cfg, &cls, &bases, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::super::Method;
    use super::*;

    fn m(rows: &[Vec<f64>], labels: &[u8]) -> EncodedMatrix<f64> {
        EncodedMatrix::from_rows(rows, labels.to_vec()).unwrap()
    }

    #[test]
    fn midpoint_interpolation() {
        assert_eq!(interpolate(&[0.0, 0.0], &[1.0, 0.0], 0.5), vec![0.5, 0.0]);
    }

    #[test]
    fn identical_minority_points_stay_put() {
        let x = m(
            &[vec![1.0, 2.0], vec![1.0, 2.0], vec![5.0, 5.0], vec![6.0, 5.0], vec![7.0, 5.0]],
            &[1, 1, 0, 0, 0],
        );
        let r = smote(&x, &ResampleConfig::new(Method::Smote, 4)).unwrap();
        assert_eq!(r.n_synthetic, 1);
        assert_eq!(r.matrix.row(5), &[1.0, 2.0]);
    }

    #[test]
    fn borderline_categories() {
        // Minority 0..3 far from the majority cluster; 3 sits inside it.
        let rows = vec![
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![10.0, 10.0],
            vec![10.0, 11.0],
            vec![11.0, 10.0],
            vec![11.0, 11.0],
            vec![9.0, 10.0],
        ];
        let x = m(&rows, &[1, 1, 1, 1, 0, 0, 0, 0]);
        let c = borderline_classes(&x, 1, 4);
        assert_eq!(c[0], (0, BorderlineClass::Safe));
        assert_eq!(c[3], (3, BorderlineClass::Noise));
    }

    #[test]
    fn unique_danger_point_is_the_only_base() {
        // Two clusters; minority row 4 straddles the gap.
        let rows = vec![
            vec![0.0, 0.0],
            vec![0.0, 0.5],
            vec![0.5, 0.0],
            vec![0.5, 0.5],
            vec![3.0, 0.0],
            vec![5.0, 0.0],
            vec![5.0, 0.5],
            vec![5.5, 0.0],
            vec![5.5, 0.5],
            vec![6.0, 0.0],
            vec![6.0, 0.5],
            vec![6.5, 0.0],
        ];
        let x = m(&rows, &[1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0]);
        let mut cfg = ResampleConfig::new(Method::BorderlineSmote, 1);
        cfg.k_neighbors = 2;
        cfg.m_neighbors = 4;
        let c = borderline_classes(&x, 1, 4);
        let danger: Vec<usize> =
            c.iter().filter(|(_, k)| *k == BorderlineClass::Danger).map(|(i, _)| *i).collect();
        assert_eq!(danger, vec![4]);
        let r = borderline_smote(&x, &cfg).unwrap();
        assert_eq!(r.n_synthetic, 2);
        for o in &r.origins[12..] {
            assert_eq!(*o, super::super::Origin::Synthetic { base: 4 });
        }
    }

    #[test]
    fn svm_smote_margin_point_is_sole_base() {
        let rows = vec![vec![1.0, 0.0], vec![3.0, 0.0], vec![-1.0, 0.0], vec![-2.0, 0.0], vec![-3.0, 0.0]];
        let x = m(&rows, &[1, 1, 0, 0, 0]);
        let mut cfg = ResampleConfig::new(Method::SvmSmote, 0);
        cfg.m_neighbors = 2;
        cfg.k_neighbors = 1;
        assert_eq!(svm_smote_bases(&x, &cfg).unwrap(), vec![0]);
        let r = svm_smote(&x, &cfg).unwrap();
        assert_eq!(r.matrix.class_counts(), [3, 3]);
        assert!(r.matrix.labels()[5..].iter().all(|&l| l == 1));
    }
}
