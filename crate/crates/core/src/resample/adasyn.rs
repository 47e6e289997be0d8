use super::smote::synthesize;
use super::{append, classes, method_rng, nearest, ResampleConfig, ResampleResult};
use crate::cohort::EncodedMatrix;
use crate::error::Result;
use crate::Scalar;

/// Normalized difficulty weights `r_i / sum r_j`, one per minority row in
/// input order, where `r_i` is the majority fraction among row `i`'s `k`
/// nearest neighbours over both classes. Uniform when every `r_i` is zero.
/// Empty when the input is balanced.
pub fn adasyn_weights<T: Scalar>(matrix: &EncodedMatrix<T>, cfg: &ResampleConfig) -> Result<Vec<f64>> {
    let Some(cls) = classes(matrix, cfg, 2)? else {
        return Ok(Vec::new());
    };
    let all: Vec<usize> = (0..matrix.n_rows()).collect();
    let k = cfg.k_neighbors.min(matrix.n_rows() - 1);
    let r: Vec<f64> = cls
        .minority
        .iter()
        .map(|&i| {
            let maj = nearest(matrix, i, &all, k)
                .into_iter()
                .filter(|&j| matrix.labels()[j] != cls.minority_label)
                .count();
            maj as f64 / k as f64
        })
        .collect();
    let total: f64 = r.iter().sum();
    if total == 0.0 {
        log::warn!("adasyn: no minority row has majority neighbours, using uniform weights");
        let w = 1.0 / r.len() as f64;
        return Ok(vec![w; r.len()]);
    }
    Ok(r.into_iter().map(|v| v / total).collect())
}

/// Synthetic count per minority row: `G = round(beta * (N_maj - N_min))`
/// split by [`adasyn_weights`] with largest-remainder rounding (ties to the
/// earlier row), so the counts sum to exactly `G`.
pub fn adasyn_allocation<T: Scalar>(matrix: &EncodedMatrix<T>, cfg: &ResampleConfig) -> Result<Vec<usize>> {
    let Some(cls) = classes(matrix, cfg, 2)? else {
        return Ok(Vec::new());
    };
    let weights = adasyn_weights(matrix, cfg)?;
    let g = (cfg.adasyn_beta * cls.deficit() as f64).round() as usize;
    Ok(largest_remainder(&weights, g))
}

pub(crate) fn largest_remainder(weights: &[f64], total: usize) -> Vec<usize> {
    let exact: Vec<f64> = weights.iter().map(|w| w * total as f64).collect();
    let mut alloc: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = alloc.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
        rb.partial_cmp(&ra).expect("finite weights").then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        alloc[i] += 1;
    }
    alloc
}

/// ADASYN: more synthetics around minority rows with more majority
/// neighbours.
pub fn adasyn<T: Scalar>(matrix: &EncodedMatrix<T>, cfg: &ResampleConfig) -> Result<ResampleResult<T>> {
    let Some(cls) = classes(matrix, cfg, 2)? else {
        return Ok(ResampleResult::unchanged(matrix));
    };
    let alloc = adasyn_allocation(matrix, cfg)?;
    let bases: Vec<usize> = cls
        .minority
        .iter()
        .zip(&alloc)
        .flat_map(|(&i, &n)| std::iter::repeat_n(i, n))
        .collect();
    let k = cfg.k_neighbors.min(cls.minority.len() - 1);
    let mut rng = method_rng(cfg);
    let synthetic = synthesize(matrix, &cls.minority, &bases, k, &mut rng);
    append(matrix, cls.minority_label, synthetic)
}

#[cfg(test)]
mod tests {
    use super::super::Method;
    use super::*;

    #[test]
    fn remainders_go_to_largest_fractions() {
        assert_eq!(largest_remainder(&[0.5, 0.25, 0.25], 3), vec![1, 1, 1]);
        assert_eq!(largest_remainder(&[0.6, 0.3, 0.1], 2), vec![1, 1, 0]);
        assert_eq!(largest_remainder(&[1.0 / 3.0; 3], 80).iter().sum::<usize>(), 80);
    }

    #[test]
    fn isolated_minority_row_gets_nothing() {
        // Rows 0,1,2 sit among majority rows; rows 3,4,5 form a pure
        // minority cluster far away.
        let rows = vec![
            vec![0.0],
            vec![0.2],
            vec![0.4],
            vec![100.0],
            vec![100.1],
            vec![100.2],
            vec![0.1],
            vec![0.3],
            vec![0.5],
            vec![0.6],
            vec![0.7],
            vec![0.8],
            vec![0.9],
        ];
        let mut labels = vec![1u8; 6];
        labels.extend([0u8; 7]);
        let x = EncodedMatrix::from_rows(&rows, labels).unwrap();
        let mut cfg = ResampleConfig::new(Method::Adasyn, 0);
        cfg.k_neighbors = 2;
        let w = adasyn_weights(&x, &cfg).unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let alloc = adasyn_allocation(&x, &cfg).unwrap();
        assert_eq!(&alloc[3..], &[0, 0, 0]);
        assert_eq!(alloc.iter().sum::<usize>(), 1);
        let r = adasyn(&x, &cfg).unwrap();
        assert_eq!(r.matrix.class_counts(), [7, 7]);
    }

    #[test]
    fn partial_beta() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let labels = vec![1, 1, 1, 0, 0, 0, 0, 0, 0, 0];
        let x = EncodedMatrix::from_rows(&rows, labels).unwrap();
        let mut cfg = ResampleConfig::new(Method::Adasyn, 0);
        cfg.adasyn_beta = 0.5;
        let r = adasyn(&x, &cfg).unwrap();
        assert_eq!(r.n_synthetic, 2);
    }
}
