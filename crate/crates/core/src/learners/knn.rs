use super::FitInfo;
use crate::cohort::EncodedMatrix;
use crate::error::{Error, Result};
use crate::scalar::sq_dist;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: 5 }
    }
}

/// Uniform-vote k-nearest neighbours under Euclidean distance. Equal
/// distances rank the lower training row first; tied votes go to label 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Knn<T> {
    k: usize,
    train: EncodedMatrix<T>,
}

impl<T: Scalar> Knn<T> {
    pub fn fit(params: &KnnParams, x: &EncodedMatrix<T>) -> Result<(Self, FitInfo)> {
        if params.k == 0 {
            return Err(Error::Config("k must be >= 1".into()));
        }
        let info = FitInfo {
            iterations: 0,
            converged: true,
            objective: f64::NAN,
        };
        Ok((
            Knn {
                k: params.k.min(x.n_rows()),
                train: x.clone(),
            },
            info,
        ))
    }

    /// Training rows of the `k` nearest neighbours, nearest first.
    pub fn neighbors(&self, x: &[T]) -> Vec<usize> {
        let mut d: Vec<(T, usize)> =
            self.train.rows().enumerate().map(|(i, r)| (sq_dist(r, x), i)).collect();
        let by_dist = |a: &(T, usize), b: &(T, usize)| {
            a.0.partial_cmp(&b.0).expect("finite distances").then(a.1.cmp(&b.1))
        };
        if self.k < d.len() {
            d.select_nth_unstable_by(self.k - 1, by_dist);
            d.truncate(self.k);
        }
        d.sort_by(by_dist);
        d.into_iter().map(|(_, i)| i).collect()
    }

    pub fn predict_row(&self, x: &[T]) -> u8 {
        let nn = self.neighbors(x);
        let ones = nn.iter().filter(|&&i| self.train.labels()[i] == 1).count();
        u8::from(2 * ones > nn.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_nn_copies_nearest_label() {
        let x = EncodedMatrix::from_rows(&[vec![0.1, 0.0], vec![3.0, 3.0]], vec![1, 0]).unwrap();
        let (m, _) = Knn::fit(&KnnParams { k: 1 }, &x).unwrap();
        assert_eq!(m.predict_row(&[0.0, 0.0]), 1);
    }

    #[test]
    fn distance_ties_take_lower_index() {
        let x = EncodedMatrix::from_rows(&[vec![1.0], vec![-1.0], vec![1.0]], vec![0, 1, 1]).unwrap();
        let (m, _) = Knn::fit(&KnnParams { k: 1 }, &x).unwrap();
        assert_eq!(m.neighbors(&[0.0]), vec![0]);
        assert_eq!(m.predict_row(&[0.0]), 0);
    }

    #[test]
    fn vote_ties_go_to_zero() {
        let x = EncodedMatrix::from_rows(&[vec![0.0], vec![1.0]], vec![1, 0]).unwrap();
        let (m, _) = Knn::fit(&KnnParams { k: 2 }, &x).unwrap();
        assert_eq!(m.predict_row(&[0.2]), 0);
    }

    #[test]
    fn k_is_clamped_to_training_size() {
        let x = EncodedMatrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0]], vec![1, 1, 0]).unwrap();
        let (m, _) = Knn::fit(&KnnParams::default(), &x).unwrap();
        assert_eq!(m.neighbors(&[0.0]).len(), 3);
        assert_eq!(m.predict_row(&[10.0]), 1);
    }
}
