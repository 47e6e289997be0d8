use super::tree::{fit_regression_tree, set_leaf_values, Node, RegressionTree};
use super::FitInfo;
use crate::cohort::EncodedMatrix;
use crate::error::{Error, Result};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostingParams {
    pub n_stages: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_samples_split: usize,
}

impl Default for BoostingParams {
    fn default() -> Self {
        BoostingParams {
            n_stages: 100,
            learning_rate: 0.1,
            max_depth: 3,
            min_samples_split: 2,
        }
    }
}

impl BoostingParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || self.max_depth == 0 {
            return Err(Error::Config(format!("invalid boosting settings {self:?}")));
        }
        Ok(())
    }
}

fn sigmoid<T: Scalar>(z: T) -> T {
    T::one() / (T::one() + (-z).exp())
}

/// Mean binary log-loss of raw scores.
fn log_loss<T: Scalar>(scores: &[T], labels: &[u8]) -> f64 {
    let total: f64 = scores
        .iter()
        .zip(labels)
        .map(|(&f, &y)| {
            let f = f.as_f64();
            // log(1 + e^f) - y f, computed stably.
            let softplus = if f > 0.0 { f + (-f).exp().ln_1p() } else { f.exp().ln_1p() };
            softplus - f64::from(y) * f
        })
        .sum();
    total / scores.len() as f64
}

/// Log-loss gradient boosting with depth-limited regression trees and
/// Newton leaf values.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBoosting<T> {
    init_score: T,
    learning_rate: T,
    stages: Vec<RegressionTree<T>>,
    /// Training log-loss after 0, 1, ..., n stages.
    train_loss: Vec<f64>,
}

impl<T: Scalar> GradientBoosting<T> {
    pub fn fit(params: &BoostingParams, x: &EncodedMatrix<T>) -> Result<(Self, FitInfo)> {
        params.validate()?;
        let n = x.n_rows();
        let [zeros, ones] = x.class_counts();
        if zeros == 0 || ones == 0 {
            return Err(Error::Imbalance("gradient boosting needs both classes".into()));
        }
        let prior = ones as f64 / n as f64;
        let init_score = T::of((prior / (1.0 - prior)).ln());
        let lr = T::of(params.learning_rate);
        let y: Vec<T> = x.labels().iter().map(|&l| T::of(f64::from(l))).collect();
        let idx: Vec<usize> = (0..n).collect();
        let mut scores = vec![init_score; n];
        let mut train_loss = vec![log_loss(&scores, x.labels())];
        let mut stages = Vec::with_capacity(params.n_stages);
        for _ in 0..params.n_stages {
            let probs: Vec<T> = scores.iter().map(|&f| sigmoid(f)).collect();
            let residual: Vec<T> = y.iter().zip(&probs).map(|(&yi, &p)| yi - p).collect();
            let mut tree = fit_regression_tree(x, &residual, &idx, params.max_depth, params.min_samples_split);
            // Newton step per leaf: sum(r) / sum(p (1 - p)).
            let leaf_of: Vec<usize> = x.rows().map(|r| tree.leaf_index(r)).collect();
            let mut num = vec![T::zero(); tree.nodes().len()];
            let mut den = vec![T::zero(); tree.nodes().len()];
            for i in 0..n {
                num[leaf_of[i]] = num[leaf_of[i]] + residual[i];
                den[leaf_of[i]] = den[leaf_of[i]] + probs[i] * (T::one() - probs[i]);
            }
            set_leaf_values(&mut tree, |leaf| {
                if den[leaf].abs() < T::of(1e-150) {
                    T::zero()
                } else {
                    num[leaf] / den[leaf]
                }
            });
            for i in 0..n {
                scores[i] = scores[i] + lr * *leaf_value(&tree, leaf_of[i]);
            }
            train_loss.push(log_loss(&scores, x.labels()));
            stages.push(tree);
        }
        let info = FitInfo {
            iterations: stages.len(),
            converged: true,
            objective: *train_loss.last().expect("initial loss recorded"),
        };
        Ok((
            GradientBoosting {
                init_score,
                learning_rate: lr,
                stages,
                train_loss,
            },
            info,
        ))
    }

    pub fn n_stages(&self) -> usize {
        self.stages.len()
    }

    pub fn init_score(&self) -> T {
        self.init_score
    }

    pub fn train_loss(&self) -> &[f64] {
        &self.train_loss
    }

    /// Raw score using only the first `stages` trees.
    pub fn staged_score(&self, x: &[T], stages: usize) -> T {
        self.stages[..stages.min(self.stages.len())]
            .iter()
            .fold(self.init_score, |acc, t| acc + self.learning_rate * *t.leaf(x))
    }

    pub fn keep_stages(&mut self, stages: usize) {
        self.stages.truncate(stages);
        self.train_loss.truncate(stages + 1);
    }

    pub fn predict_row(&self, x: &[T]) -> u8 {
        u8::from(self.staged_score(x, self.stages.len()) > T::zero())
    }
}

fn leaf_value<T: Scalar>(tree: &RegressionTree<T>, at: usize) -> &T {
    match &tree.nodes()[at] {
        Node::Leaf(v) => v,
        Node::Split { .. } => unreachable!("leaf index points at a leaf"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data() -> EncodedMatrix<f64> {
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()])
            .collect();
        let labels = rows.iter().map(|r| u8::from(r[0] + 0.3 * r[1] > 0.1)).collect();
        EncodedMatrix::from_rows(&rows, labels).unwrap()
    }

    #[test]
    fn init_score_is_prior_log_odds() {
        let x = data();
        let [zeros, ones] = x.class_counts();
        let (m, _) = GradientBoosting::fit(&BoostingParams::default(), &x).unwrap();
        assert!((m.init_score() - (ones as f64 / zeros as f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn zero_stages_predicts_majority() {
        let rows: Vec<Vec<f64>> = (0..7).map(|i| vec![i as f64]).collect();
        let x = EncodedMatrix::from_rows(&rows, vec![1, 0, 1, 1, 0, 1, 1]).unwrap();
        let params = BoostingParams {
            n_stages: 0,
            ..BoostingParams::default()
        };
        let (m, _) = GradientBoosting::fit(&params, &x).unwrap();
        assert_eq!(m.n_stages(), 0);
        for q in [-5.0, 0.0, 3.0, 100.0] {
            assert_eq!(m.predict_row(&[q]), 1);
        }
    }

    #[test]
    fn training_loss_never_increases() {
        let (m, _) = GradientBoosting::fit(&BoostingParams::default(), &data()).unwrap();
        for w in m.train_loss().windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn single_class_is_rejected() {
        let x = EncodedMatrix::from_rows(&[vec![0.0], vec![1.0]], vec![1, 1]).unwrap();
        assert!(matches!(
            GradientBoosting::fit(&BoostingParams::default(), &x),
            Err(Error::Imbalance(_))
        ));
    }
}
