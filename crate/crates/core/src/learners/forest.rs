use rand::Rng;
use rayon::prelude::*;

use super::tree::{fit_classification_tree, DecisionTree, MaxFeatures, TreeParams};
use super::FitInfo;
use crate::cohort::EncodedMatrix;
use crate::error::{Error, Result};
use crate::{rng, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestParams {
    pub n_trees: usize,
    pub bootstrap: bool,
    pub max_features: MaxFeatures,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            bootstrap: true,
            max_features: MaxFeatures::Sqrt,
            max_depth: None,
            min_samples_split: 2,
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Config("forest needs at least one tree".into()));
        }
        Ok(())
    }
}

/// Bagged Gini trees with per-split feature subsampling.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest<T> {
    trees: Vec<DecisionTree<T>>,
}

impl<T: Scalar> RandomForest<T> {
    /// Tree `t` draws its bootstrap sample and feature subsets from a
    /// stream seeded by `(seed, t)`, so the result does not depend on how
    /// trees are scheduled across threads.
    pub fn fit(params: &ForestParams, x: &EncodedMatrix<T>, seed: u64) -> Result<(Self, FitInfo)> {
        params.validate()?;
        let n = x.n_rows();
        let tree_params = TreeParams {
            max_depth: params.max_depth,
            min_samples_split: params.min_samples_split,
            max_features: params.max_features,
        };
        let trees = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = rng::stream(seed, &[t as u64]);
                let idx: Vec<usize> = if params.bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                fit_classification_tree(x, &idx, &tree_params, Some(rng))
            })
            .collect();
        let info = FitInfo {
            iterations: params.n_trees,
            converged: true,
            objective: f64::NAN,
        };
        Ok((RandomForest { trees }, info))
    }

    pub fn trees(&self) -> &[DecisionTree<T>] {
        &self.trees
    }

    /// Majority vote of the member trees; ties go to label 0.
    pub fn predict_row(&self, x: &[T]) -> u8 {
        let ones = self.trees.iter().filter(|t| t.leaf(x).class() == 1).count();
        u8::from(2 * ones > self.trees.len())
    }
}
