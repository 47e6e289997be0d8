//! Classifiers behind a uniform [`fit`] / [`predict`] contract.
//!
//! Every family is implemented directly on [`EncodedMatrix`]; labels are
//! `0`/`1` throughout.

mod boosting;
mod forest;
mod kernel;
mod knn;
mod logistic;
mod mlp;
mod smo;
mod svm;
mod tree;

use std::fmt;
use std::str::FromStr;

use crate::cohort::EncodedMatrix;
use crate::error::{Error, Result};
use crate::Scalar;

pub use boosting::{BoostingParams, GradientBoosting};
pub use forest::{ForestParams, RandomForest};
pub use kernel::{gram_matrix, kernel_eval, KernelKind, KernelParams};
pub use knn::{Knn, KnnParams};
pub use logistic::{LogisticParams, LogisticRegression};
pub use mlp::{Mlp, MlpParams};
pub use smo::{dual_objective, smo_solve, SmoConfig, SmoSolution};
pub use svm::{scale_gamma, Gamma, SvmModel, SvmParams};
pub use tree::{
    fit_classification_tree, gini, ClassLeaf, DecisionTree, MaxFeatures, Node, RegressionTree,
    Tree, TreeParams,
};

/// Training metadata common to all families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitInfo {
    pub iterations: usize,
    pub converged: bool,
    /// Final objective value; NaN for families without one.
    pub objective: f64,
}

impl FitInfo {
    fn trivial() -> Self {
        FitInfo {
            iterations: 0,
            converged: true,
            objective: f64::NAN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    DecisionTree(TreeParams),
    RandomForest(ForestParams),
    Mlp(MlpParams),
    LogisticRegression(LogisticParams),
    Knn(KnnParams),
    GradientBoosting(BoostingParams),
    Svm(SvmParams),
    /// Constant prediction of the training majority (ties to 0).
    Majority,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::DecisionTree(_) => "decision_tree",
            Family::RandomForest(_) => "random_forest",
            Family::Mlp(_) => "mlp",
            Family::LogisticRegression(_) => "logistic_regression",
            Family::Knn(_) => "knn",
            Family::GradientBoosting(_) => "gradient_boosting",
            Family::Svm(_) => "svm",
            Family::Majority => "majority",
        }
    }

    fn allows_single_class(&self) -> bool {
        matches!(self, Family::DecisionTree(_) | Family::Knn(_) | Family::Majority)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    pub family: Family,
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(family: Family, seed: u64) -> Self {
        ModelSpec { family, seed }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.family {
            Family::DecisionTree(p) => {
                if p.min_samples_split < 2 {
                    return Err(Error::Config("tree min_samples_split must be >= 2".into()));
                }
                Ok(())
            }
            Family::RandomForest(p) => p.validate(),
            Family::Mlp(p) => p.validate(),
            Family::LogisticRegression(p) => p.validate(),
            Family::Knn(p) => {
                if p.k == 0 {
                    return Err(Error::Config("knn k must be >= 1".into()));
                }
                Ok(())
            }
            Family::GradientBoosting(p) => p.validate(),
            Family::Svm(p) => p.validate(),
            Family::Majority => Ok(()),
        }
    }
}

/// Fixed identifiers of the ten evaluated models plus the constant baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelId {
    Tree,
    Forest,
    Mlp,
    Logreg,
    Knn,
    Gboost,
    SvmLinear,
    SvmPoly,
    SvmRbf,
    SvmSigmoid,
    Majority,
}

impl ModelId {
    /// The ten models in report order.
    pub const STANDARD: [ModelId; 10] = [
        ModelId::Tree,
        ModelId::Forest,
        ModelId::Mlp,
        ModelId::Logreg,
        ModelId::Knn,
        ModelId::Gboost,
        ModelId::SvmLinear,
        ModelId::SvmPoly,
        ModelId::SvmRbf,
        ModelId::SvmSigmoid,
    ];

    pub const ALL: [ModelId; 11] = [
        ModelId::Tree,
        ModelId::Forest,
        ModelId::Mlp,
        ModelId::Logreg,
        ModelId::Knn,
        ModelId::Gboost,
        ModelId::SvmLinear,
        ModelId::SvmPoly,
        ModelId::SvmRbf,
        ModelId::SvmSigmoid,
        ModelId::Majority,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelId::Tree => "tree",
            ModelId::Forest => "forest",
            ModelId::Mlp => "mlp",
            ModelId::Logreg => "logreg",
            ModelId::Knn => "knn",
            ModelId::Gboost => "gboost",
            ModelId::SvmLinear => "svm-linear",
            ModelId::SvmPoly => "svm-poly",
            ModelId::SvmRbf => "svm-rbf",
            ModelId::SvmSigmoid => "svm-sigmoid",
            ModelId::Majority => "majority",
        }
    }

    /// Human-readable classifier name used in markdown tables.
    pub fn display_name(self) -> &'static str {
        match self {
            ModelId::Tree => "Decision Tree",
            ModelId::Forest => "Random Forest",
            ModelId::Mlp => "Multilayer Perceptron",
            ModelId::Logreg => "Logistic Regression",
            ModelId::Knn => "K-Nearest Neighbors",
            ModelId::Gboost => "Gradient Boosting",
            ModelId::SvmLinear => "Support Vector Machine (kernel = linear)",
            ModelId::SvmPoly => "Support Vector Machine (kernel = Poly)",
            ModelId::SvmRbf => "Support Vector Machine (kernel = RBF)",
            ModelId::SvmSigmoid => "Support Vector Machine (kernel = Sigmoid)",
            ModelId::Majority => "Majority Baseline",
        }
    }

    /// Default configuration of this model.
    pub fn default_spec(self, seed: u64) -> ModelSpec {
        let family = match self {
            ModelId::Tree => Family::DecisionTree(TreeParams::default()),
            ModelId::Forest => Family::RandomForest(ForestParams::default()),
            ModelId::Mlp => Family::Mlp(MlpParams::default()),
            ModelId::Logreg => Family::LogisticRegression(LogisticParams::default()),
            ModelId::Knn => Family::Knn(KnnParams::default()),
            ModelId::Gboost => Family::GradientBoosting(BoostingParams::default()),
            ModelId::SvmLinear => Family::Svm(SvmParams::with_kernel(KernelKind::Linear)),
            ModelId::SvmPoly => Family::Svm(SvmParams::with_kernel(KernelKind::Poly)),
            ModelId::SvmRbf => Family::Svm(SvmParams::with_kernel(KernelKind::Rbf)),
            ModelId::SvmSigmoid => Family::Svm(SvmParams::with_kernel(KernelKind::Sigmoid)),
            ModelId::Majority => Family::Majority,
        };
        ModelSpec::new(family, seed)
    }

    /// Position in [`ModelId::ALL`], used to derive per-model seeds.
    pub fn index(self) -> usize {
        ModelId::ALL.iter().position(|&m| m == self).expect("listed")
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelId::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown model id {s:?}")))
    }
}

/// Fitted parameters of one family.
#[derive(Debug, Clone, PartialEq)]
pub enum Fitted<T> {
    DecisionTree(DecisionTree<T>),
    RandomForest(RandomForest<T>),
    Mlp(Mlp<T>),
    LogisticRegression(LogisticRegression<T>),
    Knn(Knn<T>),
    GradientBoosting(GradientBoosting<T>),
    Svm(SvmModel<T>),
    Constant(u8),
}

/// An immutable fitted classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel<T> {
    family: &'static str,
    n_features: usize,
    info: FitInfo,
    fitted: Fitted<T>,
}

impl<T: Scalar> TrainedModel<T> {
    pub fn family(&self) -> &'static str {
        self.family
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn info(&self) -> &FitInfo {
        &self.info
    }

    pub fn fitted(&self) -> &Fitted<T> {
        &self.fitted
    }

    pub fn predict_row(&self, x: &[T]) -> u8 {
        match &self.fitted {
            Fitted::DecisionTree(t) => t.leaf(x).class(),
            Fitted::RandomForest(m) => m.predict_row(x),
            Fitted::Mlp(m) => m.predict_row(x),
            Fitted::LogisticRegression(m) => m.predict_row(x),
            Fitted::Knn(m) => m.predict_row(x),
            Fitted::GradientBoosting(m) => m.predict_row(x),
            Fitted::Svm(m) => m.predict_row(x),
            Fitted::Constant(c) => *c,
        }
    }
}

/// Fits `spec` on `x`. Solver non-convergence is reported through
/// [`FitInfo::converged`] rather than as an error.
pub fn fit<T: Scalar>(spec: &ModelSpec, x: &EncodedMatrix<T>) -> Result<TrainedModel<T>> {
    spec.validate()?;
    if x.n_rows() == 0 {
        return Err(Error::InsufficientData("cannot fit on zero rows".into()));
    }
    x.check_finite()?;
    let [zeros, ones] = x.class_counts();
    if (zeros == 0 || ones == 0) && !spec.family.allows_single_class() {
        return Err(Error::Imbalance(format!(
            "{} needs both classes in the training data",
            spec.family.name()
        )));
    }
    let (fitted, info) = match &spec.family {
        Family::DecisionTree(p) => {
            let idx: Vec<usize> = (0..x.n_rows()).collect();
            let tree = fit_classification_tree(x, &idx, p, Some(crate::rng::stream(spec.seed, &[])));
            (Fitted::DecisionTree(tree), FitInfo::trivial())
        }
        Family::RandomForest(p) => {
            let (m, i) = RandomForest::fit(p, x, spec.seed)?;
            (Fitted::RandomForest(m), i)
        }
        Family::Mlp(p) => {
            let (m, i) = Mlp::fit(p, x, spec.seed)?;
            (Fitted::Mlp(m), i)
        }
        Family::LogisticRegression(p) => {
            let (m, i) = LogisticRegression::fit(p, x)?;
            (Fitted::LogisticRegression(m), i)
        }
        Family::Knn(p) => {
            let (m, i) = Knn::fit(p, x)?;
            (Fitted::Knn(m), i)
        }
        Family::GradientBoosting(p) => {
            let (m, i) = GradientBoosting::fit(p, x)?;
            (Fitted::GradientBoosting(m), i)
        }
        Family::Svm(p) => {
            let (m, i) = SvmModel::fit(p, x)?;
            (Fitted::Svm(m), i)
        }
        Family::Majority => (Fitted::Constant(u8::from(ones > zeros)), FitInfo::trivial()),
    };
    if !info.converged {
        log::debug!(
            "{} did not converge after {} iterations",
            spec.family.name(),
            info.iterations
        );
    }
    Ok(TrainedModel {
        family: spec.family.name(),
        n_features: x.n_cols(),
        info,
        fitted,
    })
}

/// Predicts every row of `x`.
pub fn predict<T: Scalar>(model: &TrainedModel<T>, x: &EncodedMatrix<T>) -> Result<Vec<u8>> {
    if x.n_cols() != model.n_features {
        return Err(Error::Shape {
            expected: model.n_features,
            actual: x.n_cols(),
        });
    }
    Ok(x.rows().map(|r| model.predict_row(r)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<f64>], labels: &[u8]) -> EncodedMatrix<f64> {
        EncodedMatrix::from_rows(rows, labels.to_vec()).unwrap()
    }

    #[test]
    fn ids_round_trip() {
        for id in ModelId::ALL {
            assert_eq!(id.as_str().parse::<ModelId>().unwrap(), id);
        }
        assert!("svm".parse::<ModelId>().is_err());
    }

    #[test]
    fn single_class_policy() {
        let x = m(&[vec![0.0], vec![1.0]], &[1, 1]);
        for id in [ModelId::Tree, ModelId::Knn, ModelId::Majority] {
            let model = fit(&id.default_spec(0), &x).unwrap();
            assert_eq!(predict(&model, &x).unwrap(), vec![1, 1]);
        }
        for id in [ModelId::Forest, ModelId::Logreg, ModelId::Gboost, ModelId::SvmRbf, ModelId::Mlp] {
            assert!(matches!(fit(&id.default_spec(0), &x), Err(Error::Imbalance(_))));
        }
    }

    #[test]
    fn knn_nearest_neighbour_example() {
        let x = m(&[vec![0.1, 0.0], vec![5.0, 5.0]], &[1, 0]);
        let spec = ModelSpec::new(Family::Knn(KnnParams { k: 1 }), 0);
        let model = fit(&spec, &x).unwrap();
        let q = m(&[vec![0.0, 0.0]], &[0]);
        assert_eq!(predict(&model, &q).unwrap(), vec![1]);
    }

    #[test]
    fn shape_mismatch() {
        let x = m(&[vec![0.0], vec![1.0]], &[0, 1]);
        let model = fit(&ModelId::Tree.default_spec(0), &x).unwrap();
        let q = m(&[vec![0.0, 1.0]], &[0]);
        assert!(matches!(predict(&model, &q), Err(Error::Shape { expected: 1, actual: 2 })));
    }

    #[test]
    fn non_finite_rejected() {
        let x = m(&[vec![f64::NAN], vec![1.0]], &[0, 1]);
        assert!(matches!(fit(&ModelId::Knn.default_spec(0), &x), Err(Error::Data(_))));
    }
}
