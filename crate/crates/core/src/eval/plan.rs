use std::fmt;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvMode {
    Loocv,
    KFold { k: usize, stratified: bool },
}

impl fmt::Display for CvMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CvMode::Loocv => f.write_str("loocv"),
            CvMode::KFold { k, stratified: false } => write!(f, "kfold(k={k})"),
            CvMode::KFold { k, stratified: true } => write!(f, "stratified kfold(k={k})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    /// Sorted ascending.
    pub train: Vec<usize>,
    /// Sorted ascending.
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub folds: Vec<Fold>,
    pub mode: CvMode,
    pub seed: u64,
}

impl FoldPlan {
    pub fn len(&self) -> usize {
        self.folds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.folds.is_empty()
    }

    /// Builds the plan for `mode`; `labels` is only read when stratifying.
    pub fn build(mode: CvMode, n: usize, seed: u64, labels: &[u8]) -> Result<Self> {
        match mode {
            CvMode::Loocv => loocv_plan(n),
            CvMode::KFold { k, stratified } => {
                let mut plan = kfold_plan(n, k, seed, stratified.then_some(labels))?;
                plan.mode = mode;
                Ok(plan)
            }
        }
    }
}

fn complement(n: usize, test: &[usize]) -> Vec<usize> {
    let mut in_test = vec![false; n];
    for &i in test {
        in_test[i] = true;
    }
    (0..n).filter(|&i| !in_test[i]).collect()
}

/// Fold `i` tests `{i}` and trains on the rest.
pub fn loocv_plan(n: usize) -> Result<FoldPlan> {
    if n < 2 {
        return Err(Error::Plan(format!("leave-one-out needs n >= 2, got {n}")));
    }
    let folds = (0..n)
        .map(|i| Fold {
            train: complement(n, &[i]),
            test: vec![i],
        })
        .collect();
    Ok(FoldPlan {
        folds,
        mode: CvMode::Loocv,
        seed: 0,
    })
}

/// Shuffles `0..n` with `seed` and cuts it into `k` folds whose sizes differ
/// by at most one, larger folds first. With `stratify`, each class is
/// shuffled separately and dealt round-robin so per-fold class counts also
/// differ by at most one.
pub fn kfold_plan(n: usize, k: usize, seed: u64, stratify: Option<&[u8]>) -> Result<FoldPlan> {
    if k < 2 || k > n {
        return Err(Error::Plan(format!("k-fold needs 2 <= k <= n, got k={k}, n={n}")));
    }
    let mut rng = rng::stream(seed, &[]);
    let mut tests: Vec<Vec<usize>> = vec![Vec::new(); k];
    match stratify {
        None => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            let (base, extra) = (n / k, n % k);
            let mut start = 0;
            for (f, test) in tests.iter_mut().enumerate() {
                let len = base + usize::from(f < extra);
                test.extend_from_slice(&order[start..start + len]);
                start += len;
            }
        }
        Some(labels) => {
            if labels.len() != n {
                return Err(Error::Shape {
                    expected: n,
                    actual: labels.len(),
                });
            }
            let mut dealt = 0;
            for class in [0u8, 1] {
                let mut members: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
                members.shuffle(&mut rng);
                for i in members {
                    tests[dealt % k].push(i);
                    dealt += 1;
                }
            }
        }
    }
    let folds = tests
        .into_iter()
        .map(|mut test| {
            test.sort_unstable();
            Fold {
                train: complement(n, &test),
                test,
            }
        })
        .collect();
    Ok(FoldPlan {
        folds,
        mode: CvMode::KFold {
            k,
            stratified: stratify.is_some(),
        },
        seed,
    })
}
