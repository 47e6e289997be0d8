use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::experiment::{cross_validate, ExperimentConfig};
use super::plan::CvMode;
use crate::cohort::{Design, Feature};
use crate::error::{Error, Result};
use crate::learners::ModelSpec;
use crate::Scalar;

/// Largest subset size accepted by [`SearchStrategy::Exhaustive`].
pub const EXHAUSTIVE_MAX_SIZE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStrategy {
    Exhaustive,
    GreedyForward,
}

impl SearchStrategy {
    pub fn as_str(self) -> &'static str {
        match self {
            SearchStrategy::Exhaustive => "exhaustive",
            SearchStrategy::GreedyForward => "greedy_forward",
        }
    }
}

impl fmt::Display for SearchStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SearchStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(SearchStrategy::Exhaustive),
            "greedy_forward" => Ok(SearchStrategy::GreedyForward),
            _ => Err(Error::Config(format!("unknown search strategy {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsetScore {
    /// In canonical feature order.
    pub features: Vec<Feature>,
    /// Pooled cross-validated accuracy in `[0, 1]`.
    pub accuracy: f64,
}

/// Accuracy descending, then smaller subsets, then lexicographic order of
/// canonical feature positions.
pub fn rank(a: &SubsetScore, b: &SubsetScore) -> Ordering {
    b.accuracy
        .partial_cmp(&a.accuracy)
        .unwrap_or(Ordering::Equal)
        .then(a.features.len().cmp(&b.features.len()))
        .then_with(|| {
            let ka: Vec<usize> = a.features.iter().map(|f| f.index()).collect();
            let kb: Vec<usize> = b.features.iter().map(|f| f.index()).collect();
            ka.cmp(&kb)
        })
}

fn combinations(items: &[Feature], size: usize) -> Vec<Vec<Feature>> {
    if size == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &f) in items.iter().enumerate() {
        for mut rest in combinations(&items[i + 1..], size - 1) {
            rest.insert(0, f);
            out.push(rest);
        }
    }
    out
}

/// Wrapper search over clinical features: each candidate is scored by the
/// cross-validated accuracy of `spec` on that subset's encoded columns.
/// Exhaustive search scores every subset of size `1..=max_size`; greedy
/// forward search reports one subset per growth step. Results are sorted
/// by [`rank`].
pub fn feature_subset_search<T: Scalar>(
    design: &Design<T>,
    spec: &ModelSpec,
    max_size: usize,
    strategy: SearchStrategy,
    cv: CvMode,
    seed: u64,
) -> Result<Vec<SubsetScore>> {
    let features: Vec<Feature> = Feature::ALL
        .into_iter()
        .filter(|f| design.columns().iter().any(|c| c.feature == Some(*f)))
        .collect();
    if max_size == 0 || features.is_empty() {
        return Err(Error::Search("no candidate subsets".into()));
    }
    if max_size > features.len() {
        return Err(Error::Search(format!(
            "max size {max_size} exceeds the {} available features",
            features.len()
        )));
    }
    let cfg = ExperimentConfig::new(Vec::new(), cv, seed);
    let score = |subset: Vec<Feature>| -> Result<SubsetScore> {
        let sub = design.select_features(&subset);
        let r = cross_validate(&sub, spec, &cfg)?;
        Ok(SubsetScore {
            features: subset,
            accuracy: r.metrics.accuracy,
        })
    };
    let mut out = match strategy {
        SearchStrategy::Exhaustive => {
            if max_size > EXHAUSTIVE_MAX_SIZE {
                return Err(Error::Search(format!(
                    "exhaustive search is limited to subsets of size <= {EXHAUSTIVE_MAX_SIZE}; use greedy_forward"
                )));
            }
            let candidates: Vec<Vec<Feature>> =
                (1..=max_size).flat_map(|s| combinations(&features, s)).collect();
            candidates.into_par_iter().map(score).collect::<Result<Vec<_>>>()?
        }
        SearchStrategy::GreedyForward => {
            let mut chosen: Vec<Feature> = Vec::new();
            let mut steps = Vec::new();
            while chosen.len() < max_size {
                let mut scored = features
                    .par_iter()
                    .filter(|f| !chosen.contains(f))
                    .map(|&f| {
                        let mut s = chosen.clone();
                        s.push(f);
                        s.sort_by_key(|f| f.index());
                        score(s)
                    })
                    .collect::<Result<Vec<_>>>()?;
                scored.sort_by(rank);
                let best = scored.swap_remove(0);
                chosen = best.features.clone();
                steps.push(best);
            }
            steps
        }
    };
    out.sort_by(rank);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combination_counts() {
        let f = Feature::ALL;
        let total: usize = (1..=3).map(|s| combinations(&f, s).len()).sum();
        assert_eq!(total, 12 + 66 + 220);
    }

    #[test]
    fn ranking_rules() {
        let a = SubsetScore { features: vec![Feature::Aura], accuracy: 0.9 };
        let b = SubsetScore { features: vec![Feature::Aura, Feature::Ecog], accuracy: 0.9 };
        let c = SubsetScore { features: vec![Feature::Ecog], accuracy: 0.9 };
        let d = SubsetScore { features: vec![Feature::Duration], accuracy: 0.95 };
        let mut v = vec![b.clone(), c.clone(), a.clone(), d.clone()];
        v.sort_by(rank);
        assert_eq!(v, vec![d, a, c, b]);
    }
}
