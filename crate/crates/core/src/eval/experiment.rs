use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::metrics::{class_metrics, kfold_summary, ClassMetrics, ConfusionMatrix, KFoldSummary};
use super::plan::{CvMode, FoldPlan};
use crate::cohort::{Design, EncodedKind, EncodedMatrix, Feature, FeatureSchema, PatientRecord};
use crate::error::{Error, Result};
use crate::learners::{self, ModelId, ModelSpec};
use crate::resample::{oversample, Origin, ResampleConfig};
use crate::rng::derive_seed;
use crate::Scalar;

const PLAN_STREAM: u64 = 0;
const RESAMPLE_STREAM: u64 = 1;
const MODEL_STREAM: u64 = 2;

/// Where oversampling happens relative to the train/test split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Leakage {
    /// Oversample the whole dataset once, then cross-validate the augmented
    /// rows. Copies and interpolants of test rows can reach training.
    BeforeSplit,
    /// Oversample each training split only; test rows are always originals.
    #[default]
    WithinFold,
}

impl Leakage {
    pub fn as_str(self) -> &'static str {
        match self {
            Leakage::BeforeSplit => "before_split",
            Leakage::WithinFold => "within_fold",
        }
    }
}

impl fmt::Display for Leakage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Leakage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "before_split" => Ok(Leakage::BeforeSplit),
            "within_fold" => Ok(Leakage::WithinFold),
            _ => Err(Error::Config(format!("unknown leakage mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resampling {
    /// Its `seed` is replaced by streams derived from the master seed.
    pub config: ResampleConfig,
    pub leakage: Leakage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub models: Vec<ModelId>,
    pub cv: CvMode,
    pub resampling: Option<Resampling>,
    pub group_by: Option<Feature>,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(models: Vec<ModelId>, cv: CvMode, seed: u64) -> Self {
        ExperimentConfig {
            models,
            cv,
            resampling: None,
            group_by: None,
            seed,
        }
    }
}

/// Outcome of one scored fold.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldOutcome {
    pub fold: usize,
    /// Row indices of the evaluated dataset (the augmented one under
    /// [`Leakage::BeforeSplit`]).
    pub test: Vec<usize>,
    pub test_origins: Vec<Origin>,
    /// Original-dataset rows that synthetic training rows were derived from.
    pub synthetic_sources: Vec<usize>,
    pub truth: Vec<u8>,
    pub pred: Vec<u8>,
    /// Decoded grouping value of each test row.
    pub groups: Vec<String>,
    pub converged: bool,
}

impl FoldOutcome {
    pub fn accuracy(&self) -> f64 {
        let hits = self.truth.iter().zip(&self.pred).filter(|(t, p)| t == p).count();
        hits as f64 / self.truth.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupMetrics {
    pub value: String,
    pub n: usize,
    pub metrics: ClassMetrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelResult {
    pub model: String,
    pub folds: Vec<FoldOutcome>,
    /// Folds excluded because their training split had a single class.
    pub skipped: Vec<usize>,
    /// Pooled over every scored test row.
    pub confusion: ConfusionMatrix,
    pub metrics: ClassMetrics,
    /// Per-fold accuracy summary; k-fold only.
    pub summary: Option<KFoldSummary>,
    pub groups: Vec<GroupMetrics>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub cv: CvMode,
    pub resampling: Option<Resampling>,
    pub group_by: Option<Feature>,
    pub models: Vec<ModelResult>,
}

/// Encodes `records` with `schema` and runs [`run_design`].
pub fn run_experiment(
    records: &[PatientRecord],
    schema: &FeatureSchema,
    cfg: &ExperimentConfig,
) -> Result<ExperimentResult> {
    if records.is_empty() {
        return Err(Error::InsufficientData("no records to evaluate".into()));
    }
    let design = Design::<f64>::from_records(records, schema)?;
    run_design(&design, cfg)
}

/// Cross-validates every model of `cfg` on a raw (unstandardized) design.
pub fn run_design<T: Scalar>(design: &Design<T>, cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    if cfg.models.is_empty() {
        return Err(Error::Config("no models selected".into()));
    }
    let prepared = prepare(design, cfg)?;
    let models = cfg
        .models
        .par_iter()
        .map(|&id| evaluate(&prepared, &id.default_spec(id.index() as u64), id.as_str(), cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentResult {
        cv: cfg.cv,
        resampling: cfg.resampling,
        group_by: cfg.group_by,
        models,
    })
}

/// Cross-validates a single model. `spec.seed` identifies the model when
/// deriving per-fold fit seeds from `cfg.seed`; `cfg.models` is ignored.
pub fn cross_validate<T: Scalar>(
    design: &Design<T>,
    spec: &ModelSpec,
    cfg: &ExperimentConfig,
) -> Result<ModelResult> {
    let prepared = prepare(design, cfg)?;
    evaluate(&prepared, spec, spec.family.name(), cfg)
}

/// Metrics per value of `group_by`, for every model of `cfg`.
pub fn subgroup_report<T: Scalar>(
    design: &Design<T>,
    cfg: &ExperimentConfig,
    group_by: Feature,
) -> Result<Vec<(String, Vec<GroupMetrics>)>> {
    let cfg = ExperimentConfig {
        group_by: Some(group_by),
        ..cfg.clone()
    };
    let result = run_design(design, &cfg)?;
    Ok(result.models.into_iter().map(|m| (m.model, m.groups)).collect())
}

struct Prepared<T> {
    /// The dataset actually cross-validated.
    design: Design<T>,
    origins: Vec<Origin>,
    plan: FoldPlan,
    group_values: Vec<String>,
}

fn design_of<T: Scalar>(m: &EncodedMatrix<T>) -> Result<Design<T>> {
    Design::new(m.as_slice().to_vec(), m.labels().to_vec(), m.columns().to_vec())
}

fn group_values<T: Scalar>(design: &Design<T>, feature: Feature) -> Result<Vec<String>> {
    let mut values = Vec::new();
    for c in design.columns().iter().filter(|c| c.feature == Some(feature)) {
        match &c.kind {
            EncodedKind::Binary => return Ok(vec!["Yes".into(), "No".into()]),
            EncodedKind::OneHot(v) => values.push(v.clone()),
            EncodedKind::Numeric => {
                return Err(Error::Config(format!("cannot group by numeric feature {feature}")))
            }
        }
    }
    if values.is_empty() {
        return Err(Error::Config(format!("grouping feature {feature} is not in the data")));
    }
    Ok(values)
}

fn prepare<T: Scalar>(design: &Design<T>, cfg: &ExperimentConfig) -> Result<Prepared<T>> {
    let n = design.n_rows();
    let ones = design.labels().iter().filter(|&&y| y == 1).count();
    if n > 0 && (ones == 0 || ones == n) {
        return Err(Error::Imbalance(format!(
            "dataset has a single class ({} rows labelled {})",
            n,
            u8::from(ones > 0)
        )));
    }
    let group_values = match cfg.group_by {
        Some(f) => group_values(design, f)?,
        None => Vec::new(),
    };
    let (design, origins) = match cfg.resampling {
        Some(Resampling {
            config,
            leakage: Leakage::BeforeSplit,
        }) => {
            let all: Vec<usize> = (0..n).collect();
            let full = design.standardize(&all)?;
            let rc = ResampleConfig {
                seed: derive_seed(cfg.seed, &[RESAMPLE_STREAM]),
                ..config
            };
            let res = oversample(&full, &rc)?;
            (design_of(&res.matrix)?, res.origins)
        }
        _ => (design.clone(), vec![Origin::Original; n]),
    };
    let plan = FoldPlan::build(
        cfg.cv,
        design.n_rows(),
        derive_seed(cfg.seed, &[PLAN_STREAM]),
        design.labels(),
    )?;
    Ok(Prepared {
        design,
        origins,
        plan,
        group_values,
    })
}

fn evaluate<T: Scalar>(
    p: &Prepared<T>,
    spec: &ModelSpec,
    name: &str,
    cfg: &ExperimentConfig,
) -> Result<ModelResult> {
    let outcomes = p
        .plan
        .folds
        .par_iter()
        .enumerate()
        .map(|(f, fold)| run_fold(p, spec, cfg, f, &fold.train, &fold.test))
        .collect::<Result<Vec<_>>>()?;
    let mut folds = Vec::new();
    let mut skipped = Vec::new();
    for (f, o) in outcomes.into_iter().enumerate() {
        match o {
            Some(o) => folds.push(o),
            None => skipped.push(f),
        }
    }
    if folds.is_empty() {
        return Err(Error::InsufficientData(format!(
            "{name}: every fold was skipped for lack of a second class"
        )));
    }
    let mut confusion = ConfusionMatrix::default();
    for o in &folds {
        for (&t, &y) in o.truth.iter().zip(&o.pred) {
            confusion.add(t, y);
        }
    }
    let summary = match cfg.cv {
        CvMode::KFold { .. } => {
            let acc: Vec<f64> = folds.iter().map(FoldOutcome::accuracy).collect();
            Some(kfold_summary(&acc)?)
        }
        CvMode::Loocv => None,
    };
    let groups = if cfg.group_by.is_some() {
        group_metrics(&folds, &p.group_values)
    } else {
        Vec::new()
    };
    Ok(ModelResult {
        model: name.to_string(),
        converged: folds.iter().all(|o| o.converged),
        metrics: class_metrics(&confusion),
        confusion,
        summary,
        groups,
        folds,
        skipped,
    })
}

fn group_metrics(folds: &[FoldOutcome], values: &[String]) -> Vec<GroupMetrics> {
    let mut out = Vec::new();
    for v in values {
        let mut cm = ConfusionMatrix::default();
        for o in folds {
            for ((g, &t), &y) in o.groups.iter().zip(&o.truth).zip(&o.pred) {
                if g == v {
                    cm.add(t, y);
                }
            }
        }
        if cm.total() == 0 {
            log::warn!("group {v:?} has no scored rows, omitted");
            continue;
        }
        out.push(GroupMetrics {
            value: v.clone(),
            n: cm.total(),
            metrics: class_metrics(&cm),
        });
    }
    out
}

fn single_class(labels: &[u8]) -> bool {
    labels.iter().all(|&y| y == labels[0])
}

fn run_fold<T: Scalar>(
    p: &Prepared<T>,
    spec: &ModelSpec,
    cfg: &ExperimentConfig,
    f: usize,
    train_idx: &[usize],
    test_idx: &[usize],
) -> Result<Option<FoldOutcome>> {
    let standardized = p.design.standardize(train_idx)?;
    let mut train = standardized.select_rows(train_idx);
    let test = standardized.select_rows(test_idx);
    let mut synthetic_sources = Vec::new();
    if let Some(Resampling {
        config,
        leakage: Leakage::WithinFold,
    }) = cfg.resampling
    {
        if single_class(train.labels()) {
            log::warn!("{}: fold {f} training split has one class, skipped", spec.family.name());
            return Ok(None);
        }
        let rc = ResampleConfig {
            seed: derive_seed(cfg.seed, &[RESAMPLE_STREAM, f as u64]),
            ..config
        };
        let res = oversample(&train, &rc)?;
        synthetic_sources = res
            .origins
            .iter()
            .filter_map(|o| match o {
                Origin::Synthetic { base } => Some(train_idx[*base]),
                Origin::Original => None,
            })
            .collect();
        train = res.matrix;
    } else if cfg.resampling.is_some() {
        synthetic_sources = train_idx
            .iter()
            .filter_map(|&i| match p.origins[i] {
                Origin::Synthetic { base } => Some(base),
                Origin::Original => None,
            })
            .collect();
    }
    let fit_spec = ModelSpec {
        seed: derive_seed(cfg.seed, &[MODEL_STREAM, spec.seed, f as u64]),
        ..*spec
    };
    let model = match learners::fit(&fit_spec, &train) {
        Ok(m) => m,
        Err(Error::Imbalance(msg)) => {
            log::warn!("fold {f} skipped: {msg}");
            return Ok(None);
        }
        Err(e) => return Err(e),
    };
    let pred = learners::predict(&model, &test)?;
    let groups = match cfg.group_by {
        Some(feature) => (0..test.n_rows())
            .map(|i| test.decode_category(i, feature).unwrap_or_default())
            .collect(),
        None => Vec::new(),
    };
    Ok(Some(FoldOutcome {
        fold: f,
        test: test_idx.to_vec(),
        test_origins: test_idx.iter().map(|&i| p.origins[i]).collect(),
        synthetic_sources,
        truth: test.labels().to_vec(),
        pred,
        groups,
        converged: model.info().converged,
    }))
}
