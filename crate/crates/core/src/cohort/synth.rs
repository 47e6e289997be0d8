use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::erfc;

use super::record::{PatientRecord, NO, YES};
use super::schema::{Feature, FeatureSchema};
use crate::error::{Error, Result};
use crate::rng;

/// Rejection attempts before a truncated-normal draw is clamped.
const MAX_REJECTIONS: usize = 1_000;
const SIMPSON_INTERVALS: usize = 400;

#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalMarginal {
    pub feature: Feature,
    /// (value, probability) in vocabulary order.
    pub probs: Vec<(String, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericMarginal {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssociationTerm {
    pub feature: Feature,
    /// Log-odds change per unit: per `Yes` for binaries, per year for numerics.
    pub weight: f64,
}

/// Logistic link between up to three features and the outcome. The
/// intercept is solved per cohort so the expected label rate stays at the
/// spec's label probability.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelAssociation {
    terms: Vec<AssociationTerm>,
}

impl LabelAssociation {
    pub const MAX_TERMS: usize = 3;

    pub fn new(terms: Vec<AssociationTerm>) -> Result<Self> {
        if terms.len() > Self::MAX_TERMS {
            return Err(Error::Config(format!(
                "at most {} association terms, got {}",
                Self::MAX_TERMS,
                terms.len()
            )));
        }
        for t in &terms {
            if t.feature.is_nominal() {
                return Err(Error::Config(format!(
                    "association on nominal feature {} is not supported",
                    t.feature
                )));
            }
            if !t.weight.is_finite() {
                return Err(Error::Config("association weight must be finite".into()));
            }
        }
        Ok(LabelAssociation { terms })
    }

    /// aura +1.0, focal-to-bilateral seizures -1.0, duration -0.05 per year.
    pub fn clinical_default() -> Self {
        LabelAssociation {
            terms: vec![
                AssociationTerm {
                    feature: Feature::Aura,
                    weight: 1.0,
                },
                AssociationTerm {
                    feature: Feature::FocalToBilateral,
                    weight: -1.0,
                },
                AssociationTerm {
                    feature: Feature::Duration,
                    weight: -0.05,
                },
            ],
        }
    }

    pub fn terms(&self) -> &[AssociationTerm] {
        &self.terms
    }

    fn score(&self, r: &PatientRecord) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let x = match r.numeric(t.feature) {
                    Some(v) => v,
                    None => f64::from(u8::from(r.category(t.feature) == Some(YES))),
                };
                t.weight * x
            })
            .sum()
    }
}

/// Marginal distributions a synthetic cohort is drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct CohortSpec {
    pub categorical: Vec<CategoricalMarginal>,
    pub age_surgery: NumericMarginal,
    pub age_onset: NumericMarginal,
    pub duration: NumericMarginal,
    /// P(seizure_free = 1).
    pub label_prob: f64,
    pub association: Option<LabelAssociation>,
}

impl CohortSpec {
    /// Marginals of the 176-patient surgical cohort (counts over 176) with
    /// the default label association.
    pub fn reference() -> Self {
        const N: f64 = 176.0;
        let binary = |feature, yes: u32| CategoricalMarginal {
            feature,
            probs: vec![
                (YES.to_string(), f64::from(yes) / N),
                (NO.to_string(), f64::from(176 - yes) / N),
            ],
        };
        let nominal = |feature: Feature, counts: &[u32]| CategoricalMarginal {
            feature,
            probs: feature
                .default_values()
                .iter()
                .zip(counts)
                .map(|(v, &c)| (v.to_string(), f64::from(c) / N))
                .collect(),
        };
        CohortSpec {
            categorical: vec![
                binary(Feature::FebrileSeizure, 48),
                binary(Feature::FamilyHistory, 33),
                binary(Feature::HeadTrauma, 41),
                nominal(Feature::SeizureFrequency, &[56, 79, 29, 8, 4]),
                binary(Feature::FocalToBilateral, 67),
                binary(Feature::Aura, 112),
                nominal(Feature::LesionLocation, &[140, 36]),
                binary(Feature::Ecog, 22),
                nominal(Feature::MriFindings, &[100, 19, 29, 22, 6]),
            ],
            age_surgery: NumericMarginal {
                mean: 30.545_454_55,
                std: 9.219_122,
                min: 16.0,
                max: 56.0,
            },
            age_onset: NumericMarginal {
                mean: 13.802_083_33,
                std: 8.605_432,
                min: 0.5,
                max: 45.0,
            },
            duration: NumericMarginal {
                mean: 16.656_25,
                std: 9.773_712,
                min: 0.0,
                max: 51.0,
            },
            label_prob: 128.0 / N,
            association: Some(LabelAssociation::clinical_default()),
        }
    }

    pub fn with_association(mut self, association: Option<LabelAssociation>) -> Self {
        self.association = association;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let schema = FeatureSchema::canonical();
        for m in &self.categorical {
            let total: f64 = m.probs.iter().map(|(_, p)| p).sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "{} probabilities sum to {total}",
                    m.feature
                )));
            }
            for (value, p) in &m.probs {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::Config(format!("{}: probability {p}", m.feature)));
                }
                if !schema.values(m.feature).contains(&value.as_str()) {
                    return Err(Error::Config(format!("{}: unknown value {value:?}", m.feature)));
                }
            }
        }
        for (name, m) in [
            ("age_surgery", self.age_surgery),
            ("age_onset", self.age_onset),
            ("duration", self.duration),
        ] {
            if !(m.min <= m.mean && m.mean <= m.max) || m.std <= 0.0 || m.min < 0.0 {
                return Err(Error::Config(format!("{name}: invalid marginal {m:?}")));
            }
        }
        if !(0.0..=1.0).contains(&self.label_prob) {
            return Err(Error::Config(format!("label probability {}", self.label_prob)));
        }
        Ok(())
    }
}

fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Probability mass of N(0,1) on [lo, hi], evaluated on the tail that
/// avoids cancellation.
fn std_normal_mass(lo: f64, hi: f64) -> f64 {
    let s = std::f64::consts::SQRT_2;
    if lo > 0.0 {
        0.5 * (erfc(lo / s) - erfc(hi / s))
    } else {
        0.5 * (erfc(-hi / s) - erfc(-lo / s))
    }
}

fn truncated_mean(loc: f64, sd: f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return a;
    }
    let (lo, hi) = ((a - loc) / sd, (b - loc) / sd);
    let z = std_normal_mass(lo, hi);
    if z <= 1e-300 {
        return if loc < a { a } else { b };
    }
    (loc + sd * (std_normal_pdf(lo) - std_normal_pdf(hi)) / z).clamp(a, b)
}

fn truncated_pdf(x: f64, loc: f64, sd: f64, a: f64, b: f64) -> f64 {
    std_normal_pdf((x - loc) / sd) / (sd * std_normal_mass((a - loc) / sd, (b - loc) / sd))
}

/// Root of an increasing function by bisection.
fn bisect(mut lo: f64, mut hi: f64, target: f64, f: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Location parameter whose [min, max]-truncated normal has the marginal's mean.
fn calibrated_location(m: &NumericMarginal) -> f64 {
    bisect(m.mean - 8.0 * m.std, m.mean + 8.0 * m.std, m.mean, |loc| {
        truncated_mean(loc, m.std, m.min, m.max)
    })
}

/// Location for age at onset, which is truncated above by the drawn age at
/// surgery: the surgery-averaged conditional mean must equal the marginal mean.
fn calibrated_onset_location(onset: &NumericMarginal, surgery: &NumericMarginal, surgery_loc: f64) -> f64 {
    let (a, b) = (surgery.min, surgery.max);
    let h = (b - a) / SIMPSON_INTERVALS as f64;
    let nodes: Vec<(f64, f64)> = (0..=SIMPSON_INTERVALS)
        .map(|i| {
            let s = a + h * i as f64;
            let w = match i {
                0 => 1.0,
                i if i == SIMPSON_INTERVALS => 1.0,
                i if i % 2 == 1 => 4.0,
                _ => 2.0,
            };
            (s, w * h / 3.0 * truncated_pdf(s, surgery_loc, surgery.std, a, b))
        })
        .collect();
    bisect(onset.mean - 8.0 * onset.std, onset.mean + 8.0 * onset.std, onset.mean, |loc| {
        nodes
            .iter()
            .map(|&(s, w)| {
                let upper = onset.max.min(s).max(onset.min);
                w * truncated_mean(loc, onset.std, onset.min, upper)
            })
            .sum()
    })
}

fn draw_truncated<R: Rng>(rng: &mut R, loc: f64, sd: f64, a: f64, b: f64) -> f64 {
    let mut x = loc;
    for _ in 0..MAX_REJECTIONS {
        let z: f64 = rng.sample(StandardNormal);
        x = loc + sd * z;
        if (a..=b).contains(&x) {
            return x;
        }
    }
    x.clamp(a, b)
}

fn draw_category<'a, R: Rng>(rng: &mut R, probs: &'a [(String, f64)]) -> &'a str {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (value, p) in probs {
        acc += p;
        if u < acc {
            return value;
        }
    }
    &probs.last().expect("non-empty marginal").0
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Draws `n` independent records from the marginals. Numerics come from
/// normals truncated to [min, max] by rejection whose locations are
/// calibrated so the truncated means match the marginal means; age at onset
/// is additionally truncated above by the drawn age at surgery.
pub fn synthesize_cohort(spec: &CohortSpec, n: usize, seed: u64) -> Result<Vec<PatientRecord>> {
    if n == 0 {
        return Err(Error::Config("cohort size must be at least 1".into()));
    }
    spec.validate()?;
    let surgery_loc = calibrated_location(&spec.age_surgery);
    let onset_loc = calibrated_onset_location(&spec.age_onset, &spec.age_surgery, surgery_loc);
    let duration_loc = calibrated_location(&spec.duration);

    let mut rng = rng::stream(seed, &[]);
    let mut records = Vec::with_capacity(n);
    for _ in 0..n {
        let mut r = PatientRecord::default();
        for m in &spec.categorical {
            let value = draw_category(&mut rng, &m.probs);
            r.set_category(m.feature, value).map_err(Error::Config)?;
        }
        let s = spec.age_surgery;
        r.age_surgery = draw_truncated(&mut rng, surgery_loc, s.std, s.min, s.max);
        let o = spec.age_onset;
        let upper = o.max.min(r.age_surgery).max(o.min);
        r.age_onset = draw_truncated(&mut rng, onset_loc, o.std, o.min, upper);
        let d = spec.duration;
        r.duration = draw_truncated(&mut rng, duration_loc, d.std, d.min, d.max);
        records.push(r);
    }

    match &spec.association {
        None => {
            for r in &mut records {
                r.seizure_free = rng.random::<f64>() < spec.label_prob;
            }
        }
        Some(assoc) => {
            let scores: Vec<f64> = records.iter().map(|r| assoc.score(r)).collect();
            let intercept = bisect(-60.0, 60.0, spec.label_prob, |b| {
                scores.iter().map(|s| sigmoid(b + s)).sum::<f64>() / n as f64
            });
            for (r, s) in records.iter_mut().zip(&scores) {
                r.seizure_free = rng.random::<f64>() < sigmoid(intercept + s);
            }
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohort::csv_io::{class_counts, write_records};

    #[test]
    fn reference_spec_is_valid() {
        CohortSpec::reference().validate().unwrap();
    }

    #[test]
    fn truncated_mean_matches_quadrature() {
        // Midpoint rule over the truncated density as an independent check.
        let (loc, sd, a, b) = (29.0, 9.2, 16.0, 56.0);
        let steps = 200_000;
        let h = (b - a) / steps as f64;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..steps {
            let x = a + (i as f64 + 0.5) * h;
            let w = (-0.5 * ((x - loc) / sd).powi(2)).exp();
            num += x * w;
            den += w;
        }
        assert!((truncated_mean(loc, sd, a, b) - num / den).abs() < 1e-6);
    }

    #[test]
    fn calibration_hits_published_mean() {
        let spec = CohortSpec::reference();
        let m = spec.age_surgery;
        let loc = calibrated_location(&m);
        assert!((truncated_mean(loc, m.std, m.min, m.max) - m.mean).abs() < 1e-9);
        assert!(loc < m.mean);
    }

    #[test]
    fn ages_within_published_bounds() {
        let records = synthesize_cohort(&CohortSpec::reference(), 176, 1).unwrap();
        for r in &records {
            assert!((16.0..=56.0).contains(&r.age_surgery));
            assert!((0.5..=45.0).contains(&r.age_onset));
            assert!((0.0..=51.0).contains(&r.duration));
            r.validate().unwrap();
        }
    }

    #[test]
    fn aura_rate_within_binomial_band() {
        let records = synthesize_cohort(&CohortSpec::reference(), 176, 1).unwrap();
        let rate = records.iter().filter(|r| r.aura).count() as f64 / 176.0;
        assert!((rate - 0.6364).abs() <= 0.11, "aura rate {rate}");
    }

    #[test]
    fn label_rate_near_published_prior() {
        let records = synthesize_cohort(&CohortSpec::reference(), 176, 1).unwrap();
        let counts = class_counts(&records);
        assert_eq!(counts.values().sum::<usize>(), 176);
        let rate = counts[&1] as f64 / 176.0;
        assert!((rate - 0.727).abs() <= 0.10, "label rate {rate}");
    }

    #[test]
    fn same_seed_same_bytes() {
        let schema = FeatureSchema::canonical();
        let render = |seed| {
            let mut buf = Vec::new();
            let records = synthesize_cohort(&CohortSpec::reference(), 50, seed).unwrap();
            write_records(&mut buf, &records, &schema).unwrap();
            buf
        };
        assert_eq!(render(9), render(9));
        assert_ne!(render(9), render(10));
    }

    #[test]
    fn rejects_zero_size_and_bad_specs() {
        assert!(synthesize_cohort(&CohortSpec::reference(), 0, 1).is_err());
        let mut spec = CohortSpec::reference();
        spec.categorical[0].probs[0].1 = 0.5;
        assert!(spec.validate().is_err());
        let mut spec = CohortSpec::reference();
        spec.duration.std = 0.0;
        assert!(spec.validate().is_err());
        assert!(LabelAssociation::new(vec![
            AssociationTerm { feature: Feature::MriFindings, weight: 1.0 }
        ])
        .is_err());
    }

    #[test]
    fn large_cohort_reproduces_marginals() {
        let spec = CohortSpec::reference();
        let n = 10_000;
        let records = synthesize_cohort(&spec, n, 3).unwrap();
        for m in &spec.categorical {
            for (value, p) in &m.probs {
                let rate = records
                    .iter()
                    .filter(|r| r.category(m.feature) == Some(value.as_str()))
                    .count() as f64
                    / n as f64;
                assert!((rate - p).abs() <= 0.02, "{} = {value}: {rate} vs {p}", m.feature);
            }
        }
        for (feature, m) in [
            (Feature::AgeSurgery, spec.age_surgery),
            (Feature::AgeOnset, spec.age_onset),
            (Feature::Duration, spec.duration),
        ] {
            let mean = records.iter().map(|r| r.numeric(feature).unwrap()).sum::<f64>() / n as f64;
            assert!((mean - m.mean).abs() <= 0.5, "{feature}: {mean} vs {}", m.mean);
        }
    }
}
