use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use super::record::{LesionLocation, MriFinding, SeizureFrequency, NO, YES};
use crate::error::{Error, Result};

/// The twelve pre-operative features of a case, in canonical column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Feature {
    FebrileSeizure,
    FamilyHistory,
    HeadTrauma,
    SeizureFrequency,
    FocalToBilateral,
    Aura,
    LesionLocation,
    Ecog,
    MriFindings,
    AgeSurgery,
    AgeOnset,
    Duration,
}

impl Feature {
    pub const ALL: [Feature; 12] = [
        Feature::FebrileSeizure,
        Feature::FamilyHistory,
        Feature::HeadTrauma,
        Feature::SeizureFrequency,
        Feature::FocalToBilateral,
        Feature::Aura,
        Feature::LesionLocation,
        Feature::Ecog,
        Feature::MriFindings,
        Feature::AgeSurgery,
        Feature::AgeOnset,
        Feature::Duration,
    ];

    /// CSV column name.
    pub fn name(self) -> &'static str {
        match self {
            Feature::FebrileSeizure => "febrile_seizure",
            Feature::FamilyHistory => "family_history",
            Feature::HeadTrauma => "head_trauma",
            Feature::SeizureFrequency => "seizure_frequency",
            Feature::FocalToBilateral => "focal_to_bilateral",
            Feature::Aura => "aura",
            Feature::LesionLocation => "lesion_location",
            Feature::Ecog => "ecog",
            Feature::MriFindings => "mri_findings",
            Feature::AgeSurgery => "age_surgery",
            Feature::AgeOnset => "age_onset",
            Feature::Duration => "duration",
        }
    }

    pub fn from_name(name: &str) -> Option<Feature> {
        Feature::ALL.into_iter().find(|f| f.name() == name)
    }

    /// Position in the canonical order.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_numeric(self) -> bool {
        matches!(self, Feature::AgeSurgery | Feature::AgeOnset | Feature::Duration)
    }

    pub fn is_binary(self) -> bool {
        !self.is_numeric() && !self.is_nominal()
    }

    pub fn is_nominal(self) -> bool {
        matches!(
            self,
            Feature::SeizureFrequency | Feature::LesionLocation | Feature::MriFindings
        )
    }

    /// Full value set of a categorical feature; empty for numerics.
    pub fn default_values(self) -> &'static [&'static str] {
        const YES_NO: &[&str] = &[YES, NO];
        const FREQ: &[&str] = &["Daily", "Weekly", "Monthly", "Yearly", "Seasonal"];
        const LOC: &[&str] = &["Temporal", "Extra-Temporal"];
        const MRI: &[&str] = &[
            "Mesial temporal sclerosis",
            "Focal cortical dysplasia",
            "Gliosis",
            "Tumor",
            "Cavernous Angioma",
        ];
        debug_assert_eq!(FREQ.len(), SeizureFrequency::ALL.len());
        debug_assert_eq!(LOC.len(), LesionLocation::ALL.len());
        debug_assert_eq!(MRI.len(), MriFinding::ALL.len());
        match self {
            Feature::SeizureFrequency => FREQ,
            Feature::LesionLocation => LOC,
            Feature::MriFindings => MRI,
            f if f.is_numeric() => &[],
            _ => YES_NO,
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Feature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Feature::from_name(s).ok_or_else(|| Error::Schema(format!("unknown feature {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnKind {
    Binary,
    /// One-hot encoded; the value order fixes the encoded column order.
    Nominal(Vec<String>),
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSpec {
    pub feature: Feature,
    pub kind: ColumnKind,
}

/// Ordered column descriptors: twelve feature columns plus the label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSchema {
    columns: Vec<ColumnSpec>,
}

impl FeatureSchema {
    pub const LABEL: &'static str = "seizure_free";

    pub fn canonical() -> Self {
        let columns = Feature::ALL
            .into_iter()
            .map(|feature| ColumnSpec {
                feature,
                kind: if feature.is_numeric() {
                    ColumnKind::Numeric
                } else if feature.is_nominal() {
                    ColumnKind::Nominal(
                        feature.default_values().iter().map(|s| s.to_string()).collect(),
                    )
                } else {
                    ColumnKind::Binary
                },
            })
            .collect();
        FeatureSchema { columns }
    }

    /// Validates a custom column layout: every feature exactly once, kinds
    /// consistent with the feature, nominal value sets non-empty,
    /// duplicate-free and drawn from the feature's vocabulary.
    pub fn new(columns: Vec<ColumnSpec>) -> Result<Self> {
        if columns.len() != Feature::ALL.len() {
            return Err(Error::Schema(format!(
                "expected {} feature columns, found {}",
                Feature::ALL.len(),
                columns.len()
            )));
        }
        let mut seen = HashSet::new();
        for col in &columns {
            let name = col.feature.name();
            if !seen.insert(col.feature) {
                return Err(Error::Schema(format!("duplicate column {name}")));
            }
            match (&col.kind, col.feature) {
                (ColumnKind::Numeric, f) if f.is_numeric() => {}
                (ColumnKind::Binary, f) if f.is_binary() => {}
                (ColumnKind::Nominal(values), f) if f.is_nominal() => {
                    if values.is_empty() {
                        return Err(Error::Schema(format!("column {name} has an empty value set")));
                    }
                    let mut distinct = HashSet::new();
                    for v in values {
                        if !distinct.insert(v.as_str()) {
                            return Err(Error::Schema(format!(
                                "column {name} lists {v:?} twice"
                            )));
                        }
                        if !f.default_values().contains(&v.as_str()) {
                            return Err(Error::Schema(format!(
                                "column {name}: unknown value {v:?}"
                            )));
                        }
                    }
                }
                (kind, _) => {
                    return Err(Error::Schema(format!("column {name} cannot be {kind:?}")))
                }
            }
        }
        Ok(FeatureSchema { columns })
    }

    pub fn columns(&self) -> &[ColumnSpec] {
        &self.columns
    }

    pub fn features(&self) -> impl Iterator<Item = Feature> + '_ {
        self.columns.iter().map(|c| c.feature)
    }

    pub fn column(&self, feature: Feature) -> Option<&ColumnSpec> {
        self.columns.iter().find(|c| c.feature == feature)
    }

    /// Header row: feature names in schema order followed by the label.
    pub fn header(&self) -> Vec<&'static str> {
        self.features()
            .map(Feature::name)
            .chain(std::iter::once(Self::LABEL))
            .collect()
    }

    /// Accepted values of a categorical column, in encoding order.
    pub fn values(&self, feature: Feature) -> Vec<&str> {
        match self.column(feature).map(|c| &c.kind) {
            Some(ColumnKind::Nominal(values)) => values.iter().map(String::as_str).collect(),
            Some(ColumnKind::Binary) => vec![YES, NO],
            _ => Vec::new(),
        }
    }
}

impl Default for FeatureSchema {
    fn default() -> Self {
        Self::canonical()
    }
}
