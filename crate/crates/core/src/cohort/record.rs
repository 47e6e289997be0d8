use std::fmt;

use super::schema::Feature;

macro_rules! vocabulary {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }

            pub fn parse(text: &str) -> Option<Self> {
                match text {
                    $($text => Some($name::$variant),)+
                    _ => None,
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

vocabulary! {
    SeizureFrequency {
        Daily => "Daily",
        Weekly => "Weekly",
        Monthly => "Monthly",
        Yearly => "Yearly",
        Seasonal => "Seasonal",
    }
}

vocabulary! {
    LesionLocation {
        Temporal => "Temporal",
        ExtraTemporal => "Extra-Temporal",
    }
}

vocabulary! {
    MriFinding {
        MesialTemporalSclerosis => "Mesial temporal sclerosis",
        FocalCorticalDysplasia => "Focal cortical dysplasia",
        Gliosis => "Gliosis",
        Tumor => "Tumor",
        CavernousAngioma => "Cavernous Angioma",
    }
}

pub const YES: &str = "Yes";
pub const NO: &str = "No";

pub(crate) fn yes_no(flag: bool) -> &'static str {
    if flag {
        YES
    } else {
        NO
    }
}

/// One surgical case: nine categorical features, three numeric features
/// (years) and the binary outcome (`true` = Engel class I).
#[derive(Debug, Clone, PartialEq)]
pub struct PatientRecord {
    pub febrile_seizure: bool,
    pub family_history: bool,
    pub head_trauma: bool,
    pub seizure_frequency: SeizureFrequency,
    pub focal_to_bilateral: bool,
    pub aura: bool,
    pub lesion_location: LesionLocation,
    pub ecog: bool,
    pub mri_findings: MriFinding,
    pub age_surgery: f64,
    pub age_onset: f64,
    pub duration: f64,
    pub seizure_free: bool,
}

impl Default for PatientRecord {
    fn default() -> Self {
        PatientRecord {
            febrile_seizure: false,
            family_history: false,
            head_trauma: false,
            seizure_frequency: SeizureFrequency::Daily,
            focal_to_bilateral: false,
            aura: false,
            lesion_location: LesionLocation::Temporal,
            ecog: false,
            mri_findings: MriFinding::MesialTemporalSclerosis,
            age_surgery: 0.0,
            age_onset: 0.0,
            duration: 0.0,
            seizure_free: false,
        }
    }
}

impl PatientRecord {
    pub fn label(&self) -> u8 {
        u8::from(self.seizure_free)
    }

    /// Textual value of a categorical feature (`Yes`/`No` for binaries);
    /// `None` for numeric features.
    pub fn category(&self, feature: Feature) -> Option<&'static str> {
        Some(match feature {
            Feature::FebrileSeizure => yes_no(self.febrile_seizure),
            Feature::FamilyHistory => yes_no(self.family_history),
            Feature::HeadTrauma => yes_no(self.head_trauma),
            Feature::SeizureFrequency => self.seizure_frequency.as_str(),
            Feature::FocalToBilateral => yes_no(self.focal_to_bilateral),
            Feature::Aura => yes_no(self.aura),
            Feature::LesionLocation => self.lesion_location.as_str(),
            Feature::Ecog => yes_no(self.ecog),
            Feature::MriFindings => self.mri_findings.as_str(),
            Feature::AgeSurgery | Feature::AgeOnset | Feature::Duration => return None,
        })
    }

    pub fn numeric(&self, feature: Feature) -> Option<f64> {
        match feature {
            Feature::AgeSurgery => Some(self.age_surgery),
            Feature::AgeOnset => Some(self.age_onset),
            Feature::Duration => Some(self.duration),
            _ => None,
        }
    }

    /// Sets a categorical feature from its textual value. Errors name the
    /// rejected value.
    pub fn set_category(&mut self, feature: Feature, text: &str) -> Result<(), String> {
        fn flag(text: &str) -> Result<bool, String> {
            match text {
                YES => Ok(true),
                NO => Ok(false),
                other => Err(format!("expected Yes/No, found {other:?}")),
            }
        }
        fn vocab<V>(parsed: Option<V>, feature: Feature, text: &str) -> Result<V, String> {
            parsed.ok_or_else(|| format!("{text:?} is not a valid {} value", feature.name()))
        }
        match feature {
            Feature::FebrileSeizure => self.febrile_seizure = flag(text)?,
            Feature::FamilyHistory => self.family_history = flag(text)?,
            Feature::HeadTrauma => self.head_trauma = flag(text)?,
            Feature::SeizureFrequency => {
                self.seizure_frequency = vocab(SeizureFrequency::parse(text), feature, text)?
            }
            Feature::FocalToBilateral => self.focal_to_bilateral = flag(text)?,
            Feature::Aura => self.aura = flag(text)?,
            Feature::LesionLocation => {
                self.lesion_location = vocab(LesionLocation::parse(text), feature, text)?
            }
            Feature::Ecog => self.ecog = flag(text)?,
            Feature::MriFindings => self.mri_findings = vocab(MriFinding::parse(text), feature, text)?,
            Feature::AgeSurgery | Feature::AgeOnset | Feature::Duration => {
                return Err(format!("{} is numeric", feature.name()))
            }
        }
        Ok(())
    }

    pub fn set_numeric(&mut self, feature: Feature, value: f64) -> Result<(), String> {
        match feature {
            Feature::AgeSurgery => self.age_surgery = value,
            Feature::AgeOnset => self.age_onset = value,
            Feature::Duration => self.duration = value,
            other => return Err(format!("{} is categorical", other.name())),
        }
        Ok(())
    }

    /// Checks the numeric invariants: finite, non-negative ages and
    /// duration, onset not after surgery.
    pub fn validate(&self) -> Result<(), String> {
        for feature in [Feature::AgeSurgery, Feature::AgeOnset, Feature::Duration] {
            let v = self.numeric(feature).unwrap_or_default();
            if !v.is_finite() || v < 0.0 {
                return Err(format!("{} must be a finite value >= 0, found {v}", feature.name()));
            }
        }
        if self.age_onset > self.age_surgery {
            return Err(format!(
                "age_onset ({}) exceeds age_surgery ({})",
                self.age_onset, self.age_surgery
            ));
        }
        Ok(())
    }
}
