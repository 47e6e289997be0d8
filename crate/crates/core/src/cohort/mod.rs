//! Clinical data model, CSV ingestion, encoding and synthetic cohorts.

mod csv_io;
mod encode;
mod record;
mod schema;
mod synth;

pub use csv_io::{class_counts, load_csv, read_csv, write_csv, write_records};
pub use encode::{encode, ColumnOrigin, Design, EncodedKind, EncodedMatrix};
pub use record::{LesionLocation, MriFinding, PatientRecord, SeizureFrequency, NO, YES};
pub use schema::{ColumnKind, ColumnSpec, Feature, FeatureSchema};
pub use synth::{
    synthesize_cohort, AssociationTerm, CategoricalMarginal, CohortSpec, LabelAssociation,
    NumericMarginal,
};
