use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::record::PatientRecord;
use super::schema::{ColumnKind, FeatureSchema};
use crate::error::{Error, Result};

pub fn load_csv(path: impl AsRef<Path>, schema: &FeatureSchema) -> Result<Vec<PatientRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, schema)
}

/// Parses a cohort from any reader. Row numbers in errors count data rows
/// from 1 (the header is not counted).
pub fn read_csv<R: Read>(reader: R, schema: &FeatureSchema) -> Result<Vec<PatientRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    check_header(&header, schema)?;

    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row_no = i + 1;
        let row = row.map_err(|e| Error::Parse {
            row: row_no,
            message: e.to_string(),
        })?;
        records.push(parse_row(&row, schema, row_no)?);
    }
    Ok(records)
}

fn check_header(header: &[String], schema: &FeatureSchema) -> Result<()> {
    let expected = schema.header();
    if header.len() == 1 && header[0].is_empty() {
        return Err(Error::Schema("missing header row".into()));
    }
    if let Some(missing) = expected.iter().find(|name| !header.iter().any(|h| h == *name)) {
        return Err(Error::Schema(format!("missing column {missing}")));
    }
    if let Some(extra) = header.iter().find(|h| !expected.contains(&h.as_str())) {
        return Err(Error::Schema(format!("unexpected column {extra}")));
    }
    if header.len() != expected.len() {
        return Err(Error::Schema("duplicate column in header".into()));
    }
    if let Some((got, want)) = header.iter().zip(&expected).find(|(h, e)| h != *e) {
        return Err(Error::Schema(format!(
            "column {got} out of order (expected {want} at that position)"
        )));
    }
    Ok(())
}

fn parse_row(row: &csv::StringRecord, schema: &FeatureSchema, row_no: usize) -> Result<PatientRecord> {
    let err = |message: String| Error::Parse { row: row_no, message };
    let mut record = PatientRecord::default();
    for (col, text) in schema.columns().iter().zip(row.iter()) {
        let name = col.feature.name();
        match &col.kind {
            ColumnKind::Numeric => {
                let value: f64 = text
                    .parse()
                    .map_err(|_| err(format!("{name}: {text:?} is not a number")))?;
                record.set_numeric(col.feature, value).map_err(err)?;
            }
            ColumnKind::Nominal(values) => {
                if !values.iter().any(|v| v == text) {
                    return Err(err(format!("{name}: {text:?} is not in the value set")));
                }
                record.set_category(col.feature, text).map_err(err)?;
            }
            ColumnKind::Binary => {
                record.set_category(col.feature, text).map_err(|m| err(format!("{name}: {m}")))?;
            }
        }
    }
    record.seizure_free = match &row[schema.columns().len()] {
        "1" => true,
        "0" => false,
        other => {
            return Err(err(format!(
                "{}: expected 1 or 0, found {other:?}",
                FeatureSchema::LABEL
            )))
        }
    };
    record.validate().map_err(err)?;
    Ok(record)
}

pub fn write_csv(
    path: impl AsRef<Path>,
    records: &[PatientRecord],
    schema: &FeatureSchema,
) -> Result<()> {
    let path = path.as_ref();
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_records(&mut file, records, schema)?;
    file.flush().map_err(|e| Error::io(path, e))
}

/// Numerics are written with the shortest representation that parses back
/// to the same `f64`.
pub fn write_records<W: Write>(
    writer: W,
    records: &[PatientRecord],
    schema: &FeatureSchema,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(schema.header())?;
    for r in records {
        let mut fields: Vec<String> = schema
            .features()
            .map(|f| match r.category(f) {
                Some(text) => text.to_string(),
                None => r.numeric(f).unwrap_or_default().to_string(),
            })
            .collect();
        fields.push(r.label().to_string());
        wtr.write_record(&fields)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv writer>", e))
}

/// Count of records per label. Empty input gives an empty map.
pub fn class_counts(records: &[PatientRecord]) -> BTreeMap<u8, usize> {
    let mut counts = BTreeMap::new();
    for r in records {
        *counts.entry(r.label()).or_insert(0) += 1;
    }
    counts
}
