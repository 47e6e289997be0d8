use super::record::{yes_no, PatientRecord};
use super::schema::{ColumnKind, Feature, FeatureSchema};
use crate::error::{Error, Result};
use crate::Scalar;

/// How an encoded column was derived from its source feature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EncodedKind {
    Binary,
    OneHot(String),
    Numeric,
}

/// Provenance of one encoded column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnOrigin {
    pub name: String,
    /// Clinical source feature; `None` for free-form numeric data.
    pub feature: Option<Feature>,
    pub kind: EncodedKind,
}

impl ColumnOrigin {
    pub fn numeric(name: impl Into<String>) -> Self {
        ColumnOrigin {
            name: name.into(),
            feature: None,
            kind: EncodedKind::Numeric,
        }
    }
}

/// Encoded but not yet standardized design: binaries as {0,1}, nominals
/// one-hot, numerics in raw units. Standardization statistics depend on
/// which rows are used for training, so they are applied per fold through
/// [`Design::standardize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Design<T> {
    data: Vec<T>,
    n_cols: usize,
    labels: Vec<u8>,
    columns: Vec<ColumnOrigin>,
}

impl<T: Scalar> Design<T> {
    pub fn new(data: Vec<T>, labels: Vec<u8>, columns: Vec<ColumnOrigin>) -> Result<Self> {
        let n_cols = columns.len();
        validate_shape(&data, n_cols, &labels)?;
        Ok(Design {
            data,
            n_cols,
            labels,
            columns,
        })
    }

    /// Free-form numeric rows; every column is standardized.
    pub fn from_rows(rows: &[Vec<T>], labels: Vec<u8>) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        let columns = (0..n_cols).map(|j| ColumnOrigin::numeric(format!("x{j}"))).collect();
        let data = flatten(rows, n_cols)?;
        Design::new(data, labels, columns)
    }

    pub fn from_records(records: &[PatientRecord], schema: &FeatureSchema) -> Result<Self> {
        let columns = encoded_columns(schema);
        let mut data = Vec::with_capacity(records.len() * columns.len());
        for (i, r) in records.iter().enumerate() {
            for col in &columns {
                let feature = col.feature.expect("clinical columns carry a feature");
                let v = match &col.kind {
                    EncodedKind::Binary | EncodedKind::OneHot(_) => {
                        let text = r.category(feature).expect("categorical feature");
                        let want = match &col.kind {
                            EncodedKind::OneHot(value) => value.as_str(),
                            _ => yes_no(true),
                        };
                        if let EncodedKind::OneHot(_) = col.kind {
                            if !schema.values(feature).contains(&text) {
                                return Err(Error::Schema(format!(
                                    "record {i}: {} value {text:?} is not in the schema",
                                    feature.name()
                                )));
                            }
                        }
                        if text == want {
                            T::one()
                        } else {
                            T::zero()
                        }
                    }
                    EncodedKind::Numeric => T::of(r.numeric(feature).expect("numeric feature")),
                };
                data.push(v);
            }
        }
        let labels = records.iter().map(PatientRecord::label).collect();
        Design::new(data, labels, columns)
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn columns(&self) -> &[ColumnOrigin] {
        &self.columns
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    /// Keeps only the encoded columns whose source feature is in `features`.
    pub fn select_features(&self, features: &[Feature]) -> Design<T> {
        let keep: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.feature.is_some_and(|f| features.contains(&f)))
            .map(|(j, _)| j)
            .collect();
        self.select_columns(&keep)
    }

    pub fn select_columns(&self, keep: &[usize]) -> Design<T> {
        let data = (0..self.n_rows())
            .flat_map(|i| keep.iter().map(move |&j| self.data[i * self.n_cols + j]))
            .collect();
        Design {
            data,
            n_cols: keep.len(),
            labels: self.labels.clone(),
            columns: keep.iter().map(|&j| self.columns[j].clone()).collect(),
        }
    }

    /// Z-scores the numeric columns using the mean and population standard
    /// deviation of `fit_rows` only; a zero deviation falls back to 1.
    pub fn standardize(&self, fit_rows: &[usize]) -> Result<EncodedMatrix<T>> {
        if fit_rows.is_empty() {
            return Err(Error::Config("standardizer needs at least one fit row".into()));
        }
        if let Some(&bad) = fit_rows.iter().find(|&&i| i >= self.n_rows()) {
            return Err(Error::Config(format!(
                "fit row {bad} out of range for {} rows",
                self.n_rows()
            )));
        }
        let scaling: Vec<Option<(T, T)>> = self
            .columns
            .iter()
            .enumerate()
            .map(|(j, c)| {
                (c.kind == EncodedKind::Numeric).then(|| {
                    let m = fit_rows.len() as f64;
                    let vals = fit_rows.iter().map(|&i| self.data[i * self.n_cols + j].as_f64());
                    let mean = vals.clone().sum::<f64>() / m;
                    let var = vals.map(|v| (v - mean) * (v - mean)).sum::<f64>() / m;
                    let sd = var.sqrt();
                    let sd = if sd > 0.0 && sd.is_finite() { sd } else { 1.0 };
                    (T::of(mean), T::of(sd))
                })
            })
            .collect();
        let mut data = self.data.clone();
        for row in data.chunks_mut(self.n_cols.max(1)) {
            for (v, s) in row.iter_mut().zip(&scaling) {
                if let Some((mean, sd)) = s {
                    *v = (*v - *mean) / *sd;
                }
            }
        }
        Ok(EncodedMatrix {
            data,
            n_cols: self.n_cols,
            labels: self.labels.clone(),
            columns: self.columns.clone(),
            scaling,
        })
    }
}

fn encoded_columns(schema: &FeatureSchema) -> Vec<ColumnOrigin> {
    let mut columns = Vec::new();
    for col in schema.columns() {
        let name = col.feature.name();
        match &col.kind {
            ColumnKind::Binary => columns.push(ColumnOrigin {
                name: name.to_string(),
                feature: Some(col.feature),
                kind: EncodedKind::Binary,
            }),
            ColumnKind::Nominal(values) => {
                for v in values {
                    columns.push(ColumnOrigin {
                        name: format!("{name}={v}"),
                        feature: Some(col.feature),
                        kind: EncodedKind::OneHot(v.clone()),
                    })
                }
            }
            ColumnKind::Numeric => columns.push(ColumnOrigin {
                name: name.to_string(),
                feature: Some(col.feature),
                kind: EncodedKind::Numeric,
            }),
        }
    }
    columns
}

fn validate_shape<T>(data: &[T], n_cols: usize, labels: &[u8]) -> Result<()> {
    if data.len() != labels.len() * n_cols {
        return Err(Error::Shape {
            expected: labels.len() * n_cols,
            actual: data.len(),
        });
    }
    if let Some(&bad) = labels.iter().find(|&&y| y > 1) {
        return Err(Error::Data(format!("label {bad} is not binary")));
    }
    Ok(())
}

fn flatten<T: Copy>(rows: &[Vec<T>], n_cols: usize) -> Result<Vec<T>> {
    let mut data = Vec::with_capacity(rows.len() * n_cols);
    for r in rows {
        if r.len() != n_cols {
            return Err(Error::Shape {
                expected: n_cols,
                actual: r.len(),
            });
        }
        data.extend_from_slice(r);
    }
    Ok(data)
}

/// Encodes records and standardizes numeric columns on `fit_rows`.
pub fn encode<T: Scalar>(
    records: &[PatientRecord],
    schema: &FeatureSchema,
    fit_rows: &[usize],
) -> Result<EncodedMatrix<T>> {
    Design::from_records(records, schema)?.standardize(fit_rows)
}

/// Row-major numeric design matrix with binary labels and per-column
/// provenance. Rows appended by oversampling may hold fractional values in
/// one-hot columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedMatrix<T> {
    data: Vec<T>,
    n_cols: usize,
    labels: Vec<u8>,
    columns: Vec<ColumnOrigin>,
    /// (mean, std) applied to each standardized column.
    scaling: Vec<Option<(T, T)>>,
}

impl<T: Scalar> EncodedMatrix<T> {
    pub fn new(data: Vec<T>, labels: Vec<u8>, columns: Vec<ColumnOrigin>) -> Result<Self> {
        let n_cols = columns.len();
        validate_shape(&data, n_cols, &labels)?;
        Ok(EncodedMatrix {
            data,
            n_cols,
            labels,
            scaling: vec![None; columns.len()],
            columns,
        })
    }

    /// Already-scaled numeric rows, used as-is.
    pub fn from_rows(rows: &[Vec<T>], labels: Vec<u8>) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        let columns = (0..n_cols).map(|j| ColumnOrigin::numeric(format!("x{j}"))).collect();
        EncodedMatrix::new(flatten(rows, n_cols)?, labels, columns)
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn columns(&self) -> &[ColumnOrigin] {
        &self.columns
    }

    pub fn scaling(&self) -> &[Option<(T, T)>] {
        &self.scaling
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        (0..self.n_rows()).map(move |i| self.row(i))
    }

    /// Row count per label.
    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.labels.iter().filter(|&&y| y == 1).count();
        [self.labels.len() - ones, ones]
    }

    pub fn select_rows(&self, idx: &[usize]) -> EncodedMatrix<T> {
        let mut data = Vec::with_capacity(idx.len() * self.n_cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        EncodedMatrix {
            data,
            n_cols: self.n_cols,
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            columns: self.columns.clone(),
            scaling: self.scaling.clone(),
        }
    }

    pub fn push_row(&mut self, row: &[T], label: u8) -> Result<()> {
        if row.len() != self.n_cols {
            return Err(Error::Shape {
                expected: self.n_cols,
                actual: row.len(),
            });
        }
        self.data.extend_from_slice(row);
        self.labels.push(label);
        Ok(())
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.data.iter().position(|v| !v.is_finite()) {
            Some(pos) => Err(Error::Data(format!(
                "non-finite value at row {}, column {}",
                pos / self.n_cols.max(1),
                pos % self.n_cols.max(1)
            ))),
            None => Ok(()),
        }
    }

    /// Recovers a categorical value from its encoded columns: a binary
    /// column is `Yes` at 0.5 and above; a one-hot group decodes to its
    /// largest column, first on ties.
    pub fn decode_category(&self, row: usize, feature: Feature) -> Option<String> {
        let values = self.row(row);
        let mut best: Option<(T, &str)> = None;
        for (v, col) in values.iter().zip(&self.columns) {
            if col.feature != Some(feature) {
                continue;
            }
            match &col.kind {
                EncodedKind::Binary => return Some(yes_no(*v >= T::of(0.5)).to_string()),
                EncodedKind::OneHot(name) => {
                    if best.is_none_or(|(b, _)| *v > b) {
                        best = Some((*v, name.as_str()));
                    }
                }
                EncodedKind::Numeric => return None,
            }
        }
        best.map(|(_, name)| name.to_string())
    }

    /// Inverse of the encoding for one row; requires every clinical
    /// feature to be present among the columns.
    pub fn decode_record(&self, row: usize) -> Result<PatientRecord> {
        let mut record = PatientRecord {
            seizure_free: self.labels[row] == 1,
            ..PatientRecord::default()
        };
        for feature in Feature::ALL {
            if feature.is_numeric() {
                let j = self
                    .columns
                    .iter()
                    .position(|c| c.feature == Some(feature))
                    .ok_or_else(|| Error::Schema(format!("no column for {feature}")))?;
                let mut v = self.row(row)[j];
                if let Some((mean, sd)) = self.scaling[j] {
                    v = v * sd + mean;
                }
                record.set_numeric(feature, v.as_f64()).map_err(Error::Schema)?;
            } else {
                let text = self
                    .decode_category(row, feature)
                    .ok_or_else(|| Error::Schema(format!("no column for {feature}")))?;
                record.set_category(feature, &text).map_err(Error::Schema)?;
            }
        }
        Ok(record)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohort::record::MriFinding;

    fn sample() -> Vec<PatientRecord> {
        vec![
            PatientRecord {
                aura: true,
                mri_findings: MriFinding::Tumor,
                age_surgery: 30.0,
                age_onset: 10.0,
                duration: 20.0,
                ..PatientRecord::default()
            },
            PatientRecord {
                age_surgery: 40.0,
                age_onset: 10.0,
                duration: 30.0,
                seizure_free: true,
                ..PatientRecord::default()
            },
        ]
    }

    fn column(m: &EncodedMatrix<f64>, name: &str) -> usize {
        m.columns().iter().position(|c| c.name == name).unwrap()
    }

    #[test]
    fn binary_yes_is_one() {
        let m = encode::<f64>(&sample(), &FeatureSchema::canonical(), &[0, 1]).unwrap();
        assert_eq!(m.row(0)[column(&m, "aura")], 1.0);
        assert_eq!(m.row(1)[column(&m, "aura")], 0.0);
    }

    #[test]
    fn one_hot_has_single_one() {
        let m = encode::<f64>(&sample(), &FeatureSchema::canonical(), &[0, 1]).unwrap();
        let mri: Vec<usize> = (0..m.n_cols())
            .filter(|&j| m.columns()[j].feature == Some(Feature::MriFindings))
            .collect();
        assert_eq!(mri.len(), 5);
        let row = m.row(0);
        assert_eq!(mri.iter().filter(|&&j| row[j] == 1.0).count(), 1);
        assert_eq!(row[column(&m, "mri_findings=Tumor")], 1.0);
        assert_eq!(mri.iter().map(|&j| row[j]).sum::<f64>(), 1.0);
    }

    #[test]
    fn constant_numeric_encodes_to_zero() {
        let m = encode::<f64>(&sample(), &FeatureSchema::canonical(), &[0, 1]).unwrap();
        let j = column(&m, "age_onset");
        assert_eq!(m.row(0)[j], 0.0);
        assert_eq!(m.row(1)[j], 0.0);
        assert_eq!(m.scaling()[j], Some((10.0, 1.0)));
    }

    #[test]
    fn statistics_come_from_fit_rows_only() {
        let m = encode::<f64>(&sample(), &FeatureSchema::canonical(), &[0]).unwrap();
        let j = column(&m, "age_surgery");
        assert_eq!(m.row(0)[j], 0.0);
        assert_eq!(m.row(1)[j], 10.0);
    }

    #[test]
    fn empty_or_out_of_range_fit_rows_rejected() {
        let d = Design::<f64>::from_records(&sample(), &FeatureSchema::canonical()).unwrap();
        assert!(d.standardize(&[]).is_err());
        assert!(d.standardize(&[2]).is_err());
    }

    #[test]
    fn decode_inverts_encode() {
        let records = sample();
        let m = encode::<f64>(&records, &FeatureSchema::canonical(), &[0, 1]).unwrap();
        for (i, r) in records.iter().enumerate() {
            let back = m.decode_record(i).unwrap();
            assert_eq!(back.mri_findings, r.mri_findings);
            assert_eq!(back.aura, r.aura);
            assert!((back.age_surgery - r.age_surgery).abs() < 1e-9);
        }
    }

    #[test]
    fn works_in_single_precision() {
        let m = encode::<f32>(&sample(), &FeatureSchema::canonical(), &[0, 1]).unwrap();
        let j = column_f32(&m, "age_surgery");
        assert_eq!(m.row(0)[j], -1.0f32);
        assert_eq!(m.row(1)[j], 1.0f32);
    }

    fn column_f32(m: &EncodedMatrix<f32>, name: &str) -> usize {
        m.columns().iter().position(|c| c.name == name).unwrap()
    }
}
