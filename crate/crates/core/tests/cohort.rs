use outcome_forge::cohort::{
    class_counts, load_csv, read_csv, synthesize_cohort, write_csv, write_records, CohortSpec, Design,
    EncodedKind, Feature, FeatureSchema,
};
use outcome_forge::DesignF64;

#[test]
fn csv_round_trip_is_exact() {
    let schema = FeatureSchema::canonical();
    let records = synthesize_cohort(&CohortSpec::reference(), 120, 8).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cohort.csv");
    write_csv(&path, &records, &schema).unwrap();
    assert_eq!(load_csv(&path, &schema).unwrap(), records);

    let mut buf = Vec::new();
    write_records(&mut buf, &records, &schema).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), buf);
}

#[test]
fn encoding_layout_matches_schema() {
    let schema = FeatureSchema::canonical();
    let records = synthesize_cohort(&CohortSpec::reference(), 30, 1).unwrap();
    let design = DesignF64::from_records(&records, &schema).unwrap();
    // 6 binaries, 3 numerics, one-hot 5 + 2 + 5.
    assert_eq!(design.n_cols(), 6 + 3 + 12);
    let numeric = design.columns().iter().filter(|c| c.kind == EncodedKind::Numeric).count();
    assert_eq!(numeric, 3);
    for i in 0..design.n_rows() {
        let onehot_sum: f64 = design
            .columns()
            .iter()
            .zip(design.row(i))
            .filter(|(c, _)| c.feature == Some(Feature::SeizureFrequency))
            .map(|(_, v)| v)
            .sum();
        assert_eq!(onehot_sum, 1.0);
    }
}

#[test]
fn standardized_rows_decode_to_the_source_records() {
    let schema = FeatureSchema::canonical();
    let records = synthesize_cohort(&CohortSpec::reference(), 40, 2).unwrap();
    let design = Design::<f64>::from_records(&records, &schema).unwrap();
    let fit: Vec<usize> = (0..25).collect();
    let m = design.standardize(&fit).unwrap();
    for (i, r) in records.iter().enumerate() {
        let back = m.decode_record(i).unwrap();
        for f in Feature::ALL {
            match r.numeric(f) {
                Some(v) => assert!((back.numeric(f).unwrap() - v).abs() < 1e-9, "{f} row {i}"),
                None => assert_eq!(back.category(f), r.category(f)),
            }
        }
        assert_eq!(back.seizure_free, r.seizure_free);
    }
}

#[test]
fn synthetic_marginals_track_the_specification() {
    let spec = CohortSpec::reference();
    let records = synthesize_cohort(&spec, 20_000, 3).unwrap();
    let n = records.len() as f64;
    let aura = records.iter().filter(|r| r.aura).count() as f64 / n;
    assert!((aura - 112.0 / 176.0).abs() < 0.02, "aura rate {aura}");
    let ones = class_counts(&records)[&1] as f64 / n;
    assert!((ones - 128.0 / 176.0).abs() < 0.02, "label rate {ones}");
    let m = spec.age_surgery;
    let ages: Vec<f64> = records.iter().map(|r| r.age_surgery).collect();
    assert!(ages.iter().all(|&a| (m.min..=m.max).contains(&a)));
    let mean = ages.iter().sum::<f64>() / n;
    assert!((mean - m.mean).abs() < 0.3, "age mean {mean}");
}

#[test]
fn same_seed_same_cohort() {
    let a = synthesize_cohort(&CohortSpec::reference(), 50, 9).unwrap();
    let b = synthesize_cohort(&CohortSpec::reference(), 50, 9).unwrap();
    let c = synthesize_cohort(&CohortSpec::reference(), 50, 10).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn malformed_label_is_rejected() {
    let schema = FeatureSchema::canonical();
    let header = schema.header().join(",");
    let text = format!("{header}\nNo,No,No,Daily,No,No,Temporal,No,Tumor,30,10,20,2\n");
    assert!(read_csv(text.as_bytes(), &schema).is_err());
}
