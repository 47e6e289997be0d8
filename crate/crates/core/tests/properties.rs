use std::collections::BTreeSet;

use nalgebra::DMatrix;
use outcome_forge::cohort::{synthesize_cohort, CohortSpec, Design, EncodedMatrix, FeatureSchema};
use outcome_forge::eval::{
    class_metrics, confusion, kfold_plan, loocv_plan, run_design, ConfusionMatrix, CvMode, ExperimentConfig,
    Leakage, Resampling,
};
use outcome_forge::learners::{
    self, dual_objective, gram_matrix, smo_solve, Family, KernelKind, KernelParams, ModelId, ModelSpec, SmoConfig,
    TreeParams,
};
use outcome_forge::resample::{oversample, Method, ResampleConfig};
use proptest::prelude::*;

fn labelled_rows(max_n: usize, max_p: usize) -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<u8>)> {
    (2..=max_n, 1..=max_p).prop_flat_map(|(n, p)| {
        (
            prop::collection::vec(prop::collection::vec(-5.0f64..5.0, p), n),
            prop::collection::vec(0u8..=1, n),
        )
    })
}

fn both_classes(labels: &[u8]) -> bool {
    labels.contains(&0) && labels.contains(&1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kfold_partitions_indices(n in 2usize..200, k in 2usize..16, seed in any::<u64>()) {
        prop_assume!(k <= n);
        let plan = kfold_plan(n, k, seed, None).unwrap();
        let mut all = BTreeSet::new();
        for f in &plan.folds {
            let train: BTreeSet<_> = f.train.iter().copied().collect();
            let test: BTreeSet<_> = f.test.iter().copied().collect();
            prop_assert!(train.is_disjoint(&test));
            prop_assert_eq!(train.len() + test.len(), n);
            all.extend(test);
        }
        prop_assert_eq!(all, (0..n).collect::<BTreeSet<_>>());
    }

    #[test]
    fn stratified_folds_spread_each_class(labels in prop::collection::vec(0u8..=1, 16..120), seed in any::<u64>()) {
        let k = 4;
        let plan = kfold_plan(labels.len(), k, seed, Some(&labels)).unwrap();
        for class in 0..2u8 {
            let per_fold: Vec<usize> = plan
                .folds
                .iter()
                .map(|f| f.test.iter().filter(|&&i| labels[i] == class).count())
                .collect();
            let spread = per_fold.iter().max().unwrap() - per_fold.iter().min().unwrap();
            prop_assert!(spread <= 1, "{per_fold:?}");
        }
    }

    #[test]
    fn loocv_is_n_singletons(n in 2usize..120) {
        let plan = loocv_plan(n).unwrap();
        prop_assert_eq!(plan.folds.len(), n);
        for (i, f) in plan.folds.iter().enumerate() {
            prop_assert_eq!(&f.test, &vec![i]);
        }
    }

    #[test]
    fn metric_identities(counts in prop::array::uniform4(0usize..80)) {
        prop_assume!(counts.iter().sum::<usize>() > 0);
        let cm = ConfusionMatrix { counts: [[counts[0], counts[1]], [counts[2], counts[3]]] };
        let m = class_metrics(&cm);
        let acc: f64 = (0..2).map(|c| m.recall[c] * cm.support(c) as f64).sum::<f64>() / cm.total() as f64;
        prop_assert!((acc - m.accuracy).abs() <= 1e-12);
        for c in 0..2 {
            let (p, r) = (m.precision[c], m.recall[c]);
            let f1 = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
            prop_assert!((f1 - m.f1[c]).abs() <= 1e-12);
        }
    }

    #[test]
    fn confusion_counts_every_pair(pairs in prop::collection::vec((0u8..=1, 0u8..=1), 1..100)) {
        let (t, p): (Vec<u8>, Vec<u8>) = pairs.iter().copied().unzip();
        let cm = confusion(&t, &p).unwrap();
        prop_assert_eq!(cm.total(), pairs.len());
        prop_assert_eq!(cm.correct(), pairs.iter().filter(|(a, b)| a == b).count());
    }

    #[test]
    fn gram_matrices_are_psd((rows, _) in labelled_rows(12, 4), gamma in 0.05f64..2.0) {
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let n = rows.len();
        for kind in [KernelKind::Linear, KernelKind::Rbf, KernelKind::Poly] {
            let kp = KernelParams { kind, gamma, degree: 2, coef0: 1.0 };
            let g = gram_matrix(&kp, &refs);
            let m = DMatrix::from_row_slice(n, n, &g);
            prop_assert!((&m - m.transpose()).abs().max() <= 1e-9);
            let scale = m.abs().max().max(1.0);
            let min_eig = m.symmetric_eigenvalues().min();
            prop_assert!(min_eig >= -1e-8 * scale, "{kind:?}: {min_eig}");
        }
    }

    #[test]
    fn smo_solution_is_feasible((rows, labels) in labelled_rows(20, 4), c in 0.1f64..10.0) {
        prop_assume!(both_classes(&labels));
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let g = gram_matrix(&KernelParams { kind: KernelKind::Rbf, gamma: 0.5, degree: 3, coef0: 0.0 }, &refs);
        let y: Vec<i8> = labels.iter().map(|&l| if l == 1 { 1 } else { -1 }).collect();
        let sol = smo_solve(&g, &y, &SmoConfig { c, tol: 1e-3, max_iter: 100_000 }).unwrap();
        prop_assert!(sol.alpha.iter().all(|&a| (0.0..=c).contains(&a)));
        let eq: f64 = sol.alpha.iter().zip(&y).map(|(a, &yi)| a * f64::from(yi)).sum();
        prop_assert!(eq.abs() <= 1e-9 * c * rows.len() as f64);
        prop_assert!(sol.converged);
        prop_assert!(sol.kkt_violation <= 1e-3);
        // The optimum is no worse than the all-zero feasible point.
        prop_assert!(sol.dual_objective >= dual_objective(&g, &y, &vec![0.0; y.len()]) - 1e-12);
    }

    #[test]
    fn unlimited_tree_fits_distinct_rows((rows, labels) in labelled_rows(40, 3)) {
        prop_assume!(both_classes(&labels));
        let m = EncodedMatrix::from_rows(&rows, labels.clone()).unwrap();
        let spec = ModelSpec::new(Family::DecisionTree(TreeParams::default()), 0);
        let model = learners::fit(&spec, &m).unwrap();
        let pred = learners::predict(&model, &m).unwrap();
        prop_assert_eq!(pred, labels);
    }

    #[test]
    fn standardized_training_columns_are_centred(seed in any::<u64>(), n in 10usize..60) {
        let records = synthesize_cohort(&CohortSpec::reference(), n, seed).unwrap();
        let design = Design::<f64>::from_records(&records, &FeatureSchema::canonical()).unwrap();
        let fit: Vec<usize> = (0..n).filter(|i| i % 3 != 0).collect();
        let m = design.standardize(&fit).unwrap();
        for (j, s) in m.scaling().iter().enumerate() {
            let vals: Vec<f64> = fit.iter().map(|&i| m.row(i)[j]).collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / vals.len() as f64;
            match s {
                Some((_, sd)) => {
                    prop_assert!(mean.abs() < 1e-9);
                    if *sd != 1.0 || var > 0.0 {
                        prop_assert!((var - 1.0).abs() < 1e-9 || var == 0.0);
                    }
                }
                None => prop_assert!(vals.iter().all(|&v| v == 0.0 || v == 1.0)),
            }
        }
    }

    #[test]
    fn oversampling_balances_and_keeps_originals(
        (rows, labels) in labelled_rows(40, 3),
        method_ix in 0usize..5,
        seed in any::<u64>(),
    ) {
        let counts = [labels.iter().filter(|&&l| l == 0).count(), labels.iter().filter(|&&l| l == 1).count()];
        prop_assume!(counts[0] >= 3 && counts[1] >= 3 && counts[0] != counts[1]);
        let m = EncodedMatrix::from_rows(&rows, labels.clone()).unwrap();
        let cfg = ResampleConfig::new(Method::ALL[method_ix], seed);
        let r = oversample(&m, &cfg).unwrap();
        let [a, b] = r.matrix.class_counts();
        prop_assert_eq!(a, b);
        prop_assert_eq!(r.n_synthetic, r.matrix.n_rows() - rows.len());
        let minority = if counts[0] < counts[1] { 0 } else { 1 };
        for i in 0..r.matrix.n_rows() {
            if i < rows.len() {
                prop_assert_eq!(r.matrix.row(i), rows[i].as_slice());
                prop_assert!(!r.origins[i].is_synthetic());
            } else {
                prop_assert_eq!(r.matrix.labels()[i], minority);
                prop_assert!(r.origins[i].is_synthetic());
            }
        }
        let again = oversample(&m, &cfg).unwrap();
        prop_assert_eq!(again.matrix, r.matrix);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn within_fold_tests_only_original_rows(seed in any::<u64>(), method_ix in 0usize..5) {
        let records = synthesize_cohort(&CohortSpec::reference(), 60, seed).unwrap();
        let design = Design::<f64>::from_records(&records, &FeatureSchema::canonical()).unwrap();
        let mut cfg = ExperimentConfig::new(vec![ModelId::Knn], CvMode::KFold { k: 5, stratified: true }, seed);
        cfg.resampling = Some(Resampling {
            config: ResampleConfig::new(Method::ALL[method_ix], 0),
            leakage: Leakage::WithinFold,
        });
        let r = run_design(&design, &cfg).unwrap();
        let mut tested = BTreeSet::new();
        for f in &r.models[0].folds {
            prop_assert!(f.test_origins.iter().all(|o| !o.is_synthetic()));
            prop_assert!(f.test.iter().all(|&i| i < 60));
            prop_assert!(f.synthetic_sources.iter().all(|s| !f.test.contains(s)));
            tested.extend(f.test.iter().copied());
        }
        prop_assert_eq!(tested.len(), 60);
    }

    #[test]
    fn experiments_are_deterministic(seed in any::<u64>()) {
        let records = synthesize_cohort(&CohortSpec::reference(), 50, seed).unwrap();
        let design = Design::<f64>::from_records(&records, &FeatureSchema::canonical()).unwrap();
        let mut cfg = ExperimentConfig::new(
            vec![ModelId::Forest, ModelId::Knn],
            CvMode::KFold { k: 5, stratified: false },
            seed,
        );
        cfg.resampling = Some(Resampling {
            config: ResampleConfig::new(Method::Smote, 0),
            leakage: Leakage::BeforeSplit,
        });
        let a = run_design(&design, &cfg).unwrap();
        let b = run_design(&design, &cfg).unwrap();
        prop_assert_eq!(a, b);
    }
}
