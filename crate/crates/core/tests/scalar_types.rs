use outcome_forge::cohort::{synthesize_cohort, CohortSpec, Design, FeatureSchema};
use outcome_forge::learners::{fit, predict, ModelId};
use outcome_forge::{MatrixF32, ModelF32};

#[test]
fn f32_and_f64_pipelines_agree_on_discrete_learners() {
    let records = synthesize_cohort(&CohortSpec::reference(), 80, 4).unwrap();
    let schema = FeatureSchema::canonical();
    let all: Vec<usize> = (0..80).collect();
    let m64 = Design::<f64>::from_records(&records, &schema).unwrap().standardize(&all).unwrap();
    let m32: MatrixF32 = Design::<f32>::from_records(&records, &schema).unwrap().standardize(&all).unwrap();
    for id in [ModelId::Knn, ModelId::Tree, ModelId::Logreg, ModelId::SvmRbf] {
        let spec = id.default_spec(1);
        let a = predict(&fit(&spec, &m64).unwrap(), &m64).unwrap();
        let model: ModelF32 = fit(&spec, &m32).unwrap();
        let b = predict(&model, &m32).unwrap();
        let agree = a.iter().zip(&b).filter(|(x, y)| x == y).count();
        assert!(agree >= 76, "{id}: {agree}/80");
    }
}
