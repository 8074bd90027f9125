use std::path::PathBuf;

use mlkit::dataset::{ColumnType, CsvTable, DataPair, NormalizationStrategy, VersatileDataset};
use mlkit::error::Error;
use mlkit::models::RegressionModel;
use mlkit::optim::{model_loss_objective, Objective};
use mlkit::pipeline::{
    calculate_regression_error, classification_report, load_model, ModelKind, Pipeline, SavedModel,
    TrainingMethod,
};
use mlkit::rng::DeterministicRng;
use mlkit::train::TrainerKind;

fn iris_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/iris.csv")
}

fn iris() -> VersatileDataset {
    let mut data = VersatileDataset::from_table(CsvTable::read_path(iris_path(), false).unwrap());
    for (i, name) in ["sepal-length", "sepal-width", "petal-length", "petal-width"]
        .iter()
        .enumerate()
    {
        data.define_source_column(name, i, ColumnType::Continuous)
            .unwrap();
    }
    data.define_source_column("species", 4, ColumnType::Nominal)
        .unwrap();
    data.define_single_output_by_name("species").unwrap();
    data.analyze().unwrap();
    data
}

/// y = sin(2 x0) + 0.5 x1 on 120 seeded points.
fn regression_data() -> VersatileDataset {
    let mut rng = DeterministicRng::new(77);
    let rows = (0..120)
        .map(|_| {
            let x0 = rng.uniform(-1.5, 1.5);
            let x1 = rng.uniform(-1.0, 1.0);
            let y = (2.0 * x0).sin() + 0.5 * x1;
            vec![x0.to_string(), x1.to_string(), y.to_string()]
        })
        .collect();
    let mut data = VersatileDataset::new(rows);
    data.define_source_column("x0", 0, ColumnType::Continuous)
        .unwrap();
    data.define_source_column("x1", 1, ColumnType::Continuous)
        .unwrap();
    data.define_source_column("y", 2, ColumnType::Continuous)
        .unwrap();
    data.define_single_output_by_name("y").unwrap();
    data.analyze().unwrap();
    data
}

fn prepared(data: VersatileDataset, kind: ModelKind) -> Pipeline {
    let mut p = Pipeline::new(data);
    p.select_method(kind).unwrap();
    p.normalize().unwrap();
    p.holdback_validation(0.3, true, 1001).unwrap();
    p
}

#[test]
fn iris_feedforward_widths_and_plan() {
    let mut p = Pipeline::new(iris());
    p.select_method(ModelKind::Feedforward).unwrap();
    let strategies = p.strategies().unwrap().to_vec();
    assert!(strategies[..4]
        .iter()
        .all(|s| *s == NormalizationStrategy::Range { lo: -1.0, hi: 1.0 }));
    assert_eq!(strategies[4], NormalizationStrategy::Equilateral);
    let pairs = p.normalize().unwrap();
    assert_eq!(pairs.len(), 150);
    assert!(pairs
        .iter()
        .all(|d| d.input.len() == 4 && d.ideal.len() == 2));

    let report = p.report_normalization().unwrap();
    let sepal = report
        .lines()
        .find(|l| l.starts_with("sepal-length"))
        .unwrap();
    assert!(sepal.contains("range[-1,1]"), "{sepal}");
    assert!(
        sepal.contains("min=4.3") && sepal.contains("max=7.9"),
        "{sepal}"
    );
    let species = report.lines().find(|l| l.starts_with("species")).unwrap();
    assert!(
        species.contains("Iris-setosa,Iris-versicolor,Iris-virginica"),
        "{species}"
    );
    assert!(species.ends_with("width=2"), "{species}");
}

#[test]
fn iris_knn_keeps_class_index() {
    let mut p = Pipeline::new(iris());
    p.select_method(ModelKind::Knn).unwrap();
    assert_eq!(p.strategies().unwrap()[0], NormalizationStrategy::Zscore);
    let pairs = p.normalize().unwrap();
    assert!(pairs
        .iter()
        .all(|d| d.input.len() == 4 && d.ideal.len() == 1));
    assert_eq!(pairs[0].ideal, vec![0.0]);
    assert_eq!(pairs[149].ideal, vec![2.0]);
}

#[test]
fn glm_on_three_classes_is_unsupported() {
    let mut p = Pipeline::new(iris());
    assert!(matches!(
        p.select_method(ModelKind::Glm),
        Err(Error::Unsupported(_))
    ));
}

#[test]
fn stages_must_run_in_order() {
    let mut unanalyzed = VersatileDataset::new(vec![vec!["1".into(), "2".into()]]);
    unanalyzed
        .define_source_column("a", 0, ColumnType::Continuous)
        .unwrap();
    let mut p = Pipeline::new(unanalyzed);
    assert!(matches!(
        p.select_method(ModelKind::Linear),
        Err(Error::StageOrder(_))
    ));

    let mut p = Pipeline::new(iris());
    assert!(matches!(p.normalize(), Err(Error::StageOrder(_))));
    assert!(matches!(
        p.report_normalization(),
        Err(Error::StageOrder(_))
    ));
    assert!(matches!(p.select_training(), Err(Error::StageOrder(_))));
    p.select_method(ModelKind::Feedforward).unwrap();
    assert!(matches!(
        p.holdback_validation(0.3, true, 1),
        Err(Error::StageOrder(_))
    ));
    p.normalize().unwrap();
    assert!(matches!(
        p.crossvalidate(5, true),
        Err(Error::StageOrder(_))
    ));
    assert!(matches!(p.train(), Err(Error::StageOrder(_))));
    assert!(matches!(p.best_model(), Err(Error::StageOrder(_))));
    assert!(p.holdback_validation(1.0, true, 1).is_err());

    // re-selecting the method discards the encoded data
    p.select_method(ModelKind::Knn).unwrap();
    assert!(matches!(p.pairs(), Err(Error::StageOrder(_))));
}

#[test]
fn default_training_methods() {
    let expect = [
        (
            ModelKind::Feedforward,
            TrainingMethod::Propagation(TrainerKind::Rprop),
        ),
        (
            ModelKind::RbfNetwork,
            TrainingMethod::CentersThenPropagation(TrainerKind::Rprop),
        ),
        (ModelKind::Linear, TrainingMethod::NormalEquations),
        (ModelKind::Knn, TrainingMethod::Lazy),
        (ModelKind::Som, TrainingMethod::SomOnline),
        (ModelKind::KMeans, TrainingMethod::Lloyd),
        (ModelKind::Gp, TrainingMethod::Evolve),
    ];
    for (kind, method) in expect {
        let mut p = Pipeline::new(regression_data());
        p.select_method(kind).unwrap();
        assert_eq!(p.select_training().unwrap(), method, "{kind}");
    }
    assert_eq!(
        TrainingMethod::Propagation(TrainerKind::Rprop).to_string(),
        "rprop"
    );
}

#[test]
fn kind_tokens_round_trip() {
    for kind in ModelKind::ALL {
        assert_eq!(kind.to_string().parse::<ModelKind>().unwrap(), kind);
        assert_eq!(serde_json::to_string(&kind).unwrap(), format!("\"{kind}\""));
    }
    assert_eq!(ModelKind::RbfNetwork.to_string(), "rbfnetwork");
    assert!("FeedForward".parse::<ModelKind>().is_err());
}

#[test]
fn holdback_and_folds_partition_iris() {
    let mut p = prepared(iris(), ModelKind::Knn);
    assert_eq!(p.training_pairs().unwrap().len(), 105);
    assert_eq!(p.validation_pairs().unwrap().len(), 45);
    let first: Vec<DataPair> = p.validation_pairs().unwrap().to_vec();
    p.holdback_validation(0.3, true, 1001).unwrap();
    assert_eq!(p.validation_pairs().unwrap(), &first[..]);

    p.crossvalidate(5, true).unwrap();
    let reports = p.fold_reports().to_vec();
    assert_eq!(reports.len(), 5);
    let best = p.best_model().unwrap();
    let min = reports
        .iter()
        .map(|r| r.validation_mse)
        .fold(f64::INFINITY, f64::min);
    // k-NN stores its training fold, so the fold size is visible in the model
    let mlkit::pipeline::Model::Knn(knn) = best else {
        panic!("knn expected")
    };
    assert_eq!(knn.pairs().len(), 84);
    assert!(reports
        .iter()
        .all(|r| r.training_mse >= 0.0 && r.validation_mse >= 0.0));
    let best_report = reports.iter().find(|r| r.validation_mse == min).unwrap();
    assert_eq!(best_report.validation_mse, min);

    assert!(p.crossvalidate(106, true).is_err());
}

#[test]
fn interchangeable_kinds_on_regression_data() {
    for kind in [
        ModelKind::Feedforward,
        ModelKind::RbfNetwork,
        ModelKind::Knn,
        ModelKind::Linear,
    ] {
        let mut p = prepared(regression_data(), kind);
        p.crossvalidate(5, true).unwrap();
        let model = p.best_model().unwrap();
        let train = calculate_regression_error(model, p.training_pairs().unwrap()).unwrap();
        let valid = calculate_regression_error(model, p.validation_pairs().unwrap()).unwrap();
        println!("{kind}: training {train:.5} validation {valid:.5}");
        assert!(train.is_finite() && valid.is_finite(), "{kind}");
        assert_eq!(p.fold_reports().len(), 5, "{kind}");
        // every kind beats predicting the mean of the encoded target
        let ideals: Vec<f64> = p
            .validation_pairs()
            .unwrap()
            .iter()
            .map(|d| d.ideal[0])
            .collect();
        let mean = ideals.iter().sum::<f64>() / ideals.len() as f64;
        let var = ideals.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / ideals.len() as f64;
        assert!(valid < var, "{kind}: {valid} vs variance {var}");
    }
}

#[test]
fn pipeline_is_deterministic_across_workers() {
    let run = |workers: usize| {
        let mut p = prepared(iris(), ModelKind::Feedforward);
        p.hyperparameters_mut().workers = workers;
        p.hyperparameters_mut().max_epochs = 60;
        p.crossvalidate(5, true).unwrap();
        (
            p.saved_model().unwrap().to_json().unwrap(),
            p.fold_reports().to_vec(),
        )
    };
    let (a, ra) = run(1);
    let (b, rb) = run(1);
    let (c, rc) = run(4);
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert_eq!(ra, rb);
    assert_eq!(ra, rc);
}

#[test]
fn regression_error_definition() {
    let model = mlkit::models::GlmModel::new(vec![0.0], mlkit::models::Link::Identity).unwrap();
    assert_eq!(
        calculate_regression_error(&model, &[DataPair::new(vec![], vec![1.0])]).unwrap(),
        1.0
    );
    assert!(calculate_regression_error(&model, &[]).is_err());
}

#[test]
fn regression_error_equals_loss_objective() {
    for kind in [
        ModelKind::Feedforward,
        ModelKind::Linear,
        ModelKind::RbfNetwork,
    ] {
        let mut p = prepared(regression_data(), kind);
        p.hyperparameters_mut().max_epochs = 30;
        let model = p.train().unwrap().clone();
        let pairs = p.training_pairs().unwrap();
        let objective = model_loss_objective(&model, pairs).unwrap();
        let direct = calculate_regression_error(&model, pairs).unwrap();
        assert_eq!(
            objective.evaluate(&model.parameters()).to_bits(),
            direct.to_bits(),
            "{kind}"
        );
    }
}

#[test]
fn train_without_holdback_reports_no_validation() {
    let mut p = Pipeline::new(regression_data());
    p.select_method(ModelKind::Linear).unwrap();
    p.normalize().unwrap();
    p.holdback_validation(0.0, false, 1).unwrap();
    p.train().unwrap();
    assert_eq!(p.training_pairs().unwrap().len(), 120);
    assert!(p.fold_reports()[0].validation_mse.is_nan());
}

#[test]
fn classification_report_on_iris_knn() {
    let mut p = prepared(iris(), ModelKind::Knn);
    p.hyperparameters_mut().k = 1;
    p.train().unwrap();
    let report = classification_report(
        p.best_model().unwrap(),
        p.helper().unwrap(),
        p.training_pairs().unwrap(),
    )
    .unwrap()
    .unwrap();
    assert_eq!(report.accuracy, 1.0);
    assert_eq!(report.confusion.iter().flatten().sum::<usize>(), 105);
}

fn every_kind_pipeline(kind: ModelKind) -> Pipeline {
    let data = match kind {
        ModelKind::Glm | ModelKind::Gp | ModelKind::Linear => regression_data(),
        _ => iris(),
    };
    let mut p = prepared(data, kind);
    let h = p.hyperparameters_mut();
    h.max_epochs = 20;
    h.generations = 3;
    h.population = 40;
    h.som_epochs = 5;
    p.train().unwrap();
    p
}

#[test]
fn persistence_round_trip_every_kind() {
    let dir = tempfile::tempdir().unwrap();
    for kind in ModelKind::ALL {
        let p = every_kind_pipeline(kind);
        let path = dir.path().join(format!("{kind}.json"));
        p.save(&path).unwrap();
        let loaded = load_model(&path).unwrap();
        let original = p.best_model().unwrap();
        assert_eq!(loaded.model.kind(), kind);
        assert_eq!(&loaded.helper, p.helper().unwrap());
        assert_eq!(
            std::fs::read_to_string(&path).unwrap(),
            loaded.to_json().unwrap()
        );
        let mut rng = DeterministicRng::new(5);
        for _ in 0..100 {
            let x: Vec<f64> = (0..original.input_count())
                .map(|_| rng.uniform(-2.0, 2.0))
                .collect();
            let a = original.compute(&x).unwrap();
            let b = loaded.model.compute(&x).unwrap();
            assert_eq!(
                a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                b.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                "{kind}"
            );
        }
    }
}

#[test]
fn load_errors() {
    let p = every_kind_pipeline(ModelKind::Linear);
    let json = p.saved_model().unwrap().to_json().unwrap();
    assert!(matches!(
        SavedModel::from_json(&json[..json.len() / 2]),
        Err(Error::Load(_))
    ));
    let v999 = json.replacen("\"format_version\": 1", "\"format_version\": 999", 1);
    assert_ne!(v999, json);
    assert!(matches!(
        SavedModel::from_json(&v999),
        Err(Error::UnsupportedVersion(999))
    ));
    let wrong_kind = json.replacen("\"model_kind\": \"linear\"", "\"model_kind\": \"glm\"", 1);
    assert_ne!(wrong_kind, json);
    assert!(matches!(
        SavedModel::from_json(&wrong_kind),
        Err(Error::Load(_))
    ));
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(
        load_model(&dir.path().join("missing.json")),
        Err(Error::Io(_))
    ));
}
