//! The staged modelling workflow: pick a model kind, let it choose the
//! normalization, hold back validation data, cross-validate, report, save.

mod fit;
mod model;
mod persist;

pub use model::Model;
pub use persist::{load_model, save_model, Architecture, SavedModel, FORMAT_VERSION};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{
    kfold, split_holdback, ColumnRole, ColumnType, DataPair, NormalizationHelper,
    NormalizationStrategy, VersatileDataset,
};
use crate::error::{Error, Result};
use crate::models::{mse, RegressionModel};
use crate::parallel::map_indexed;
use crate::train::TrainerKind;
use fit::{fit, Problem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Feedforward,
    RbfNetwork,
    Linear,
    Glm,
    Knn,
    Som,
    KMeans,
    Gp,
}

impl ModelKind {
    pub const ALL: [ModelKind; 8] = [
        ModelKind::Feedforward,
        ModelKind::RbfNetwork,
        ModelKind::Linear,
        ModelKind::Glm,
        ModelKind::Knn,
        ModelKind::Som,
        ModelKind::KMeans,
        ModelKind::Gp,
    ];

    pub fn token(self) -> &'static str {
        match self {
            ModelKind::Feedforward => "feedforward",
            ModelKind::RbfNetwork => "rbfnetwork",
            ModelKind::Linear => "linear",
            ModelKind::Glm => "glm",
            ModelKind::Knn => "knn",
            ModelKind::Som => "som",
            ModelKind::KMeans => "kmeans",
            ModelKind::Gp => "gp",
        }
    }

    /// SOM and k-means ignore the target and reproduce their input.
    pub fn is_unsupervised(self) -> bool {
        matches!(self, ModelKind::Som | ModelKind::KMeans)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.token() == s)
            .ok_or_else(|| Error::Config(format!("unknown model kind '{s}'")))
    }
}

/// Default training procedure for a model kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainingMethod {
    Propagation(TrainerKind),
    /// k-means centers, then propagation on the output weights.
    CentersThenPropagation(TrainerKind),
    NormalEquations,
    Irls,
    Lazy,
    SomOnline,
    Lloyd,
    Evolve,
}

impl fmt::Display for TrainingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainingMethod::Propagation(t) => f.write_str(t.name()),
            TrainingMethod::CentersThenPropagation(t) => write!(f, "kmeans+{}", t.name()),
            TrainingMethod::NormalEquations => f.write_str("normal_equations"),
            TrainingMethod::Irls => f.write_str("irls"),
            TrainingMethod::Lazy => f.write_str("lazy"),
            TrainingMethod::SomOnline => f.write_str("som_online"),
            TrainingMethod::Lloyd => f.write_str("lloyd"),
            TrainingMethod::Evolve => f.write_str("evolve"),
        }
    }
}

/// Tunables of the default training procedures.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparameters {
    pub trainer: TrainerKind,
    pub max_epochs: usize,
    pub patience: Option<usize>,
    pub min_improvement: f64,
    pub target_error: f64,
    /// Hidden units of the feedforward network; derived from widths if unset.
    pub hidden: Option<usize>,
    /// RBF units; `ceil(sqrt(N))` if unset.
    pub units: Option<usize>,
    pub k: usize,
    /// k-means clusters; the class count (or 3) if unset.
    pub clusters: Option<usize>,
    pub grid: (usize, usize),
    pub som_epochs: usize,
    pub generations: usize,
    pub population: usize,
    pub workers: usize,
    pub chunk_size: usize,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self {
            trainer: TrainerKind::Rprop,
            max_epochs: 500,
            patience: Some(50),
            min_improvement: 1e-8,
            target_error: 0.0,
            hidden: None,
            units: None,
            k: 5,
            clusters: None,
            grid: (5, 5),
            som_epochs: 100,
            generations: 50,
            population: 256,
            workers: 1,
            chunk_size: 64,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value '{value}' for '{key}'")))
}

impl Hyperparameters {
    pub const KEYS: [&'static str; 15] = [
        "trainer",
        "epochs",
        "patience",
        "min_improvement",
        "target_error",
        "hidden",
        "units",
        "k",
        "clusters",
        "grid",
        "som_epochs",
        "generations",
        "population",
        "workers",
        "chunk_size",
    ];

    /// Applies one `key=value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let positive = |v: usize| {
            if v == 0 {
                Err(Error::Config(format!("'{key}' must be positive")))
            } else {
                Ok(v)
            }
        };
        match key {
            "trainer" => self.trainer = value.parse()?,
            "epochs" => self.max_epochs = positive(parse_num(key, value)?)?,
            "patience" => {
                let p: usize = parse_num(key, value)?;
                self.patience = (p > 0).then_some(p);
            }
            "min_improvement" => self.min_improvement = parse_num(key, value)?,
            "target_error" => self.target_error = parse_num(key, value)?,
            "hidden" => self.hidden = Some(positive(parse_num(key, value)?)?),
            "units" => self.units = Some(positive(parse_num(key, value)?)?),
            "k" => self.k = positive(parse_num(key, value)?)?,
            "clusters" => self.clusters = Some(positive(parse_num(key, value)?)?),
            "grid" => {
                let (r, c) = value.split_once('x').ok_or_else(|| {
                    Error::Config(format!("grid must look like 5x5, got '{value}'"))
                })?;
                self.grid = (positive(parse_num(key, r)?)?, positive(parse_num(key, c)?)?);
            }
            "som_epochs" => self.som_epochs = positive(parse_num(key, value)?)?,
            "generations" => self.generations = positive(parse_num(key, value)?)?,
            "population" => self.population = parse_num(key, value)?,
            "workers" => self.workers = positive(parse_num(key, value)?)?,
            "chunk_size" => self.chunk_size = positive(parse_num(key, value)?)?,
            other => {
                return Err(Error::Config(format!(
                    "unknown setting '{other}' (known: {})",
                    Self::KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldReport {
    pub fold: usize,
    pub training_mse: f64,
    pub validation_mse: f64,
    pub epochs: usize,
}

impl fmt::Display for FoldReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "fold {}: training {:.6} validation {:.6} epochs {}",
            self.fold, self.training_mse, self.validation_mse, self.epochs
        )
    }
}

/// MSE over pairs and output components.
pub fn calculate_regression_error<M: RegressionModel + ?Sized>(
    model: &M,
    pairs: &[DataPair],
) -> Result<f64> {
    mse(model, pairs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    pub labels: Vec<String>,
    /// `confusion[actual][predicted]`
    pub confusion: Vec<Vec<usize>>,
    pub accuracy: f64,
}

impl fmt::Display for ClassificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "accuracy: {:.6}", self.accuracy)?;
        writeln!(
            f,
            "confusion (rows actual, columns predicted): {}",
            self.labels.join(" ")
        )?;
        for (label, row) in self.labels.iter().zip(&self.confusion) {
            let cells: Vec<String> = row.iter().map(usize::to_string).collect();
            writeln!(f, "{label}: {}", cells.join(" "))?;
        }
        Ok(())
    }
}

/// Accuracy and confusion matrix when the plan has a single categorical
/// output; `None` otherwise.
pub fn classification_report<M: RegressionModel + ?Sized>(
    model: &M,
    helper: &NormalizationHelper,
    pairs: &[DataPair],
) -> Result<Option<ClassificationReport>> {
    let Some(column) = helper.class_column() else {
        return Ok(None);
    };
    if pairs.is_empty() {
        return Err(Error::Empty("no pairs to classify".into()));
    }
    let n = column.categories.len();
    let mut confusion = vec![vec![0usize; n]; n];
    let mut correct = 0usize;
    for p in pairs {
        let actual = helper
            .decode_class(&p.ideal)?
            .expect("class column present");
        let predicted = helper
            .decode_class(&model.compute(&p.input)?)?
            .expect("class column present");
        confusion[actual][predicted] += 1;
        correct += usize::from(actual == predicted);
    }
    Ok(Some(ClassificationReport {
        labels: column.categories.clone(),
        confusion,
        accuracy: correct as f64 / pairs.len() as f64,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Stage {
    Defined,
    MethodSelected,
    Normalized,
    HeldBack,
    Trained,
}

/// Normalization choice per column for a model kind.
fn plan_strategies(
    kind: ModelKind,
    dataset: &VersatileDataset,
) -> Result<Vec<NormalizationStrategy>> {
    use NormalizationStrategy as S;
    let range = |lo, hi| S::Range { lo, hi };
    dataset
        .columns()
        .iter()
        .map(|c| {
            let classes = c.categories.len();
            Ok(match (kind, c.role, c.kind) {
                (_, ColumnRole::Ignored, _) => S::Passthrough,
                (ModelKind::Som | ModelKind::KMeans, _, ColumnType::Nominal) => {
                    S::OneOfN { off: 0.0, on: 1.0 }
                }
                (ModelKind::Som | ModelKind::KMeans, _, _) => range(0.0, 1.0),
                (
                    ModelKind::Feedforward | ModelKind::RbfNetwork | ModelKind::Gp,
                    ColumnRole::Input,
                    ColumnType::Nominal,
                ) => S::OneOfN { off: -1.0, on: 1.0 },
                (
                    ModelKind::Feedforward | ModelKind::RbfNetwork | ModelKind::Gp,
                    ColumnRole::Input,
                    _,
                ) => range(-1.0, 1.0),
                (ModelKind::Gp, ColumnRole::Output, ColumnType::Nominal) if classes > 2 => {
                    return Err(Error::Unsupported(format!(
                        "gp needs a single encoded output; '{}' has {classes} classes",
                        c.name
                    )))
                }
                (
                    ModelKind::Feedforward | ModelKind::RbfNetwork | ModelKind::Gp,
                    ColumnRole::Output,
                    ColumnType::Nominal,
                ) => S::Equilateral,
                (
                    ModelKind::Feedforward | ModelKind::RbfNetwork | ModelKind::Gp,
                    ColumnRole::Output,
                    _,
                ) => range(-1.0, 1.0),
                (ModelKind::Glm, ColumnRole::Output, ColumnType::Nominal) if classes > 2 => {
                    return Err(Error::Unsupported(format!(
                        "glm handles at most 2 target classes; '{}' has {classes}",
                        c.name
                    )))
                }
                (
                    ModelKind::Linear | ModelKind::Glm | ModelKind::Knn,
                    ColumnRole::Input,
                    ColumnType::Nominal,
                ) => S::OneOfN { off: 0.0, on: 1.0 },
                (ModelKind::Linear | ModelKind::Glm | ModelKind::Knn, ColumnRole::Input, _) => {
                    S::Zscore
                }
                (ModelKind::Linear | ModelKind::Glm | ModelKind::Knn, ColumnRole::Output, _) => {
                    S::Passthrough
                }
            })
        })
        .collect()
}

/// The staged workflow over one dataset. Stages run in the order
/// select_method, normalize, holdback_validation, then crossvalidate or
/// train; re-running a stage discards everything after it.
#[derive(Debug, Clone)]
pub struct Pipeline {
    dataset: VersatileDataset,
    stage: Stage,
    kind: Option<ModelKind>,
    strategies: Vec<NormalizationStrategy>,
    helper: Option<NormalizationHelper>,
    pairs: Vec<DataPair>,
    training: Vec<DataPair>,
    validation: Vec<DataPair>,
    seed: u64,
    method: Option<TrainingMethod>,
    hyper: Hyperparameters,
    best: Option<Model>,
    reports: Vec<FoldReport>,
}

impl Pipeline {
    pub fn new(dataset: VersatileDataset) -> Self {
        Self {
            dataset,
            stage: Stage::Defined,
            kind: None,
            strategies: Vec::new(),
            helper: None,
            pairs: Vec::new(),
            training: Vec::new(),
            validation: Vec::new(),
            seed: 0,
            method: None,
            hyper: Hyperparameters::default(),
            best: None,
            reports: Vec::new(),
        }
    }

    pub fn dataset(&self) -> &VersatileDataset {
        &self.dataset
    }

    /// Changing the dataset sends the pipeline back to the start.
    pub fn dataset_mut(&mut self) -> &mut VersatileDataset {
        self.stage = Stage::Defined;
        &mut self.dataset
    }

    pub fn hyperparameters(&self) -> &Hyperparameters {
        &self.hyper
    }

    /// Changing settings discards a trained model.
    pub fn hyperparameters_mut(&mut self) -> &mut Hyperparameters {
        self.stage = self.stage.min(Stage::HeldBack);
        &mut self.hyper
    }

    fn require(&self, stage: Stage, what: &str) -> Result<()> {
        if self.stage < stage {
            return Err(Error::StageOrder(what.to_string()));
        }
        Ok(())
    }

    pub fn kind(&self) -> Option<ModelKind> {
        self.kind.filter(|_| self.stage >= Stage::MethodSelected)
    }

    /// Chooses the model kind and, with it, the normalization of every column.
    pub fn select_method(&mut self, kind: ModelKind) -> Result<()> {
        if !self.dataset.is_analyzed() {
            return Err(Error::StageOrder(
                "analyze must run before select_method".into(),
            ));
        }
        let columns = self.dataset.columns();
        let outputs = columns
            .iter()
            .filter(|c| c.role == ColumnRole::Output)
            .count();
        if !columns.iter().any(|c| c.role == ColumnRole::Input) {
            return Err(Error::Config("no input columns defined".into()));
        }
        if outputs == 0 && !kind.is_unsupervised() {
            return Err(Error::Config(format!("{kind} needs an output column")));
        }
        if outputs > 1 && matches!(kind, ModelKind::Linear | ModelKind::Glm | ModelKind::Gp) {
            return Err(Error::Unsupported(format!(
                "{kind} supports a single output column"
            )));
        }
        self.strategies = plan_strategies(kind, &self.dataset)?;
        self.kind = Some(kind);
        self.method = None;
        self.stage = Stage::MethodSelected;
        Ok(())
    }

    pub fn strategies(&self) -> Result<&[NormalizationStrategy]> {
        self.require(Stage::MethodSelected, "select_method must run first")?;
        Ok(&self.strategies)
    }

    fn problem(&self) -> Problem {
        let kind = self.kind.expect("method selected");
        let classes = if kind.is_unsupervised() {
            self.dataset
                .columns()
                .iter()
                .find(|c| c.role == ColumnRole::Output && c.kind.is_categorical())
                .map(|c| c.categories.len())
        } else {
            self.helper
                .as_ref()
                .and_then(NormalizationHelper::class_column)
                .map(|c| c.categories.len())
        };
        Problem { kind, classes }
    }

    /// Fits the normalization plan and encodes every row.
    pub fn normalize(&mut self) -> Result<&[DataPair]> {
        self.require(
            Stage::MethodSelected,
            "select_method must run before normalize",
        )?;
        let kind = self.kind.expect("method selected");
        let mut helper = self.dataset.build_helper(&self.strategies)?;
        if kind.is_unsupervised() {
            let columns = helper
                .columns()
                .iter()
                .cloned()
                .map(|mut c| {
                    if c.role == ColumnRole::Output {
                        c.role = ColumnRole::Ignored;
                    }
                    c
                })
                .collect();
            helper = NormalizationHelper::new(columns)?;
        }
        let mut pairs = self.dataset.encode(&helper)?;
        if kind.is_unsupervised() {
            for p in &mut pairs {
                p.ideal = p.input.clone();
            }
        }
        self.helper = Some(helper);
        self.pairs = pairs;
        self.stage = Stage::Normalized;
        Ok(&self.pairs)
    }

    pub fn helper(&self) -> Result<&NormalizationHelper> {
        self.require(Stage::Normalized, "normalize must run first")?;
        Ok(self.helper.as_ref().expect("normalized"))
    }

    pub fn pairs(&self) -> Result<&[DataPair]> {
        self.require(Stage::Normalized, "normalize must run first")?;
        Ok(&self.pairs)
    }

    /// Reserves `ratio` of the encoded rows for final validation. `seed` also
    /// seeds the folds and model initialization that follow.
    pub fn holdback_validation(&mut self, ratio: f64, shuffle: bool, seed: u64) -> Result<()> {
        self.require(
            Stage::Normalized,
            "normalize must run before holdback_validation",
        )?;
        let (training, validation) = split_holdback(&self.pairs, ratio, shuffle, seed)?;
        if training.is_empty() {
            return Err(Error::InvalidArgument(
                "holdback leaves no training rows".into(),
            ));
        }
        self.training = training;
        self.validation = validation;
        self.seed = seed;
        self.stage = Stage::HeldBack;
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn training_pairs(&self) -> Result<&[DataPair]> {
        self.require(Stage::HeldBack, "holdback_validation must run first")?;
        Ok(&self.training)
    }

    pub fn validation_pairs(&self) -> Result<&[DataPair]> {
        self.require(Stage::HeldBack, "holdback_validation must run first")?;
        Ok(&self.validation)
    }

    /// The default training procedure for the selected kind.
    pub fn select_training(&mut self) -> Result<TrainingMethod> {
        self.require(
            Stage::MethodSelected,
            "select_method must run before select_training",
        )?;
        let trainer = self.hyper.trainer;
        let method = match self.kind.expect("method selected") {
            ModelKind::Feedforward => TrainingMethod::Propagation(trainer),
            ModelKind::RbfNetwork => TrainingMethod::CentersThenPropagation(trainer),
            ModelKind::Linear => TrainingMethod::NormalEquations,
            ModelKind::Glm => TrainingMethod::Irls,
            ModelKind::Knn => TrainingMethod::Lazy,
            ModelKind::Som => TrainingMethod::SomOnline,
            ModelKind::KMeans => TrainingMethod::Lloyd,
            ModelKind::Gp => TrainingMethod::Evolve,
        };
        self.method = Some(method);
        Ok(method)
    }

    /// k-fold cross-validation over the training portion. Fold `i` trains
    /// from seed `seed + i`; the model with the lowest fold-validation MSE
    /// is kept (first on ties).
    pub fn crossvalidate(&mut self, k: usize, shuffle: bool) -> Result<&Model> {
        self.require(
            Stage::HeldBack,
            "holdback_validation must run before crossvalidate",
        )?;
        if self.method.is_none() {
            self.select_training()?;
        }
        let folds = kfold(&self.training, k, shuffle, self.seed)?;
        let problem = self.problem();
        let (seed, hyper) = (self.seed, &self.hyper);
        let results = map_indexed(
            folds.len(),
            hyper.workers,
            |i| -> Result<(Model, FoldReport)> {
                let fold = &folds[i];
                let fitted = fit(problem, hyper, &fold.train, seed.wrapping_add(i as u64), 1)?;
                let report = FoldReport {
                    fold: i,
                    training_mse: mse(&fitted.model, &fold.train)?,
                    validation_mse: mse(&fitted.model, &fold.validation)?,
                    epochs: fitted.epochs,
                };
                Ok((fitted.model, report))
            },
        );
        let mut best: Option<(Model, f64)> = None;
        let mut reports = Vec::with_capacity(k);
        for r in results {
            let (model, report) = r?;
            if best
                .as_ref()
                .is_none_or(|(_, score)| report.validation_mse < *score)
            {
                best = Some((model, report.validation_mse));
            }
            reports.push(report);
        }
        self.reports = reports;
        self.best = best.map(|(m, _)| m);
        self.stage = Stage::Trained;
        Ok(self.best.as_ref().expect("k >= 2 folds"))
    }

    /// Trains one model on the whole training portion from the base seed.
    pub fn train(&mut self) -> Result<&Model> {
        self.require(Stage::HeldBack, "holdback_validation must run before train")?;
        if self.method.is_none() {
            self.select_training()?;
        }
        let fitted = fit(
            self.problem(),
            &self.hyper,
            &self.training,
            self.seed,
            self.hyper.workers,
        )?;
        self.reports = vec![FoldReport {
            fold: 0,
            training_mse: mse(&fitted.model, &self.training)?,
            validation_mse: if self.validation.is_empty() {
                f64::NAN
            } else {
                mse(&fitted.model, &self.validation)?
            },
            epochs: fitted.epochs,
        }];
        self.best = Some(fitted.model);
        self.stage = Stage::Trained;
        Ok(self.best.as_ref().expect("just trained"))
    }

    pub fn best_model(&self) -> Result<&Model> {
        self.require(Stage::Trained, "no model has been trained")?;
        Ok(self.best.as_ref().expect("trained"))
    }

    pub fn fold_reports(&self) -> &[FoldReport] {
        if self.stage >= Stage::Trained {
            &self.reports
        } else {
            &[]
        }
    }

    /// One line per column describing its fitted normalization.
    pub fn report_normalization(&self) -> Result<String> {
        Ok(self.helper()?.to_string())
    }

    /// Number of cells in a source row.
    pub fn source_width(&self) -> usize {
        let defined = self
            .dataset
            .columns()
            .iter()
            .map(|c| c.source_index + 1)
            .max()
            .unwrap_or(0);
        self.dataset
            .rows()
            .first()
            .map_or(defined, |r| r.len().max(defined))
    }

    pub fn saved_model(&self) -> Result<SavedModel> {
        Ok(SavedModel {
            model: self.best_model()?.clone(),
            helper: self.helper()?.clone(),
            source_width: self.source_width(),
        })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.saved_model()?.to_json()?)?;
        Ok(())
    }
}
