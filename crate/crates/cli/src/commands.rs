//! The four subcommands. Each returns the text it would print so tests and
//! `main` share one code path.

use std::fmt::Write as _;
use std::path::Path;

use mlkit::dataset::{ColumnType, CsvTable, DataPair, VersatileDataset};
use mlkit::error::{Error, Result};
use mlkit::models::RegressionModel;
use mlkit::pipeline::{
    calculate_regression_error, classification_report, load_model, Pipeline, SavedModel,
};

use crate::args::{ApplyArgs, CliConfig, PredictArgs};

/// A failed command: the process exit code plus a message for stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Io(_) => 2,
        Error::Parse { .. } | Error::Load(_) => 3,
        Error::Schema(_) | Error::DimensionMismatch { .. } => 5,
        Error::InvalidArgument(_)
        | Error::Config(_)
        | Error::ConstantColumn(_)
        | Error::Empty(_)
        | Error::StageOrder(_)
        | Error::Unsupported(_)
        | Error::UnsupportedVersion(_) => 4,
    }
}

trait Stage<T> {
    fn stage(self, name: &str) -> std::result::Result<T, Failure>;
}

impl<T> Stage<T> for Result<T> {
    fn stage(self, name: &str) -> std::result::Result<T, Failure> {
        self.map_err(|e| Failure {
            code: exit_code(&e),
            message: format!("{name}: {e}"),
        })
    }
}

type Outcome = std::result::Result<String, Failure>;

/// Puts the offending path into I/O error messages.
fn with_path<T>(path: &Path, result: Result<T>) -> Result<T> {
    result.map_err(|e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(
            io.kind(),
            format!("{}: {io}", path.display()),
        )),
        other => other,
    })
}

fn banner(out: &mut String, quiet: bool) {
    if !quiet {
        writeln!(out, "mlkit {}", env!("CARGO_PKG_VERSION")).unwrap();
    }
}

/// Reads the CSV and defines its columns. Without column specs every column
/// is defined: continuous if all its cells are numbers, nominal otherwise.
fn load_dataset(config: &CliConfig) -> Result<VersatileDataset> {
    let table = with_path(
        &config.data,
        CsvTable::read_path(&config.data, config.header),
    )?;
    let header = table.header.clone();
    let width = table.rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut specs: Vec<(String, usize, ColumnType)> = config
        .columns
        .iter()
        .map(|c| (c.name.clone(), c.index, c.kind))
        .collect();
    if specs.is_empty() {
        for i in 0..width {
            let name = header
                .as_ref()
                .and_then(|h| h.get(i))
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .unwrap_or_else(|| format!("c{i}"));
            let numeric = table
                .rows
                .iter()
                .all(|r| r.get(i).is_some_and(|c| c.trim().parse::<f64>().is_ok()));
            let kind = if numeric {
                ColumnType::Continuous
            } else {
                ColumnType::Nominal
            };
            specs.push((name, i, kind));
        }
    }
    let mut data = VersatileDataset::from_table(table);
    for (name, index, kind) in &specs {
        data.define_source_column(name, *index, *kind)?;
    }
    Ok(data)
}

pub fn analyze(config: &CliConfig) -> Outcome {
    let mut out = String::new();
    banner(&mut out, config.quiet);
    let mut data = load_dataset(config).stage("load")?;
    data.analyze().stage("analyze")?;
    writeln!(out, "rows: {}", data.row_count()).unwrap();
    for (i, c) in data.columns().iter().enumerate() {
        let stats = data.stats(i);
        match (c.kind, stats) {
            (ColumnType::Continuous, Some(s)) => writeln!(
                out,
                "{}: continuous min={} max={} mean={} std={}",
                c.name, s.min, s.max, s.mean, s.std
            ),
            _ => writeln!(
                out,
                "{}: {} {} categories [{}]",
                c.name,
                c.kind,
                c.categories.len(),
                c.categories.join(",")
            ),
        }
        .unwrap();
    }
    Ok(out)
}

pub fn train(config: &CliConfig) -> Outcome {
    let mut out = String::new();
    banner(&mut out, config.quiet);
    let mut data = load_dataset(config).stage("load")?;
    let target = match &config.target {
        Some(t) => t.clone(),
        None => data
            .columns()
            .last()
            .map(|c| c.name.clone())
            .ok_or_else(|| Error::Config("no columns defined".into()))
            .stage("define")?,
    };
    data.define_single_output_by_name(&target).stage("define")?;
    data.analyze().stage("analyze")?;

    let mut pipeline = Pipeline::new(data);
    for (key, value) in &config.overrides {
        pipeline
            .hyperparameters_mut()
            .set(key, value)
            .stage("configure")?;
    }
    pipeline
        .select_method(config.model_kind)
        .stage("select_method")?;
    let method = pipeline.select_training().stage("select_training")?;
    pipeline.normalize().stage("normalize")?;
    pipeline
        .holdback_validation(config.holdback, true, config.seed)
        .stage("holdback")?;
    if config.folds >= 2 {
        pipeline
            .crossvalidate(config.folds, true)
            .stage("crossvalidate")?;
    } else {
        pipeline.train().stage("train")?;
    }

    writeln!(out, "model kind: {}", config.model_kind).unwrap();
    writeln!(out, "training method: {method}").unwrap();
    for report in pipeline.fold_reports() {
        writeln!(out, "{report}").unwrap();
    }
    let model = pipeline.best_model().stage("report")?;
    let helper = pipeline.helper().stage("report")?;
    let training = pipeline.training_pairs().stage("report")?;
    let validation = pipeline.validation_pairs().stage("report")?;
    let training_error = calculate_regression_error(model, training).stage("report")?;
    writeln!(out, "Training error: {training_error}").unwrap();
    if validation.is_empty() {
        writeln!(out, "Validation error: n/a (no rows held back)").unwrap();
    } else {
        let validation_error = calculate_regression_error(model, validation).stage("report")?;
        writeln!(out, "Validation error: {validation_error}").unwrap();
        if let Some(report) = classification_report(model, helper, validation).stage("report")? {
            writeln!(out, "Validation accuracy: {}", report.accuracy).unwrap();
        }
    }
    writeln!(
        out,
        "normalization:\n{}",
        pipeline.report_normalization().stage("report")?
    )
    .unwrap();
    writeln!(out, "model: {model}").unwrap();
    with_path(&config.out, pipeline.save(&config.out)).stage("save")?;
    writeln!(out, "saved model: {}", config.out.display()).unwrap();
    Ok(out)
}

fn read_rows(path: &Path, header: bool) -> Result<Vec<Vec<String>>> {
    Ok(with_path(path, CsvTable::read_path(path, header))?.rows)
}

fn check_width(saved: &SavedModel, row: &[String], line: usize) -> Result<()> {
    if row.len() != saved.source_width {
        return Err(Error::Schema(format!(
            "row {line} has {} cells, the model expects {}",
            row.len(),
            saved.source_width
        )));
    }
    Ok(())
}

pub fn evaluate(args: &ApplyArgs) -> Outcome {
    let mut out = String::new();
    banner(&mut out, args.quiet);
    let saved = with_path(&args.model, load_model(&args.model)).stage("load model")?;
    let rows = read_rows(&args.data, args.header).stage("load data")?;
    if rows.is_empty() {
        return Err(Error::Empty("no rows to evaluate".into())).stage("load data");
    }
    let unsupervised = saved.model.kind().is_unsupervised();
    let pairs = rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            check_width(&saved, row, i + 1)?;
            let mut pair = saved.helper.encode_row(row, i + 1)?;
            if unsupervised {
                pair.ideal = pair.input.clone();
            }
            Ok(pair)
        })
        .collect::<Result<Vec<DataPair>>>()
        .stage("encode")?;
    let error = calculate_regression_error(&saved.model, &pairs).stage("evaluate")?;
    writeln!(out, "model kind: {}", saved.model.kind()).unwrap();
    writeln!(out, "rows: {}", pairs.len()).unwrap();
    writeln!(out, "MSE: {error}").unwrap();
    if let Some(report) =
        classification_report(&saved.model, &saved.helper, &pairs).stage("evaluate")?
    {
        write!(out, "{report}").unwrap();
    }
    Ok(out)
}

pub fn predict(args: &PredictArgs) -> Outcome {
    let mut out = String::new();
    banner(&mut out, args.quiet);
    let saved = with_path(&args.model, load_model(&args.model)).stage("load model")?;
    let rows = match (&args.data, &args.row) {
        (Some(path), _) => read_rows(path, args.header),
        (None, Some(row)) => CsvTable::parse(row, false).map(|t| t.rows),
        (None, None) => Err(Error::Config("--data or --row is required".into())),
    }
    .stage("load data")?;
    let inputs = saved.helper.input_columns().count();
    for (i, row) in rows.iter().enumerate() {
        let line = i + 1;
        let encoded = if row.len() == saved.source_width {
            saved.helper.encode_input(row, line)
        } else if row.len() == inputs {
            saved.helper.encode_input_only(row, line)
        } else {
            Err(Error::Schema(format!(
                "row {line} has {} cells, expected {} (full row) or {inputs} (inputs only)",
                row.len(),
                saved.source_width
            )))
        }
        .stage("encode")?;
        if let Some(cluster) = saved.model.cluster(&encoded).stage("predict")? {
            writeln!(out, "cluster {cluster}").unwrap();
            continue;
        }
        let output = saved.model.compute(&encoded).stage("predict")?;
        let decoded = saved.helper.decode_output(&output).stage("decode")?;
        let cells: Vec<String> = decoded.iter().map(ToString::to_string).collect();
        writeln!(out, "{}", cells.join(",")).unwrap();
    }
    Ok(out)
}
