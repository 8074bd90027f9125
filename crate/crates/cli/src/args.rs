//! Command-line flags and the optional JSON config file that mirrors them.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use mlkit::dataset::ColumnType;
use mlkit::error::{Error, Result};
use mlkit::pipeline::ModelKind;

#[derive(Debug, Parser)]
#[command(
    name = "mlkit",
    version,
    about = "Train, evaluate and apply interchangeable models on CSV data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print per-column statistics and categories.
    Analyze(DataArgs),
    /// Normalize, hold back, cross-validate and save the best model.
    Train(TrainArgs),
    /// Report the error of a saved model on a CSV file.
    Evaluate(ApplyArgs),
    /// Print one decoded prediction per input row.
    Predict(PredictArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Input CSV file.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// The first CSV record is a header.
    #[arg(long)]
    pub header: bool,
    /// Column definition `name:index:kind` with kind continuous, nominal or ordinal.
    #[arg(long = "col", value_name = "NAME:INDEX:KIND")]
    pub columns: Vec<String>,
    /// JSON file with defaults for any flag; flags given on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Suppress the version banner.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Output column; defaults to the last defined column.
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub model_kind: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fraction of rows held back for validation.
    #[arg(long)]
    pub holdback: Option<f64>,
    /// Cross-validation folds; 1 trains a single model on the training portion.
    #[arg(long)]
    pub folds: Option<usize>,
    /// Where to write the model file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Hyperparameter override `key=value`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ApplyArgs {
    /// Saved model file.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub header: bool,
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// CSV file of rows to predict.
    #[arg(long, conflicts_with = "row", required_unless_present = "row")]
    pub data: Option<PathBuf>,
    /// A single comma-separated row.
    #[arg(long)]
    pub row: Option<String>,
    #[arg(long)]
    pub header: bool,
    #[arg(long)]
    pub quiet: bool,
}

/// Contents of a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub data: Option<PathBuf>,
    pub header: Option<bool>,
    #[serde(default)]
    pub columns: Vec<String>,
    pub target: Option<String>,
    pub model_kind: Option<String>,
    pub seed: Option<u64>,
    pub holdback: Option<f64>,
    pub folds: Option<usize>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub set: Vec<String>,
    pub quiet: Option<bool>,
}

impl ConfigFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnSpec {
    pub name: String,
    pub index: usize,
    pub kind: ColumnType,
}

pub fn parse_column(spec: &str) -> Result<ColumnSpec> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [name, index, kind] = parts[..] else {
        return Err(Error::Config(format!(
            "column spec '{spec}' is not name:index:kind"
        )));
    };
    if name.is_empty() {
        return Err(Error::Config(format!("column spec '{spec}' has no name")));
    }
    let index = index
        .parse()
        .map_err(|_| Error::Config(format!("column spec '{spec}' has a bad index")))?;
    Ok(ColumnSpec {
        name: name.to_string(),
        index,
        kind: kind.parse()?,
    })
}

/// Everything `train` and `analyze` need once flags and config are merged.
#[derive(Debug, Clone)]
pub struct CliConfig {
    pub data: PathBuf,
    pub header: bool,
    pub columns: Vec<ColumnSpec>,
    pub target: Option<String>,
    pub model_kind: ModelKind,
    pub seed: u64,
    pub holdback: f64,
    pub folds: usize,
    pub out: PathBuf,
    pub overrides: Vec<(String, String)>,
    pub quiet: bool,
}

impl CliConfig {
    pub fn from_data_args(args: &DataArgs) -> Result<Self> {
        Self::merge(&TrainArgs {
            data: args.clone(),
            target: None,
            model_kind: None,
            seed: None,
            holdback: None,
            folds: None,
            out: None,
            overrides: Vec::new(),
        })
    }

    pub fn merge(args: &TrainArgs) -> Result<Self> {
        let file = match &args.data.config {
            Some(path) => ConfigFile::read(path)?,
            None => ConfigFile::default(),
        };
        let data = args
            .data
            .data
            .clone()
            .or(file.data)
            .ok_or_else(|| Error::Config("--data is required".into()))?;
        let column_specs = if args.data.columns.is_empty() {
            &file.columns
        } else {
            &args.data.columns
        };
        let columns = column_specs
            .iter()
            .map(|s| parse_column(s))
            .collect::<Result<Vec<_>>>()?;
        let override_specs = if args.overrides.is_empty() {
            &file.set
        } else {
            &args.overrides
        };
        let overrides = override_specs
            .iter()
            .map(|s| {
                s.split_once('=')
                    .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                    .ok_or_else(|| Error::Config(format!("override '{s}' is not key=value")))
            })
            .collect::<Result<Vec<_>>>()?;
        let model_kind = match args.model_kind.as_ref().or(file.model_kind.as_ref()) {
            Some(token) => token.parse()?,
            None => ModelKind::Feedforward,
        };
        Ok(Self {
            data,
            header: args.data.header || file.header.unwrap_or(false),
            columns,
            target: args.target.clone().or(file.target),
            model_kind,
            seed: args.seed.or(file.seed).unwrap_or(1001),
            holdback: args.holdback.or(file.holdback).unwrap_or(0.3),
            folds: args.folds.or(file.folds).unwrap_or(5),
            out: args
                .out
                .clone()
                .or(file.out)
                .unwrap_or_else(|| PathBuf::from("model.json")),
            overrides,
            quiet: args.data.quiet || file.quiet.unwrap_or(false),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_specs() {
        let c = parse_column("species:4:nominal").unwrap();
        assert_eq!(
            (c.name.as_str(), c.index, c.kind),
            ("species", 4, ColumnType::Nominal)
        );
        assert!(parse_column("a:1").is_err());
        assert!(parse_column("a:x:continuous").is_err());
        assert!(parse_column("a:1:text").is_err());
        assert!(parse_column(":1:nominal").is_err());
    }

    #[test]
    fn flags_win_over_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(
            &path,
            r#"{"data": "a.csv", "seed": 5, "folds": 3, "set": ["k=2"]}"#,
        )
        .unwrap();
        let cli = Cli::try_parse_from([
            "mlkit",
            "train",
            "--config",
            path.to_str().unwrap(),
            "--seed",
            "9",
        ])
        .unwrap();
        let Command::Train(args) = cli.command else {
            panic!()
        };
        let config = CliConfig::merge(&args).unwrap();
        assert_eq!(config.data, PathBuf::from("a.csv"));
        assert_eq!((config.seed, config.folds, config.holdback), (9, 3, 0.3));
        assert_eq!(config.overrides, vec![("k".to_string(), "2".to_string())]);
        assert_eq!(config.model_kind, ModelKind::Feedforward);
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"sed": 5}"#).unwrap();
        assert!(matches!(ConfigFile::read(&path), Err(Error::Config(_))));
    }
}
