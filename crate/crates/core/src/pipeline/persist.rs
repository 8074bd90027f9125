//! Versioned JSON model files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Model, ModelKind};
use crate::dataset::{DataPair, NormalizationHelper};
use crate::error::{Error, Result};
use crate::gp::{FunctionSet, GpModel, GpNode};
use crate::models::{
    Activation, FeedforwardNetwork, GlmModel, KMeansModel, KnnModel, KnnTask, Link, RbfNetwork,
    RegressionModel, SomModel,
};

pub const FORMAT_VERSION: u64 = 1;

/// Shape of a model; together with the flat parameters it rebuilds the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Architecture {
    Feedforward {
        layer_sizes: Vec<usize>,
        activations: Vec<Activation>,
    },
    RbfNetwork {
        output_count: usize,
        centers: Vec<Vec<f64>>,
        widths: Vec<f64>,
    },
    Linear {
        input_count: usize,
    },
    Glm {
        input_count: usize,
        link: Link,
    },
    Knn {
        k: usize,
        task: KnnTask,
        pairs: Vec<DataPair>,
    },
    Som {
        rows: usize,
        cols: usize,
        input_count: usize,
    },
    KMeans {
        k: usize,
        dimension: usize,
    },
    Gp {
        input_count: usize,
        tree: String,
    },
}

impl Architecture {
    pub fn kind(&self) -> ModelKind {
        match self {
            Architecture::Feedforward { .. } => ModelKind::Feedforward,
            Architecture::RbfNetwork { .. } => ModelKind::RbfNetwork,
            Architecture::Linear { .. } => ModelKind::Linear,
            Architecture::Glm { .. } => ModelKind::Glm,
            Architecture::Knn { .. } => ModelKind::Knn,
            Architecture::Som { .. } => ModelKind::Som,
            Architecture::KMeans { .. } => ModelKind::KMeans,
            Architecture::Gp { .. } => ModelKind::Gp,
        }
    }

    fn of(model: &Model) -> Self {
        match model {
            Model::Feedforward(m) => Architecture::Feedforward {
                layer_sizes: m.layer_sizes().to_vec(),
                activations: m.activations().to_vec(),
            },
            Model::Rbf(m) => Architecture::RbfNetwork {
                output_count: m.output_count(),
                centers: m.centers().to_vec(),
                widths: m.widths().to_vec(),
            },
            Model::Linear(m) => Architecture::Linear {
                input_count: m.input_count(),
            },
            Model::Glm(m) => Architecture::Glm {
                input_count: m.input_count(),
                link: m.link(),
            },
            Model::Knn(m) => Architecture::Knn {
                k: m.k(),
                task: m.task(),
                pairs: m.pairs().to_vec(),
            },
            Model::Som(m) => Architecture::Som {
                rows: m.grid().0,
                cols: m.grid().1,
                input_count: m.input_count(),
            },
            Model::KMeans(m) => Architecture::KMeans {
                k: m.k(),
                dimension: m.dimension(),
            },
            Model::Gp(m) => Architecture::Gp {
                input_count: m.input_count(),
                tree: m.tree().to_string(),
            },
        }
    }

    fn build(self, parameters: &[f64]) -> Result<Model> {
        let mut model = match self {
            Architecture::Feedforward {
                layer_sizes,
                activations,
            } => Model::Feedforward(FeedforwardNetwork::new(&layer_sizes, &activations)?),
            Architecture::RbfNetwork {
                output_count,
                centers,
                widths,
            } => {
                let n = (centers.len() + 1) * output_count;
                Model::Rbf(RbfNetwork::new(
                    centers,
                    widths,
                    output_count,
                    vec![0.0; n],
                )?)
            }
            Architecture::Linear { input_count } => {
                Model::Linear(GlmModel::new(vec![0.0; input_count + 1], Link::Identity)?)
            }
            Architecture::Glm { input_count, link } => {
                Model::Glm(GlmModel::new(vec![0.0; input_count + 1], link)?)
            }
            Architecture::Knn { k, task, pairs } => Model::Knn(KnnModel::new(pairs, k, task)?),
            Architecture::Som {
                rows,
                cols,
                input_count,
            } => Model::Som(SomModel::new(
                rows,
                cols,
                vec![vec![0.0; input_count]; rows * cols],
            )?),
            Architecture::KMeans { k, dimension } => {
                Model::KMeans(KMeansModel::new(vec![vec![0.0; dimension]; k])?)
            }
            Architecture::Gp { input_count, tree } => Model::Gp(GpModel::new(
                GpNode::parse(&tree, &FunctionSet::standard())?,
                input_count,
            )?),
        };
        model.set_parameters(parameters)?;
        Ok(model)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ModelFile {
    format_version: u64,
    model_kind: ModelKind,
    architecture: Architecture,
    parameters: Vec<f64>,
    normalization: NormalizationHelper,
    source_width: usize,
}

/// A model with everything needed to apply it to raw rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SavedModel {
    pub model: Model,
    pub helper: NormalizationHelper,
    /// Number of cells in a source CSV row.
    pub source_width: usize,
}

impl SavedModel {
    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            format_version: FORMAT_VERSION,
            model_kind: self.model.kind(),
            architecture: Architecture::of(&self.model),
            parameters: self.model.parameters(),
            normalization: self.helper.clone(),
            source_width: self.source_width,
        };
        let mut text =
            serde_json::to_string_pretty(&file).map_err(|e| Error::Load(e.to_string()))?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::Load(format!("malformed model file: {e}")))?;
        let version = value
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::Load("missing format_version".into()))?;
        if version != FORMAT_VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let file: ModelFile = serde_json::from_value(value)
            .map_err(|e| Error::Load(format!("invalid model file: {e}")))?;
        if file.architecture.kind() != file.model_kind {
            return Err(Error::Load(format!(
                "model_kind '{}' does not match a '{}' architecture",
                file.model_kind,
                file.architecture.kind()
            )));
        }
        let helper = file.normalization.revalidate()?;
        let model = file
            .architecture
            .build(&file.parameters)
            .map_err(|e| Error::Load(format!("cannot rebuild model: {e}")))?;
        let expected_out = if file.model_kind.is_unsupervised() {
            helper.input_width()
        } else {
            helper.output_width()
        };
        if model.input_count() != helper.input_width() || model.output_count() != expected_out {
            return Err(Error::Load(
                "model shape does not match its normalization plan".into(),
            ));
        }
        if helper
            .columns()
            .iter()
            .any(|c| c.source_index >= file.source_width)
        {
            return Err(Error::Load(
                "source_width is smaller than a column index".into(),
            ));
        }
        Ok(Self {
            model,
            helper,
            source_width: file.source_width,
        })
    }
}

pub fn save_model(
    model: &Model,
    helper: &NormalizationHelper,
    source_width: usize,
    path: &Path,
) -> Result<()> {
    let saved = SavedModel {
        model: model.clone(),
        helper: helper.clone(),
        source_width,
    };
    std::fs::write(path, saved.to_json()?)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<SavedModel> {
    SavedModel::from_json(&std::fs::read_to_string(path)?)
}
