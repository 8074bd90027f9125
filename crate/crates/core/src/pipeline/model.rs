use std::fmt;

use super::ModelKind;
use crate::error::Result;
use crate::gp::GpModel;
use crate::models::{
    FeedforwardNetwork, GlmModel, KMeansModel, KnnModel, RbfNetwork, RegressionModel, SomModel,
};

/// Any fitted model the pipeline can produce.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Feedforward(FeedforwardNetwork),
    Rbf(RbfNetwork),
    Linear(GlmModel),
    Glm(GlmModel),
    Knn(KnnModel),
    Som(SomModel),
    KMeans(KMeansModel),
    Gp(GpModel),
}

macro_rules! dispatch {
    ($self:expr, $m:ident => $body:expr) => {
        match $self {
            Model::Feedforward($m) => $body,
            Model::Rbf($m) => $body,
            Model::Linear($m) => $body,
            Model::Glm($m) => $body,
            Model::Knn($m) => $body,
            Model::Som($m) => $body,
            Model::KMeans($m) => $body,
            Model::Gp($m) => $body,
        }
    };
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Feedforward(_) => ModelKind::Feedforward,
            Model::Rbf(_) => ModelKind::RbfNetwork,
            Model::Linear(_) => ModelKind::Linear,
            Model::Glm(_) => ModelKind::Glm,
            Model::Knn(_) => ModelKind::Knn,
            Model::Som(_) => ModelKind::Som,
            Model::KMeans(_) => ModelKind::KMeans,
            Model::Gp(_) => ModelKind::Gp,
        }
    }

    /// Cluster or grid-unit index for the unsupervised kinds.
    pub fn cluster(&self, input: &[f64]) -> Result<Option<usize>> {
        Ok(match self {
            Model::KMeans(m) => Some(m.assign(input)?),
            Model::Som(m) => {
                let (r, c) = m.bmu(input)?;
                Some(r * m.grid().1 + c)
            }
            _ => None,
        })
    }
}

impl RegressionModel for Model {
    fn input_count(&self) -> usize {
        dispatch!(self, m => m.input_count())
    }

    fn output_count(&self) -> usize {
        dispatch!(self, m => m.output_count())
    }

    fn compute(&self, input: &[f64]) -> Result<Vec<f64>> {
        dispatch!(self, m => m.compute(input))
    }

    fn parameters(&self) -> Vec<f64> {
        dispatch!(self, m => m.parameters())
    }

    fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        dispatch!(self, m => m.set_parameters(params))
    }

    fn parameter_count(&self) -> usize {
        dispatch!(self, m => m.parameter_count())
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        dispatch!(self, m => write!(f, "{m}"))
    }
}
