//! Derivative-free minimizers over real vectors.

mod anneal;
mod ga;
mod nelder_mead;
mod pso;

pub use anneal::{acceptance_probability, minimize_anneal, AnnealConfig};
pub use ga::{minimize_ga, GaVectorConfig};
pub use nelder_mead::{minimize_nelder_mead, NelderMeadConfig};
pub use pso::{minimize_pso, pso_velocity, PsoConfig};

use crate::dataset::DataPair;
use crate::error::{Error, Result};
use crate::models::{mse, RegressionModel};
use crate::parallel::map_indexed;

/// A score to minimize. `evaluate` must be pure.
pub trait Objective: Sync {
    fn dimension(&self) -> usize;
    fn evaluate(&self, x: &[f64]) -> f64;
}

/// Wraps a closure as an [`Objective`].
pub struct FnObjective<F> {
    dimension: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnObjective<F> {
    pub fn new(dimension: usize, f: F) -> Self {
        Self { dimension, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Objective for FnObjective<F> {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn evaluate(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub best: Vec<f64>,
    pub score: f64,
    /// Best score so far after each iteration or generation.
    pub history: Vec<f64>,
}

/// NaN scores would poison every comparison, so they rank as +inf.
pub(crate) fn sanitize(score: f64) -> f64 {
    if score.is_nan() {
        f64::INFINITY
    } else {
        score
    }
}

pub(crate) fn evaluate_all<O: Objective + ?Sized>(
    objective: &O,
    points: &[Vec<f64>],
    workers: usize,
) -> Vec<f64> {
    map_indexed(points.len(), workers, |i| {
        sanitize(objective.evaluate(&points[i]))
    })
}

/// Per-dimension box, defaulting to ±10 when `bounds` is empty.
pub(crate) fn resolve_bounds(bounds: &[(f64, f64)], dimension: usize) -> Result<Vec<(f64, f64)>> {
    if bounds.is_empty() {
        return Ok(vec![(-10.0, 10.0); dimension]);
    }
    if bounds.len() != dimension {
        return Err(Error::DimensionMismatch {
            expected: dimension,
            actual: bounds.len(),
        });
    }
    if bounds.iter().any(|(lo, hi)| !(lo < hi)) {
        return Err(Error::Config("every bound needs lo < hi".into()));
    }
    Ok(bounds.to_vec())
}

pub(crate) fn check_dimension(dimension: usize) -> Result<()> {
    if dimension == 0 {
        return Err(Error::InvalidArgument(
            "objective dimension must be >= 1".into(),
        ));
    }
    Ok(())
}

/// MSE of a model with substituted parameters; the caller's model is never
/// touched.
pub struct ModelLoss<'a, M> {
    model: M,
    pairs: &'a [DataPair],
}

pub fn model_loss_objective<'a, M>(model: &M, pairs: &'a [DataPair]) -> Result<ModelLoss<'a, M>>
where
    M: RegressionModel + Clone + Sync,
{
    if pairs.is_empty() {
        return Err(Error::Empty("no pairs for the loss objective".into()));
    }
    if model.parameter_count() == 0 {
        return Err(Error::InvalidArgument(
            "model has no parameters to optimize".into(),
        ));
    }
    Ok(ModelLoss {
        model: model.clone(),
        pairs,
    })
}

impl<M: RegressionModel + Clone + Sync> ModelLoss<'_, M> {
    /// The loss as a `Result`, for callers that want dimension errors.
    pub fn try_evaluate(&self, params: &[f64]) -> Result<f64> {
        let mut m = self.model.clone();
        m.set_parameters(params)?;
        mse(&m, self.pairs)
    }
}

impl<M: RegressionModel + Clone + Sync> Objective for ModelLoss<'_, M> {
    fn dimension(&self) -> usize {
        self.model.parameter_count()
    }

    /// Invalid parameter vectors score +inf.
    fn evaluate(&self, x: &[f64]) -> f64 {
        self.try_evaluate(x).unwrap_or(f64::INFINITY)
    }
}
