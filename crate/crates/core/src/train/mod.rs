//! Gradient-based training of feedforward networks.

mod gradient;
mod propagation;
mod scg;

pub use gradient::{compute_gradient, GradientResult, GradientSettings};
pub use propagation::{Backprop, BackpropConfig, Quickprop, QuickpropConfig, Rprop, RpropConfig};
pub use scg::{scg_train, Scg, ScgConfig};

use serde::{Deserialize, Serialize};

use crate::dataset::DataPair;
use crate::error::{Error, Result};
use crate::models::{mse, FeedforwardNetwork};

/// One full-batch epoch at a time.
pub trait Trainer {
    fn name(&self) -> &'static str;

    /// Runs one epoch and returns the error of the weights before the update.
    fn iteration(&mut self, net: &mut FeedforwardNetwork, batch: &[DataPair]) -> Result<f64>;

    /// True once no further progress is possible (e.g. zero gradient).
    fn converged(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainerKind {
    Backprop,
    Rprop,
    Quickprop,
    Scg,
}

impl std::str::FromStr for TrainerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "backprop" => Ok(TrainerKind::Backprop),
            "rprop" => Ok(TrainerKind::Rprop),
            "quickprop" => Ok(TrainerKind::Quickprop),
            "scg" => Ok(TrainerKind::Scg),
            other => Err(Error::Config(format!("unknown trainer '{other}'"))),
        }
    }
}

impl TrainerKind {
    pub fn name(self) -> &'static str {
        match self {
            TrainerKind::Backprop => "backprop",
            TrainerKind::Rprop => "rprop",
            TrainerKind::Quickprop => "quickprop",
            TrainerKind::Scg => "scg",
        }
    }

    /// A trainer of this kind with default hyperparameters.
    pub fn build(self, gradient: GradientSettings) -> Box<dyn Trainer + Send> {
        match self {
            TrainerKind::Backprop => Box::new(
                Backprop::new(BackpropConfig::default(), gradient).expect("valid defaults"),
            ),
            TrainerKind::Rprop => {
                Box::new(Rprop::new(RpropConfig::default(), gradient).expect("valid defaults"))
            }
            TrainerKind::Quickprop => Box::new(
                Quickprop::new(QuickpropConfig::default(), gradient).expect("valid defaults"),
            ),
            TrainerKind::Scg => {
                Box::new(Scg::new(ScgConfig::default(), gradient).expect("valid defaults"))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopCriteria {
    pub max_epochs: usize,
    /// Stop as soon as the MSE is at or below this value.
    pub target_error: f64,
    /// Stop after this many consecutive epochs without `min_improvement`.
    pub patience: Option<usize>,
    pub min_improvement: f64,
}

impl Default for StopCriteria {
    fn default() -> Self {
        Self {
            max_epochs: 500,
            target_error: 0.0,
            patience: Some(50),
            min_improvement: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingHistory {
    /// MSE before training followed by the MSE after each epoch.
    pub errors: Vec<f64>,
}

impl TrainingHistory {
    pub fn epochs(&self) -> usize {
        self.errors.len().saturating_sub(1)
    }

    pub fn final_error(&self) -> f64 {
        *self.errors.last().expect("history holds the initial error")
    }
}

/// Shared epoch loop: trains until the target error, the patience limit or
/// the epoch budget is hit.
pub fn train_until(
    trainer: &mut dyn Trainer,
    net: &mut FeedforwardNetwork,
    batch: &[DataPair],
    stop: StopCriteria,
) -> Result<TrainingHistory> {
    if stop.max_epochs == 0 {
        return Err(Error::InvalidArgument("max_epochs must be >= 1".into()));
    }
    let mut errors = vec![mse(net, batch)?];
    if errors[0] <= stop.target_error {
        return Ok(TrainingHistory { errors });
    }
    let mut best = errors[0];
    let mut stale = 0usize;
    for _ in 0..stop.max_epochs {
        trainer.iteration(net, batch)?;
        let e = mse(net, batch)?;
        errors.push(e);
        if e <= stop.target_error || trainer.converged() {
            break;
        }
        if e < best - stop.min_improvement {
            best = e;
            stale = 0;
        } else {
            stale += 1;
            if stop.patience.is_some_and(|p| stale >= p) {
                break;
            }
        }
    }
    Ok(TrainingHistory { errors })
}
