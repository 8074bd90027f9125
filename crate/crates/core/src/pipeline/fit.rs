//! Per-kind default training procedures.

use super::{Hyperparameters, Model, ModelKind};
use crate::dataset::DataPair;
use crate::error::{Error, Result};
use crate::gp::{evolve, ConstantPolicy, FunctionSet, GpConfig, GpModel};
use crate::models::{
    glm_fit_irls, kmeans_fit, linreg_fit, squared_distance, Activation, FeedforwardNetwork,
    IrlsConfig, KnnModel, KnnTask, Link, RbfNetwork, SomConfig, SomModel,
};
use crate::rng::DeterministicRng;
use crate::train::{train_until, GradientSettings, StopCriteria};

/// What the fitting code needs to know about the normalized problem.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Problem {
    pub kind: ModelKind,
    /// Number of target classes when the single output is categorical.
    pub classes: Option<usize>,
}

pub(crate) struct Fitted {
    pub model: Model,
    pub epochs: usize,
}

fn inputs(pairs: &[DataPair]) -> Vec<Vec<f64>> {
    pairs.iter().map(|p| p.input.clone()).collect()
}

fn stop(hyper: &Hyperparameters) -> StopCriteria {
    StopCriteria {
        max_epochs: hyper.max_epochs,
        target_error: hyper.target_error,
        patience: hyper.patience,
        min_improvement: hyper.min_improvement,
    }
}

fn single_output(pairs: &[DataPair], kind: ModelKind) -> Result<()> {
    if pairs[0].ideal.len() != 1 {
        return Err(Error::Unsupported(format!(
            "{kind} needs exactly one encoded output, got {}",
            pairs[0].ideal.len()
        )));
    }
    Ok(())
}

/// Trains a fresh model of `problem.kind` on `pairs`; all randomness comes
/// from `seed`.
pub(crate) fn fit(
    problem: Problem,
    hyper: &Hyperparameters,
    pairs: &[DataPair],
    seed: u64,
    workers: usize,
) -> Result<Fitted> {
    if pairs.is_empty() {
        return Err(Error::Empty("no training pairs".into()));
    }
    let mut rng = DeterministicRng::new(seed);
    let n_in = pairs[0].input.len();
    let n_out = pairs[0].ideal.len();
    let gradient = GradientSettings {
        chunk_size: hyper.chunk_size,
        workers,
    };
    let classification = problem.classes.is_some();
    Ok(match problem.kind {
        ModelKind::Feedforward => {
            let hidden = hyper.hidden.unwrap_or(((n_in + n_out) * 2).div_ceil(3) + 1);
            let out_act = if classification {
                Activation::Tanh
            } else {
                Activation::Linear
            };
            let mut net = FeedforwardNetwork::init(
                &[n_in, hidden, n_out],
                &[Activation::Tanh, out_act],
                &mut rng,
            )?;
            let mut trainer = hyper.trainer.build(gradient);
            let history = train_until(trainer.as_mut(), &mut net, pairs, stop(hyper))?;
            Fitted {
                model: Model::Feedforward(net),
                epochs: history.epochs(),
            }
        }
        ModelKind::RbfNetwork => {
            let points = inputs(pairs);
            let units = hyper
                .units
                .unwrap_or_else(|| (pairs.len() as f64).sqrt().ceil() as usize)
                .clamp(1, pairs.len());
            let centers: Vec<Vec<f64>> = {
                let fit = kmeans_fit(&points, units, 100, &mut rng)?;
                (0..units).map(|j| fit.model.centroid(j).to_vec()).collect()
            };
            let width = rbf_width(&centers, &points);
            let widths = vec![width; units];
            let mut rbf = RbfNetwork::new(centers, widths, n_out, vec![0.0; (units + 1) * n_out])?;
            let features: Vec<DataPair> = pairs
                .iter()
                .map(|p| Ok(DataPair::new(rbf.basis(&p.input)?, p.ideal.clone())))
                .collect::<Result<_>>()?;
            let mut head =
                FeedforwardNetwork::init(&[units, n_out], &[Activation::Linear], &mut rng)?;
            let mut trainer = hyper.trainer.build(gradient);
            let history = train_until(trainer.as_mut(), &mut head, &features, stop(hyper))?;
            crate::models::RegressionModel::set_parameters(&mut rbf, head.weights())?;
            Fitted {
                model: Model::Rbf(rbf),
                epochs: history.epochs(),
            }
        }
        ModelKind::Linear => {
            single_output(pairs, problem.kind)?;
            Fitted {
                model: Model::Linear(linreg_fit(pairs)?),
                epochs: 0,
            }
        }
        ModelKind::Glm => {
            single_output(pairs, problem.kind)?;
            let link = match problem.classes {
                Some(2) => Link::Logit,
                Some(n) => {
                    return Err(Error::Unsupported(format!(
                        "glm supports 2 classes, target has {n}"
                    )))
                }
                None => Link::Identity,
            };
            let fit = glm_fit_irls(pairs, link, IrlsConfig::default())?;
            Fitted {
                model: Model::Glm(fit.model),
                epochs: fit.iterations,
            }
        }
        ModelKind::Knn => {
            let task = if classification {
                KnnTask::Classify
            } else {
                KnnTask::Regress
            };
            let k = hyper.k.clamp(1, pairs.len());
            Fitted {
                model: Model::Knn(KnnModel::new(pairs.to_vec(), k, task)?),
                epochs: 0,
            }
        }
        ModelKind::Som => {
            let (rows, cols) = hyper.grid;
            let mut som = SomModel::init(rows, cols, n_in, 0.0, 1.0, &mut rng)?;
            let config = SomConfig {
                epochs: hyper.som_epochs,
                ..SomConfig::default()
            };
            som.train(&inputs(pairs), &config, &mut rng)?;
            Fitted {
                model: Model::Som(som),
                epochs: hyper.som_epochs,
            }
        }
        ModelKind::KMeans => {
            let k = hyper
                .clusters
                .or(problem.classes)
                .unwrap_or(3)
                .clamp(1, pairs.len());
            let fit = kmeans_fit(&inputs(pairs), k, 100, &mut rng)?;
            Fitted {
                model: Model::KMeans(fit.model),
                epochs: fit.iterations,
            }
        }
        ModelKind::Gp => {
            single_output(pairs, problem.kind)?;
            let config = GpConfig {
                population: hyper.population,
                workers,
                ..GpConfig::default()
            };
            let run = evolve(
                pairs,
                &config,
                &FunctionSet::standard(),
                &ConstantPolicy::default(),
                &mut rng,
                hyper.generations,
            )?;
            Fitted {
                model: Model::Gp(GpModel::new(run.best, n_in)?),
                epochs: hyper.generations,
            }
        }
    })
}

/// Shared Gaussian width `d_max / sqrt(2 m)` from the largest distance
/// between the `m` centers; falls back to the RMS spread of the points.
fn rbf_width(centers: &[Vec<f64>], points: &[Vec<f64>]) -> f64 {
    let mut d_max: f64 = 0.0;
    for (i, a) in centers.iter().enumerate() {
        for b in &centers[i + 1..] {
            d_max = d_max.max(squared_distance(a, b).sqrt());
        }
    }
    if d_max > 0.0 {
        return d_max / (2.0 * centers.len() as f64).sqrt();
    }
    let d = points[0].len();
    let mean: Vec<f64> = (0..d)
        .map(|j| points.iter().map(|p| p[j]).sum::<f64>() / points.len() as f64)
        .collect();
    let rms = (points
        .iter()
        .map(|p| squared_distance(p, &mean))
        .sum::<f64>()
        / points.len() as f64)
        .sqrt();
    if rms > 0.0 {
        rms
    } else {
        1.0
    }
}
