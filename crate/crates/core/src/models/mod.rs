//! Model families sharing the [`RegressionModel`] contract.

mod activation;
mod feedforward;
mod glm;
mod kmeans;
mod knn;
pub mod linalg;
mod rbf;
mod som;

pub use activation::Activation;
pub use feedforward::{weight_count, FeedforwardNetwork, ForwardTrace};
pub use glm::{glm_fit_irls, linreg_fit, GlmFit, GlmModel, IrlsConfig, Link};
pub use kmeans::{kmeans_fit, KMeansFit, KMeansModel};
pub use knn::{KnnModel, KnnTask};
pub use rbf::RbfNetwork;
pub use som::{SomConfig, SomModel};

use crate::dataset::DataPair;
use crate::error::{Error, Result};

/// The interchangeability seam: a fixed-width vector function whose state is
/// exposed as one flat parameter vector.
pub trait RegressionModel {
    fn input_count(&self) -> usize;
    fn output_count(&self) -> usize;
    fn compute(&self, input: &[f64]) -> Result<Vec<f64>>;
    /// Flat copy of the trainable parameters (empty for lazy models).
    fn parameters(&self) -> Vec<f64>;
    fn set_parameters(&mut self, params: &[f64]) -> Result<()>;

    fn parameter_count(&self) -> usize {
        self.parameters().len()
    }
}

/// Mean squared error over pairs and output components.
pub fn mse<M: RegressionModel + ?Sized>(model: &M, pairs: &[DataPair]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Empty("no pairs to evaluate".into()));
    }
    let mut sse = 0.0;
    let mut count = 0usize;
    for p in pairs {
        let y = model.compute(&p.input)?;
        check_len(y.len(), p.ideal.len())?;
        for (a, t) in y.iter().zip(&p.ideal) {
            sse += (a - t) * (a - t);
        }
        count += y.len();
    }
    if count == 0 {
        return Err(Error::Empty("model has no outputs".into()));
    }
    Ok(sse / count as f64)
}

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index and squared distance of the nearest row; first minimum wins.
pub(crate) fn nearest<'a>(rows: impl Iterator<Item = &'a [f64]>, x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, row) in rows.enumerate() {
        let d = squared_distance(row, x);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::DeterministicRng;

    fn round_trip_is_bit_identical<M: RegressionModel>(model: &mut M, rng: &mut DeterministicRng) {
        let inputs: Vec<Vec<f64>> = (0..100)
            .map(|_| {
                (0..model.input_count())
                    .map(|_| rng.uniform(-2.0, 2.0))
                    .collect()
            })
            .collect();
        let before: Vec<Vec<f64>> = inputs.iter().map(|x| model.compute(x).unwrap()).collect();
        let p = model.parameters();
        model.set_parameters(&p).unwrap();
        for (x, b) in inputs.iter().zip(&before) {
            let after = model.compute(x).unwrap();
            assert_eq!(
                after.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                b.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
            );
            // purity: same input, same output
            assert_eq!(model.compute(x).unwrap(), after);
        }
    }

    #[test]
    fn parameter_round_trip_for_parametric_models() {
        let mut rng = DeterministicRng::new(100);
        let mut ff = FeedforwardNetwork::init(
            &[3, 4, 2],
            &[Activation::Tanh, Activation::Sigmoid],
            &mut rng,
        )
        .unwrap();
        round_trip_is_bit_identical(&mut ff, &mut rng);
        let mut rbf = RbfNetwork::new(
            vec![vec![0.0, 1.0], vec![1.0, -1.0]],
            vec![0.5, 1.5],
            2,
            (0..6).map(|_| rng.uniform(-1.0, 1.0)).collect(),
        )
        .unwrap();
        round_trip_is_bit_identical(&mut rbf, &mut rng);
        let mut glm = GlmModel::new(vec![0.3, -0.2, 0.1], Link::Logit).unwrap();
        round_trip_is_bit_identical(&mut glm, &mut rng);
        let mut som = SomModel::init(3, 3, 2, 0.0, 1.0, &mut rng).unwrap();
        round_trip_is_bit_identical(&mut som, &mut rng);
        let mut km = KMeansModel::new(vec![vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        round_trip_is_bit_identical(&mut km, &mut rng);
    }

    #[test]
    fn zero_weight_networks_output_activation_of_zero() {
        let mut rng = DeterministicRng::new(5);
        for _ in 0..20 {
            let layers: Vec<usize> = (0..2 + rng.index(3)).map(|_| 1 + rng.index(6)).collect();
            let acts: Vec<Activation> = (1..layers.len())
                .map(|_| {
                    [
                        Activation::Sigmoid,
                        Activation::Tanh,
                        Activation::Linear,
                        Activation::Relu,
                    ][rng.index(4)]
                })
                .collect();
            let net = FeedforwardNetwork::new(&layers, &acts).unwrap();
            let x: Vec<f64> = (0..layers[0]).map(|_| rng.uniform(-3.0, 3.0)).collect();
            let expected = acts.last().unwrap().apply(0.0);
            assert!(net.compute(&x).unwrap().iter().all(|&y| y == expected));
        }
    }

    #[test]
    fn knn_one_memorises_training_set() {
        let mut rng = DeterministicRng::new(6);
        let pairs: Vec<DataPair> = (0..40)
            .map(|i| {
                DataPair::new(
                    vec![rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)],
                    vec![(i % 3) as f64],
                )
            })
            .collect();
        let model = KnnModel::new(pairs.clone(), 1, KnnTask::Classify).unwrap();
        for p in &pairs {
            assert_eq!(model.compute(&p.input).unwrap(), p.ideal);
        }
    }

    #[test]
    fn mse_examples() {
        let net = FeedforwardNetwork::with_weights(&[1, 1], &[Activation::Linear], vec![1.0, 0.0])
            .unwrap();
        assert_eq!(
            mse(&net, &[DataPair::new(vec![1.0], vec![0.0])]).unwrap(),
            1.0
        );
        assert_eq!(
            mse(&net, &[DataPair::new(vec![2.0], vec![2.0])]).unwrap(),
            0.0
        );
        assert!(mse(&net, &[]).is_err());
    }
}
