//! Fully connected feedforward network stored as one flat weight vector.
//!
//! Layout: transitions in order (input->hidden1, ...); within a transition,
//! one block per target neuron holding its source weights in order followed
//! by its bias.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{check_len, Activation, RegressionModel};
use crate::error::{Error, Result};
use crate::rng::DeterministicRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedforwardNetwork {
    layer_sizes: Vec<usize>,
    activations: Vec<Activation>,
    weights: Vec<f64>,
}

/// Per-layer pre-activations and outputs recorded during a forward pass.
#[derive(Debug, Clone, Default)]
pub struct ForwardTrace {
    /// `sums[l]` are the pre-activations of layer `l + 1`.
    pub sums: Vec<Vec<f64>>,
    /// `outputs[0]` is the input; `outputs[l]` the output of layer `l`.
    pub outputs: Vec<Vec<f64>>,
}

pub fn weight_count(layer_sizes: &[usize]) -> usize {
    layer_sizes.windows(2).map(|w| (w[0] + 1) * w[1]).sum()
}

impl FeedforwardNetwork {
    /// A network with all weights zero.
    pub fn new(layer_sizes: &[usize], activations: &[Activation]) -> Result<Self> {
        if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 layers of size >= 1, got {layer_sizes:?}"
            )));
        }
        if activations.len() != layer_sizes.len() - 1 {
            return Err(Error::InvalidArgument(format!(
                "{} layers need {} activations, got {}",
                layer_sizes.len(),
                layer_sizes.len() - 1,
                activations.len()
            )));
        }
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            activations: activations.to_vec(),
            weights: vec![0.0; weight_count(layer_sizes)],
        })
    }

    /// Weights drawn uniformly from [-1, 1).
    pub fn init(
        layer_sizes: &[usize],
        activations: &[Activation],
        rng: &mut DeterministicRng,
    ) -> Result<Self> {
        let mut net = Self::new(layer_sizes, activations)?;
        for w in &mut net.weights {
            *w = rng.uniform(-1.0, 1.0);
        }
        Ok(net)
    }

    pub fn with_weights(
        layer_sizes: &[usize],
        activations: &[Activation],
        weights: Vec<f64>,
    ) -> Result<Self> {
        let mut net = Self::new(layer_sizes, activations)?;
        net.set_parameters(&weights)?;
        Ok(net)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn weight_count(&self) -> usize {
        self.weights.len()
    }

    /// Offset of transition `t` (layer `t` -> `t + 1`) in the weight vector.
    pub fn transition_offset(&self, t: usize) -> usize {
        weight_count(&self.layer_sizes[..=t])
    }

    /// Forward pass that records every layer; `compute` goes through here too.
    pub fn forward_trace(&self, input: &[f64]) -> Result<ForwardTrace> {
        check_len(self.layer_sizes[0], input.len())?;
        let layers = self.layer_sizes.len();
        let mut trace = ForwardTrace {
            sums: Vec::with_capacity(layers - 1),
            outputs: Vec::with_capacity(layers),
        };
        trace.outputs.push(input.to_vec());
        let mut offset = 0;
        for t in 0..layers - 1 {
            let (src, dst) = (self.layer_sizes[t], self.layer_sizes[t + 1]);
            let act = self.activations[t];
            let prev = &trace.outputs[t];
            let mut sums = Vec::with_capacity(dst);
            let mut outs = Vec::with_capacity(dst);
            for j in 0..dst {
                let block = &self.weights[offset + j * (src + 1)..offset + (j + 1) * (src + 1)];
                let mut s = block[src];
                for (w, x) in block[..src].iter().zip(prev) {
                    s += w * x;
                }
                sums.push(s);
                outs.push(act.apply(s));
            }
            offset += (src + 1) * dst;
            trace.sums.push(sums);
            trace.outputs.push(outs);
        }
        Ok(trace)
    }
}

impl RegressionModel for FeedforwardNetwork {
    fn input_count(&self) -> usize {
        self.layer_sizes[0]
    }

    fn output_count(&self) -> usize {
        *self.layer_sizes.last().expect("at least two layers")
    }

    fn compute(&self, input: &[f64]) -> Result<Vec<f64>> {
        let mut trace = self.forward_trace(input)?;
        Ok(trace.outputs.pop().expect("output layer"))
    }

    fn parameters(&self) -> Vec<f64> {
        self.weights.clone()
    }

    fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        check_len(self.weights.len(), params.len())?;
        self.weights.copy_from_slice(params);
        Ok(())
    }
}

impl fmt::Display for FeedforwardNetwork {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sizes: Vec<String> = self.layer_sizes.iter().map(usize::to_string).collect();
        let acts: Vec<&str> = self.activations.iter().map(|a| a.name()).collect();
        write!(
            f,
            "feedforward [{}] activations [{}], {} weights",
            sizes.join("-"),
            acts.join(","),
            self.weights.len()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights_give_activation_of_zero() {
        let net =
            FeedforwardNetwork::new(&[3, 4, 2], &[Activation::Tanh, Activation::Sigmoid]).unwrap();
        assert_eq!(net.compute(&[0.3, -1.0, 2.0]).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn single_linear_neuron_is_identity() {
        let net = FeedforwardNetwork::with_weights(&[1, 1], &[Activation::Linear], vec![1.0, 0.0])
            .unwrap();
        for x in [-3.0, 0.0, 2.5] {
            assert_eq!(net.compute(&[x]).unwrap(), vec![x]);
        }
    }

    #[test]
    fn hand_computed_two_two_one() {
        // hidden: h0 = tanh(0.5 x0 - 0.25 x1 + 0.1), h1 = tanh(-0.3 x0 + 0.8 x1 - 0.2)
        // output: y = 1.5 h0 - 0.7 h1 + 0.05
        let w = vec![0.5, -0.25, 0.1, -0.3, 0.8, -0.2, 1.5, -0.7, 0.05];
        let net = FeedforwardNetwork::with_weights(
            &[2, 2, 1],
            &[Activation::Tanh, Activation::Linear],
            w,
        )
        .unwrap();
        let (x0, x1) = (0.4f64, -1.2f64);
        let h0 = (0.5 * x0 - 0.25 * x1 + 0.1f64).tanh();
        let h1 = (-0.3 * x0 + 0.8 * x1 - 0.2f64).tanh();
        let expected = 1.5 * h0 - 0.7 * h1 + 0.05;
        // tanh(0.6) = 0.5370495669980353, tanh(-1.28) = -0.8564849154724974
        assert!((h0 - 0.5370495669980353).abs() < 1e-12);
        assert!((h1 + 0.8564849154724974).abs() < 1e-12);
        let y = net.compute(&[x0, x1]).unwrap()[0];
        assert!((y - expected).abs() < 1e-12);
        assert!((y - 1.4551137913278012).abs() < 1e-12);
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let acts = [Activation::Tanh, Activation::Linear];
        let a = FeedforwardNetwork::init(&[4, 5, 2], &acts, &mut DeterministicRng::new(9)).unwrap();
        let b = FeedforwardNetwork::init(&[4, 5, 2], &acts, &mut DeterministicRng::new(9)).unwrap();
        assert_eq!(a.weight_count(), 5 * 5 + 6 * 2);
        assert_eq!(a.weight_count(), 37);
        assert_eq!(a, b);
        assert!(a.weights().iter().all(|w| (-1.0..=1.0).contains(w)));
    }

    #[test]
    fn invalid_shapes() {
        assert!(FeedforwardNetwork::new(&[3], &[]).is_err());
        assert!(FeedforwardNetwork::new(&[3, 0], &[Activation::Tanh]).is_err());
        assert!(FeedforwardNetwork::new(&[3, 2], &[]).is_err());
        let net = FeedforwardNetwork::new(&[2, 1], &[Activation::Linear]).unwrap();
        assert!(matches!(
            net.compute(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
