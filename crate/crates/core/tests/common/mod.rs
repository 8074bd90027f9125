//! Fixtures shared by the training and acceptance suites.
#![allow(dead_code)]

use mlkit::dataset::DataPair;
use mlkit::models::{Activation, FeedforwardNetwork};
use mlkit::train::{compute_gradient, GradientSettings};
use mlkit::DeterministicRng;
use twofloat::TwoFloat;

pub const ACTIVATIONS: [Activation; 4] = [
    Activation::Sigmoid,
    Activation::Tanh,
    Activation::Linear,
    Activation::Relu,
];

pub fn xor() -> Vec<DataPair> {
    [
        (0.0, 0.0, 0.0),
        (0.0, 1.0, 1.0),
        (1.0, 0.0, 1.0),
        (1.0, 1.0, 0.0),
    ]
    .iter()
    .map(|&(a, b, t)| DataPair::new(vec![a, b], vec![t]))
    .collect()
}

pub fn xor_net(seed: u64) -> FeedforwardNetwork {
    let mut rng = DeterministicRng::new(seed);
    FeedforwardNetwork::init(&[2, 4, 1], &[Activation::Tanh, Activation::Tanh], &mut rng).unwrap()
}

pub fn random_batch(
    rng: &mut DeterministicRng,
    n: usize,
    inputs: usize,
    outputs: usize,
) -> Vec<DataPair> {
    (0..n)
        .map(|_| {
            DataPair::new(
                (0..inputs).map(|_| rng.uniform(-1.0, 1.0)).collect(),
                (0..outputs).map(|_| rng.uniform(-1.0, 1.0)).collect(),
            )
        })
        .collect()
}

/// Independent forward pass in double-double arithmetic, so the finite
/// difference below is not swamped by f64 rounding in the error sum.
pub fn error_dd(net: &FeedforwardNetwork, weights: &[TwoFloat], batch: &[DataPair]) -> TwoFloat {
    let sizes = net.layer_sizes();
    let one = TwoFloat::from(1.0);
    let mut total = TwoFloat::from(0.0);
    for pair in batch {
        let mut layer: Vec<TwoFloat> = pair.input.iter().map(|&x| TwoFloat::from(x)).collect();
        let mut offset = 0;
        for (t, act) in net.activations().iter().enumerate() {
            let (src, dst) = (sizes[t], sizes[t + 1]);
            layer = (0..dst)
                .map(|j| {
                    let block = &weights[offset + j * (src + 1)..offset + (j + 1) * (src + 1)];
                    let mut s = block[src];
                    for (w, x) in block[..src].iter().zip(&layer) {
                        s += *w * *x;
                    }
                    match act {
                        Activation::Sigmoid => one / (one + (-s).exp()),
                        Activation::Tanh => s.tanh(),
                        Activation::Linear => s,
                        Activation::Relu => {
                            if s > TwoFloat::from(0.0) {
                                s
                            } else {
                                TwoFloat::from(0.0)
                            }
                        }
                    }
                })
                .collect();
            offset += (src + 1) * dst;
        }
        for (y, t) in layer.iter().zip(&pair.ideal) {
            let r = *y - TwoFloat::from(*t);
            total += r * r;
        }
    }
    total / TwoFloat::from((batch.len() * batch[0].ideal.len()) as f64)
}

/// Largest relative disagreement between backprop and central differences.
pub fn gradient_check(net: &FeedforwardNetwork, batch: &[DataPair]) -> f64 {
    let h = 1e-6;
    let g = compute_gradient(net, batch, GradientSettings::default())
        .unwrap()
        .gradient;
    let base: Vec<TwoFloat> = net.weights().iter().map(|&w| TwoFloat::from(w)).collect();
    let mut worst = 0.0f64;
    for (i, &gi) in g.iter().enumerate() {
        if gi.abs() < 1e-10 {
            continue;
        }
        let mut plus = base.clone();
        plus[i] += TwoFloat::from(h);
        let mut minus = base.clone();
        minus[i] -= TwoFloat::from(h);
        let diff = error_dd(net, &plus, batch) - error_dd(net, &minus, batch);
        let fd = f64::from(diff / TwoFloat::from(2.0 * h));
        worst = worst.max((gi - fd).abs() / gi.abs().max(fd.abs()));
    }
    worst
}

/// Network and batch for gradient-check case `index` (0..20).
pub fn seeded_architecture(index: u64) -> (FeedforwardNetwork, Vec<DataPair>) {
    let mut rng = DeterministicRng::new(1000 + index);
    let transitions = 1 + rng.index(3);
    let sizes: Vec<usize> = (0..=transitions).map(|_| 1 + rng.index(6)).collect();
    let acts: Vec<Activation> = (0..transitions)
        .map(|t| ACTIVATIONS[(index as usize + t) % ACTIVATIONS.len()])
        .collect();
    let net = FeedforwardNetwork::init(&sizes, &acts, &mut rng).unwrap();
    let batch = random_batch(&mut rng, 8, sizes[0], sizes[transitions]);
    (net, batch)
}
