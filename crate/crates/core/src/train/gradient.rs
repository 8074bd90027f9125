//! Batch gradient of the mean squared error by backpropagation.

use crate::dataset::DataPair;
use crate::error::{Error, Result};
use crate::models::{FeedforwardNetwork, RegressionModel};
use crate::parallel::map_indexed;

/// How a batch is cut up for gradient evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GradientSettings {
    pub chunk_size: usize,
    pub workers: usize,
}

impl Default for GradientSettings {
    fn default() -> Self {
        Self {
            chunk_size: 64,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientResult {
    /// dE/dw in the network's weight layout.
    pub gradient: Vec<f64>,
    pub sum_squared_error: f64,
    pub pair_count: usize,
    pub output_count: usize,
}

impl GradientResult {
    /// The error the gradient belongs to: SSE / (pairs * outputs).
    pub fn mse(&self) -> f64 {
        self.sum_squared_error / (self.pair_count * self.output_count) as f64
    }
}

struct PairContribution {
    residuals: Vec<f64>,
    gradient: Vec<f64>,
}

/// Gradient of `sum_o (y_o - t_o)^2` for one pair.
fn pair_gradient(net: &FeedforwardNetwork, pair: &DataPair) -> Result<PairContribution> {
    let trace = net.forward_trace(&pair.input)?;
    let sizes = net.layer_sizes();
    let acts = net.activations();
    let transitions = sizes.len() - 1;
    let output = &trace.outputs[transitions];
    if output.len() != pair.ideal.len() {
        return Err(Error::DimensionMismatch {
            expected: output.len(),
            actual: pair.ideal.len(),
        });
    }
    let residuals: Vec<f64> = output.iter().zip(&pair.ideal).map(|(y, t)| y - t).collect();
    let mut gradient = vec![0.0; net.weight_count()];
    let mut delta: Vec<f64> = residuals
        .iter()
        .zip(&trace.sums[transitions - 1])
        .map(|(r, s)| 2.0 * r * acts[transitions - 1].derivative(*s))
        .collect();
    let weights = net.weights();
    for t in (0..transitions).rev() {
        let (src, dst) = (sizes[t], sizes[t + 1]);
        let offset = net.transition_offset(t);
        let prev = &trace.outputs[t];
        for (j, &d) in delta.iter().enumerate() {
            let block = &mut gradient[offset + j * (src + 1)..offset + (j + 1) * (src + 1)];
            for (g, x) in block[..src].iter_mut().zip(prev) {
                *g = d * x;
            }
            block[src] = d;
        }
        if t > 0 {
            let act = acts[t - 1];
            delta = (0..src)
                .map(|i| {
                    let back: f64 = (0..dst)
                        .map(|j| weights[offset + j * (src + 1) + i] * delta[j])
                        .sum();
                    back * act.derivative(trace.sums[t - 1][i])
                })
                .collect();
        }
    }
    Ok(PairContribution {
        residuals,
        gradient,
    })
}

/// Gradient of the batch MSE.
///
/// The batch is cut into fixed chunks of `chunk_size` pairs that may be
/// evaluated on `workers` threads. Per-pair contributions are then summed in
/// ascending pair order, so the result is bit-identical for every chunk size
/// and worker count.
pub fn compute_gradient(
    net: &FeedforwardNetwork,
    batch: &[DataPair],
    settings: GradientSettings,
) -> Result<GradientResult> {
    if batch.is_empty() {
        return Err(Error::Empty("gradient of an empty batch".into()));
    }
    let chunk_size = settings.chunk_size.max(1);
    let chunks: Vec<&[DataPair]> = batch.chunks(chunk_size).collect();
    let partials = map_indexed(chunks.len(), settings.workers, |c| {
        chunks[c]
            .iter()
            .map(|p| pair_gradient(net, p))
            .collect::<Result<Vec<_>>>()
    });

    let mut gradient = vec![0.0; net.weight_count()];
    let mut sse = 0.0;
    for chunk in partials {
        for pair in chunk? {
            for r in &pair.residuals {
                sse += r * r;
            }
            for (g, pg) in gradient.iter_mut().zip(&pair.gradient) {
                *g += pg;
            }
        }
    }
    let output_count = net.output_count();
    let scale = 1.0 / (batch.len() * output_count) as f64;
    for g in &mut gradient {
        *g *= scale;
    }
    Ok(GradientResult {
        gradient,
        sum_squared_error: sse,
        pair_count: batch.len(),
        output_count,
    })
}
