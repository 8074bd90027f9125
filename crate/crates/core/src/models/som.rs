//! Self-organizing map on a rectangular grid.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{check_len, nearest, RegressionModel};
use crate::error::{Error, Result};
use crate::rng::DeterministicRng;

/// Unit weight vectors stored row-major over the grid. `compute` returns the
/// weights of the best matching unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SomModel {
    rows: usize,
    cols: usize,
    input_count: usize,
    weights: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SomConfig {
    pub epochs: usize,
    pub learning_rate_start: f64,
    pub learning_rate_end: f64,
    /// Neighbourhood radius in grid cells; defaults to half the larger side.
    pub radius_start: Option<f64>,
    pub radius_end: f64,
}

impl Default for SomConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            learning_rate_start: 0.5,
            learning_rate_end: 0.01,
            radius_start: None,
            radius_end: 0.5,
        }
    }
}

impl SomModel {
    pub fn new(rows: usize, cols: usize, weights: Vec<Vec<f64>>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(
                "SOM grid needs rows, cols >= 1".into(),
            ));
        }
        check_len(rows * cols, weights.len())?;
        let input_count = weights[0].len();
        for w in &weights {
            check_len(input_count, w.len())?;
        }
        Ok(Self {
            rows,
            cols,
            input_count,
            weights: weights.into_iter().flatten().collect(),
        })
    }

    /// Unit weights drawn uniformly from `[lo, hi)`.
    pub fn init(
        rows: usize,
        cols: usize,
        input_count: usize,
        lo: f64,
        hi: f64,
        rng: &mut DeterministicRng,
    ) -> Result<Self> {
        let weights = (0..rows * cols)
            .map(|_| (0..input_count).map(|_| rng.uniform(lo, hi)).collect())
            .collect();
        Self::new(rows, cols, weights)
    }

    pub fn grid(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn unit(&self, row: usize, col: usize) -> &[f64] {
        let i = row * self.cols + col;
        &self.weights[i * self.input_count..(i + 1) * self.input_count]
    }

    /// Best matching unit as (row, col); ties go to the smallest row-major index.
    pub fn bmu(&self, input: &[f64]) -> Result<(usize, usize)> {
        check_len(self.input_count, input.len())?;
        let (i, _) = nearest(self.weights.chunks(self.input_count), input);
        Ok((i / self.cols, i % self.cols))
    }

    /// Online training: each epoch presents every sample once in a shuffled
    /// order. Learning rate and radius decay geometrically across epochs and
    /// the neighbourhood is Gaussian in grid distance.
    pub fn train(
        &mut self,
        samples: &[Vec<f64>],
        config: &SomConfig,
        rng: &mut DeterministicRng,
    ) -> Result<()> {
        if samples.is_empty() {
            return Err(Error::Empty("SOM training needs samples".into()));
        }
        for s in samples {
            check_len(self.input_count, s.len())?;
        }
        let radius_start = config
            .radius_start
            .unwrap_or(self.rows.max(self.cols) as f64 / 2.0)
            .max(config.radius_end);
        let epochs = config.epochs.max(1);
        let mut order: Vec<usize> = (0..samples.len()).collect();
        for epoch in 0..epochs {
            let frac = if epochs > 1 {
                epoch as f64 / (epochs - 1) as f64
            } else {
                1.0
            };
            let lr = config.learning_rate_start
                * (config.learning_rate_end / config.learning_rate_start).powf(frac);
            let radius = radius_start * (config.radius_end / radius_start).powf(frac);
            let two_r2 = 2.0 * radius * radius;
            rng.shuffle(&mut order);
            for &s in &order {
                let x = &samples[s];
                let (br, bc) = self.bmu(x)?;
                for r in 0..self.rows {
                    for c in 0..self.cols {
                        let g2 = (r as f64 - br as f64).powi(2) + (c as f64 - bc as f64).powi(2);
                        let h = (-g2 / two_r2).exp();
                        if h < 1e-6 {
                            continue;
                        }
                        let i = (r * self.cols + c) * self.input_count;
                        for (w, v) in self.weights[i..i + self.input_count].iter_mut().zip(x) {
                            *w += lr * h * (v - *w);
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

impl RegressionModel for SomModel {
    fn input_count(&self) -> usize {
        self.input_count
    }

    fn output_count(&self) -> usize {
        self.input_count
    }

    fn compute(&self, input: &[f64]) -> Result<Vec<f64>> {
        let (r, c) = self.bmu(input)?;
        Ok(self.unit(r, c).to_vec())
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

impl fmt::Display for SomModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "som {}x{} grid over {} inputs",
            self.rows, self.cols, self.input_count
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_2x3() -> SomModel {
        let weights = (0..6).map(|i| vec![i as f64, -(i as f64)]).collect();
        SomModel::new(2, 3, weights).unwrap()
    }

    #[test]
    fn bmu_of_exact_unit() {
        let m = grid_2x3();
        assert_eq!(m.bmu(m.unit(1, 2)).unwrap(), (1, 2));
        assert_eq!(m.bmu(&[0.9, -1.1]).unwrap(), (0, 1));
    }

    #[test]
    fn identical_units_tie_to_origin() {
        let m = SomModel::new(2, 2, vec![vec![1.0]; 4]).unwrap();
        assert_eq!(m.bmu(&[3.0]).unwrap(), (0, 0));
    }

    #[test]
    fn bmu_matches_exhaustive_scan() {
        let mut rng = DeterministicRng::new(21);
        let m = SomModel::init(4, 5, 3, -1.0, 1.0, &mut rng).unwrap();
        for _ in 0..200 {
            let x: Vec<f64> = (0..3).map(|_| rng.uniform(-1.0, 1.0)).collect();
            let mut best = ((0, 0), f64::INFINITY);
            for r in 0..4 {
                for c in 0..5 {
                    let d: f64 = m
                        .unit(r, c)
                        .iter()
                        .zip(&x)
                        .map(|(a, b)| (a - b).powi(2))
                        .sum();
                    if d < best.1 {
                        best = ((r, c), d);
                    }
                }
            }
            assert_eq!(m.bmu(&x).unwrap(), best.0);
        }
    }

    #[test]
    fn training_reduces_quantization_error() {
        let mut rng = DeterministicRng::new(2);
        let samples: Vec<Vec<f64>> = (0..60)
            .map(|i| vec![if i % 2 == 0 { 0.1 } else { 0.9 }, rng.uniform(0.0, 0.05)])
            .collect();
        let mut m = SomModel::init(2, 2, 2, 0.0, 1.0, &mut rng).unwrap();
        let qe = |m: &SomModel| -> f64 {
            samples
                .iter()
                .map(|s| {
                    let w = m.compute(s).unwrap();
                    w.iter().zip(s).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
                })
                .sum()
        };
        let before = qe(&m);
        m.train(&samples, &SomConfig::default(), &mut rng).unwrap();
        assert!(qe(&m) < before);
        assert!(qe(&m) / (samples.len() as f64) < 0.01);
    }
}
