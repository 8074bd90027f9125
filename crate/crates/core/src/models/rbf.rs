//! Radial-basis-function network with Gaussian units and a linear output layer.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{check_len, squared_distance, RegressionModel};
use crate::error::{Error, Result};

/// Centers and widths are fixed architecture; the trainable parameters are
/// the output weights, `(units + 1) * outputs` values with each output's
/// bias last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbfNetwork {
    input_count: usize,
    output_count: usize,
    centers: Vec<Vec<f64>>,
    widths: Vec<f64>,
    output_weights: Vec<f64>,
}

impl RbfNetwork {
    pub fn new(
        centers: Vec<Vec<f64>>,
        widths: Vec<f64>,
        output_count: usize,
        output_weights: Vec<f64>,
    ) -> Result<Self> {
        let input_count = centers
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidArgument("RBF network needs at least one unit".into()))?;
        for c in &centers {
            check_len(input_count, c.len())?;
        }
        check_len(centers.len(), widths.len())?;
        if widths.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument("RBF widths must be positive".into()));
        }
        if output_count == 0 {
            return Err(Error::InvalidArgument("RBF network needs an output".into()));
        }
        check_len((centers.len() + 1) * output_count, output_weights.len())?;
        Ok(Self {
            input_count,
            output_count,
            centers,
            widths,
            output_weights,
        })
    }

    pub fn units(&self) -> usize {
        self.centers.len()
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    /// Basis activations `exp(-|x - c|^2 / (2 sigma^2))`.
    pub fn basis(&self, input: &[f64]) -> Result<Vec<f64>> {
        check_len(self.input_count, input.len())?;
        Ok(self
            .centers
            .iter()
            .zip(&self.widths)
            .map(|(c, s)| (-squared_distance(input, c) / (2.0 * s * s)).exp())
            .collect())
    }
}

impl RegressionModel for RbfNetwork {
    fn input_count(&self) -> usize {
        self.input_count
    }

    fn output_count(&self) -> usize {
        self.output_count
    }

    fn compute(&self, input: &[f64]) -> Result<Vec<f64>> {
        let phi = self.basis(input)?;
        let units = phi.len();
        Ok(self
            .output_weights
            .chunks(units + 1)
            .map(|w| {
                let mut s = w[units];
                for (wi, p) in w[..units].iter().zip(&phi) {
                    s += wi * p;
                }
                s
            })
            .collect())
    }

    fn parameters(&self) -> Vec<f64> {
        self.output_weights.clone()
    }

    fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        check_len(self.output_weights.len(), params.len())?;
        self.output_weights.copy_from_slice(params);
        Ok(())
    }
}

impl fmt::Display for RbfNetwork {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "rbfnetwork {} inputs, {} gaussian units, {} outputs",
            self.input_count,
            self.units(),
            self.output_count
        )
    }
}
