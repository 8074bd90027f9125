//! Linear and generalized linear models (identity or logit link).
//!
//! Coefficients are stored slopes first, intercept last.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::linalg::solve_normal_equations;
use super::{check_len, RegressionModel};
use crate::dataset::DataPair;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    Identity,
    Logit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlmModel {
    coefficients: Vec<f64>,
    link: Link,
}

fn logistic(eta: f64) -> f64 {
    1.0 / (1.0 + (-eta).exp())
}

impl GlmModel {
    /// `coefficients` holds one slope per input followed by the intercept.
    pub fn new(coefficients: Vec<f64>, link: Link) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidArgument(
                "a GLM needs at least an intercept".into(),
            ));
        }
        Ok(Self { coefficients, link })
    }

    pub fn link(&self) -> Link {
        self.link
    }

    pub fn slopes(&self) -> &[f64] {
        &self.coefficients[..self.coefficients.len() - 1]
    }

    pub fn intercept(&self) -> f64 {
        *self.coefficients.last().expect("intercept present")
    }

    pub fn linear_predictor(&self, input: &[f64]) -> Result<f64> {
        check_len(self.input_count(), input.len())?;
        let mut eta = self.intercept();
        for (b, x) in self.slopes().iter().zip(input) {
            eta += b * x;
        }
        Ok(eta)
    }

    pub fn predict(&self, input: &[f64]) -> Result<f64> {
        let eta = self.linear_predictor(input)?;
        Ok(match self.link {
            Link::Identity => eta,
            Link::Logit => logistic(eta),
        })
    }
}

impl RegressionModel for GlmModel {
    fn input_count(&self) -> usize {
        self.coefficients.len() - 1
    }

    fn output_count(&self) -> usize {
        1
    }

    fn compute(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![self.predict(input)?])
    }

    fn parameters(&self) -> Vec<f64> {
        self.coefficients.clone()
    }

    fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        check_len(self.coefficients.len(), params.len())?;
        self.coefficients.copy_from_slice(params);
        Ok(())
    }
}

impl fmt::Display for GlmModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let link = match self.link {
            Link::Identity => "identity",
            Link::Logit => "logit",
        };
        write!(
            f,
            "glm ({link} link) slopes {:?} intercept {}",
            self.slopes(),
            self.intercept()
        )
    }
}

fn check_single_output(pairs: &[DataPair]) -> Result<usize> {
    let first = pairs
        .first()
        .ok_or_else(|| Error::Empty("no training pairs".into()))?;
    if first.ideal.len() != 1 {
        return Err(Error::InvalidArgument(format!(
            "linear models fit a single output, got {}",
            first.ideal.len()
        )));
    }
    let d = first.input.len();
    for p in pairs {
        check_len(d, p.input.len())?;
        check_len(1, p.ideal.len())?;
    }
    Ok(d)
}

/// `X^T W X` and `X^T W r` for the design matrix `[x, 1]`.
fn weighted_normal_equations(
    pairs: &[DataPair],
    weights: impl Fn(usize) -> f64,
    residual: impl Fn(usize) -> f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = pairs[0].input.len() + 1;
    let mut gram = vec![0.0; n * n];
    let mut rhs = vec![0.0; n];
    let mut row = vec![1.0; n];
    for (idx, p) in pairs.iter().enumerate() {
        row[..n - 1].copy_from_slice(&p.input);
        let w = weights(idx);
        let r = residual(idx);
        for i in 0..n {
            rhs[i] += w * row[i] * r;
            for j in 0..=i {
                gram[i * n + j] += w * row[i] * row[j];
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            gram[j * n + i] = gram[i * n + j];
        }
    }
    (gram, rhs)
}

/// Ordinary least squares via the normal equations (ridge fallback when singular).
pub fn linreg_fit(pairs: &[DataPair]) -> Result<GlmModel> {
    let d = check_single_output(pairs)?;
    let (gram, rhs) = weighted_normal_equations(pairs, |_| 1.0, |i| pairs[i].ideal[0]);
    let coefficients = solve_normal_equations(&gram, &rhs, d + 1)?;
    GlmModel::new(coefficients, Link::Identity)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrlsConfig {
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for IrlsConfig {
    fn default() -> Self {
        Self {
            max_iter: 25,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlmFit {
    pub model: GlmModel,
    pub iterations: usize,
    pub converged: bool,
}

/// Iteratively reweighted least squares (Newton steps on the log-likelihood).
///
/// Stops once the largest coefficient change drops below `tol`; perfectly
/// separated data runs to `max_iter` and comes back flagged unconverged.
pub fn glm_fit_irls(pairs: &[DataPair], link: Link, config: IrlsConfig) -> Result<GlmFit> {
    let d = check_single_output(pairs)?;
    if link == Link::Logit && pairs.iter().any(|p| p.ideal[0] != 0.0 && p.ideal[0] != 1.0) {
        return Err(Error::InvalidArgument(
            "logit targets must be 0 or 1".into(),
        ));
    }
    let mut model = GlmModel::new(vec![0.0; d + 1], link)?;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iter {
        iterations += 1;
        let mut eta = Vec::with_capacity(pairs.len());
        for p in pairs {
            eta.push(model.linear_predictor(&p.input)?);
        }
        let (weights, residuals): (Vec<f64>, Vec<f64>) = match link {
            Link::Identity => pairs
                .iter()
                .zip(&eta)
                .map(|(p, e)| (1.0, p.ideal[0] - e))
                .unzip(),
            Link::Logit => pairs
                .iter()
                .zip(&eta)
                .map(|(p, &e)| {
                    let mu = logistic(e);
                    (mu * (1.0 - mu), p.ideal[0] - mu)
                })
                .unzip(),
        };
        // Newton step: (X^T W X) delta = X^T (y - mu)
        let (gram, rhs) = weighted_normal_equations(
            pairs,
            |i| weights[i],
            |i| {
                if link == Link::Identity {
                    residuals[i]
                } else {
                    residuals[i] / weights[i].max(f64::MIN_POSITIVE)
                }
            },
        );
        let step = solve_normal_equations(&gram, &rhs, d + 1)?;
        let mut max_change: f64 = 0.0;
        for (c, s) in model.coefficients.iter_mut().zip(&step) {
            *c += s;
            max_change = max_change.max(s.abs());
        }
        if !model.coefficients.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidArgument("IRLS diverged".into()));
        }
        if max_change < config.tol {
            converged = true;
            break;
        }
    }
    Ok(GlmFit {
        model,
        iterations,
        converged,
    })
}
