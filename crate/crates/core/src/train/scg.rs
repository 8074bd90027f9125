//! Scaled conjugate gradient (Møller): conjugate directions with a
//! Levenberg-style scale in place of a line search.

use super::gradient::{compute_gradient, GradientSettings};
use super::Trainer;
use crate::dataset::DataPair;
use crate::error::{Error, Result};
use crate::models::FeedforwardNetwork;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScgConfig {
    /// Step used for the finite-difference curvature estimate.
    pub sigma: f64,
    pub lambda_initial: f64,
}

impl Default for ScgConfig {
    fn default() -> Self {
        Self {
            sigma: 1e-4,
            lambda_initial: 1e-6,
        }
    }
}

impl ScgConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !(self.lambda_initial > 0.0) {
            return Err(Error::Config(format!("invalid SCG config {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct ScgState {
    weights: Vec<f64>,
    error: f64,
    /// Negative gradient at `weights`.
    r: Vec<f64>,
    p: Vec<f64>,
    lambda: f64,
    lambda_bar: f64,
    delta: f64,
    success: bool,
    k: usize,
    converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone)]
pub struct Scg {
    pub config: ScgConfig,
    pub gradient: GradientSettings,
    state: Option<ScgState>,
}

impl Scg {
    pub fn new(config: ScgConfig, gradient: GradientSettings) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            gradient,
            state: None,
        })
    }

    fn start(&self, net: &FeedforwardNetwork, batch: &[DataPair]) -> Result<ScgState> {
        let g = compute_gradient(net, batch, self.gradient)?;
        let r: Vec<f64> = g.gradient.iter().map(|v| -v).collect();
        Ok(ScgState {
            weights: net.weights().to_vec(),
            error: g.mse(),
            converged: r.iter().all(|v| *v == 0.0),
            p: r.clone(),
            r,
            lambda: self.config.lambda_initial,
            lambda_bar: 0.0,
            delta: 0.0,
            success: true,
            k: 1,
        })
    }
}

impl Trainer for Scg {
    fn name(&self) -> &'static str {
        "scg"
    }

    fn converged(&self) -> bool {
        self.state.as_ref().is_some_and(|s| s.converged)
    }

    fn iteration(&mut self, net: &mut FeedforwardNetwork, batch: &[DataPair]) -> Result<f64> {
        let fresh = match &self.state {
            Some(s) => s.weights != net.weights(),
            None => true,
        };
        if fresh {
            self.state = Some(self.start(net, batch)?);
        }
        let settings = self.gradient;
        let sigma0 = self.config.sigma;
        let st = self.state.as_mut().expect("state initialized");
        let error_before = st.error;
        if st.converged {
            return Ok(error_before);
        }
        let n = st.weights.len();
        let mut p2 = dot(&st.p, &st.p);
        if dot(&st.p, &st.r) <= 0.0 {
            // Not a descent direction: restart along the steepest descent.
            st.p = st.r.clone();
            p2 = dot(&st.p, &st.p);
            st.success = true;
        }

        let mut probe = net.clone();
        if st.success {
            let sigma = sigma0 / p2.sqrt();
            for ((w, base), p) in probe.weights_mut().iter_mut().zip(&st.weights).zip(&st.p) {
                *w = base + sigma * p;
            }
            let g_plus = compute_gradient(&probe, batch, settings)?;
            // s = (E'(w + sigma p) - E'(w)) / sigma, with E'(w) = -r
            st.delta = g_plus
                .gradient
                .iter()
                .zip(&st.r)
                .zip(&st.p)
                .map(|((gp, r), p)| (gp + r) / sigma * p)
                .sum();
        }
        st.delta += (st.lambda - st.lambda_bar) * p2;
        if st.delta <= 0.0 {
            st.lambda_bar = 2.0 * (st.lambda - st.delta / p2);
            st.delta = -st.delta + st.lambda * p2;
            st.lambda = st.lambda_bar;
        }
        let mu = dot(&st.p, &st.r);
        let alpha = mu / st.delta;

        for ((w, base), p) in probe.weights_mut().iter_mut().zip(&st.weights).zip(&st.p) {
            *w = base + alpha * p;
        }
        let g_new = compute_gradient(&probe, batch, settings)?;
        let error_new = g_new.mse();
        let comparison = 2.0 * st.delta * (st.error - error_new) / (mu * mu);

        if comparison >= 0.0 && error_new.is_finite() {
            let r_new: Vec<f64> = g_new.gradient.iter().map(|v| -v).collect();
            st.lambda_bar = 0.0;
            st.success = true;
            if st.k.is_multiple_of(n) {
                st.p = r_new.clone();
            } else {
                let beta = (dot(&r_new, &r_new) - dot(&r_new, &st.r)) / mu;
                for (p, r) in st.p.iter_mut().zip(&r_new) {
                    *p = r + beta * *p;
                }
            }
            st.r = r_new;
            st.weights = probe.weights().to_vec();
            st.error = error_new;
            if comparison >= 0.75 {
                st.lambda /= 4.0;
            }
            net.weights_mut().copy_from_slice(&st.weights);
            st.converged = st.r.iter().all(|v| *v == 0.0);
        } else {
            st.lambda_bar = st.lambda;
            st.success = false;
        }
        if comparison < 0.25 {
            st.lambda += st.delta * (1.0 - comparison) / p2;
        }
        st.k += 1;
        Ok(error_before)
    }
}

/// Runs `epochs` SCG iterations (stopping early on a zero gradient) and
/// returns the error history, starting with the initial error.
pub fn scg_train(
    net: &mut FeedforwardNetwork,
    batch: &[DataPair],
    config: ScgConfig,
    epochs: usize,
) -> Result<Vec<f64>> {
    let mut scg = Scg::new(config, GradientSettings::default())?;
    let mut history = Vec::with_capacity(epochs + 1);
    for _ in 0..epochs.max(1) {
        let e = scg.iteration(net, batch)?;
        if history.is_empty() {
            history.push(e);
        }
        if scg.converged() {
            break;
        }
        history.push(scg.state.as_ref().expect("state").error);
    }
    Ok(history)
}
