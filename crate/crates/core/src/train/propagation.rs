//! First-order propagation trainers: backprop with momentum, iRPROP- and Quickprop.

use super::gradient::{compute_gradient, GradientSettings};
use super::Trainer;
use crate::dataset::DataPair;
use crate::error::{Error, Result};
use crate::models::FeedforwardNetwork;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackpropConfig {
    pub learning_rate: f64,
    pub momentum: f64,
}

impl Default for BackpropConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            momentum: 0.0,
        }
    }
}

impl BackpropConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config(format!("invalid backprop config {self:?}")));
        }
        Ok(())
    }
}

/// Gradient descent with momentum: `dw = -lr * g + momentum * dw_prev`.
#[derive(Debug, Clone)]
pub struct Backprop {
    pub config: BackpropConfig,
    pub gradient: GradientSettings,
    previous_delta: Vec<f64>,
}

impl Backprop {
    pub fn new(config: BackpropConfig, gradient: GradientSettings) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            gradient,
            previous_delta: Vec::new(),
        })
    }

    pub fn previous_delta(&self) -> &[f64] {
        &self.previous_delta
    }

    /// Applies one update for the given gradient.
    pub fn apply(&mut self, weights: &mut [f64], gradient: &[f64]) {
        if self.previous_delta.len() != weights.len() {
            self.previous_delta = vec![0.0; weights.len()];
        }
        for ((w, g), prev) in weights
            .iter_mut()
            .zip(gradient)
            .zip(&mut self.previous_delta)
        {
            let delta = -self.config.learning_rate * g + self.config.momentum * *prev;
            *w += delta;
            *prev = delta;
        }
    }
}

impl Trainer for Backprop {
    fn name(&self) -> &'static str {
        "backprop"
    }

    fn iteration(&mut self, net: &mut FeedforwardNetwork, batch: &[DataPair]) -> Result<f64> {
        let g = compute_gradient(net, batch, self.gradient)?;
        self.apply(net.weights_mut(), &g.gradient);
        Ok(g.mse())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RpropConfig {
    pub eta_plus: f64,
    pub eta_minus: f64,
    pub delta_initial: f64,
    pub delta_min: f64,
    pub delta_max: f64,
}

impl Default for RpropConfig {
    fn default() -> Self {
        Self {
            eta_plus: 1.2,
            eta_minus: 0.5,
            delta_initial: 0.1,
            delta_min: 1e-6,
            delta_max: 50.0,
        }
    }
}

impl RpropConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 < self.eta_minus
            && self.eta_minus < 1.0
            && 1.0 < self.eta_plus
            && self.delta_min < self.delta_initial
            && self.delta_initial < self.delta_max;
        if !ok {
            return Err(Error::Config(format!("invalid RPROP config {self:?}")));
        }
        Ok(())
    }
}

/// iRPROP-: sign-based steps with per-weight adaptive sizes; on a sign change
/// the step shrinks and the weight is left alone for that epoch.
#[derive(Debug, Clone)]
pub struct Rprop {
    pub config: RpropConfig,
    pub gradient: GradientSettings,
    deltas: Vec<f64>,
    previous_gradient: Vec<f64>,
}

impl Rprop {
    pub fn new(config: RpropConfig, gradient: GradientSettings) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            gradient,
            deltas: Vec::new(),
            previous_gradient: Vec::new(),
        })
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn apply(&mut self, weights: &mut [f64], gradient: &[f64]) {
        if self.deltas.len() != weights.len() {
            self.deltas = vec![self.config.delta_initial; weights.len()];
            self.previous_gradient = vec![0.0; weights.len()];
        }
        let c = &self.config;
        for i in 0..weights.len() {
            let mut g = gradient[i];
            let s = self.previous_gradient[i] * g;
            if s > 0.0 {
                self.deltas[i] = (self.deltas[i] * c.eta_plus).min(c.delta_max);
            } else if s < 0.0 {
                self.deltas[i] = (self.deltas[i] * c.eta_minus).max(c.delta_min);
                g = 0.0;
            }
            if g > 0.0 {
                weights[i] -= self.deltas[i];
            } else if g < 0.0 {
                weights[i] += self.deltas[i];
            }
            self.previous_gradient[i] = g;
        }
    }
}

impl Trainer for Rprop {
    fn name(&self) -> &'static str {
        "rprop"
    }

    fn iteration(&mut self, net: &mut FeedforwardNetwork, batch: &[DataPair]) -> Result<f64> {
        let g = compute_gradient(net, batch, self.gradient)?;
        self.apply(net.weights_mut(), &g.gradient);
        Ok(g.mse())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuickpropConfig {
    /// Plain gradient step used on the first epoch and whenever the
    /// parabola step is undefined.
    pub learning_rate: f64,
    /// Maximum growth factor of a step relative to the previous one.
    pub mu: f64,
}

impl Default for QuickpropConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            mu: 1.75,
        }
    }
}

impl QuickpropConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !(self.mu > 1.0) {
            return Err(Error::Config(format!("invalid Quickprop config {self:?}")));
        }
        Ok(())
    }
}

/// Quickprop: per-weight secant step through the last two gradients.
#[derive(Debug, Clone)]
pub struct Quickprop {
    pub config: QuickpropConfig,
    pub gradient: GradientSettings,
    previous_gradient: Vec<f64>,
    previous_delta: Vec<f64>,
}

impl Quickprop {
    pub fn new(config: QuickpropConfig, gradient: GradientSettings) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            gradient,
            previous_gradient: Vec::new(),
            previous_delta: Vec::new(),
        })
    }

    /// Seeds the per-weight history, e.g. to resume from a known step.
    pub fn with_history(mut self, previous_gradient: Vec<f64>, previous_delta: Vec<f64>) -> Self {
        self.previous_gradient = previous_gradient;
        self.previous_delta = previous_delta;
        self
    }

    pub fn previous_delta(&self) -> &[f64] {
        &self.previous_delta
    }

    pub fn apply(&mut self, weights: &mut [f64], gradient: &[f64]) {
        if self.previous_delta.len() != weights.len() {
            self.previous_gradient = vec![0.0; weights.len()];
            self.previous_delta = vec![0.0; weights.len()];
        }
        let c = self.config;
        for i in 0..weights.len() {
            let (g, g_prev, d_prev) = (
                gradient[i],
                self.previous_gradient[i],
                self.previous_delta[i],
            );
            let delta = if d_prev != 0.0 && g_prev != g {
                let step = d_prev * g / (g_prev - g);
                let cap = c.mu * d_prev.abs();
                if step.abs() > cap {
                    cap.copysign(step)
                } else {
                    step
                }
            } else {
                -c.learning_rate * g
            };
            weights[i] += delta;
            self.previous_gradient[i] = g;
            self.previous_delta[i] = delta;
        }
    }
}

impl Trainer for Quickprop {
    fn name(&self) -> &'static str {
        "quickprop"
    }

    fn iteration(&mut self, net: &mut FeedforwardNetwork, batch: &[DataPair]) -> Result<f64> {
        let g = compute_gradient(net, batch, self.gradient)?;
        self.apply(net.weights_mut(), &g.gradient);
        Ok(g.mse())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backprop_steps() {
        let mut bp = Backprop::new(
            BackpropConfig {
                learning_rate: 0.5,
                momentum: 0.0,
            },
            GradientSettings::default(),
        )
        .unwrap();
        let mut w = vec![3.0];
        bp.apply(&mut w, &[2.0]);
        assert_eq!(w, vec![2.0]);

        let mut bp = Backprop::new(
            BackpropConfig {
                learning_rate: 1.0,
                momentum: 0.9,
            },
            GradientSettings::default(),
        )
        .unwrap();
        let mut w = vec![0.0];
        bp.apply(&mut w, &[1.0]); // delta = -1
        assert_eq!(bp.previous_delta(), &[-1.0]);
        bp.apply(&mut w, &[0.0]);
        assert!((bp.previous_delta()[0] + 0.9).abs() < 1e-15);
        assert!(Backprop::new(
            BackpropConfig {
                learning_rate: 0.1,
                momentum: 1.0
            },
            GradientSettings::default()
        )
        .is_err());
    }

    #[test]
    fn rprop_first_epoch_uses_initial_delta() {
        let mut rp = Rprop::new(RpropConfig::default(), GradientSettings::default()).unwrap();
        let mut w = vec![1.0, 1.0];
        rp.apply(&mut w, &[0.3, -4.0]);
        assert_eq!(w, vec![0.9, 1.1]);
    }

    #[test]
    fn rprop_same_sign_grows_delta() {
        let mut rp = Rprop::new(RpropConfig::default(), GradientSettings::default()).unwrap();
        let mut w = vec![0.0];
        rp.apply(&mut w, &[1.0]);
        rp.apply(&mut w, &[0.5]);
        assert!((rp.deltas()[0] - 0.12).abs() < 1e-15);
        assert!((w[0] + 0.22).abs() < 1e-15);
    }

    #[test]
    fn rprop_sign_flip_halves_and_holds() {
        let mut rp = Rprop::new(RpropConfig::default(), GradientSettings::default()).unwrap();
        let mut w = vec![0.0];
        rp.apply(&mut w, &[1.0]);
        let before = w[0];
        rp.apply(&mut w, &[-1.0]);
        assert_eq!(w[0], before);
        assert!((rp.deltas()[0] - 0.05).abs() < 1e-15);
        // the zeroed gradient means the next epoch does not count as a flip
        rp.apply(&mut w, &[-1.0]);
        assert!((rp.deltas()[0] - 0.05).abs() < 1e-15);
        assert!((w[0] - (before + 0.05)).abs() < 1e-15);
    }

    #[test]
    fn rprop_config_invariants() {
        let bad = RpropConfig {
            eta_minus: 1.5,
            ..RpropConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn quickprop_first_step_is_gradient_step() {
        let mut qp =
            Quickprop::new(QuickpropConfig::default(), GradientSettings::default()).unwrap();
        let mut w = vec![1.0];
        qp.apply(&mut w, &[2.0]);
        assert!((w[0] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn quickprop_secant_step() {
        let mut qp = Quickprop::new(QuickpropConfig::default(), GradientSettings::default())
            .unwrap()
            .with_history(vec![2.0], vec![-0.1]);
        let mut w = vec![0.0];
        qp.apply(&mut w, &[1.0]);
        assert!((qp.previous_delta()[0] + 0.1).abs() < 1e-15);
    }

    #[test]
    fn quickprop_growth_is_clamped() {
        // g_prev = 1.1, g = 1 gives a raw step of 10 * d_prev.
        let mut qp = Quickprop::new(QuickpropConfig::default(), GradientSettings::default())
            .unwrap()
            .with_history(vec![1.1], vec![-0.1]);
        let mut w = vec![0.0];
        qp.apply(&mut w, &[1.0]);
        assert!((qp.previous_delta()[0] + 0.175).abs() < 1e-12);
    }
}
