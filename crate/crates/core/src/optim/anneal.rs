//! Simulated annealing with a geometric cooling schedule.

use super::{check_dimension, sanitize, Objective, OptimizeResult};
use crate::error::{Error, Result};
use crate::rng::DeterministicRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealConfig {
    pub start_temp: f64,
    pub end_temp: f64,
    /// Moves attempted at each temperature.
    pub cycles: usize,
    pub temperature_steps: usize,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        Self {
            start_temp: 10.0,
            end_temp: 0.01,
            cycles: 10,
            temperature_steps: 100,
        }
    }
}

impl AnnealConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.start_temp > self.end_temp && self.end_temp > 0.0) {
            return Err(Error::Config(
                "annealing needs start_temp > end_temp > 0".into(),
            ));
        }
        if self.cycles == 0 || self.temperature_steps == 0 {
            return Err(Error::Config(
                "annealing needs cycles and steps >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Temperature at step `k`, from `start_temp` down to `end_temp`.
    pub fn temperature(&self, k: usize) -> f64 {
        if self.temperature_steps == 1 {
            return self.start_temp;
        }
        let frac = k as f64 / (self.temperature_steps - 1) as f64;
        self.start_temp * (self.end_temp / self.start_temp).powf(frac)
    }
}

/// Metropolis rule: improvements always pass, worse moves with exp(-ΔE/T).
pub fn acceptance_probability(delta: f64, temperature: f64) -> f64 {
    if delta <= 0.0 {
        1.0
    } else {
        (-delta / temperature).exp()
    }
}

pub fn minimize_anneal<O: Objective + ?Sized>(
    objective: &O,
    initial: &[f64],
    config: &AnnealConfig,
    rng: &mut DeterministicRng,
) -> Result<OptimizeResult> {
    config.validate()?;
    check_dimension(objective.dimension())?;
    if initial.len() != objective.dimension() {
        return Err(Error::DimensionMismatch {
            expected: objective.dimension(),
            actual: initial.len(),
        });
    }
    let mut current = initial.to_vec();
    let mut current_score = sanitize(objective.evaluate(&current));
    let mut best = current.clone();
    let mut best_score = current_score;
    let mut history = Vec::with_capacity(config.temperature_steps);
    for k in 0..config.temperature_steps {
        let t = config.temperature(k);
        let sigma = t / config.start_temp;
        for _ in 0..config.cycles {
            let candidate: Vec<f64> = current
                .iter()
                .map(|x| x + sigma * rng.next_gaussian())
                .collect();
            let score = sanitize(objective.evaluate(&candidate));
            let delta = score - current_score;
            let accept = delta <= 0.0 || rng.chance(acceptance_probability(delta, t));
            if accept {
                current = candidate;
                current_score = score;
                if current_score < best_score {
                    best_score = current_score;
                    best.clone_from(&current);
                }
            }
        }
        history.push(best_score);
    }
    Ok(OptimizeResult {
        best,
        score: best_score,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metropolis_rule() {
        assert_eq!(acceptance_probability(-3.0, 1e-9), 1.0);
        assert_eq!(acceptance_probability(1.0, 1e-9), 0.0);
        assert!((acceptance_probability(1.0, 1.0) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn schedule_endpoints() {
        let c = AnnealConfig::default();
        assert_eq!(c.temperature(0), 10.0);
        assert!((c.temperature(99) - 0.01).abs() < 1e-15);
    }
}
