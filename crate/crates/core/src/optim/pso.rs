//! Particle swarm optimization with constriction-style constants.

use super::{check_dimension, evaluate_all, resolve_bounds, Objective, OptimizeResult};
use crate::error::{Error, Result};
use crate::rng::DeterministicRng;

#[derive(Debug, Clone, PartialEq)]
pub struct PsoConfig {
    pub particles: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Velocity cap as a fraction of each dimension's width.
    pub max_velocity_fraction: f64,
    /// Per-dimension (lo, hi); empty means ±10 everywhere.
    pub bounds: Vec<(f64, f64)>,
    pub workers: usize,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            particles: 30,
            inertia: 0.729,
            cognitive: 1.49445,
            social: 1.49445,
            max_velocity_fraction: 0.1,
            bounds: Vec::new(),
            workers: 1,
        }
    }
}

/// One coordinate of the velocity update, clamped to `±vmax`.
#[allow(clippy::too_many_arguments)]
pub fn pso_velocity(
    config: &PsoConfig,
    v: f64,
    x: f64,
    pbest: f64,
    gbest: f64,
    r1: f64,
    r2: f64,
    vmax: f64,
) -> f64 {
    let v =
        config.inertia * v + config.cognitive * r1 * (pbest - x) + config.social * r2 * (gbest - x);
    v.clamp(-vmax, vmax)
}

pub fn minimize_pso<O: Objective + ?Sized>(
    objective: &O,
    config: &PsoConfig,
    rng: &mut DeterministicRng,
    iterations: usize,
) -> Result<OptimizeResult> {
    let dim = objective.dimension();
    check_dimension(dim)?;
    if config.particles < 2 {
        return Err(Error::Config("PSO needs at least 2 particles".into()));
    }
    if iterations == 0 {
        return Err(Error::InvalidArgument("iterations must be >= 1".into()));
    }
    let bounds = resolve_bounds(&config.bounds, dim)?;
    let vmax: Vec<f64> = bounds
        .iter()
        .map(|(lo, hi)| config.max_velocity_fraction * (hi - lo))
        .collect();

    let mut x: Vec<Vec<f64>> = (0..config.particles)
        .map(|_| bounds.iter().map(|&(lo, hi)| rng.uniform(lo, hi)).collect())
        .collect();
    let mut v: Vec<Vec<f64>> = (0..config.particles)
        .map(|_| vmax.iter().map(|&m| rng.uniform(-m, m)).collect())
        .collect();
    let mut pbest = x.clone();
    let mut pbest_score = evaluate_all(objective, &x, config.workers);
    let mut g = 0;
    for (i, s) in pbest_score.iter().enumerate() {
        if *s < pbest_score[g] {
            g = i;
        }
    }
    let mut gbest = pbest[g].clone();
    let mut gbest_score = pbest_score[g];

    let mut history = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        for i in 0..config.particles {
            for d in 0..dim {
                let r1 = rng.next_double();
                let r2 = rng.next_double();
                v[i][d] = pso_velocity(
                    config,
                    v[i][d],
                    x[i][d],
                    pbest[i][d],
                    gbest[d],
                    r1,
                    r2,
                    vmax[d],
                );
                let (lo, hi) = bounds[d];
                x[i][d] = (x[i][d] + v[i][d]).clamp(lo, hi);
            }
        }
        let scores = evaluate_all(objective, &x, config.workers);
        for (i, s) in scores.into_iter().enumerate() {
            if s < pbest_score[i] {
                pbest_score[i] = s;
                pbest[i].clone_from(&x[i]);
                if s < gbest_score {
                    gbest_score = s;
                    gbest.clone_from(&x[i]);
                }
            }
        }
        history.push(gbest_score);
    }
    Ok(OptimizeResult {
        best: gbest,
        score: gbest_score,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn attraction_vanishes_at_the_optimum() {
        let c = PsoConfig::default();
        assert_eq!(
            pso_velocity(&c, 0.5, 1.0, 1.0, 1.0, 0.3, 0.8, 2.0),
            0.729 * 0.5
        );
        assert_eq!(pso_velocity(&c, 100.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0), 2.0);
    }
}
