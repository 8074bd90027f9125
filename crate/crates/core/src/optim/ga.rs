//! Real-vector genetic algorithm: tournament selection, uniform crossover,
//! Gaussian mutation and elitism.

use super::{check_dimension, evaluate_all, resolve_bounds, Objective, OptimizeResult};
use crate::error::{Error, Result};
use crate::rng::DeterministicRng;

#[derive(Debug, Clone, PartialEq)]
pub struct GaVectorConfig {
    pub population: usize,
    pub tournament_size: usize,
    pub crossover_rate: f64,
    /// Per-gene mutation probability.
    pub mutation_rate: f64,
    pub mutation_sigma: f64,
    pub elitism: usize,
    /// Box for the initial population; empty means ±10 everywhere.
    pub bounds: Vec<(f64, f64)>,
    pub workers: usize,
}

impl Default for GaVectorConfig {
    fn default() -> Self {
        Self {
            population: 50,
            tournament_size: 4,
            crossover_rate: 0.9,
            mutation_rate: 0.1,
            mutation_sigma: 0.1,
            elitism: 1,
            bounds: Vec::new(),
            workers: 1,
        }
    }
}

impl GaVectorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 || self.elitism >= self.population || self.tournament_size == 0 {
            return Err(Error::Config(format!("invalid GA config {self:?}")));
        }
        Ok(())
    }
}

fn tournament(scores: &[f64], size: usize, rng: &mut DeterministicRng) -> usize {
    let mut winner = rng.index(scores.len());
    for _ in 1..size {
        let c = rng.index(scores.len());
        if scores[c] < scores[winner] {
            winner = c;
        }
    }
    winner
}

pub fn minimize_ga<O: Objective + ?Sized>(
    objective: &O,
    config: &GaVectorConfig,
    rng: &mut DeterministicRng,
    generations: usize,
) -> Result<OptimizeResult> {
    config.validate()?;
    let dim = objective.dimension();
    check_dimension(dim)?;
    if generations == 0 {
        return Err(Error::InvalidArgument("generations must be >= 1".into()));
    }
    let bounds = resolve_bounds(&config.bounds, dim)?;
    let mut population: Vec<Vec<f64>> = (0..config.population)
        .map(|_| bounds.iter().map(|&(lo, hi)| rng.uniform(lo, hi)).collect())
        .collect();
    let mut scores = evaluate_all(objective, &population, config.workers);

    let mut history = Vec::with_capacity(generations);
    for _ in 0..generations {
        let mut order: Vec<usize> = (0..population.len()).collect();
        order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
        let mut next: Vec<Vec<f64>> = order[..config.elitism]
            .iter()
            .map(|&i| population[i].clone())
            .collect();
        let elite_scores: Vec<f64> = order[..config.elitism].iter().map(|&i| scores[i]).collect();
        while next.len() < config.population {
            let a = tournament(&scores, config.tournament_size, rng);
            let b = tournament(&scores, config.tournament_size, rng);
            let mut child = if rng.chance(config.crossover_rate) {
                population[a]
                    .iter()
                    .zip(&population[b])
                    .map(|(x, y)| if rng.chance(0.5) { *x } else { *y })
                    .collect()
            } else {
                population[a].clone()
            };
            for gene in &mut child {
                if rng.chance(config.mutation_rate) {
                    *gene += config.mutation_sigma * rng.next_gaussian();
                }
            }
            next.push(child);
        }
        let fresh = evaluate_all(objective, &next[config.elitism..], config.workers);
        population = next;
        scores = elite_scores.into_iter().chain(fresh).collect();
        history.push(scores.iter().copied().fold(f64::INFINITY, f64::min));
    }
    let best = (0..scores.len())
        .min_by(|&a, &b| scores[a].total_cmp(&scores[b]))
        .expect("non-empty population");
    Ok(OptimizeResult {
        best: population.swap_remove(best),
        score: scores[best],
        history,
    })
}
