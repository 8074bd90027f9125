//! Tree-based genetic programming for symbolic regression.

mod evolve;
mod ops;
mod simplify;
mod tree;

pub use evolve::{evolve, fitness, tree_mse, GpModel, GpRun, PenaltyRule};
pub use ops::{crossover_subtree, init_population, mutate, ConstantPolicy, Primitives};
pub use simplify::simplify;
pub use tree::{totalize, Func, FunctionSet, GpNode, DIVISION_GUARD, EXP_CLAMP};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct GpConfig {
    pub population: usize,
    pub tournament_size: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub max_depth: usize,
    pub init_min_depth: usize,
    pub init_max_depth: usize,
    /// Fitness cost per node.
    pub parsimony: f64,
    pub elitism: usize,
    pub penalties: Vec<PenaltyRule>,
    /// Threads used for fitness evaluation.
    pub workers: usize,
}

impl Default for GpConfig {
    fn default() -> Self {
        Self {
            population: 256,
            tournament_size: 4,
            crossover_rate: 0.9,
            mutation_rate: 0.1,
            max_depth: 10,
            init_min_depth: 2,
            init_max_depth: 6,
            parsimony: 0.001,
            elitism: 1,
            penalties: Vec::new(),
            workers: 1,
        }
    }
}

impl GpConfig {
    pub fn validate(&self) -> Result<()> {
        let rate = |r: f64| (0.0..=1.0).contains(&r);
        let ok = self.population >= 2
            && self.tournament_size >= 1
            && self.elitism < self.population
            && rate(self.crossover_rate)
            && rate(self.mutation_rate)
            && self.crossover_rate + self.mutation_rate <= 1.0 + 1e-12
            && self.init_min_depth <= self.init_max_depth
            && self.max_depth >= self.init_max_depth
            && self.parsimony >= 0.0;
        if !ok {
            return Err(Error::Config(format!("invalid GP config {self:?}")));
        }
        Ok(())
    }
}
