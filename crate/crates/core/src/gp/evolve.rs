//! Fitness, penalty patterns, the generational loop and the model wrapper.

use std::fmt;

use super::ops::{crossover_subtree, init_population, mutate, ConstantPolicy, Primitives};
use super::simplify::simplify;
use super::tree::{parse_terminal, FunctionSet, GpNode, Sexp};
use super::GpConfig;
use crate::dataset::DataPair;
use crate::error::{Error, Result};
use crate::models::RegressionModel;
use crate::parallel::map_indexed;
use crate::rng::DeterministicRng;

#[derive(Debug, Clone, PartialEq)]
enum Pattern {
    Any,
    Leaf(GpNode),
    Function(String, Vec<Pattern>),
}

impl Pattern {
    fn from_sexp(s: &Sexp, functions: &FunctionSet) -> Result<Self> {
        match s {
            Sexp::Atom(a) if a == "?" => Ok(Pattern::Any),
            Sexp::Atom(a) => Ok(Pattern::Leaf(parse_terminal(a)?)),
            Sexp::List(items) => {
                let name = Sexp::head(items, functions)?;
                let children = items[1..]
                    .iter()
                    .map(|c| Self::from_sexp(c, functions))
                    .collect::<Result<_>>()?;
                Ok(Pattern::Function(name.to_string(), children))
            }
        }
    }

    fn matches(&self, node: &GpNode) -> bool {
        match (self, node) {
            (Pattern::Any, _) => true,
            (Pattern::Leaf(leaf), n) => leaf == n,
            (Pattern::Function(name, pats), GpNode::Function(f, children)) => {
                f.name() == name
                    && pats.len() == children.len()
                    && pats.iter().zip(children).all(|(p, c)| p.matches(c))
            }
            _ => false,
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Any => f.write_str("?"),
            Pattern::Leaf(n) => write!(f, "{n}"),
            Pattern::Function(name, pats) => {
                write!(f, "({name}")?;
                for p in pats {
                    write!(f, " {p}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Additive fitness cost charged once per subtree matching `pattern`.
/// Patterns are s-expressions where `?` matches any subtree.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyRule {
    pattern: Pattern,
    pub cost: f64,
}

impl PenaltyRule {
    pub fn parse(pattern: &str, cost: f64, functions: &FunctionSet) -> Result<Self> {
        Ok(Self {
            pattern: Pattern::from_sexp(&Sexp::parse(pattern)?, functions)?,
            cost,
        })
    }

    pub fn count(&self, tree: &GpNode) -> usize {
        tree.preorder()
            .into_iter()
            .filter(|n| self.pattern.matches(n))
            .count()
    }
}

impl fmt::Display for PenaltyRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} +{}", self.pattern, self.cost)
    }
}

/// Plain MSE of a tree; +inf if the error overflows.
pub fn tree_mse(tree: &GpNode, pairs: &[DataPair]) -> f64 {
    let sse: f64 = pairs
        .iter()
        .map(|p| {
            let r = tree.eval(&p.input) - p.ideal[0];
            r * r
        })
        .sum();
    let mse = sse / pairs.len() as f64;
    if mse.is_finite() {
        mse
    } else {
        f64::INFINITY
    }
}

/// MSE plus parsimony and pattern penalties; lower is better.
pub fn fitness(tree: &GpNode, pairs: &[DataPair], config: &GpConfig) -> f64 {
    let penalty: f64 = config
        .penalties
        .iter()
        .map(|rule| rule.cost * rule.count(tree) as f64)
        .sum();
    tree_mse(tree, pairs) + config.parsimony * tree.size() as f64 + penalty
}

#[derive(Debug, Clone)]
pub struct GpRun {
    /// Simplified best individual of the final generation.
    pub best: GpNode,
    /// Fitness of the best individual before simplification.
    pub fitness: f64,
    /// MSE of `best`.
    pub mse: f64,
    /// Best fitness after each generation.
    pub history: Vec<f64>,
}

fn tournament(fitness: &[f64], size: usize, rng: &mut DeterministicRng) -> usize {
    let mut winner = rng.index(fitness.len());
    for _ in 1..size {
        let c = rng.index(fitness.len());
        if fitness[c] < fitness[winner] {
            winner = c;
        }
    }
    winner
}

fn check_pairs(pairs: &[DataPair]) -> Result<usize> {
    let first = pairs
        .first()
        .ok_or_else(|| Error::Empty("no pairs for symbolic regression".into()))?;
    let width = first.input.len();
    for p in pairs {
        if p.ideal.len() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                actual: p.ideal.len(),
            });
        }
        if p.input.len() != width {
            return Err(Error::DimensionMismatch {
                expected: width,
                actual: p.input.len(),
            });
        }
    }
    Ok(width)
}

/// Generational symbolic regression on single-output pairs.
pub fn evolve(
    pairs: &[DataPair],
    config: &GpConfig,
    functions: &FunctionSet,
    constants: &ConstantPolicy,
    rng: &mut DeterministicRng,
    generations: usize,
) -> Result<GpRun> {
    config.validate()?;
    constants.validate()?;
    let variables = check_pairs(pairs)?;
    if generations == 0 {
        return Err(Error::InvalidArgument("generations must be >= 1".into()));
    }
    if functions.is_empty() {
        return Err(Error::Config("function set is empty".into()));
    }
    let prims = Primitives {
        functions,
        constants,
        variables,
    };
    let score_all = |trees: &[GpNode]| {
        map_indexed(trees.len(), config.workers, |i| {
            fitness(&trees[i], pairs, config)
        })
    };

    let mut population = init_population(config, prims, rng);
    let mut scores = score_all(&population);
    let mut history = Vec::with_capacity(generations);
    for _ in 0..generations {
        let mut order: Vec<usize> = (0..population.len()).collect();
        order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
        let elites = &order[..config.elitism];
        let mut next: Vec<GpNode> = elites.iter().map(|&i| population[i].clone()).collect();
        let elite_scores: Vec<f64> = elites.iter().map(|&i| scores[i]).collect();
        while next.len() < config.population {
            let r = rng.next_double();
            if r < config.crossover_rate {
                let a = tournament(&scores, config.tournament_size, rng);
                let b = tournament(&scores, config.tournament_size, rng);
                let (ca, cb) =
                    crossover_subtree(&population[a], &population[b], config.max_depth, rng);
                next.push(ca);
                if next.len() < config.population {
                    next.push(cb);
                }
            } else if r < config.crossover_rate + config.mutation_rate {
                let a = tournament(&scores, config.tournament_size, rng);
                next.push(mutate(&population[a], config.max_depth, prims, rng));
            } else {
                let a = tournament(&scores, config.tournament_size, rng);
                next.push(population[a].clone());
            }
        }
        let fresh = score_all(&next[config.elitism..]);
        population = next;
        scores = elite_scores.into_iter().chain(fresh).collect();
        history.push(scores.iter().copied().fold(f64::INFINITY, f64::min));
    }
    let best = (0..scores.len())
        .min_by(|&a, &b| scores[a].total_cmp(&scores[b]))
        .expect("non-empty population");
    let simplified = simplify(&population[best]);
    Ok(GpRun {
        mse: tree_mse(&simplified, pairs),
        best: simplified,
        fitness: scores[best],
        history,
    })
}

/// An evolved expression behind the common model contract. Its parameters
/// are the tree's constants in preorder.
#[derive(Debug, Clone, PartialEq)]
pub struct GpModel {
    tree: GpNode,
    input_count: usize,
}

impl GpModel {
    pub fn new(tree: GpNode, input_count: usize) -> Result<Self> {
        if let Some(v) = tree.max_variable() {
            if v >= input_count {
                return Err(Error::InvalidArgument(format!(
                    "tree uses x{v} but the model has {input_count} inputs"
                )));
            }
        }
        Ok(Self { tree, input_count })
    }

    pub fn tree(&self) -> &GpNode {
        &self.tree
    }
}

impl RegressionModel for GpModel {
    fn input_count(&self) -> usize {
        self.input_count
    }

    fn output_count(&self) -> usize {
        1
    }

    fn compute(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.input_count {
            return Err(Error::DimensionMismatch {
                expected: self.input_count,
                actual: input.len(),
            });
        }
        Ok(vec![self.tree.eval(input)])
    }

    fn parameters(&self) -> Vec<f64> {
        self.tree.constants()
    }

    fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        self.tree.set_constants(params)
    }
}

impl fmt::Display for GpModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "gp [{} inputs] {}", self.input_count, self.tree)
    }
}
