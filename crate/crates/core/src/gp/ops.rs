//! Random tree generation and the variation operators.

use serde::{Deserialize, Serialize};

use super::tree::{FunctionSet, GpNode};
use super::GpConfig;
use crate::error::{Error, Result};
use crate::rng::DeterministicRng;

/// Where ephemeral constants come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ConstantPolicy {
    Pool { values: Vec<f64> },
    Generated { lo: f64, hi: f64 },
}

impl Default for ConstantPolicy {
    fn default() -> Self {
        ConstantPolicy::Generated { lo: -1.0, hi: 1.0 }
    }
}

impl ConstantPolicy {
    pub fn validate(&self) -> Result<()> {
        match self {
            ConstantPolicy::Pool { values } if values.is_empty() => {
                Err(Error::Config("constant pool is empty".into()))
            }
            ConstantPolicy::Pool { values } if values.iter().any(|v| !v.is_finite()) => Err(
                Error::Config("constant pool holds a non-finite value".into()),
            ),
            ConstantPolicy::Generated { lo, hi }
                if !(lo < hi) || !lo.is_finite() || !hi.is_finite() =>
            {
                Err(Error::Config(
                    "generated constants need finite lo < hi".into(),
                ))
            }
            _ => Ok(()),
        }
    }

    pub fn draw(&self, rng: &mut DeterministicRng) -> f64 {
        match self {
            ConstantPolicy::Pool { values } => values[rng.index(values.len())],
            ConstantPolicy::Generated { lo, hi } => rng.uniform(*lo, *hi),
        }
    }
}

/// Everything a random tree can be built from.
#[derive(Clone, Copy)]
pub struct Primitives<'a> {
    pub functions: &'a FunctionSet,
    pub constants: &'a ConstantPolicy,
    pub variables: usize,
}

impl Primitives<'_> {
    /// A variable half the time (when there are any), otherwise a constant.
    pub fn terminal(&self, rng: &mut DeterministicRng) -> GpNode {
        if self.variables > 0 && rng.chance(0.5) {
            GpNode::Variable(rng.index(self.variables))
        } else {
            GpNode::Constant(self.constants.draw(rng))
        }
    }

    fn function_node(
        &self,
        rng: &mut DeterministicRng,
        child: &mut dyn FnMut(&mut DeterministicRng) -> GpNode,
    ) -> GpNode {
        let f = self.functions.functions()[rng.index(self.functions.len())].clone();
        let children = (0..f.arity()).map(|_| child(rng)).collect();
        GpNode::call(f, children)
    }

    /// Every branch reaches exactly `depth`.
    pub fn full(&self, depth: usize, rng: &mut DeterministicRng) -> GpNode {
        if depth == 0 || self.functions.is_empty() {
            return self.terminal(rng);
        }
        self.function_node(rng, &mut |r| self.full(depth - 1, r))
    }

    /// Branches stop early at random; a positive `depth` forces a function
    /// at the root when `function_root` is set.
    pub fn grow(&self, depth: usize, function_root: bool, rng: &mut DeterministicRng) -> GpNode {
        if depth == 0 || self.functions.is_empty() {
            return self.terminal(rng);
        }
        let n_functions = self.functions.len();
        let n_terminals = self.variables + 1;
        let pick_function = function_root || rng.index(n_functions + n_terminals) < n_functions;
        if !pick_function {
            return self.terminal(rng);
        }
        self.function_node(rng, &mut |r| self.grow(depth - 1, false, r))
    }
}

/// Ramped half-and-half: even slots use the full method, odd slots grow,
/// and depths cycle through the configured init range.
pub fn init_population(
    config: &GpConfig,
    primitives: Primitives<'_>,
    rng: &mut DeterministicRng,
) -> Vec<GpNode> {
    let span = config.init_max_depth - config.init_min_depth + 1;
    (0..config.population)
        .map(|i| {
            let depth = config.init_min_depth + (i / 2) % span;
            if i % 2 == 0 {
                primitives.full(depth, rng)
            } else {
                primitives.grow(depth, true, rng)
            }
        })
        .collect()
}

/// Picks a function node 90% of the time (when the tree has any), otherwise
/// a leaf; uniform within the chosen class.
fn crossover_point(tree: &GpNode, rng: &mut DeterministicRng) -> usize {
    let nodes = tree.preorder();
    let (functions, leaves): (Vec<usize>, Vec<usize>) =
        (0..nodes.len()).partition(|&i| nodes[i].is_function());
    if !functions.is_empty() && rng.chance(0.9) {
        functions[rng.index(functions.len())]
    } else {
        leaves[rng.index(leaves.len())]
    }
}

/// Swaps random subtrees; a child deeper than `max_depth` is replaced by its
/// own parent.
pub fn crossover_subtree(
    a: &GpNode,
    b: &GpNode,
    max_depth: usize,
    rng: &mut DeterministicRng,
) -> (GpNode, GpNode) {
    let ia = crossover_point(a, rng);
    let ib = crossover_point(b, rng);
    let mut child_a = a.clone();
    let mut child_b = b.clone();
    let sub_b = b.preorder()[ib].clone();
    let sub_a = child_a.replace(ia, sub_b);
    child_b.replace(ib, sub_a);
    if child_a.depth() > max_depth {
        child_a = a.clone();
    }
    if child_b.depth() > max_depth {
        child_b = b.clone();
    }
    (child_a, child_b)
}

/// Point mutation or subtree mutation with equal odds. A mutant deeper than
/// `max_depth` is discarded in favour of the original.
pub fn mutate(
    tree: &GpNode,
    max_depth: usize,
    primitives: Primitives<'_>,
    rng: &mut DeterministicRng,
) -> GpNode {
    let mut out = tree.clone();
    let index = rng.index(tree.size());
    let target = out.node_mut(index).expect("index within tree");
    if rng.chance(0.5) {
        match target {
            GpNode::Function(f, _) => {
                let same_arity: Vec<_> = primitives
                    .functions
                    .functions()
                    .iter()
                    .filter(|g| g.arity() == f.arity())
                    .collect();
                *f = same_arity[rng.index(same_arity.len())].clone();
            }
            leaf => *leaf = primitives.terminal(rng),
        }
    } else {
        *target = primitives.grow(3, false, rng);
    }
    if out.depth() > max_depth {
        tree.clone()
    } else {
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prims<'a>(fs: &'a FunctionSet, cp: &'a ConstantPolicy) -> Primitives<'a> {
        Primitives {
            functions: fs,
            constants: cp,
            variables: 2,
        }
    }

    #[test]
    fn single_constants_swap() {
        let mut rng = DeterministicRng::new(0);
        let (a, b) =
            crossover_subtree(&GpNode::Constant(1.0), &GpNode::Constant(2.0), 10, &mut rng);
        assert_eq!((a, b), (GpNode::Constant(2.0), GpNode::Constant(1.0)));
    }

    #[test]
    fn crossover_conserves_nodes_or_rejects() {
        let fs = FunctionSet::standard();
        let cp = ConstantPolicy::default();
        let p = prims(&fs, &cp);
        let mut rng = DeterministicRng::new(4);
        for _ in 0..200 {
            let a = p.grow(4, true, &mut rng);
            let b = p.full(3, &mut rng);
            let (ca, cb) = crossover_subtree(&a, &b, 5, &mut rng);
            assert!(ca.depth() <= 5.max(a.depth()) && cb.depth() <= 5.max(b.depth()));
            if ca != a && cb != b {
                assert_eq!(ca.size() + cb.size(), a.size() + b.size());
            }
        }
    }

    #[test]
    fn depth_limit_rejects_to_parent() {
        let fs = FunctionSet::from_names(&["+"]).unwrap();
        let cp = ConstantPolicy::default();
        let p = prims(&fs, &cp);
        let mut rng = DeterministicRng::new(1);
        let mut rejected = 0;
        for _ in 0..100 {
            let a = p.full(4, &mut rng);
            let b = p.full(4, &mut rng);
            let (ca, cb) = crossover_subtree(&a, &b, 4, &mut rng);
            for (child, parent) in [(ca, &a), (cb, &b)] {
                assert!(child.depth() <= 4);
                if child.depth() == 4 && &child == parent {
                    rejected += 1;
                }
            }
        }
        assert!(rejected > 0);
    }

    #[test]
    fn pool_constants_stay_in_pool() {
        let fs = FunctionSet::standard();
        let pool = vec![0.5, 2.0, -3.0];
        let cp = ConstantPolicy::Pool {
            values: pool.clone(),
        };
        let p = Primitives {
            functions: &fs,
            constants: &cp,
            variables: 0,
        };
        let mut rng = DeterministicRng::new(8);
        for _ in 0..100 {
            let m = mutate(&GpNode::Constant(2.0), 10, p, &mut rng);
            for c in m.constants() {
                assert!(pool.contains(&c));
            }
        }
    }

    #[test]
    fn mutation_is_deterministic_and_capped() {
        let fs = FunctionSet::standard();
        let cp = ConstantPolicy::default();
        let p = prims(&fs, &cp);
        let tree = p.full(5, &mut DeterministicRng::new(2));
        let a = mutate(&tree, 5, p, &mut DeterministicRng::new(3));
        let b = mutate(&tree, 5, p, &mut DeterministicRng::new(3));
        assert_eq!(a.to_string(), b.to_string());
        let mut rng = DeterministicRng::new(6);
        for _ in 0..300 {
            assert!(mutate(&tree, 5, p, &mut rng).depth() <= 5);
        }
    }

    #[test]
    fn policy_validation() {
        assert!(ConstantPolicy::Pool { values: vec![] }.validate().is_err());
        assert!(ConstantPolicy::Generated { lo: 1.0, hi: 1.0 }
            .validate()
            .is_err());
        assert!(ConstantPolicy::default().validate().is_ok());
    }
}
