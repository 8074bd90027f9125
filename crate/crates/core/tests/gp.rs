use mlkit::dataset::DataPair;
use mlkit::gp::{
    evolve, init_population, simplify, ConstantPolicy, FunctionSet, GpConfig, GpNode, Primitives,
};
use mlkit::DeterministicRng;

fn quadratic_pairs() -> Vec<DataPair> {
    (0..20)
        .map(|i| {
            let x = -1.0 + 2.0 * i as f64 / 19.0;
            DataPair::new(vec![x], vec![x * x + x])
        })
        .collect()
}

fn random_trees(seed: u64, count: usize, variables: usize) -> Vec<GpNode> {
    let fs = FunctionSet::standard();
    let cp = ConstantPolicy::Generated { lo: -3.0, hi: 3.0 };
    let prims = Primitives {
        functions: &fs,
        constants: &cp,
        variables,
    };
    let mut rng = DeterministicRng::new(seed);
    (0..count)
        .map(|i| {
            let depth = 1 + i % 6;
            if i % 2 == 0 {
                prims.full(depth, &mut rng)
            } else {
                prims.grow(depth, true, &mut rng)
            }
        })
        .collect()
}

#[test]
fn recovers_quadratic_in_most_seeds() {
    let pairs = quadratic_pairs();
    let mut solved = Vec::new();
    for seed in 13..=17u64 {
        let run = evolve(
            &pairs,
            &GpConfig::default(),
            &FunctionSet::standard(),
            &ConstantPolicy::default(),
            &mut DeterministicRng::new(seed),
            200,
        )
        .unwrap();
        eprintln!("seed {seed}: mse {:e} {}", run.mse, run.best);
        if run.mse < 1e-4 {
            solved.push(seed);
        }
    }
    assert!(solved.len() >= 3, "solved {solved:?}");
}

#[test]
fn evaluation_is_total() {
    let trees = random_trees(77, 10_000, 2);
    let mut rng = DeterministicRng::new(78);
    for t in &trees {
        for _ in 0..10 {
            let x = [rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)];
            let v = t.eval(&x);
            assert!(v.is_finite(), "{t} at {x:?} gave {v}");
        }
    }
}

#[test]
fn simplify_preserves_semantics_and_never_grows() {
    let mut rng = DeterministicRng::new(5);
    for t in random_trees(4, 2000, 1) {
        let s = simplify(&t);
        assert!(s.size() <= t.size(), "{t} -> {s}");
        for _ in 0..100 {
            let x = [rng.uniform(-2.0, 2.0)];
            let (a, b) = (t.eval(&x), s.eval(&x));
            let tol = 1e-9 * a.abs().max(1.0);
            assert!((a - b).abs() <= tol, "{t} -> {s} at {x:?}: {a} vs {b}");
        }
    }
}

#[test]
fn serialization_round_trips_random_trees() {
    let fs = FunctionSet::standard();
    for t in random_trees(9, 1000, 3) {
        let back = GpNode::parse(&t.to_string(), &fs).unwrap();
        assert_eq!(back, t);
    }
}

#[test]
fn initial_population_is_reproducible_and_bounded() {
    let fs = FunctionSet::standard();
    let cp = ConstantPolicy::default();
    let prims = Primitives {
        functions: &fs,
        constants: &cp,
        variables: 2,
    };
    let config = GpConfig::default();
    let a = init_population(&config, prims, &mut DeterministicRng::new(12));
    let b = init_population(&config, prims, &mut DeterministicRng::new(12));
    assert_eq!(a.len(), 256);
    assert!(a.iter().all(|t| t.depth() <= 6 && t.depth() >= 1));
    let text = |p: &[GpNode]| p.iter().map(|t| t.to_string()).collect::<Vec<_>>();
    assert_eq!(text(&a), text(&b));
}

#[test]
fn evolution_is_independent_of_worker_count() {
    let pairs = quadratic_pairs();
    let run = |workers| {
        let config = GpConfig {
            population: 64,
            workers,
            ..GpConfig::default()
        };
        evolve(
            &pairs,
            &config,
            &FunctionSet::standard(),
            &ConstantPolicy::default(),
            &mut DeterministicRng::new(3),
            15,
        )
        .unwrap()
    };
    let (a, b) = (run(1), run(4));
    assert_eq!(a.best, b.best);
    assert_eq!(a.history, b.history);
}
