use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;

use mimic_core::eval::{kfold_split, roc_area};
use mimic_core::perception::best_label;
use mimic_core::trace::{closeness, distance, protection};
use mimic_core::tree::{entropy, information_gain};
use mimic_core::{
    default_maze, induce, play_game, read_trace, write_trace, AttributeSpec, ClassLabel, ComputationalPerception, Cp, Dataset, DecisionTree,
    GameConfig, Instance, LinguisticVariable, PerceptionNetwork, Position, Schema, ScriptedPolicy, Value, DEFAULT_MAZE_ID,
};

fn pos() -> impl Strategy<Value = Position> {
    (0usize..20, 0usize..20).prop_map(|(x, y)| Position::new(x, y))
}

fn class() -> impl Strategy<Value = ClassLabel> {
    prop_oneof![Just(ClassLabel::GoAhead), Just(ClassLabel::GetAway)]
}

/// Rows over three nominal attributes of arity 2, 3 and 2, plus one numeric.
fn rows(max: usize) -> impl Strategy<Value = Dataset> {
    prop::collection::vec((0usize..2, 0usize..3, 0usize..2, 0u8..4, class()), 1..=max).prop_map(|rs| {
        let schema = Schema::new(
            "prop",
            vec![
                AttributeSpec::nominal("a", ["a0", "a1"]),
                AttributeSpec::nominal("b", ["b0", "b1", "b2"]),
                AttributeSpec::nominal("c", ["c0", "c1"]),
                AttributeSpec::numeric("x"),
            ],
        )
        .unwrap();
        let rows = rs
            .into_iter()
            .map(|(a, b, c, x, cl)| Instance::new(vec![Value::Nominal(a), Value::Nominal(b), Value::Nominal(c), Value::Numeric(x as f64 / 4.0)], Some(cl)))
            .collect();
        Dataset::new(schema, rows).unwrap()
    })
}

fn key(i: &Instance) -> Vec<u64> {
    i.values
        .iter()
        .map(|v| match v {
            Value::Nominal(k) => *k as u64,
            Value::Numeric(x) => x.to_bits(),
        })
        .collect()
}

/// Best training accuracy any function of the attributes can reach.
fn optimum(d: &Dataset) -> usize {
    let mut groups: BTreeMap<Vec<u64>, [usize; 2]> = BTreeMap::new();
    for r in &d.rows {
        groups.entry(key(r)).or_default()[r.class.unwrap().index()] += 1;
    }
    groups.values().map(|c| c[0].max(c[1])).sum()
}

fn variables() -> Vec<LinguisticVariable> {
    let net = PerceptionNetwork::for_game(&default_maze(), &GameConfig::default());
    [Cp::DistancePlayerOpponent, Cp::Protection, Cp::Time, Cp::Closeness].iter().map(|&cp| net.variable(cp).unwrap().clone()).collect()
}

proptest! {
    #[test]
    fn distance_is_a_metric(p in pos(), q in pos(), r in pos()) {
        prop_assert_eq!(distance(p, p), 0);
        prop_assert_eq!(distance(p, q), distance(q, p));
        prop_assert!(distance(p, r) <= distance(p, q) + distance(q, r));
        prop_assert_eq!(distance(p, q) == 0, p == q);
    }

    #[test]
    fn protection_is_a_symmetric_ratio(p in pos(), q in pos()) {
        let maze = default_maze();
        // entities only ever stand on floor
        prop_assume!(!maze.is_obstacle(p) && !maze.is_obstacle(q));
        let v = protection(&maze, p, q);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert_eq!(v, protection(&maze, q, p));
    }

    #[test]
    fn closeness_is_antisymmetric(a in 0usize..40, b in 0usize..40) {
        prop_assert_eq!(closeness(a, b), -closeness(b, a));
        prop_assert_eq!(closeness(a, a), 0);
    }

    #[test]
    fn first_order_degrees_partition_unity(t in 0.0f64..=1.0) {
        for var in variables() {
            let (lo, hi) = var.domain();
            let cp = var.perceive(lo + t * (hi - lo));
            prop_assert!(cp.entries.iter().all(|(_, d)| (0.0..=1.0).contains(d)));
            let sum: f64 = cp.entries.iter().map(|(_, d)| d).sum();
            prop_assert!((sum - 1.0).abs() < 1e-9, "{} sums to {}", var.name(), sum);
        }
    }

    #[test]
    fn second_order_degrees_stay_in_range(da in prop::array::uniform3(0.0f64..=1.0), db in prop::array::uniform3(0.0f64..=1.0)) {
        let net = PerceptionNetwork::for_game(&default_maze(), &GameConfig::default());
        let rb = net.rule_base(Cp::Attitude).unwrap();
        let labels = ["small", "medium", "large"];
        let a = ComputationalPerception::new("a", labels.iter().copied().zip(da));
        let b = ComputationalPerception::new("b", labels.iter().copied().zip(db));
        let out = rb.evaluate(&a, &b).unwrap();
        let bound = (da.iter().cloned().fold(0.0, f64::max) + db.iter().cloned().fold(0.0, f64::max)) / 2.0;
        prop_assert_eq!(out.entries.len(), 4);
        prop_assert!(out.entries.iter().all(|(_, d)| (0.0..=bound).contains(d)));
        prop_assert_eq!(out.entries.iter().map(|(_, d)| *d).fold(0.0, f64::max), bound);
    }

    #[test]
    fn best_label_ignores_lowering_the_others(ds in prop::collection::vec(0.0f64..=1.0, 1..6), cut in 0.0f64..=1.0) {
        let names: Vec<String> = (0..ds.len()).map(|i| format!("l{i}")).collect();
        let cp = ComputationalPerception::new("v", names.iter().cloned().zip(ds.iter().copied()));
        let (best, degree) = best_label(&cp);
        prop_assert_eq!(degree, ds.iter().cloned().fold(0.0, f64::max));
        // earliest label among the maxima
        let first = ds.iter().position(|&d| d == degree).unwrap();
        prop_assert_eq!(best, names[first].as_str());
        let lowered = ComputationalPerception::new(
            "v",
            names.iter().cloned().zip(ds.iter().enumerate().map(|(i, &d)| if i == first { d } else { d * cut })),
        );
        prop_assert_eq!(best_label(&lowered).0, names[first].as_str());
    }

    #[test]
    fn gain_is_bounded_by_parent_entropy(d in rows(12)) {
        let h = entropy(&d.class_counts()).unwrap();
        for attr in 0..d.schema.len() {
            let (g, _) = information_gain(&d, attr).unwrap();
            prop_assert!(g >= -1e-12 && g <= h + 1e-12, "gain {} outside [0, {}]", g, h);
        }
    }

    /// Exhaustive oracle: on tiny sets the tree must reach the best
    /// training accuracy any lookup table can, i.e. 100% without
    /// contradictions.
    #[test]
    fn training_accuracy_matches_the_optimum(d in rows(8)) {
        let tree = induce(&d).unwrap();
        let correct = d.rows.iter().filter(|r| tree.predict(r).unwrap() == r.class.unwrap()).count();
        prop_assert_eq!(correct, optimum(&d));
    }

    #[test]
    fn model_round_trip_classifies_identically(d in rows(30)) {
        let tree = induce(&d).unwrap();
        let back = DecisionTree::load_model(tree.to_model_string().as_bytes()).unwrap();
        prop_assert_eq!(&back, &tree);
        for r in &d.rows {
            prop_assert_eq!(back.classify(r).unwrap(), tree.classify(r).unwrap());
        }
    }

    #[test]
    fn roc_complement(pairs in prop::collection::vec((0u8..6, any::<bool>()), 2..50)) {
        prop_assume!(pairs.iter().any(|p| p.1) && pairs.iter().any(|p| !p.1));
        let s: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
        let neg: Vec<f64> = s.iter().map(|x| -x).collect();
        let t: Vec<bool> = pairs.iter().map(|p| p.1).collect();
        let sum = roc_area(&s, &t).unwrap() + roc_area(&neg, &t).unwrap();
        prop_assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn folds_partition_the_instances(d in rows(60), k in 2usize..8, seed in any::<u64>()) {
        prop_assume!(d.len() >= k);
        let folds = kfold_split(&d, k, seed).unwrap();
        prop_assert_eq!(folds.len(), k);
        let mut seen = vec![0usize; d.len()];
        for (train, test) in &folds {
            prop_assert!(!test.is_empty());
            prop_assert_eq!(train.len() + test.len(), d.len());
            prop_assert!(train.iter().all(|i| !test.contains(i)));
            for &i in test {
                seen[i] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&n| n == 1));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trace_csv_round_trip(seed in 0u64..10_000, policy in 0usize..3) {
        let policy = [ScriptedPolicy::GreedyCollector, ScriptedPolicy::CautiousCollector { flee_radius: 4 }, ScriptedPolicy::RandomWalker][policy];
        let t = play_game(policy, Arc::new(default_maze()), DEFAULT_MAZE_ID, GameConfig::with_seed(seed)).unwrap();
        let mut buf = Vec::new();
        write_trace(&t, &mut buf).unwrap();
        prop_assert_eq!(read_trace(buf.as_slice()).unwrap(), t);
    }
}
