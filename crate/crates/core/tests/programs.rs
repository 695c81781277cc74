mod common;

use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rootgraph::bench::{generate, programs, GeneratorKind};
use rootgraph::{serialize_graph, ExecStatus, MatchMode};

#[test]
fn discrete_check_by_family() {
    let src = programs::IS_DISCRETE;
    for n in 1..6 {
        let mut g = generate(GeneratorKind::Discrete, n).unwrap();
        assert!(accepts(src, MatchMode::Reflecting, &mut g, true));
        for kind in [GeneratorKind::Path, GeneratorKind::Cycle] {
            let mut g = generate(kind, n).unwrap();
            let want = kind == GeneratorKind::Path && n == 1;
            assert_eq!(accepts(src, MatchMode::Reflecting, &mut g, true), want, "{kind} {n}");
        }
    }
}

#[test]
fn binary_dag_check_by_family() {
    let src = programs::IS_BINARY_DAG;
    for k in 1..8 {
        assert!(accepts(src, MatchMode::Reflecting, &mut generate(GeneratorKind::Grid, k).unwrap(), true));
        assert!(accepts(src, MatchMode::Reflecting, &mut generate(GeneratorKind::Path, k).unwrap(), true));
        assert!(!accepts(src, MatchMode::Reflecting, &mut generate(GeneratorKind::Cycle, k).unwrap(), true));
    }
}

#[test]
fn binary_dag_modes_agree_on_unrooted_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..150 {
        let d = uniform_digraph(&mut rng, 6, true);
        let a = accepts(programs::IS_BINARY_DAG, MatchMode::Reflecting, &mut d.to_graph(), true);
        let b = accepts(programs::IS_BINARY_DAG, MatchMode::Preserving, &mut d.to_graph(), true);
        assert_eq!(a, b, "{d:?}");
        assert_eq!(a, binary_dag_oracle(&d), "{d:?}");
    }
}

#[test]
fn tree_check_by_family() {
    let src = programs::IS_TREE;
    for d in 0..6 {
        assert!(accepts(src, MatchMode::Preserving, &mut generate(GeneratorKind::BTree, d).unwrap(), false));
    }
    for n in 1..6 {
        assert!(accepts(src, MatchMode::Preserving, &mut generate(GeneratorKind::Path, n).unwrap(), false));
        assert!(!accepts(src, MatchMode::Preserving, &mut generate(GeneratorKind::Cycle, n).unwrap(), false));
    }
    for k in 2..5 {
        assert!(!accepts(src, MatchMode::Preserving, &mut generate(GeneratorKind::Grid, k).unwrap(), false));
    }
    // nothing to start from
    assert!(!accepts(src, MatchMode::Preserving, &mut generate(GeneratorKind::Discrete, 2).unwrap(), false));
}

#[test]
fn tree_check_matches_oracle_from_any_start() {
    // trees whose root is not the first candidate node still reduce fully
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..200 {
        let d = random_tree(&mut rng, 9, 4);
        assert!(accepts(programs::IS_TREE, MatchMode::Preserving, &mut d.to_graph(), false), "{d:?}");
        let p = perturb(&mut rng, d);
        assert_eq!(
            accepts(programs::IS_TREE, MatchMode::Preserving, &mut p.to_graph(), false),
            tree_oracle(&p),
            "{p:?}"
        );
    }
}

#[test]
fn closure_of_cycle_is_complete() {
    for n in 2..6 {
        let d = Digraph {
            n,
            edges: (0..n).map(|i| (i, (i + 1) % n)).collect(),
        };
        let mut g = d.to_graph();
        assert_eq!(engine(programs::TRANSITIVE_CLOSURE, MatchMode::Reflecting).run(&mut g).unwrap(), ExecStatus::Success);
        assert_eq!(edge_pairs(&g).len(), n * (n - 1));
        assert_eq!(edge_pairs(&g), closure_oracle(&d).into_iter().collect::<Vec<_>>());
    }
}

#[test]
fn closure_keeps_existing_loops() {
    let d = Digraph {
        n: 3,
        edges: vec![(0, 0), (0, 1), (1, 2)],
    };
    let mut g = d.to_graph();
    engine(programs::TRANSITIVE_CLOSURE, MatchMode::Reflecting).run(&mut g).unwrap();
    assert_eq!(edge_pairs(&g), vec![(0, 0), (0, 1), (0, 2), (1, 2)]);
}

#[test]
fn runs_are_byte_identical() {
    for (name, src) in programs::ALL {
        let mode = if name == "is-tree" { MatchMode::Preserving } else { MatchMode::Reflecting };
        let run = || {
            let mut g = generate(GeneratorKind::Grid, 4).unwrap();
            let status = engine(src, mode).run(&mut g).unwrap();
            (status, serialize_graph(&g))
        };
        assert_eq!(run(), run(), "{name}");
    }
}
