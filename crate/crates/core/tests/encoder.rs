use strips_learn::cnf::Cnf;
use strips_learn::encoder::{build_theory, EncodeOptions};
use strips_learn::graph::{Edge, LabeledGraph};
use strips_learn::hyperspace::Alpha;

fn solve(cnf: &Cnf) -> bool {
    let mut s: cadical::Solver = cadical::Solver::new();
    for cl in cnf.clauses.iter() {
        s.add_clause(cl.iter().copied());
    }
    s.solve().expect("solver finished")
}

fn path(n: usize) -> LabeledGraph {
    let edges = (0..n - 1).map(|i| Edge { src: i, label: 0, dst: i + 1 });
    LabeledGraph::new("path", n, vec!["a".into()], edges).unwrap()
}

fn alpha(schemas: &[usize], preds: &[usize], atoms: usize, n: usize) -> Alpha {
    Alpha {
        schema_arities: schemas.to_vec(),
        pred_arities: preds.to_vec(),
        num_atom_schemas: atoms,
        num_static_unary: 0,
        num_static_binary: 0,
        objects: vec![n],
    }
}

#[test]
fn single_flip_is_satisfiable() {
    for sym in [false, true] {
        let th = build_theory(&alpha(&[0], &[0], 1, 1), &[path(2)], EncodeOptions { symmetry_breaking: sym }).unwrap();
        assert!(solve(&th.cnf));
    }
}

#[test]
fn three_states_need_more_than_one_atom() {
    let th = build_theory(&alpha(&[0], &[0], 1, 1), &[path(3)], EncodeOptions::default()).unwrap();
    assert!(!solve(&th.cnf));
}
