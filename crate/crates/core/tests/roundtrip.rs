use proptest::prelude::*;

use strips_learn::cnf::{parse_dimacs, Cnf, Family, Tag};
use strips_learn::fixtures::random_tiny;
use strips_learn::graph::{parse_graph, write_graph, Edge, LabeledGraph};
use strips_learn::hyperspace::{Bounds, BOUNDS_KEYS};
use strips_learn::strips::text::{parse_problem, write_problem};
use strips_learn::strips::{find_isomorphism, graph_accounts_for, Accounting};

prop_compose! {
    fn graphs()(n in 1usize..9, labels in 1usize..4)
        (edges in prop::collection::vec((0..n, 0..labels, 0..n), 0..20), n in Just(n), labels in Just(labels))
        -> LabeledGraph {
        let names = (0..labels).map(|l| format!("l{l}")).collect();
        let e = edges.into_iter().map(|(src, label, dst)| Edge { src, label, dst });
        LabeledGraph::new("g", n, names, e).unwrap()
    }
}

fn permuted(g: &LabeledGraph, perm: &[usize]) -> LabeledGraph {
    let e = g.edges().iter().map(|e| Edge {
        src: perm[e.src],
        label: e.label,
        dst: perm[e.dst],
    });
    LabeledGraph::new("h", g.num_nodes(), g.labels().to_vec(), e).unwrap()
}

proptest! {
    #[test]
    fn graph_text_round_trip(g in graphs()) {
        let back = parse_graph(&write_graph(&g)).unwrap();
        prop_assert_eq!(back.digest(), g.digest());
        prop_assert_eq!(back.edges().len(), g.edges().len());
        prop_assert_eq!(write_graph(&back), write_graph(&g));
    }

    #[test]
    fn parse_graph_never_panics(s in "\\PC{0,200}") {
        let _ = parse_graph(&s);
    }

    #[test]
    fn relabeled_nodes_are_isomorphic(g in graphs(), seed in any::<u64>()) {
        let mut perm: Vec<usize> = (0..g.num_nodes()).collect();
        let mut x = seed;
        for i in (1..perm.len()).rev() {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (x >> 33) as usize % (i + 1));
        }
        let h = permuted(&g, &perm);
        let iso = find_isomorphism(&g, &h, true);
        prop_assert!(iso.is_some());
        let is_holds = matches!(graph_accounts_for(&g, &h, None, None), Accounting::Holds { .. });
        prop_assert!(is_holds);
    }

    #[test]
    fn dimacs_round_trip(clauses in prop::collection::vec(prop::collection::vec((1i32..20, any::<bool>()), 0..6), 0..30)) {
        let mut c = Cnf::new();
        for i in 0..20 {
            c.vars.fresh(Tag::new(Family::Use1, &[i])).unwrap();
        }
        let clauses: Vec<Vec<i32>> = clauses
            .into_iter()
            .map(|cl| cl.into_iter().map(|(v, neg)| if neg { -v } else { v }).collect())
            .collect();
        for cl in &clauses {
            c.add(cl);
        }
        let d = parse_dimacs(&c.to_dimacs()).unwrap();
        prop_assert_eq!(d.num_vars, 20);
        prop_assert_eq!(d.clauses, clauses);
    }

    #[test]
    fn problem_text_round_trip(seed in 0u64..200) {
        let f = random_tiny(seed);
        let text = write_problem(&f.domain, std::slice::from_ref(&f.instance));
        let p = parse_problem(&text).unwrap();
        prop_assert_eq!(&p.domain, &f.domain);
        prop_assert_eq!(&p.instances, &vec![f.instance.clone()]);
        prop_assert_eq!(write_problem(&p.domain, &p.instances), text);
    }

    #[test]
    fn bounds_config_round_trip(values in prop::collection::vec(0usize..10, BOUNDS_KEYS.len())) {
        let text: String = BOUNDS_KEYS.iter().zip(&values).map(|(k, v)| format!("{k} = {v}\n")).collect();
        let mut b = Bounds::default();
        match b.apply_config(&text) {
            Ok(()) => {
                let json = serde_json::to_value(&b).unwrap();
                for (k, v) in BOUNDS_KEYS.iter().zip(&values) {
                    prop_assert_eq!(json[k].as_u64(), Some(*v as u64));
                }
            }
            Err(_) => prop_assert!(b.validate().is_err()),
        }
    }
}
