mod common;

use common::Cadical;
use strips_learn::decode::decode;
use strips_learn::encoder::{build_theory, EncodeOptions};
use strips_learn::fixtures::grid;
use strips_learn::hyperspace::{alpha_of, Alpha};
use strips_learn::sat::{SatSolver, SatVerdict};
use strips_learn::verify::{verify_oracle, verify_sat, DomainValuation};

fn reference_alpha() -> Alpha {
    let f = grid(4, 3, 2).unwrap();
    alpha_of(&f.domain, &[f.instance])
}

#[test]
fn reference_shape() {
    let a = reference_alpha();
    assert_eq!(a.schema_arities, vec![2, 2]);
    assert_eq!(a.pred_arities, vec![1, 1]);
    assert_eq!((a.num_atom_schemas, a.num_static_unary, a.num_static_binary), (4, 0, 2));
    assert_eq!(a.objects, vec![7]);
}

#[test]
fn learned_grid_generalizes() {
    let train = grid(4, 3, 2).unwrap().graph().clone();
    let tests = [grid(4, 4, 2).unwrap(), grid(3, 2, 2).unwrap()];
    for sym in [false, true] {
        for n in [4, 7] {
            let alpha = reference_alpha().with_objects(vec![n]);
            let opts = EncodeOptions { symmetry_breaking: sym };
            let th = build_theory(&alpha, std::slice::from_ref(&train), opts).unwrap();
            let r = Cadical.solve(&th.cnf).unwrap();
            assert_eq!(r.verdict, SatVerdict::Sat, "sym {sym} N {n}");
            let asg = r.assignment.unwrap();
            let sol = decode(&th, &asg).unwrap();
            assert!(verify_oracle(&sol, 0, &train).passed());
            let val = DomainValuation::from_assignment(&th, &asg);
            for t in &tests {
                let v = verify_sat(&val, t.graph(), 1..=8, opts, &Cadical).unwrap();
                assert!(v.verdict.passed(), "sym {sym} N {n} on {}: {:?}", t.graph().name(), v.verdict);
            }
        }
    }
}

/// With K ground atoms there are at most 2^K distinct states, so any graph
/// with more nodes is out of reach.
#[test]
fn capacity_law() {
    let g = grid(4, 3, 2).unwrap().graph().clone();
    let shapes: [(&[usize], usize); 5] = [(&[1], 1), (&[2], 1), (&[1, 1], 1), (&[1], 3), (&[1, 1, 1], 1)];
    for (preds, n) in shapes {
        let alpha = Alpha {
            schema_arities: vec![2, 2],
            pred_arities: preds.to_vec(),
            num_atom_schemas: 4,
            num_static_unary: 0,
            num_static_binary: 2,
            objects: vec![n],
        };
        let k = alpha.num_ground_atoms(n);
        assert!((1..=3).contains(&k) && (1usize << k) < g.num_nodes(), "{alpha}");
        let th = build_theory(&alpha, std::slice::from_ref(&g), EncodeOptions::default()).unwrap();
        assert_eq!(Cadical.solve(&th.cnf).unwrap().verdict, SatVerdict::Unsat, "{alpha} K={k}");
    }
}
