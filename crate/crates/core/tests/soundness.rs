mod common;

use common::Cadical;
use strips_learn::decode::decode;
use strips_learn::encoder::{build_theory, EncodeOptions};
use strips_learn::fixtures::random_tiny;
use strips_learn::hyperspace::alpha_of;
use strips_learn::sat::{SatSolver, SatVerdict};
use strips_learn::strips::{encoding_class_violation, expand, DEFAULT_STATE_CAP};
use strips_learn::verify::{verify_oracle, verify_sat, DomainValuation};

#[test]
fn tiny_corpus() {
    for seed in 0..25 {
        let f = random_tiny(seed);
        let alpha = alpha_of(&f.domain, std::slice::from_ref(&f.instance));
        let g = f.graph().clone();
        for sym in [false, true] {
            let opts = EncodeOptions { symmetry_breaking: sym };
            let th = build_theory(&alpha, std::slice::from_ref(&g), opts).unwrap();
            let r = Cadical.solve(&th.cnf).unwrap();
            assert_eq!(r.verdict, SatVerdict::Sat, "seed {seed} sym {sym}: {alpha}\n{:?}", f.domain);
            let asg = r.assignment.unwrap();
            let sol = decode(&th, &asg).unwrap();
            let v = verify_oracle(&sol, 0, &g);
            assert!(v.passed(), "seed {seed}: {v:?}");
            let ly = &sol.layers[0];
            let ex = expand(&sol.domain, &ly.instance, ly.instance.init.as_ref().unwrap(), DEFAULT_STATE_CAP).unwrap();
            assert_eq!(encoding_class_violation(&sol.domain, &ly.instance, &ex), None, "seed {seed}");
            let val = DomainValuation::from_assignment(&th, &asg);
            let vs = verify_sat(&val, &g, 1..=3, opts, &Cadical).unwrap();
            assert!(vs.verdict.passed(), "seed {seed}: {:?}", vs.verdict);
        }
        println!("seed {seed}: {alpha} states {}", g.num_nodes());
    }
}

fn mutants(d: &strips_learn::strips::Domain) -> Vec<strips_learn::strips::Domain> {
    let mut out = Vec::new();
    for (a, s) in d.schemas.iter().enumerate() {
        for atom in s.pre_pos.iter().chain(&s.pre_neg) {
            let mut m = d.clone();
            m.schemas[a].pre_pos.remove(atom);
            m.schemas[a].pre_neg.remove(atom);
            out.push(m);
        }
        for atom in s.eff_pos.iter().chain(&s.eff_neg) {
            let mut m = d.clone();
            m.schemas[a].eff_pos.remove(atom);
            m.schemas[a].eff_neg.remove(atom);
            out.push(m);
        }
        let mut m = d.clone();
        m.schemas[a].label = Some(if s.label.as_deref() == Some("x") { "y" } else { "x" }.into());
        out.push(m);
    }
    out
}

#[test]
fn routes_agree() {
    use strips_learn::verify::{verify_oracle_search, Outcome};
    let (mut agree, mut fails) = (0, 0);
    for seed in 0..25 {
        let f = random_tiny(seed);
        let g = f.graph().clone();
        let mut cands = vec![f.domain.clone()];
        cands.extend(mutants(&f.domain));
        for (i, d) in cands.iter().enumerate() {
            let Ok(val) = DomainValuation::from_domain(d) else { continue };
            let vs = verify_sat(&val, &g, 1..=3, EncodeOptions::default(), &Cadical).unwrap().verdict;
            let vo = verify_oracle_search(d, &g, 1..=3, 1 << 16);
            if i == 0 {
                assert!(vs.passed(), "seed {seed}: ground truth failed sat route: {vs:?}");
            }
            if vs.outcome == Outcome::Indet || vo.outcome == Outcome::Indet {
                continue;
            }
            assert_eq!(vs.outcome, vo.outcome, "seed {seed} mutant {i}: {vs:?} vs {vo:?}\n{d:?}");
            agree += 1;
            fails += (vs.outcome == Outcome::Fail) as usize;
        }
    }
    println!("agree {agree} (fail {fails})");
}
