//! Domain layer: structure of schemas, atom schemas and predicates.

use super::{v, Theory};
use crate::cnf::Family::*;
use crate::cnf::Lit;

pub(super) fn encode(th: &mut Theory) {
    let alpha = &th.alpha;
    let ns = alpha.num_schemas();
    let np = alpha.num_predicates();
    let nm = alpha.num_atom_schemas;
    let nl = th.labels.len();
    let arg_max = alpha.max_schema_arity();
    let pos_max = alpha.max_pred_arity();
    let schema_arities = alpha.schema_arities.clone();
    let pred_arities = alpha.pred_arities.clone();
    let (nu, nb) = (alpha.num_static_unary, alpha.num_static_binary);
    let c = &mut th.cnf;

    c.group("atoms-and-labels");
    for a in 0..ns {
        for m in 0..nm {
            let use2 = v(c, Use2, &[a, m]);
            let roles = [P0, P1, E0, E1].map(|f| v(c, f, &[a, m]));
            let mut cl = vec![-use2];
            cl.extend(roles);
            c.add(&cl);
            for r in roles {
                c.add(&[-r, use2]);
            }
            c.add(&[-roles[0], -roles[1]]);
            c.add(&[-roles[2], -roles[3]]);
        }
    }
    for m in 0..nm {
        let use1 = v(c, Use1, &[m]);
        let mut cl = vec![-use1];
        for a in 0..ns {
            let use2 = v(c, Use2, &[a, m]);
            cl.push(use2);
            c.add(&[-use2, use1]);
        }
        c.add(&cl);
    }
    for a in 0..ns {
        let ls: Vec<Lit> = (0..nl).map(|l| v(c, Label, &[a, l])).collect();
        c.at_most_one(&ls);
    }

    c.group("non-redundant-effects");
    for a in 0..ns {
        for m in 0..nm {
            clause!(c; -v(c, E0, &[a, m]), -v(c, P0, &[a, m]));
            clause!(c; -v(c, E1, &[a, m]), -v(c, P1, &[a, m]));
        }
    }
    for p in 0..np {
        let ar: Vec<Lit> = (0..=pos_max).map(|k| v(c, Arity, &[p, k])).collect();
        c.exactly_one(&ar);
    }

    c.group("atom-structure");
    for m in 0..nm {
        let at2: Vec<Lit> = (0..np).map(|p| v(c, At2, &[m, p])).collect();
        c.exactly_one(&at2);
        for i in 0..pos_max {
            let at3: Vec<Lit> = (0..arg_max).map(|nu| v(c, At3, &[m, i, nu])).collect();
            c.at_most_one(&at3);
        }
        for p in 0..np {
            let at2 = v(c, At2, &[m, p]);
            for i in 0..pos_max {
                for nu in 0..arg_max {
                    let mut cl = vec![-at2, -v(c, At3, &[m, i, nu])];
                    cl.extend((i + 1..=pos_max).map(|k| v(c, Arity, &[p, k])));
                    c.add(&cl);
                }
            }
            for k in 0..=pos_max {
                let ar = v(c, Arity, &[p, k]);
                for j in 0..k {
                    let mut cl = vec![-at2, -ar];
                    cl.extend((0..arg_max).map(|nu| v(c, At3, &[m, j, nu])));
                    c.add(&cl);
                }
                for j in k..pos_max {
                    for nu in 0..arg_max {
                        clause!(c; -at2, -ar, -v(c, At3, &[m, j, nu]));
                    }
                }
            }
        }
    }

    c.group("atom-uniqueness");
    let vects: Vec<Vec<Lit>> = (0..nm)
        .map(|m| {
            let mut vec = vec![v(c, Use1, &[m])];
            vec.extend((0..np).map(|p| v(c, At2, &[m, p])));
            for i in 0..pos_max {
                vec.extend((0..arg_max).map(|nu| v(c, At3, &[m, i, nu])));
            }
            vec
        })
        .collect();
    c.strict_lex_chain(&vects).expect("atom vectors share a length");
    // the parametrization fixes the exact number of atom schemas
    for m in 0..nm {
        clause!(c; v(c, Use1, &[m]));
    }

    c.group("non-static-atoms");
    for p in 0..np {
        let mut cl = Vec::with_capacity(2 * ns * nm);
        for a in 0..ns {
            for m in 0..nm {
                cl.push(-v(c, Static0, &[a, m, p]));
                cl.push(-v(c, Static1, &[a, m, p]));
            }
        }
        c.add(&cl);
        for a in 0..ns {
            for m in 0..nm {
                let at2 = v(c, At2, &[m, p]);
                let s0 = v(c, Static0, &[a, m, p]);
                for x in [at2, v(c, P1, &[a, m]), v(c, E0, &[a, m])] {
                    c.add(&[s0, x]);
                }
                let s1 = v(c, Static1, &[a, m, p]);
                for x in [at2, v(c, P0, &[a, m]), v(c, E1, &[a, m])] {
                    c.add(&[s1, x]);
                }
            }
        }
    }

    c.group("arguments");
    for a in 0..ns {
        for m in 0..nm {
            let use2 = v(c, Use2, &[a, m]);
            for i in 0..pos_max {
                for nu in 0..arg_max {
                    clause!(c; -use2, -v(c, At3, &[m, i, nu]), v(c, Arg, &[a, nu]));
                }
            }
        }
        for nu in 0..arg_max {
            let mut cl = vec![-v(c, Arg, &[a, nu])];
            for m in 0..nm {
                for i in 0..pos_max {
                    cl.push(v(c, ArgVal, &[a, nu, m, i]));
                }
            }
            c.add(&cl);
            for m in 0..nm {
                let use2 = v(c, Use2, &[a, m]);
                for i in 0..pos_max {
                    let av = v(c, ArgVal, &[a, nu, m, i]);
                    let at3 = v(c, At3, &[m, i, nu]);
                    c.add(&[-av, use2]);
                    c.add(&[-av, at3]);
                    c.add(&[av, -use2, -at3]);
                }
            }
        }
    }

    c.group("arities");
    for (a, &ar) in schema_arities.iter().enumerate() {
        for nu in 0..arg_max {
            let x = v(c, Arg, &[a, nu]);
            c.add(&[if nu < ar { x } else { -x }]);
        }
    }
    for (p, &ar) in pred_arities.iter().enumerate() {
        for k in 0..=pos_max {
            let x = v(c, Arity, &[p, k]);
            c.add(&[if k == ar { x } else { -x }]);
        }
    }

    c.group("static-arguments");
    for a in 0..ns {
        for u in 0..nu {
            for n0 in 0..arg_max {
                clause!(c; -v(c, Un, &[u, a, n0]), v(c, Arg, &[a, n0]));
            }
        }
        for b in 0..nb {
            for n0 in 0..arg_max {
                for n1 in n0 + 1..arg_max {
                    let bin = v(c, Bin, &[b, a, n0, n1]);
                    clause!(c; -bin, v(c, Arg, &[a, n0]));
                    clause!(c; -bin, v(c, Arg, &[a, n1]));
                }
            }
        }
    }
}
