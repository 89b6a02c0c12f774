//! Instance layer: grounding, state valuation and transition binding for one
//! input graph.

use super::{v, Theory};
use crate::cnf::Family::*;
use crate::cnf::Lit;

pub(super) fn encode(th: &mut Theory, layer: usize) {
    let alpha = th.alpha.clone();
    let ly = &th.layers[layer];
    let ns = alpha.num_schemas();
    let np = alpha.num_predicates();
    let nm = alpha.num_atom_schemas;
    let arg_max = alpha.max_schema_arity();
    let pos_max = alpha.max_pred_arity();
    let (nu, nb) = (alpha.num_static_unary, alpha.num_static_binary);
    let n = ly.num_objects;
    let nk = ly.num_atoms;
    let nv = ly.graph.num_nodes();
    let edges = ly.graph.edges().to_vec();
    let nt = edges.len();
    let labels: Vec<usize> = edges.iter().map(|e| ly.label_index[e.label]).collect();
    let tuples = ly.tuples.clone();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for (t, e) in edges.iter().enumerate() {
        out[e.src].push(t);
    }
    // right-shaped tuple indices per schema
    let right: Vec<Vec<usize>> = (0..ns)
        .map(|a| {
            (0..tuples.len())
                .filter(|&x| th.right_shaped(a, &tuples[x]))
                .collect()
        })
        .collect();
    let objs = 1..=n;
    let l = layer;
    let c = &mut th.cnf;

    c.group("binding");
    for t in 0..nt {
        let mp: Vec<Lit> = (0..ns).map(|a| v(c, Mp, &[l, t, a])).collect();
        c.exactly_one(&mp);
        for k in 0..nk {
            let mf: Vec<Lit> = (0..nm).map(|m| v(c, Mf, &[l, t, k, m])).collect();
            c.at_most_one(&mf);
        }
        for m in 0..nm {
            let mf: Vec<Lit> = (0..nk).map(|k| v(c, Mf, &[l, t, k, m])).collect();
            c.at_most_one(&mf);
        }
    }

    c.group("consistency");
    for t in 0..nt {
        for a in 0..ns {
            let mp = v(c, Mp, &[l, t, a]);
            clause!(c; -mp, v(c, Label, &[a, labels[t]]));
            for m in 0..nm {
                let use2 = v(c, Use2, &[a, m]);
                for k in 0..nk {
                    clause!(c; -mp, -v(c, Mf, &[l, t, k, m]), use2);
                }
                let mut cl = vec![-mp, -use2];
                cl.extend((0..nk).map(|k| v(c, Mf, &[l, t, k, m])));
                c.add(&cl);
            }
        }
    }

    c.group("unaffected");
    for t in 0..nt {
        for a in 0..ns {
            let mp = v(c, Mp, &[l, t, a]);
            for k in 0..nk {
                let free = v(c, Free, &[l, k, t, a]);
                let mut cl = vec![-mp];
                cl.extend((0..nm).map(|m| v(c, Mf, &[l, t, k, m])));
                cl.push(free);
                c.add(&cl);
                for m in 0..nm {
                    let mf = v(c, Mf, &[l, t, k, m]);
                    let e0 = v(c, E0, &[a, m]);
                    let e1 = v(c, E1, &[a, m]);
                    c.add(&[-mp, -mf, e0, e1, free]);
                    c.add(&[-mp, -mf, -free, -e0]);
                    c.add(&[-mp, -mf, -free, -e1]);
                }
            }
        }
    }

    c.group("inertia");
    for (t, e) in edges.iter().enumerate() {
        for a in 0..ns {
            let mp = v(c, Mp, &[l, t, a]);
            for k in 0..nk {
                let src = v(c, Phi, &[l, k, e.src]);
                let dst = v(c, Phi, &[l, k, e.dst]);
                for m in 0..nm {
                    let mf = v(c, Mf, &[l, t, k, m]);
                    clause!(c; -mp, -mf, -v(c, P0, &[a, m]), -src);
                    clause!(c; -mp, -mf, -v(c, P1, &[a, m]), src);
                    clause!(c; -mp, -mf, -v(c, E0, &[a, m]), -dst);
                    clause!(c; -mp, -mf, -v(c, E1, &[a, m]), dst);
                }
                let free = v(c, Free, &[l, k, t, a]);
                c.add(&[-mp, -free, -src, dst]);
                c.add(&[-mp, -free, src, -dst]);
                c.add(&[-mp, free, src, dst]);
                c.add(&[-mp, free, -src, -dst]);
            }
        }
    }

    c.group("distinct-states");
    for s in 0..nv {
        for s2 in s + 1..nv {
            let mut cl = Vec::with_capacity(nk);
            for k in 0..nk {
                let g = v(c, G, &[l, k, s, s2]);
                let a = v(c, Phi, &[l, k, s]);
                let b = v(c, Phi, &[l, k, s2]);
                c.add(&[-g, a, b]);
                c.add(&[-g, -a, -b]);
                c.add(&[g, -a, b]);
                c.add(&[g, a, -b]);
                cl.push(g);
            }
            c.add(&cl);
        }
    }

    c.group("ground-atom-structure");
    for k in 0..nk {
        let gr2: Vec<Lit> = (0..np).map(|p| v(c, Gr2, &[l, k, p])).collect();
        c.exactly_one(&gr2);
        for i in 0..pos_max {
            let gr3: Vec<Lit> = objs.clone().map(|o| v(c, Gr3, &[l, k, i, o])).collect();
            c.at_most_one(&gr3);
        }
        for p in 0..np {
            let gr2 = v(c, Gr2, &[l, k, p]);
            for i in 0..pos_max {
                for o in objs.clone() {
                    let mut cl = vec![-gr2, -v(c, Gr3, &[l, k, i, o])];
                    cl.extend((i + 1..=pos_max).map(|j| v(c, Arity, &[p, j])));
                    c.add(&cl);
                }
            }
            for j in 0..=pos_max {
                let ar = v(c, Arity, &[p, j]);
                for i in 0..j {
                    let mut cl = vec![-gr2, -ar];
                    cl.extend(objs.clone().map(|o| v(c, Gr3, &[l, k, i, o])));
                    c.add(&cl);
                }
                for i in j..pos_max {
                    for o in objs.clone() {
                        clause!(c; -gr2, -ar, -v(c, Gr3, &[l, k, i, o]));
                    }
                }
            }
        }
    }

    c.group("ground-atom-uniqueness");
    let vects: Vec<Vec<Lit>> = (0..nk)
        .map(|k| {
            let mut vec: Vec<Lit> = (0..np).map(|p| v(c, Gr2, &[l, k, p])).collect();
            for i in 0..pos_max {
                vec.extend(objs.clone().map(|o| v(c, Gr3, &[l, k, i, o])));
            }
            vec
        })
        .collect();
    c.strict_lex_chain(&vects).expect("ground atom vectors share a length");

    c.group("sync");
    for t in 0..nt {
        for k in 0..nk {
            for m in 0..nm {
                let mf = v(c, Mf, &[l, t, k, m]);
                for p in 0..np {
                    let at2 = v(c, At2, &[m, p]);
                    let gr2 = v(c, Gr2, &[l, k, p]);
                    c.add(&[-mf, -at2, gr2]);
                    c.add(&[-mf, at2, -gr2]);
                }
                for i in 0..pos_max {
                    for a in 0..arg_max {
                        let mut cl = vec![-mf, -v(c, At3, &[m, i, a])];
                        cl.extend(objs.clone().map(|o| v(c, Gr3, &[l, k, i, o])));
                        c.add(&cl);
                    }
                    for o in objs.clone() {
                        let mut cl = vec![-mf, -v(c, Gr3, &[l, k, i, o])];
                        cl.extend((0..arg_max).map(|a| v(c, At3, &[m, i, a])));
                        c.add(&cl);
                    }
                }
            }
        }
    }

    c.group("static-exclusion");
    for u in 0..nu {
        for a in 0..ns {
            for x in 0..arg_max {
                let un = v(c, Un, &[u, a, x]);
                for o in objs.clone() {
                    let big = v(c, U, &[l, u, a, x, o]);
                    let r = v(c, R, &[l, u, o]);
                    c.add(&[-big, un]);
                    c.add(&[-big, -r]);
                    c.add(&[big, -un, r]);
                }
            }
        }
    }
    for b in 0..nb {
        for a in 0..ns {
            for x in 0..arg_max {
                for y in x + 1..arg_max {
                    let bin = v(c, Bin, &[b, a, x, y]);
                    for o in objs.clone() {
                        for o2 in objs.clone() {
                            let big = v(c, B, &[l, b, a, x, y, o, o2]);
                            let s = v(c, S, &[l, b, o, o2]);
                            c.add(&[-big, bin]);
                            c.add(&[-big, -s]);
                            c.add(&[big, -bin, s]);
                        }
                    }
                }
            }
        }
    }

    c.group("transition-bindings-1");
    for t in 0..nt {
        for x in 0..arg_max {
            let mt: Vec<Lit> = objs.clone().map(|o| v(c, Mt, &[l, t, x, o])).collect();
            c.at_most_one(&mt);
        }
        for a in 0..ns {
            let mp = v(c, Mp, &[l, t, a]);
            for x in 0..arg_max {
                let arg = v(c, Arg, &[a, x]);
                let mut cl = vec![-mp, -arg];
                cl.extend(objs.clone().map(|o| v(c, Mt, &[l, t, x, o])));
                c.add(&cl);
                for o in objs.clone() {
                    clause!(c; -mp, -v(c, Mt, &[l, t, x, o]), arg);
                }
            }
        }
    }

    c.group("transition-bindings-2");
    for t in 0..nt {
        for k in 0..nk {
            for m in 0..nm {
                let mf = v(c, Mf, &[l, t, k, m]);
                for i in 0..pos_max {
                    for x in 0..arg_max {
                        clause!(c; -mf, -v(c, At3, &[m, i, x]), v(c, W, &[l, t, k, i, x]));
                    }
                }
            }
            for i in 0..pos_max {
                for x in 0..arg_max {
                    let w = v(c, W, &[l, t, k, i, x]);
                    for o in objs.clone() {
                        let gr3 = v(c, Gr3, &[l, k, i, o]);
                        let mt = v(c, Mt, &[l, t, x, o]);
                        c.add(&[-w, -gr3, mt]);
                        c.add(&[-w, gr3, -mt]);
                    }
                }
            }
        }
    }

    c.group("non-existing-ground-actions");
    for a in 0..ns {
        for (ti, tup) in tuples.iter().enumerate() {
            let mut cl = vec![v(c, Gtuple, &[l, a, ti])];
            for (x, &o) in tup.iter().enumerate() {
                let arg = v(c, Arg, &[a, x]);
                // an argument bound to the sentinel must be unused, and an
                // argument bound to an object must be used
                cl.push(if o > 0 { -arg } else { arg });
            }
            for u in 0..nu {
                for (x, &o) in tup.iter().enumerate() {
                    if o > 0 {
                        cl.push(v(c, U, &[l, u, a, x, o]));
                    }
                }
            }
            for b in 0..nb {
                for x in 0..tup.len() {
                    for y in x + 1..tup.len() {
                        if tup[x] > 0 && tup[y] > 0 {
                            cl.push(v(c, B, &[l, b, a, x, y, tup[x], tup[y]]));
                        }
                    }
                }
            }
            c.add(&cl);
        }
    }

    c.group("existing-ground-actions");
    for t in 0..nt {
        for a in 0..ns {
            let mp = v(c, Mp, &[l, t, a]);
            for x in 0..arg_max {
                for o in objs.clone() {
                    let mt = v(c, Mt, &[l, t, x, o]);
                    for u in 0..nu {
                        clause!(c; -mp, -mt, -v(c, Un, &[u, a, x]), v(c, R, &[l, u, o]));
                    }
                }
            }
            for b in 0..nb {
                for x in 0..arg_max {
                    for y in x + 1..arg_max {
                        let bin = v(c, Bin, &[b, a, x, y]);
                        for o in objs.clone() {
                            let mt = v(c, Mt, &[l, t, x, o]);
                            for o2 in objs.clone() {
                                let mt2 = v(c, Mt, &[l, t, y, o2]);
                                clause!(c; -mp, -mt, -mt2, -bin, v(c, S, &[l, b, o, o2]));
                            }
                        }
                    }
                }
            }
        }
    }

    c.group("ground-actions-used");
    for a in 0..ns {
        for (ti, _) in tuples.iter().enumerate() {
            let gt = v(c, Gtuple, &[l, a, ti]);
            if right[a].binary_search(&ti).is_ok() {
                let mut cl = vec![-gt];
                cl.extend((0..nt).map(|t| v(c, Gt, &[l, t, a, ti])));
                c.add(&cl);
            } else {
                // no transition can instantiate a wrongly shaped tuple
                c.add(&[-gt]);
            }
        }
    }
    for t in 0..nt {
        for a in 0..ns {
            let mp = v(c, Mp, &[l, t, a]);
            for &ti in &right[a] {
                let g = v(c, Gt, &[l, t, a, ti]);
                clause!(c; -g, v(c, Gtuple, &[l, a, ti]));
                c.add(&[-g, mp]);
                for (x, &o) in tuples[ti].iter().enumerate() {
                    if o > 0 {
                        clause!(c; -g, v(c, Mt, &[l, t, x, o]));
                    } else {
                        clause!(c; -g, -v(c, Arg, &[a, x]));
                    }
                }
            }
        }
    }
    for a in 0..ns {
        for &ti in &right[a] {
            for ts in out.iter().filter(|ts| ts.len() > 1) {
                let gs: Vec<Lit> = ts.iter().map(|&t| v(c, Gt, &[l, t, a, ti])).collect();
                c.at_most_one(&gs);
            }
        }
    }
    for t in 0..nt {
        let mut gs = Vec::new();
        for a in 0..ns {
            gs.extend(right[a].iter().map(|&ti| v(c, Gt, &[l, t, a, ti])));
        }
        c.exactly_one(&gs);
    }

    c.group("applicable-applied");
    for (t, e) in edges.iter().enumerate() {
        for a in 0..ns {
            for &ti in &right[a] {
                clause!(c; -v(c, Gt, &[l, t, a, ti]), v(c, Appl, &[l, a, ti, e.src]));
            }
        }
    }
    for a in 0..ns {
        for &ti in &right[a] {
            let gt = v(c, Gtuple, &[l, a, ti]);
            for s in 0..nv {
                let appl = v(c, Appl, &[l, a, ti, s]);
                let mut cl = vec![-appl];
                cl.extend(out[s].iter().map(|&t| v(c, Gt, &[l, t, a, ti])));
                c.add(&cl);
                let mut cl = vec![appl, -gt];
                for k in 0..nk {
                    cl.push(v(c, Vio0, &[l, a, ti, s, k]));
                    cl.push(v(c, Vio1, &[l, a, ti, s, k]));
                }
                c.add(&cl);
                for k in 0..nk {
                    let phi = v(c, Phi, &[l, k, s]);
                    let vio0 = v(c, Vio0, &[l, a, ti, s, k]);
                    c.add(&[-vio0, phi]);
                    let mut cl = vec![-vio0];
                    cl.extend((0..nm).map(|m| v(c, Pre0eq, &[l, a, ti, k, m])));
                    c.add(&cl);
                    let vio1 = v(c, Vio1, &[l, a, ti, s, k]);
                    c.add(&[-vio1, -phi]);
                    let mut cl = vec![-vio1];
                    cl.extend((0..nm).map(|m| v(c, Pre1eq, &[l, a, ti, k, m])));
                    c.add(&cl);
                }
            }
            for k in 0..nk {
                for m in 0..nm {
                    let eq = v(c, Eq, &[l, ti, m, k]);
                    clause!(c; -v(c, Pre0eq, &[l, a, ti, k, m]), v(c, P0, &[a, m]));
                    clause!(c; -v(c, Pre0eq, &[l, a, ti, k, m]), eq);
                    clause!(c; -v(c, Pre1eq, &[l, a, ti, k, m]), v(c, P1, &[a, m]));
                    clause!(c; -v(c, Pre1eq, &[l, a, ti, k, m]), eq);
                }
            }
        }
    }
    // eq is shared by schemas; emit its definition once per tuple in use
    let mut used: Vec<usize> = right.iter().flatten().copied().collect();
    used.sort_unstable();
    used.dedup();
    for ti in used {
        for m in 0..nm {
            for k in 0..nk {
                let eq = v(c, Eq, &[l, ti, m, k]);
                for p in 0..np {
                    let at2 = v(c, At2, &[m, p]);
                    let gr2 = v(c, Gr2, &[l, k, p]);
                    c.add(&[-eq, -at2, gr2]);
                    c.add(&[-eq, at2, -gr2]);
                }
                for i in 0..pos_max {
                    for (j, &o) in tuples[ti].iter().enumerate() {
                        let at3 = v(c, At3, &[m, i, j]);
                        if o > 0 {
                            clause!(c; -eq, -at3, v(c, Gr3, &[l, k, i, o]));
                        } else {
                            c.add(&[-eq, -at3]);
                        }
                    }
                }
            }
        }
    }
}
