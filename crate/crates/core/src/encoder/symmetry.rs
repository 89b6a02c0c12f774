//! Optional constraints that remove symmetric models without changing
//! satisfiability.
//!
//! * Argument usage is prefix-closed and predicate arities are
//!   non-increasing. Both already follow from the pinned parametrization and
//!   only help propagation.
//! * Objects of each layer are ordered: for unary predicates `p`,
//!   `ord(o, p, s)` is the value of `p(o)` in state `s`, and the vectors
//!   `(ord(o, p, s))_{s, p}` are non-increasing in `o`. Renaming objects maps
//!   models to models, so some renaming always satisfies the order.

use super::{v, Theory};
use crate::cnf::Family::*;
use crate::cnf::Lit;

pub fn encode_symmetry_breaking(th: &mut Theory) {
    let alpha = th.alpha.clone();
    let arg_max = alpha.max_schema_arity();
    let pos_max = alpha.max_pred_arity();
    let unary: Vec<usize> = (0..alpha.num_predicates())
        .filter(|&p| alpha.pred_arities[p] == 1)
        .collect();
    let layers: Vec<(usize, usize, usize)> = th
        .layers
        .iter()
        .map(|ly| (ly.num_objects, ly.num_atoms, ly.graph.num_nodes()))
        .collect();
    let c = &mut th.cnf;

    c.group("symmetry");
    for a in 0..alpha.num_schemas() {
        for x in 1..arg_max {
            clause!(c; -v(c, Arg, &[a, x]), v(c, Arg, &[a, x - 1]));
        }
    }
    for p in 1..alpha.num_predicates() {
        for i in 0..=pos_max {
            let mut cl = vec![-v(c, Arity, &[p, i])];
            cl.extend((i..=pos_max).map(|j| v(c, Arity, &[p - 1, j])));
            c.add(&cl);
        }
    }
    if unary.is_empty() {
        return;
    }
    for (l, &(n, nk, nv)) in layers.iter().enumerate() {
        for k in 0..nk {
            for &p in &unary {
                let gr2 = v(c, Gr2, &[l, k, p]);
                for o in 1..=n {
                    let gr3 = v(c, Gr3, &[l, k, 0, o]);
                    for s in 0..nv {
                        let ord = v(c, Ord, &[l, o, p, s]);
                        let phi = v(c, Phi, &[l, k, s]);
                        c.add(&[-gr2, -gr3, -ord, phi]);
                        c.add(&[-gr2, -gr3, ord, -phi]);
                    }
                }
            }
        }
        let vect = |c: &mut crate::cnf::Cnf, o: usize| -> Vec<Lit> {
            let mut out = Vec::with_capacity(nv * unary.len());
            for s in 0..nv {
                for &p in &unary {
                    out.push(v(c, Ord, &[l, o, p, s]));
                }
            }
            out
        };
        for o in 1..n {
            let hi = vect(c, o);
            let lo = vect(c, o + 1);
            c.lex_leq(&lo, &hi).expect("object vectors share a length");
        }
    }
}
