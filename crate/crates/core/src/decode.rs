//! Reading domains, instances and embeddings back out of satisfying
//! assignments.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::cnf::Assignment;
use crate::cnf::Family::*;
use crate::encoder::Theory;
use crate::graph::LabeledGraph;
use crate::strips::{
    ActionSchema, AtomSchema, Domain, GroundAction, GroundAtoms, Instance, Predicate, State,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecodeError {
    #[error("assignment does not satisfy the theory")]
    NotAModel,
    #[error("malformed model: {0}")]
    Malformed(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("no node reaches every other node")]
pub struct NoRoot;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedLayer {
    /// `init` is the state of `init_node` when the graph has a root.
    pub instance: Instance,
    /// State of every graph node.
    pub embedding: Vec<State>,
    pub init_node: Option<usize>,
    /// Ground action behind each graph edge, in edge order.
    pub transitions: Vec<GroundAction>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedSolution {
    pub domain: Domain,
    pub layers: Vec<DecodedLayer>,
}

/// Smallest node from which every node is forward-reachable.
pub fn choose_init(graph: &LabeledGraph) -> Result<usize, NoRoot> {
    (0..graph.num_nodes())
        .find(|&n| graph.reachable_from(n).iter().all(|&r| r))
        .ok_or(NoRoot)
}

/// The unique true member of a family slice, or a malformed-model error.
fn unique(what: impl Fn() -> String, values: impl Iterator<Item = bool>) -> Result<usize, DecodeError> {
    let hits: Vec<usize> = values.enumerate().filter(|x| x.1).map(|x| x.0).collect();
    match hits[..] {
        [i] => Ok(i),
        _ => Err(DecodeError::Malformed(format!(
            "{} has {} true members",
            what(),
            hits.len()
        ))),
    }
}

pub fn decode(th: &Theory, asg: &Assignment) -> Result<DecodedSolution, DecodeError> {
    if !th.check(asg) {
        return Err(DecodeError::NotAModel);
    }
    let val = |f, args: &[usize]| th.value(asg, f, args);
    let alpha = &th.alpha;
    let pos_max = alpha.max_pred_arity();
    let arg_max = alpha.max_schema_arity();

    let mut predicates = Vec::new();
    for p in 0..alpha.num_predicates() {
        let arity = unique(|| format!("arity({p},.)"), (0..=pos_max).map(|c| val(Arity, &[p, c])))?;
        predicates.push(Predicate {
            name: format!("p{p}"),
            arity,
        });
    }
    let mut atoms = Vec::new();
    for m in 0..alpha.num_atom_schemas {
        let p = unique(
            || format!("at2({m},.)"),
            (0..predicates.len()).map(|p| val(At2, &[m, p])),
        )?;
        let mut args = Vec::new();
        for i in 0..predicates[p].arity {
            args.push(unique(
                || format!("at3({m},{i},.)"),
                (0..arg_max).map(|nu| val(At3, &[m, i, nu])),
            )?);
        }
        atoms.push(AtomSchema::new(p, args));
    }
    let mut schemas = Vec::new();
    for a in 0..alpha.num_schemas() {
        let arity = (0..arg_max).filter(|&nu| val(Arg, &[a, nu])).count();
        let label = (0..th.labels.len())
            .find(|&l| val(Label, &[a, l]))
            .map(|l| th.labels[l].as_str());
        let mut s = ActionSchema::new(format!("a{a}"), label, arity);
        for (m, atom) in atoms.iter().enumerate() {
            for (fam, pre, pos) in [(P0, true, false), (P1, true, true), (E0, false, false), (E1, false, true)] {
                if val(fam, &[a, m]) {
                    s = if pre { s.pre(pos, atom.clone()) } else { s.eff(pos, atom.clone()) };
                }
            }
        }
        for u in 0..alpha.num_static_unary {
            for nu in 0..arg_max {
                if val(Un, &[u, a, nu]) {
                    s = s.unary(u, nu);
                }
            }
        }
        for b in 0..alpha.num_static_binary {
            for n0 in 0..arg_max {
                for n1 in n0 + 1..arg_max {
                    if val(Bin, &[b, a, n0, n1]) {
                        s = s.binary(b, n0, n1);
                    }
                }
            }
        }
        schemas.push(s);
    }
    let domain = Domain {
        predicates,
        schemas,
        static_unary: (0..alpha.num_static_unary).map(|u| format!("u{u}")).collect(),
        static_binary: (0..alpha.num_static_binary).map(|b| format!("b{b}")).collect(),
    };

    let mut layers = Vec::new();
    for (l, ly) in th.layers.iter().enumerate() {
        let n = ly.num_objects;
        let universe = GroundAtoms::new(&domain, n);
        // theory atom k -> universe atom id
        let mut perm = Vec::with_capacity(ly.num_atoms);
        let mut seen = vec![false; universe.len()];
        for k in 0..ly.num_atoms {
            let p = unique(
                || format!("gr2({l},{k},.)"),
                (0..domain.predicates.len()).map(|p| val(Gr2, &[l, k, p])),
            )?;
            let mut objs = Vec::new();
            for i in 0..domain.predicates[p].arity {
                let o = unique(
                    || format!("gr3({l},{k},{i},.)"),
                    (1..=n).map(|o| val(Gr3, &[l, k, i, o])),
                )?;
                objs.push(o + 1);
            }
            let id = universe.index(p, &objs);
            if std::mem::replace(&mut seen[id], true) {
                return Err(DecodeError::Malformed(format!("ground atom {id} named twice")));
            }
            perm.push(id);
        }
        let nv = ly.graph.num_nodes();
        let embedding: Vec<State> = (0..nv)
            .map(|s| {
                State::from_true(
                    universe.len(),
                    (0..ly.num_atoms).filter(|&k| val(Phi, &[l, k, s])).map(|k| perm[k]),
                )
            })
            .collect();
        if embedding.iter().collect::<BTreeSet<_>>().len() != nv {
            return Err(DecodeError::Malformed(format!("layer {l}: embedding not injective")));
        }
        let mut transitions = Vec::new();
        for t in 0..ly.graph.edges().len() {
            let mut hits = Vec::new();
            for a in 0..domain.schemas.len() {
                for (ti, tup) in ly.tuples.iter().enumerate() {
                    if th.right_shaped(a, tup) && val(Gt, &[l, t, a, ti]) {
                        hits.push(GroundAction {
                            schema: a,
                            binding: tup[..domain.schemas[a].arity].to_vec(),
                        });
                    }
                }
            }
            if hits.len() != 1 {
                return Err(DecodeError::Malformed(format!(
                    "layer {l} transition {t} has {} ground actions",
                    hits.len()
                )));
            }
            transitions.push(hits.pop().unwrap());
        }
        let mut instance = Instance {
            num_objects: n,
            init: None,
            ..Default::default()
        };
        for u in 0..alpha.num_static_unary {
            for o in 1..=n {
                if val(R, &[l, u, o]) {
                    instance.static_unary.insert((u, o));
                }
            }
        }
        for b in 0..alpha.num_static_binary {
            for o in 1..=n {
                for o2 in 1..=n {
                    if val(S, &[l, b, o, o2]) {
                        instance.static_binary.insert((b, o, o2));
                    }
                }
            }
        }
        let init_node = choose_init(&ly.graph).ok();
        instance.init = init_node.map(|s| embedding[s].clone());
        layers.push(DecodedLayer {
            instance,
            embedding,
            init_node,
            transitions,
        });
    }
    Ok(DecodedSolution { domain, layers })
}

#[derive(Debug, Serialize)]
struct LayerReport<'a> {
    graph: &'a str,
    objects: usize,
    init_node: Option<&'a str>,
    static_unary: Vec<String>,
    static_binary: Vec<String>,
    embedding: Vec<(String, Vec<String>)>,
    transitions: Vec<String>,
}

/// Sidecar describing embeddings, static extensions and labels, as JSON.
pub fn decode_report(sol: &DecodedSolution, graphs: &[LabeledGraph]) -> String {
    let d = &sol.domain;
    let mut layers = Vec::new();
    for (ly, g) in sol.layers.iter().zip(graphs) {
        let universe = GroundAtoms::new(d, ly.instance.num_objects);
        let atom_name = |k: usize| {
            let (p, objs) = universe.atom(k);
            let mut s = d.predicates[p].name.clone();
            s.push('(');
            for (i, o) in objs.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                let _ = write!(s, "o{o}");
            }
            s.push(')');
            s
        };
        layers.push(LayerReport {
            graph: g.name(),
            objects: ly.instance.num_objects,
            init_node: ly.init_node.map(|n| g.node_names()[n].as_str()),
            static_unary: ly
                .instance
                .static_unary
                .iter()
                .map(|&(u, o)| format!("{}(o{o})", d.static_unary[u]))
                .collect(),
            static_binary: ly
                .instance
                .static_binary
                .iter()
                .map(|&(b, o, o2)| format!("{}(o{o},o{o2})", d.static_binary[b]))
                .collect(),
            embedding: ly
                .embedding
                .iter()
                .enumerate()
                .map(|(n, st)| (g.node_names()[n].clone(), st.true_atoms().map(atom_name).collect()))
                .collect(),
            transitions: g
                .edges()
                .iter()
                .zip(&ly.transitions)
                .map(|(e, ga)| {
                    format!(
                        "{} -{}-> {}: {ga}",
                        g.node_names()[e.src],
                        g.labels()[e.label],
                        g.node_names()[e.dst]
                    )
                })
                .collect(),
        });
    }
    let labels: Vec<(String, Option<String>)> =
        d.schemas.iter().map(|s| (s.name.clone(), s.label.clone())).collect();
    let v = serde_json::json!({ "labels": labels, "layers": layers });
    let mut out = serde_json::to_string_pretty(&v).expect("report serializes");
    out.push('\n');
    out
}
