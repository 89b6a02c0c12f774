//! Checking a learned domain against graphs: by SAT over the theory with the
//! domain layer fixed, and by explicit expansion.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{Assignment, Family, Family::*, Tag};
use crate::decode::{choose_init, decode, DecodeError, DecodedSolution};
use crate::encoder::{self, EncodeError, EncodeOptions, Theory};
use crate::graph::{Edge, LabeledGraph};
use crate::hyperspace::Alpha;
use crate::sat::{SatError, SatSolver, SatVerdict};
use crate::strips::{
    check_embedding, encoding_class_violation, expand, graph_accounts_for, ground_actions, Accounting,
    Domain, GroundAtoms, Instance, State, StripsError, DEFAULT_STATE_CAP,
};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Sat(#[from] SatError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error("domain valuation does not fit the parametrization: {0}")]
    Inconsistent(String),
    #[error("empty object range")]
    EmptyRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Pass,
    Fail,
    Indet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    SatCheck,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub method: Method,
    /// Counterexample for FAIL, solver reason for INDET, witness for PASS.
    pub detail: String,
}

impl Verdict {
    fn new(outcome: Outcome, method: Method, detail: impl Into<String>) -> Self {
        Verdict {
            outcome,
            method,
            detail: detail.into(),
        }
    }

    pub fn passed(&self) -> bool {
        self.outcome == Outcome::Pass
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Indet => "INDET",
        })
    }
}

/// Values of the domain-layer variables of a model. Labels are kept by name
/// so the valuation can be replayed under a different label universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainValuation {
    pub alpha: Alpha,
    pub literals: BTreeMap<Tag, bool>,
    pub schema_labels: Vec<Option<String>>,
}

impl DomainValuation {
    pub fn from_assignment(th: &Theory, asg: &Assignment) -> Self {
        let literals = th
            .cnf
            .vars
            .iter()
            .filter(|(_, t)| t.family.is_domain() && t.family != Label)
            .map(|(v, t)| (*t, asg.value(v)))
            .collect();
        let schema_labels = (0..th.alpha.num_schemas())
            .map(|a| {
                (0..th.labels.len())
                    .find(|&l| th.value(asg, Label, &[a, l]))
                    .map(|l| th.labels[l].clone())
            })
            .collect();
        DomainValuation {
            alpha: th.alpha.clone(),
            literals,
            schema_labels,
        }
    }

    /// The valuation a model would assign to a hand-written domain. Schemas
    /// and predicates are placed in the non-increasing arity order of
    /// [`crate::hyperspace::alpha_of`]; atom schemas in the order the
    /// symmetry-free atom ordering constraints demand. Auxiliary
    /// definitions that depend on instances are left free.
    pub fn from_domain(domain: &Domain) -> Result<Self, VerifyError> {
        domain
            .validate()
            .map_err(|e| VerifyError::Inconsistent(e.to_string()))?;
        for s in &domain.schemas {
            if let Some(&(b, n0, n1)) = s.static_binary.iter().find(|x| x.1 >= x.2) {
                return Err(VerifyError::Inconsistent(format!(
                    "{}: binary static {b} on arguments ({n0},{n1}) is not increasing",
                    s.name
                )));
            }
        }
        let alpha = crate::hyperspace::alpha_of(domain, &[]);
        let mut preds: Vec<usize> = (0..domain.predicates.len()).collect();
        preds.sort_by_key(|&p| std::cmp::Reverse(domain.predicates[p].arity));
        let mut pred_pos = vec![0; preds.len()];
        for (i, &p) in preds.iter().enumerate() {
            pred_pos[p] = i;
        }
        let mut schemas: Vec<usize> = (0..domain.schemas.len()).collect();
        schemas.sort_by_key(|&a| std::cmp::Reverse(domain.schemas[a].arity));
        let np = alpha.num_predicates();
        let pos_max = alpha.max_pred_arity();
        let arg_max = alpha.max_schema_arity();
        // vect(m) = (use1, at2(m, .), at3(m, i, .) for each i), false < true
        let vect = |m: &crate::strips::AtomSchema| -> Vec<bool> {
            let mut v = vec![true];
            v.extend((0..np).map(|p| p == pred_pos[m.predicate]));
            for i in 0..pos_max {
                v.extend((0..arg_max).map(|nu| m.args.get(i) == Some(&nu)));
            }
            v
        };
        let mut atoms: Vec<_> = domain.atom_schemas().into_iter().collect();
        atoms.sort_by_key(|m| vect(m));

        let mut lits = BTreeMap::new();
        let mut set = |f: Family, args: &[usize], b: bool| {
            lits.insert(Tag::new(f, args), b);
        };
        for (p, &orig) in preds.iter().enumerate() {
            for c in 0..=pos_max {
                set(Arity, &[p, c], domain.predicates[orig].arity == c);
            }
        }
        for (m, atom) in atoms.iter().enumerate() {
            set(Use1, &[m], true);
            for p in 0..np {
                set(At2, &[m, p], pred_pos[atom.predicate] == p);
            }
            for i in 0..pos_max {
                for nu in 0..arg_max {
                    set(At3, &[m, i, nu], atom.args.get(i) == Some(&nu));
                }
            }
        }
        for (a, &orig) in schemas.iter().enumerate() {
            let s = &domain.schemas[orig];
            for nu in 0..arg_max {
                set(Arg, &[a, nu], nu < s.arity);
            }
            for (m, atom) in atoms.iter().enumerate() {
                let roles = [
                    s.pre_neg.contains(atom),
                    s.pre_pos.contains(atom),
                    s.eff_neg.contains(atom),
                    s.eff_pos.contains(atom),
                ];
                for (f, b) in [P0, P1, E0, E1].into_iter().zip(roles) {
                    set(f, &[a, m], b);
                }
                set(Use2, &[a, m], roles.iter().any(|&b| b));
                for i in 0..pos_max {
                    for nu in 0..arg_max {
                        let av = roles.iter().any(|&b| b) && atom.args.get(i) == Some(&nu);
                        set(ArgVal, &[a, nu, m, i], av);
                    }
                }
            }
            for u in 0..alpha.num_static_unary {
                for nu in 0..arg_max {
                    set(Un, &[u, a, nu], s.static_unary.contains(&(u, nu)));
                }
            }
            for b in 0..alpha.num_static_binary {
                for n0 in 0..arg_max {
                    for n1 in n0 + 1..arg_max {
                        set(Bin, &[b, a, n0, n1], s.static_binary.contains(&(b, n0, n1)));
                    }
                }
            }
        }
        Ok(DomainValuation {
            alpha,
            literals: lits,
            schema_labels: schemas.iter().map(|&a| domain.schemas[a].label.clone()).collect(),
        })
    }
}

/// Result of the SAT route: the verdict, plus the decoded model of the test
/// layer when it passed.
#[derive(Debug, Clone)]
pub struct SatCheck {
    pub verdict: Verdict,
    pub num_objects: Option<usize>,
    pub witness: Option<DecodedSolution>,
}

/// The theory for `graph` alone with the domain layer pinned to `val`.
pub fn verification_theory(
    val: &DomainValuation,
    graph: &LabeledGraph,
    num_objects: usize,
    options: EncodeOptions,
) -> Result<Theory, VerifyError> {
    let mut labels: Vec<String> = graph.labels().to_vec();
    for l in val.schema_labels.iter().flatten() {
        if !labels.contains(l) {
            labels.push(l.clone());
        }
    }
    let alpha = val.alpha.with_objects(vec![num_objects]);
    let mut th = Theory::new(&alpha, &labels, options)?;
    th.add_layer(graph)?;
    encoder::encode_domain_layer(&mut th);
    encoder::encode_instance_layer(&mut th, 0);
    if options.symmetry_breaking {
        encoder::encode_symmetry_breaking(&mut th);
    }
    th.cnf.group("domain-valuation");
    for (tag, &b) in &val.literals {
        let lit = th
            .lit(tag.family, &tag.args().iter().map(|&x| x as usize).collect::<Vec<_>>())
            .ok_or_else(|| VerifyError::Inconsistent(format!("{tag} is not a theory variable")))?;
        th.cnf.add(&[if b { lit } else { -lit }]);
    }
    for (a, sl) in val.schema_labels.iter().enumerate() {
        for (l, name) in labels.iter().enumerate() {
            let lit = th
                .lit(Label, &[a, l])
                .ok_or_else(|| VerifyError::Inconsistent(format!("label({a},{l}) missing")))?;
            let on = sl.as_deref() == Some(name.as_str());
            th.cnf.add(&[if on { lit } else { -lit }]);
        }
    }
    Ok(th)
}

/// Tries object counts in ascending order. PASS on the first satisfiable
/// theory, FAIL when all are unsatisfiable, INDET when some call gave no
/// answer before a PASS.
pub fn verify_sat(
    val: &DomainValuation,
    graph: &LabeledGraph,
    objects: RangeInclusive<usize>,
    options: EncodeOptions,
    solver: &dyn SatSolver,
) -> Result<SatCheck, VerifyError> {
    if objects.is_empty() || *objects.start() == 0 {
        return Err(VerifyError::EmptyRange);
    }
    let mut indet = None;
    for n in objects.clone() {
        let th = verification_theory(val, graph, n, options)?;
        let res = solver.solve(&th.cnf)?;
        match res.verdict {
            SatVerdict::Sat => {
                let asg = res.assignment.expect("SAT carries a model");
                let witness = decode(&th, &asg)?;
                return Ok(SatCheck {
                    verdict: Verdict::new(Outcome::Pass, Method::SatCheck, format!("N={n}")),
                    num_objects: Some(n),
                    witness: Some(witness),
                });
            }
            SatVerdict::Unsat => {}
            SatVerdict::Indet => {
                indet.get_or_insert(format!("N={n}: {}", res.detail));
            }
        }
    }
    let verdict = match indet {
        Some(why) => Verdict::new(Outcome::Indet, Method::SatCheck, why),
        None => Verdict::new(
            Outcome::Fail,
            Method::SatCheck,
            format!("unsatisfiable for N in {}..={}", objects.start(), objects.end()),
        ),
    };
    Ok(SatCheck {
        verdict,
        num_objects: None,
        witness: None,
    })
}

/// Expands layer `layer` of a decoded solution from its initial state and
/// compares the result with `graph` under the decoded embedding and labels.
pub fn verify_oracle(sol: &DecodedSolution, layer: usize, graph: &LabeledGraph) -> Verdict {
    let fail = |d: String| Verdict::new(Outcome::Fail, Method::Oracle, d);
    let ly = &sol.layers[layer];
    let Some(init) = &ly.instance.init else {
        return Verdict::new(Outcome::Indet, Method::Oracle, "graph has no root");
    };
    let ex = match expand(&sol.domain, &ly.instance, init, DEFAULT_STATE_CAP) {
        Ok(ex) => ex,
        Err(StripsError::StateCap(c)) => {
            return Verdict::new(Outcome::Indet, Method::Oracle, format!("more than {c} states"))
        }
        Err(e) => return fail(e.to_string()),
    };
    let node_of: HashMap<&State, usize> = ly.embedding.iter().enumerate().map(|(n, s)| (s, n)).collect();
    let mut h = Vec::with_capacity(ex.states.len());
    for (n, st) in ex.states.iter().enumerate() {
        match node_of.get(st) {
            Some(&m) => h.push(m),
            None => {
                let how = ex
                    .transitions
                    .iter()
                    .find(|t| t.2 == n)
                    .map(|(src, ga, _)| format!(" via {ga} from expansion node {src}"))
                    .unwrap_or_default();
                return fail(format!("reached a state outside the embedding{how}"));
            }
        }
    }
    let gp = used_labels_only(&ex.graph);
    let mut label_map = Vec::new();
    for l in gp.labels() {
        match graph.label_index(l) {
            Some(i) => label_map.push(i),
            None => return fail(format!("label {l} does not occur in {}", graph.name())),
        }
    }
    match check_embedding(&gp, graph, &h, &label_map) {
        Ok(()) => Verdict::new(Outcome::Pass, Method::Oracle, "edge sets correspond"),
        Err(e) => fail(e),
    }
}

/// Drops labels of schemas that never fire, so they need no image.
fn used_labels_only(g: &LabeledGraph) -> LabeledGraph {
    let mut used: Vec<usize> = g.edges().iter().map(|e| e.label).collect();
    used.sort_unstable();
    used.dedup();
    if used.len() == g.labels().len() {
        return g.clone();
    }
    let labels = used.iter().map(|&l| g.labels()[l].clone()).collect();
    let edges = g.edges().iter().map(|e| Edge {
        label: used.binary_search(&e.label).expect("label is used"),
        ..*e
    });
    LabeledGraph::new(g.name(), g.num_nodes(), labels, edges)
        .expect("relabeling keeps the graph valid")
        .with_node_names(g.node_names().to_vec())
}

/// Oracle verification without a decoded instance: searches object counts,
/// static extensions and initial states for an instance of `domain` that
/// accounts for `graph` within the encoding's class, labels matched by name.
/// INDET when the search would exceed `budget` expansions.
pub fn verify_oracle_search(
    domain: &Domain,
    graph: &LabeledGraph,
    objects: RangeInclusive<usize>,
    budget: usize,
) -> Verdict {
    let indet = |d: String| Verdict::new(Outcome::Indet, Method::Oracle, d);
    if choose_init(graph).is_err() {
        return indet("graph has no root".into());
    }
    let names: HashMap<String, String> = graph.labels().iter().map(|l| (l.clone(), l.clone())).collect();
    let (nu, nb) = (domain.num_static_unary(), domain.num_static_binary());
    let mut spent = 0usize;
    for n in objects {
        let k = GroundAtoms::new(domain, n).len();
        let bits = nu * n + nb * n * n;
        let cost = 1u128
            .checked_shl((bits + k) as u32)
            .filter(|c| *c <= (budget - spent) as u128);
        let Some(cost) = cost else {
            return indet(format!("search at N={n} exceeds the budget of {budget} expansions"));
        };
        spent += cost as usize;
        for ext in 0u64..(1u64 << bits) {
            let mut inst = Instance {
                num_objects: n,
                ..Default::default()
            };
            for u in 0..nu {
                for o in 1..=n {
                    if ext >> (u * n + o - 1) & 1 == 1 {
                        inst.static_unary.insert((u, o));
                    }
                }
            }
            for b in 0..nb {
                for o in 1..=n {
                    for o2 in 1..=n {
                        if ext >> (nu * n + b * n * n + (o - 1) * n + o2 - 1) & 1 == 1 {
                            inst.static_binary.insert((b, o, o2));
                        }
                    }
                }
            }
            if ground_actions(domain, &inst).is_empty() && !graph.edges().is_empty() {
                continue;
            }
            for bits in 0u64..(1u64 << k) {
                let init = State::from_true(k, (0..k).filter(|&i| bits >> i & 1 == 1));
                let Ok(ex) = expand(domain, &inst, &init, graph.num_nodes() + 1) else {
                    continue;
                };
                if ex.graph.num_nodes() != graph.num_nodes() || ex.graph.edges().len() != graph.edges().len() {
                    continue;
                }
                if let Accounting::Holds { .. } = graph_accounts_for(&ex.graph, graph, None, Some(&names)) {
                    if encoding_class_violation(domain, &inst, &ex).is_none() {
                        return Verdict::new(
                            Outcome::Pass,
                            Method::Oracle,
                            format!("N={n}, {} statics", inst.static_unary.len() + inst.static_binary.len()),
                        );
                    }
                }
            }
        }
    }
    Verdict::new(
        Outcome::Fail,
        Method::Oracle,
        "no instance in range accounts for the graph",
    )
}
