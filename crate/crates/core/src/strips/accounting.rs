//! Does an instance account for a labeled graph?
//!
//! With an explicit node embedding and label map the check is a direct
//! comparison of edge sets. Without them we search: label maps are
//! enumerated, node maps are found by backtracking, pruned by label-aware
//! color refinement on larger graphs.

use std::collections::{BTreeSet, HashMap, HashSet};

use super::expand::UNLABELED;
use super::ground::GroundAtoms;
use super::{expand, ground_actions, Domain, Expansion, Instance, State, StripsError};
use crate::graph::{Edge, LabeledGraph};

/// Graphs up to this size are matched by plain backtracking over bijections.
const BRUTE_FORCE_NODES: usize = 10;
/// Upper bound on label maps tried when none is given.
const MAX_LABEL_MAPS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Accounting {
    /// `embedding[n]` is the graph node of expansion node `n`; `label_map[a]`
    /// the graph label of expansion label `a`.
    Holds {
        embedding: Vec<usize>,
        label_map: Vec<usize>,
    },
    Fails(String),
}

impl Accounting {
    pub fn holds(&self) -> bool {
        matches!(self, Accounting::Holds { .. })
    }
}

/// Checks the edge biconditional for a given node embedding and label map.
/// Every edge of `g` must also be the image of some edge of `gp`.
pub fn check_embedding(
    gp: &LabeledGraph,
    g: &LabeledGraph,
    embedding: &[usize],
    label_map: &[usize],
) -> Result<(), String> {
    if gp.num_nodes() != g.num_nodes() {
        return Err(format!(
            "node count mismatch: {} vs {}",
            gp.num_nodes(),
            g.num_nodes()
        ));
    }
    let mut inverse = vec![usize::MAX; g.num_nodes()];
    for (n, &m) in embedding.iter().enumerate() {
        if m >= g.num_nodes() || inverse[m] != usize::MAX {
            return Err(format!("embedding is not a bijection at node {n}"));
        }
        inverse[m] = n;
    }
    for e in gp.edges() {
        let (x, l, y) = (embedding[e.src], label_map[e.label], embedding[e.dst]);
        if !g.has_edge(x, l, y) {
            return Err(format!(
                "transition {} -{}-> {} has no counterpart {} -{}-> {}",
                e.src,
                gp.labels()[e.label],
                e.dst,
                g.node_names()[x],
                g.labels()[l],
                g.node_names()[y]
            ));
        }
    }
    for e in g.edges() {
        let pre: Vec<usize> = (0..gp.labels().len())
            .filter(|&a| label_map[a] == e.label)
            .collect();
        if pre.is_empty() {
            return Err(format!("label {} is never produced", g.labels()[e.label]));
        }
        for a in pre {
            if !gp.has_edge(inverse[e.src], a, inverse[e.dst]) {
                return Err(format!(
                    "edge {} -{}-> {} is not generated by {}",
                    g.node_names()[e.src],
                    g.labels()[e.label],
                    g.node_names()[e.dst],
                    gp.labels()[a]
                ));
            }
        }
    }
    Ok(())
}

/// Definition-level accounting check. `label_map` maps domain labels to graph
/// labels by name; when absent every function between the label sets is tried.
pub fn accounts_for(
    domain: &Domain,
    instance: &Instance,
    init: &State,
    g: &LabeledGraph,
    embedding: Option<&[usize]>,
    label_map: Option<&HashMap<String, String>>,
) -> Result<Accounting, StripsError> {
    let ex = expand(domain, instance, init, super::DEFAULT_STATE_CAP)?;
    Ok(graph_accounts_for(&ex.graph, g, embedding, label_map))
}

/// [`accounts_for`] on an already expanded graph.
pub fn graph_accounts_for(
    gp: &LabeledGraph,
    g: &LabeledGraph,
    embedding: Option<&[usize]>,
    label_map: Option<&HashMap<String, String>>,
) -> Accounting {
    if gp.num_nodes() != g.num_nodes() {
        return Accounting::Fails(format!(
            "node count mismatch: {} vs {}",
            gp.num_nodes(),
            g.num_nodes()
        ));
    }
    let maps: Vec<Vec<usize>> = match label_map {
        Some(m) => {
            let mut lm = Vec::new();
            for l in gp.labels() {
                match m.get(l).and_then(|t| g.label_index(t)) {
                    Some(i) => lm.push(i),
                    None => return Accounting::Fails(format!("label {l} has no image")),
                }
            }
            vec![lm]
        }
        None => {
            let (k, n) = (g.labels().len(), gp.labels().len());
            if k == 0 && n > 0 {
                return Accounting::Fails("graph has no labels".into());
            }
            match (k as u128).checked_pow(n as u32) {
                Some(c) if c <= MAX_LABEL_MAPS as u128 => all_functions(n, k),
                _ => return Accounting::Fails("too many label maps to search".into()),
            }
        }
    };
    let mut last = String::from("no label map");
    for lm in maps {
        match embedding {
            Some(h) => match check_embedding(gp, g, h, &lm) {
                Ok(()) => {
                    return Accounting::Holds {
                        embedding: h.to_vec(),
                        label_map: lm,
                    }
                }
                Err(e) => last = e,
            },
            None => {
                let Some(relabeled) = relabel(gp, g, &lm) else {
                    last = "labels merged by the map generate different edges".into();
                    continue;
                };
                let refine = g.num_nodes() > BRUTE_FORCE_NODES;
                if let Some(h) = find_isomorphism(&relabeled, g, refine) {
                    debug_assert!(check_embedding(gp, g, &h, &lm).is_ok());
                    return Accounting::Holds {
                        embedding: h,
                        label_map: lm,
                    };
                }
                last = "no isomorphism".into();
            }
        }
    }
    Accounting::Fails(last)
}

fn all_functions(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|f| {
                (0..k).map(move |v| {
                    let mut f = f.clone();
                    f.push(v);
                    f
                })
            })
            .collect();
    }
    out
}

/// Rewrites `gp` over the label table of `g`. Returns `None` when two labels
/// mapped to the same target disagree on their edge sets.
fn relabel(gp: &LabeledGraph, g: &LabeledGraph, label_map: &[usize]) -> Option<LabeledGraph> {
    let pairs = |a: usize| -> BTreeSet<(usize, usize)> {
        gp.edges()
            .iter()
            .filter(|e| e.label == a)
            .map(|e| (e.src, e.dst))
            .collect()
    };
    for a in 0..gp.labels().len() {
        for b in a + 1..gp.labels().len() {
            if label_map[a] == label_map[b] && pairs(a) != pairs(b) {
                return None;
            }
        }
    }
    let edges = gp.edges().iter().map(|e| Edge {
        src: e.src,
        label: label_map[e.label],
        dst: e.dst,
    });
    LabeledGraph::new(gp.name(), gp.num_nodes(), g.labels().to_vec(), edges).ok()
}

/// Node adjacency keyed by ordered pair, as a label bitmask.
struct Adjacency {
    pairs: HashMap<(usize, usize), u128>,
}

impl Adjacency {
    fn new(g: &LabeledGraph) -> Self {
        let mut pairs: HashMap<(usize, usize), u128> = HashMap::new();
        for e in g.edges() {
            *pairs.entry((e.src, e.dst)).or_default() |= 1u128 << e.label;
        }
        Adjacency { pairs }
    }
    fn get(&self, a: usize, b: usize) -> u128 {
        self.pairs.get(&(a, b)).copied().unwrap_or(0)
    }
}

/// Finds a node bijection `h` from `a` to `b` with `(n,l,n') ∈ a` iff
/// `(h n, l, h n') ∈ b`, comparing labels by index. With `refine`, candidate
/// nodes are restricted to matching color-refinement classes.
pub fn find_isomorphism(a: &LabeledGraph, b: &LabeledGraph, refine: bool) -> Option<Vec<usize>> {
    let n = a.num_nodes();
    if n != b.num_nodes() || a.edges().len() != b.edges().len() {
        return None;
    }
    if a.labels().len() > 128 || b.labels().len() > 128 {
        return None;
    }
    let (ca, cb) = if refine {
        let (ca, cb) = refine_colors(a, b);
        let hist = |c: &[usize]| {
            let mut v = c.to_vec();
            v.sort_unstable();
            v
        };
        if hist(&ca) != hist(&cb) {
            return None;
        }
        (ca, cb)
    } else {
        (vec![0; n], vec![0; n])
    };
    let adj_a = Adjacency::new(a);
    let adj_b = Adjacency::new(b);
    let degree = |g: &LabeledGraph| -> Vec<(usize, usize)> {
        let mut d = vec![(0, 0); g.num_nodes()];
        for e in g.edges() {
            d[e.src].0 += 1;
            d[e.dst].1 += 1;
        }
        d
    };
    let (deg_a, deg_b) = (degree(a), degree(b));
    // visit nodes of `a` in BFS order over the undirected skeleton so each
    // new node is constrained by already mapped neighbours
    let order = bfs_order(a);
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn go(
        depth: usize,
        order: &[usize],
        map: &mut [usize],
        used: &mut [bool],
        ctx: &(&Adjacency, &Adjacency, &[usize], &[usize], &[(usize, usize)], &[(usize, usize)]),
    ) -> bool {
        if depth == order.len() {
            return true;
        }
        let (adj_a, adj_b, ca, cb, deg_a, deg_b) = *ctx;
        let u = order[depth];
        for v in 0..map.len() {
            if used[v] || ca[u] != cb[v] || deg_a[u] != deg_b[v] {
                continue;
            }
            if adj_a.get(u, u) != adj_b.get(v, v) {
                continue;
            }
            let consistent = order[..depth].iter().all(|&w| {
                let x = map[w];
                adj_a.get(u, w) == adj_b.get(v, x) && adj_a.get(w, u) == adj_b.get(x, v)
            });
            if !consistent {
                continue;
            }
            map[u] = v;
            used[v] = true;
            if go(depth + 1, order, map, used, ctx) {
                return true;
            }
            used[v] = false;
            map[u] = usize::MAX;
        }
        false
    }
    let ctx = (
        &adj_a,
        &adj_b,
        ca.as_slice(),
        cb.as_slice(),
        deg_a.as_slice(),
        deg_b.as_slice(),
    );
    if go(0, &order, &mut map, &mut used, &ctx) {
        Some(map)
    } else {
        None
    }
}

fn bfs_order(g: &LabeledGraph) -> Vec<usize> {
    let n = g.num_nodes();
    let mut nbrs = vec![BTreeSet::new(); n];
    for e in g.edges() {
        nbrs[e.src].insert(e.dst);
        nbrs[e.dst].insert(e.src);
    }
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &v in &nbrs[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    order
}

/// Label-aware 1-dimensional Weisfeiler-Leman refinement run on both graphs
/// jointly so that colors are comparable.
fn refine_colors(a: &LabeledGraph, b: &LabeledGraph) -> (Vec<usize>, Vec<usize>) {
    let na = a.num_nodes();
    let total = na + b.num_nodes();
    let mut out_e: Vec<Vec<(usize, usize)>> = vec![Vec::new(); total];
    let mut in_e: Vec<Vec<(usize, usize)>> = vec![Vec::new(); total];
    for (off, g) in [(0, a), (na, b)] {
        for e in g.edges() {
            out_e[off + e.src].push((e.label, off + e.dst));
            in_e[off + e.dst].push((e.label, off + e.src));
        }
    }
    let mut colors = vec![0usize; total];
    let mut classes = 1;
    loop {
        let mut sigs: Vec<(usize, Vec<(usize, usize)>, Vec<(usize, usize)>)> = (0..total)
            .map(|v| {
                let mut o: Vec<_> = out_e[v].iter().map(|&(l, w)| (l, colors[w])).collect();
                let mut i: Vec<_> = in_e[v].iter().map(|&(l, w)| (l, colors[w])).collect();
                o.sort_unstable();
                i.sort_unstable();
                (colors[v], o, i)
            })
            .collect();
        let mut distinct = sigs.clone();
        distinct.sort();
        distinct.dedup();
        let ids: HashMap<_, usize> = distinct.into_iter().enumerate().map(|(i, s)| (s, i)).collect();
        let next: Vec<usize> = sigs.drain(..).map(|s| ids[&s]).collect();
        let count = ids.len();
        colors = next;
        if count == classes {
            break;
        }
        classes = count;
    }
    (colors[..na].to_vec(), colors[na..].to_vec())
}

/// Domain-level part of [`encoding_class_violation`]: every predicate is
/// flipped by some schema (deleted where required true, or added where
/// required false), every schema argument occurs in one of the schema's
/// atoms, and binary statics name their arguments in increasing order.
pub fn domain_class_violation(domain: &Domain) -> Option<String> {
    for (p, pred) in domain.predicates.iter().enumerate() {
        let flips = domain.schemas.iter().any(|s| {
            s.eff_neg.iter().any(|a| a.predicate == p && s.pre_pos.contains(a))
                || s.eff_pos.iter().any(|a| a.predicate == p && s.pre_neg.contains(a))
        });
        if !flips {
            return Some(format!("predicate {} is never flipped", pred.name));
        }
    }
    for s in &domain.schemas {
        let used: BTreeSet<usize> = s.used_atoms().iter().flat_map(|a| a.args.iter().copied()).collect();
        if let Some(nu) = (0..s.arity).find(|nu| !used.contains(nu)) {
            return Some(format!("{}: argument {nu} occurs in no atom", s.name));
        }
        if s.static_binary.iter().any(|&(_, n0, n1)| n0 >= n1) {
            return Some(format!("{}: binary static arguments not increasing", s.name));
        }
    }
    None
}

/// Conditions under which the propositional encoding can represent an
/// instance, beyond accounting: every ground action is applied somewhere,
/// effects always change the atoms they touch, atoms of a ground action are
/// pairwise distinct, and no two ground actions generate the same labeled
/// edge from one state. Returns the first violation.
pub fn encoding_class_violation(
    domain: &Domain,
    instance: &Instance,
    ex: &Expansion,
) -> Option<String> {
    if let Some(v) = domain_class_violation(domain) {
        return Some(v);
    }
    let atoms = GroundAtoms::new(domain, instance.num_objects);
    let applied: HashSet<_> = ex.transitions.iter().map(|(_, ga, _)| ga).collect();
    for ga in ground_actions(domain, instance) {
        let schema = &domain.schemas[ga.schema];
        if schema.label.is_none() {
            return Some(format!("{ga} grounds an unlabeled schema"));
        }
        if !applied.contains(&ga) {
            return Some(format!("{ga} is never applied"));
        }
        let grounded: Vec<usize> = schema
            .used_atoms()
            .iter()
            .map(|a| atoms.ground(a, &ga.binding))
            .collect();
        let distinct: HashSet<_> = grounded.iter().collect();
        if distinct.len() != grounded.len() {
            return Some(format!("{ga} grounds two atom schemas to one atom"));
        }
    }
    let mut edges_seen = HashSet::new();
    for (src, ga, dst) in &ex.transitions {
        let schema = &domain.schemas[ga.schema];
        let st = &ex.states[*src];
        for a in &schema.eff_pos {
            if st.get(atoms.ground(a, &ga.binding)) {
                return Some(format!("{ga} at node {src} re-adds a true atom"));
            }
        }
        for a in &schema.eff_neg {
            if !st.get(atoms.ground(a, &ga.binding)) {
                return Some(format!("{ga} at node {src} deletes a false atom"));
            }
        }
        let label = schema.label.as_deref().unwrap_or(UNLABELED);
        if !edges_seen.insert((*src, label, *dst)) {
            return Some(format!("two ground actions generate edge {src} -{label}-> {dst}"));
        }
    }
    None
}
