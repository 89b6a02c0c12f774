use std::collections::{HashMap, VecDeque};

use super::ground::{applicable_in, apply};
use super::{ground_actions, Domain, GroundAction, GroundAtoms, Instance, State, StripsError};
use crate::graph::{Edge, LabeledGraph};

pub const DEFAULT_STATE_CAP: usize = 1_000_000;

/// Label used for edges of schemas without a label.
pub const UNLABELED: &str = "_";

/// Reachable state space of an instance.
#[derive(Debug, Clone)]
pub struct Expansion {
    pub graph: LabeledGraph,
    /// State of each node, indexed by node id (BFS discovery order).
    pub states: Vec<State>,
    /// Every applicable ground action as (src node, action, dst node).
    pub transitions: Vec<(usize, GroundAction, usize)>,
}

impl Expansion {
    pub fn node_of(&self) -> HashMap<&State, usize> {
        self.states.iter().enumerate().map(|(i, s)| (s, i)).collect()
    }
}

/// Breadth-first closure from `init`. Ground actions are tried in
/// (schema, binding) order so node numbering is deterministic.
pub fn expand(
    domain: &Domain,
    instance: &Instance,
    init: &State,
    cap: usize,
) -> Result<Expansion, StripsError> {
    let atoms = GroundAtoms::new(domain, instance.num_objects);
    if init.len() != atoms.len() {
        return Err(StripsError::InvalidInstance(format!(
            "init has {} atoms, universe has {}",
            init.len(),
            atoms.len()
        )));
    }
    let actions = ground_actions(domain, instance);
    let mut labels = domain.labels();
    let label_of: Vec<usize> = domain
        .schemas
        .iter()
        .map(|s| match &s.label {
            Some(l) => labels.iter().position(|x| x == l).unwrap(),
            None => {
                if !labels.iter().any(|x| x == UNLABELED) {
                    labels.push(UNLABELED.to_string());
                }
                labels.iter().position(|x| x == UNLABELED).unwrap()
            }
        })
        .collect();

    let mut index: HashMap<State, usize> = HashMap::new();
    let mut states = vec![init.clone()];
    index.insert(init.clone(), 0);
    let mut queue = VecDeque::from([0usize]);
    let mut transitions = Vec::new();
    let mut edges = Vec::new();
    while let Some(n) = queue.pop_front() {
        let st = states[n].clone();
        for ga in &actions {
            if !applicable_in(&atoms, domain, ga, &st) {
                continue;
            }
            let next = apply(&atoms, domain, ga, &st);
            let m = match index.get(&next) {
                Some(&m) => m,
                None => {
                    if states.len() >= cap {
                        return Err(StripsError::StateCap(cap));
                    }
                    let m = states.len();
                    index.insert(next.clone(), m);
                    states.push(next);
                    queue.push_back(m);
                    m
                }
            };
            edges.push(Edge {
                src: n,
                label: label_of[ga.schema],
                dst: m,
            });
            transitions.push((n, ga.clone(), m));
        }
    }
    let graph = LabeledGraph::new("expansion", states.len(), labels, edges)
        .expect("expansion edges are in range");
    Ok(Expansion {
        graph,
        states,
        transitions,
    })
}
