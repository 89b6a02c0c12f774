//! Compilation of a parametrization and input graphs into the two-layer
//! propositional theory: one domain layer shared by every graph plus one
//! instance layer per graph.
//!
//! Index conventions for variable tags: schemas `a`, atom schemas `m`,
//! predicates `p`, schema arguments `ν`, predicate positions `i` and labels
//! `l` are 0-based; objects are `1..=N`. Instance-layer tags carry the layer
//! index as their first argument. Ground tuples `ō` range over
//! `({0} ∪ 1..=N)^A` where `A` is the largest schema arity and 0 marks an
//! unused argument; tags store a tuple by its index in [`Layer::tuples`].

/// Adds one clause whose literals may register variables on the same `Cnf`.
macro_rules! clause {
    ($c:expr; $($l:expr),* $(,)?) => {{
        let cl = [$($l),*];
        $c.add(&cl);
    }};
}

mod domain;
mod instance;
mod symmetry;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{Assignment, Cnf, Family, Lit, Tag};
use crate::graph::LabeledGraph;
use crate::hyperspace::Alpha;

pub use symmetry::encode_symmetry_breaking;

/// Bumped whenever the clause set produced for a given input changes.
pub const ENCODER_VERSION: &str = "1";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EncodeError {
    #[error("no input graphs")]
    NoGraphs,
    #[error("parametrization has {alpha} object counts for {graphs} graphs")]
    LayerCount { alpha: usize, graphs: usize },
    #[error("layer {0} has zero objects")]
    ZeroObjects(usize),
    #[error("layer {0} graph has no nodes")]
    EmptyGraph(usize),
    #[error("label `{0}` is missing from the label universe")]
    UnknownLabel(String),
    #[error("unsupported parametrization: {0}")]
    Unsupported(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodeOptions {
    /// Adds satisfiability-preserving symmetry-breaking constraints.
    pub symmetry_breaking: bool,
}

/// Per-graph data of an instance layer.
#[derive(Debug, Clone)]
pub struct Layer {
    pub graph: LabeledGraph,
    pub num_objects: usize,
    pub num_atoms: usize,
    /// Every ground tuple, lexicographic over `0..=N` per position.
    pub tuples: Vec<Vec<usize>>,
    /// Universe label index of each graph label.
    pub label_index: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Theory {
    pub cnf: Cnf,
    pub alpha: Alpha,
    /// Label universe; `label(a, l)` indexes into it.
    pub labels: Vec<String>,
    pub layers: Vec<Layer>,
    pub options: EncodeOptions,
}

/// Labels of all graphs by first appearance.
pub fn label_universe<'a>(graphs: impl IntoIterator<Item = &'a LabeledGraph>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for g in graphs {
        for l in g.labels() {
            if !out.contains(l) {
                out.push(l.clone());
            }
        }
    }
    out
}

/// Builds the full theory with the label universe taken from `graphs`.
pub fn build_theory(
    alpha: &Alpha,
    graphs: &[LabeledGraph],
    options: EncodeOptions,
) -> Result<Theory, EncodeError> {
    build_theory_with_labels(alpha, graphs, &label_universe(graphs), options)
}

pub fn build_theory_with_labels(
    alpha: &Alpha,
    graphs: &[LabeledGraph],
    labels: &[String],
    options: EncodeOptions,
) -> Result<Theory, EncodeError> {
    if graphs.is_empty() {
        return Err(EncodeError::NoGraphs);
    }
    if alpha.objects.len() != graphs.len() {
        return Err(EncodeError::LayerCount {
            alpha: alpha.objects.len(),
            graphs: graphs.len(),
        });
    }
    let mut th = Theory::new(alpha, labels, options)?;
    for g in graphs {
        th.add_layer(g)?;
    }
    encode_domain_layer(&mut th);
    for i in 0..th.layers.len() {
        encode_instance_layer(&mut th, i);
    }
    if options.symmetry_breaking {
        encode_symmetry_breaking(&mut th);
    }
    Ok(th)
}

pub fn encode_domain_layer(th: &mut Theory) {
    domain::encode(th);
}

pub fn encode_instance_layer(th: &mut Theory, layer: usize) {
    instance::encode(th, layer);
}

/// Every tuple over `0..=n` of length `len`, lexicographically.
pub(crate) fn ground_tuples(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::with_capacity(len)];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..=n).map(move |o| {
                    let mut t = t.clone();
                    t.push(o);
                    t
                })
            })
            .collect();
    }
    out
}

impl Theory {
    /// An empty theory; layers are added with [`Theory::add_layer`] and
    /// clauses by the `encode_*` functions.
    pub fn new(alpha: &Alpha, labels: &[String], options: EncodeOptions) -> Result<Self, EncodeError> {
        if alpha.max_pred_arity() > 3 || alpha.max_schema_arity() > 4 {
            return Err(EncodeError::Unsupported(format!(
                "arities up to 3 (predicates) and 4 (schemas) are supported, got {alpha}"
            )));
        }
        Ok(Theory {
            cnf: Cnf::new(),
            alpha: alpha.clone(),
            labels: labels.to_vec(),
            layers: Vec::new(),
            options,
        })
    }

    pub fn add_layer(&mut self, graph: &LabeledGraph) -> Result<usize, EncodeError> {
        let idx = self.layers.len();
        let n = *self
            .alpha
            .objects
            .get(idx)
            .ok_or(EncodeError::LayerCount {
                alpha: self.alpha.objects.len(),
                graphs: idx + 1,
            })?;
        if n == 0 {
            return Err(EncodeError::ZeroObjects(idx));
        }
        if graph.num_nodes() == 0 {
            return Err(EncodeError::EmptyGraph(idx));
        }
        let label_index = graph
            .labels()
            .iter()
            .map(|l| {
                self.labels
                    .iter()
                    .position(|x| x == l)
                    .ok_or_else(|| EncodeError::UnknownLabel(l.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.layers.push(Layer {
            graph: graph.clone(),
            num_objects: n,
            num_atoms: self.alpha.num_ground_atoms(n),
            tuples: ground_tuples(n, self.alpha.max_schema_arity()),
            label_index,
        });
        Ok(idx)
    }

    pub fn num_vars(&self) -> usize {
        self.cnf.num_vars()
    }

    pub fn num_clauses(&self) -> usize {
        self.cnf.clauses.len()
    }

    /// `τ` gives a real grounding of schema `a`: every position below the
    /// schema's arity holds an object and every position above holds 0.
    pub fn right_shaped(&self, a: usize, tuple: &[usize]) -> bool {
        let ar = self.alpha.schema_arities[a];
        tuple.iter().enumerate().all(|(i, &o)| (i < ar) == (o > 0))
    }

    /// Looks up a variable without registering it.
    pub fn lit(&self, family: Family, args: &[usize]) -> Option<Lit> {
        self.cnf.vars.get(&Tag::new(family, args)).map(|v| v as Lit)
    }

    /// Value of a variable in `asg`; unregistered variables read as false.
    pub fn value(&self, asg: &Assignment, family: Family, args: &[usize]) -> bool {
        self.lit(family, args).is_some_and(|l| asg.lit(l))
    }

    /// The theory is satisfied by `asg`.
    pub fn check(&self, asg: &Assignment) -> bool {
        asg.len() >= self.num_vars() && asg.satisfies(&self.cnf.clauses)
    }
}

/// Shorthand used by the layer encoders: registers on first use.
pub(crate) fn v(cnf: &mut Cnf, family: Family, args: &[usize]) -> Lit {
    cnf.vars.get_or_insert(Tag::new(family, args)) as Lit
}
