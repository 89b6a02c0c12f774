//! Labeled directed graphs encoding flat state spaces.
//!
//! Nodes are opaque dense integers; edges carry an index into the label
//! table. The text format is line oriented:
//!
//! ```text
//! # comment
//! graph <name>
//! nodes <count>            (optional)
//! labels <l0> <l1> ...     (optional, fixes label order)
//! t <src> <label> <dst>
//! ```
//!
//! When `nodes` is declared, node tokens must be the integers `0..count`.
//! Otherwise tokens are arbitrary strings interned in first-appearance order.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: duplicate transition {src} {label} {dst}")]
    DuplicateEdge {
        line: usize,
        src: String,
        label: String,
        dst: String,
    },
    #[error("line {line}: negative node id {token}")]
    NegativeNode { line: usize, token: String },
    #[error("missing `graph <name>` header")]
    MissingHeader,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub src: usize,
    pub label: usize,
    pub dst: usize,
}

/// A labeled transition system. Immutable once built.
#[derive(Debug, Clone)]
pub struct LabeledGraph {
    name: String,
    num_nodes: usize,
    labels: Vec<String>,
    /// Sorted by (src, label, dst), no duplicates.
    edges: Vec<Edge>,
    node_names: Vec<String>,
}

/// Structural equality: node names are report metadata and are ignored.
impl PartialEq for LabeledGraph {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.num_nodes == other.num_nodes
            && self.labels == other.labels
            && self.edges == other.edges
    }
}
impl Eq for LabeledGraph {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphStats {
    pub num_labels: usize,
    pub num_states: usize,
    pub num_transitions: usize,
    pub roots: BTreeSet<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphWarning {
    SelfLoop(Edge),
    NoRoot,
}

impl LabeledGraph {
    /// Builds a graph from parts. Edges referencing out-of-range nodes or
    /// labels are rejected; duplicates are merged.
    pub fn new(
        name: impl Into<String>,
        num_nodes: usize,
        labels: Vec<String>,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Result<Self, GraphError> {
        let set: BTreeSet<Edge> = edges.into_iter().collect();
        for e in &set {
            if e.src >= num_nodes || e.dst >= num_nodes || e.label >= labels.len() {
                return Err(GraphError::Syntax {
                    line: 0,
                    msg: format!("edge {e:?} out of range"),
                });
            }
        }
        Ok(LabeledGraph {
            name: name.into(),
            num_nodes,
            labels,
            edges: set.into_iter().collect(),
            node_names: (0..num_nodes).map(|i| i.to_string()).collect(),
        })
    }

    pub fn with_node_names(mut self, names: Vec<String>) -> Self {
        assert_eq!(names.len(), self.num_nodes);
        self.node_names = names;
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }
    pub fn labels(&self) -> &[String] {
        &self.labels
    }
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
    pub fn node_names(&self) -> &[String] {
        &self.node_names
    }
    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn has_edge(&self, src: usize, label: usize, dst: usize) -> bool {
        self.edges.binary_search(&Edge { src, label, dst }).is_ok()
    }

    pub fn successors(&self, n: usize) -> impl Iterator<Item = &Edge> {
        let lo = self.edges.partition_point(|e| e.src < n);
        let hi = self.edges.partition_point(|e| e.src <= n);
        self.edges[lo..hi].iter()
    }

    /// Nodes reachable from `start` (including itself).
    pub fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.num_nodes];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(n) = queue.pop_front() {
            for e in self.successors(n) {
                if !seen[e.dst] {
                    seen[e.dst] = true;
                    queue.push_back(e.dst);
                }
            }
        }
        seen
    }

    pub fn roots(&self) -> BTreeSet<usize> {
        (0..self.num_nodes)
            .filter(|&n| self.reachable_from(n).iter().all(|&r| r))
            .collect()
    }

    pub fn stats(&self) -> GraphStats {
        GraphStats {
            num_labels: self.labels.len(),
            num_states: self.num_nodes,
            num_transitions: self.edges.len(),
            roots: self.roots(),
        }
    }

    pub fn validate(&self) -> Vec<GraphWarning> {
        let mut out: Vec<GraphWarning> = self
            .edges
            .iter()
            .filter(|e| e.src == e.dst)
            .map(|e| GraphWarning::SelfLoop(*e))
            .collect();
        if self.num_nodes > 0 && self.roots().is_empty() {
            out.push(GraphWarning::NoRoot);
        }
        out
    }

    /// Hex digest of the canonical text form.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        hex::encode(Sha256::digest(write_graph(self).as_bytes()))
    }
}

pub fn stats(g: &LabeledGraph) -> GraphStats {
    g.stats()
}

fn syntax(line: usize, msg: impl Into<String>) -> GraphError {
    GraphError::Syntax {
        line,
        msg: msg.into(),
    }
}

pub fn parse_graph(text: &str) -> Result<LabeledGraph, GraphError> {
    let mut name: Option<String> = None;
    let mut declared: Option<usize> = None;
    let mut labels: Vec<String> = Vec::new();
    let mut label_ids: HashMap<String, usize> = HashMap::new();
    let mut node_names: Vec<String> = Vec::new();
    let mut node_ids: HashMap<String, usize> = HashMap::new();
    let mut seen: BTreeSet<Edge> = BTreeSet::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        match toks[0] {
            "graph" => {
                if name.is_some() {
                    return Err(syntax(line, "duplicate graph header"));
                }
                if toks.len() != 2 {
                    return Err(syntax(line, "expected `graph <name>`"));
                }
                name = Some(toks[1].to_string());
            }
            "nodes" => {
                if name.is_none() {
                    return Err(GraphError::MissingHeader);
                }
                if declared.is_some() || !node_names.is_empty() {
                    return Err(syntax(line, "`nodes` must precede transitions"));
                }
                if toks.len() != 2 {
                    return Err(syntax(line, "expected `nodes <count>`"));
                }
                if toks[1].starts_with('-') {
                    return Err(syntax(line, "node count must be nonnegative"));
                }
                let n: usize = toks[1]
                    .parse()
                    .map_err(|_| syntax(line, format!("bad node count {:?}", toks[1])))?;
                declared = Some(n);
            }
            "labels" => {
                if name.is_none() {
                    return Err(GraphError::MissingHeader);
                }
                if !labels.is_empty() {
                    return Err(syntax(line, "`labels` must precede transitions"));
                }
                for l in &toks[1..] {
                    if label_ids.insert(l.to_string(), labels.len()).is_some() {
                        return Err(syntax(line, format!("duplicate label {l}")));
                    }
                    labels.push(l.to_string());
                }
            }
            "t" => {
                if name.is_none() {
                    return Err(GraphError::MissingHeader);
                }
                if toks.len() != 4 {
                    return Err(syntax(line, "expected `t <src> <label> <dst>`"));
                }
                let mut node = |tok: &str| -> Result<usize, GraphError> {
                    if tok.starts_with('-') && tok[1..].chars().all(|c| c.is_ascii_digit()) {
                        return Err(GraphError::NegativeNode {
                            line,
                            token: tok.to_string(),
                        });
                    }
                    if let Some(n) = declared {
                        let id: usize = tok.parse().map_err(|_| {
                            syntax(line, format!("node {tok:?} is not an integer id"))
                        })?;
                        if id >= n {
                            return Err(syntax(line, format!("node {id} >= declared count {n}")));
                        }
                        Ok(id)
                    } else if let Some(&id) = node_ids.get(tok) {
                        Ok(id)
                    } else {
                        let id = node_names.len();
                        node_ids.insert(tok.to_string(), id);
                        node_names.push(tok.to_string());
                        Ok(id)
                    }
                };
                let src = node(toks[1])?;
                let dst = node(toks[3])?;
                let label = match label_ids.get(toks[2]) {
                    Some(&l) => l,
                    None => {
                        let l = labels.len();
                        label_ids.insert(toks[2].to_string(), l);
                        labels.push(toks[2].to_string());
                        l
                    }
                };
                if !seen.insert(Edge { src, label, dst }) {
                    return Err(GraphError::DuplicateEdge {
                        line,
                        src: toks[1].to_string(),
                        label: toks[2].to_string(),
                        dst: toks[3].to_string(),
                    });
                }
            }
            other => return Err(syntax(line, format!("unknown directive {other:?}"))),
        }
    }
    let name = name.ok_or(GraphError::MissingHeader)?;
    let (num_nodes, node_names) = match declared {
        Some(n) => (n, (0..n).map(|i| i.to_string()).collect()),
        None => (node_names.len(), node_names),
    };
    Ok(LabeledGraph {
        name,
        num_nodes,
        labels,
        edges: seen.into_iter().collect(),
        node_names,
    })
}

/// Canonical text: header, node count, label order, sorted transitions.
pub fn write_graph(g: &LabeledGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "graph {}", g.name);
    let _ = writeln!(out, "nodes {}", g.num_nodes);
    if !g.labels.is_empty() {
        let _ = writeln!(out, "labels {}", g.labels.join(" "));
    }
    for e in &g.edges {
        let _ = writeln!(out, "t {} {} {}", e.src, g.labels[e.label], e.dst);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_node_graph() {
        let g = parse_graph("graph one\nnodes 1\n").unwrap();
        assert_eq!(g.num_nodes(), 1);
        assert!(g.edges().is_empty());
        assert_eq!(write_graph(&g), "graph one\nnodes 1\n");
    }

    #[test]
    fn duplicate_edge_rejected() {
        let err = parse_graph("graph g\nt 0 move 1\nt 0 move 1\n").unwrap_err();
        assert!(matches!(err, GraphError::DuplicateEdge { line: 3, .. }));
    }

    #[test]
    fn negative_node_rejected() {
        let err = parse_graph("graph g\nt -1 move 1\n").unwrap_err();
        assert!(matches!(err, GraphError::NegativeNode { line: 2, .. }));
        let err = parse_graph("graph g\nnodes 2\nt 0 move -3\n").unwrap_err();
        assert!(matches!(err, GraphError::NegativeNode { .. }));
    }

    #[test]
    fn syntax_error_has_line() {
        let err = parse_graph("# c\ngraph g\nt 0 move\n").unwrap_err();
        assert_eq!(
            err,
            GraphError::Syntax {
                line: 3,
                msg: "expected `t <src> <label> <dst>`".into()
            }
        );
        assert_eq!(parse_graph("t 0 a 1\n").unwrap_err(), GraphError::MissingHeader);
    }

    #[test]
    fn string_nodes_interned_in_order() {
        let g = parse_graph("graph g\nt b x a\nt a y c\n").unwrap();
        assert_eq!(g.node_names(), &["b", "a", "c"]);
        assert_eq!(g.labels(), &["x", "y"]);
        assert!(g.has_edge(0, 0, 1));
        assert!(g.has_edge(1, 1, 2));
    }

    #[test]
    fn two_cycle_stats() {
        let g = parse_graph("graph c\nt 0 m 1\nt 1 m 0\n").unwrap();
        let s = g.stats();
        assert_eq!((s.num_labels, s.num_states, s.num_transitions), (1, 2, 2));
        assert_eq!(s.roots, BTreeSet::from([0, 1]));
    }

    #[test]
    fn validation_flags_self_loops_and_missing_roots() {
        let g = parse_graph("graph g\nnodes 3\nt 0 m 0\nt 1 m 2\n").unwrap();
        let w = g.validate();
        assert!(w.contains(&GraphWarning::SelfLoop(Edge { src: 0, label: 0, dst: 0 })));
        assert!(w.contains(&GraphWarning::NoRoot));
    }

    #[test]
    fn label_order_survives_round_trip() {
        // label "b" appears first in sorted output but was declared second
        let g = parse_graph("graph g\nt 1 a 0\nt 0 b 1\n").unwrap();
        assert_eq!(g.labels(), &["a", "b"]);
        let back = parse_graph(&write_graph(&g)).unwrap();
        assert_eq!(back, g);
    }
}
