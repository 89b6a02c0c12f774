//! Lifted STRIPS-with-negation domains and instances.
//!
//! This is the semantic ground truth for everything the learner produces:
//! grounding, successor generation, state-space expansion and the check that
//! an instance accounts for a labeled graph.

mod accounting;
mod expand;
mod ground;
pub mod text;

pub use accounting::{
    accounts_for, check_embedding, domain_class_violation, encoding_class_violation, find_isomorphism, graph_accounts_for,
    Accounting,
};
pub use expand::{expand, Expansion, DEFAULT_STATE_CAP};
pub use ground::{applicable, ground_actions, ground_atoms, successor, GroundAtoms};

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StripsError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("ground action {0} is not applicable")]
    NotApplicable(String),
    #[error("state space exceeds cap of {0} states")]
    StateCap(usize),
    #[error("search space too large: {0}")]
    SearchBudget(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Predicate {
    pub name: String,
    pub arity: usize,
}

/// A predicate applied to schema argument positions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomSchema {
    pub predicate: usize,
    pub args: Vec<usize>,
}

impl AtomSchema {
    pub fn new(predicate: usize, args: impl Into<Vec<usize>>) -> Self {
        AtomSchema {
            predicate,
            args: args.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ActionSchema {
    pub name: String,
    /// Graph label carried by every ground instance. `None` only for schemas
    /// that never ground.
    pub label: Option<String>,
    pub arity: usize,
    pub pre_pos: BTreeSet<AtomSchema>,
    pub pre_neg: BTreeSet<AtomSchema>,
    pub eff_pos: BTreeSet<AtomSchema>,
    pub eff_neg: BTreeSet<AtomSchema>,
    /// (unary static, argument)
    pub static_unary: BTreeSet<(usize, usize)>,
    /// (binary static, argument, argument)
    pub static_binary: BTreeSet<(usize, usize, usize)>,
}

impl ActionSchema {
    pub fn new(name: impl Into<String>, label: Option<&str>, arity: usize) -> Self {
        ActionSchema {
            name: name.into(),
            label: label.map(str::to_string),
            arity,
            ..Default::default()
        }
    }

    /// Every atom schema mentioned in a precondition or an effect.
    pub fn used_atoms(&self) -> BTreeSet<&AtomSchema> {
        self.pre_pos
            .iter()
            .chain(&self.pre_neg)
            .chain(&self.eff_pos)
            .chain(&self.eff_neg)
            .collect()
    }

    pub fn pre(mut self, positive: bool, atom: AtomSchema) -> Self {
        if positive {
            self.pre_pos.insert(atom);
        } else {
            self.pre_neg.insert(atom);
        }
        self
    }

    pub fn eff(mut self, positive: bool, atom: AtomSchema) -> Self {
        if positive {
            self.eff_pos.insert(atom);
        } else {
            self.eff_neg.insert(atom);
        }
        self
    }

    pub fn unary(mut self, u: usize, arg: usize) -> Self {
        self.static_unary.insert((u, arg));
        self
    }

    pub fn binary(mut self, b: usize, a0: usize, a1: usize) -> Self {
        self.static_binary.insert((b, a0, a1));
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Domain {
    pub predicates: Vec<Predicate>,
    pub schemas: Vec<ActionSchema>,
    pub static_unary: Vec<String>,
    pub static_binary: Vec<String>,
}

impl Domain {
    pub fn num_static_unary(&self) -> usize {
        self.static_unary.len()
    }
    pub fn num_static_binary(&self) -> usize {
        self.static_binary.len()
    }

    /// Distinct atom schemas used by any action schema.
    pub fn atom_schemas(&self) -> BTreeSet<AtomSchema> {
        self.schemas
            .iter()
            .flat_map(|s| s.used_atoms().into_iter().cloned())
            .collect()
    }

    /// Distinct labels in schema order.
    pub fn labels(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for s in &self.schemas {
            if let Some(l) = &s.label {
                if !out.contains(l) {
                    out.push(l.clone());
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), StripsError> {
        let bad = |m: String| Err(StripsError::InvalidDomain(m));
        for s in &self.schemas {
            for atom in s.used_atoms() {
                let Some(p) = self.predicates.get(atom.predicate) else {
                    return bad(format!("{}: unknown predicate {}", s.name, atom.predicate));
                };
                if atom.args.len() != p.arity {
                    return bad(format!("{}: {} expects {} args", s.name, p.name, p.arity));
                }
                if let Some(&nu) = atom.args.iter().find(|&&nu| nu >= s.arity) {
                    return bad(format!("{}: argument {nu} >= arity {}", s.name, s.arity));
                }
            }
            if !s.pre_pos.is_disjoint(&s.pre_neg) {
                return bad(format!("{}: contradictory preconditions", s.name));
            }
            if !s.eff_pos.is_disjoint(&s.eff_neg) {
                return bad(format!("{}: contradictory effects", s.name));
            }
            if !s.eff_pos.is_disjoint(&s.pre_pos) || !s.eff_neg.is_disjoint(&s.pre_neg) {
                return bad(format!("{}: redundant effect", s.name));
            }
            for &(u, nu) in &s.static_unary {
                if u >= self.num_static_unary() || nu >= s.arity {
                    return bad(format!("{}: bad unary static ({u},{nu})", s.name));
                }
            }
            for &(b, n0, n1) in &s.static_binary {
                if b >= self.num_static_binary() || n0 >= s.arity || n1 >= s.arity {
                    return bad(format!("{}: bad binary static ({b},{n0},{n1})", s.name));
                }
            }
        }
        Ok(())
    }
}

/// Objects are `1..=num_objects`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Instance {
    pub num_objects: usize,
    pub init: Option<State>,
    /// (u, o) with u(o) true
    pub static_unary: BTreeSet<(usize, usize)>,
    /// (b, o, o') with b(o, o') true
    pub static_binary: BTreeSet<(usize, usize, usize)>,
}

impl Instance {
    pub fn validate(&self, domain: &Domain) -> Result<(), StripsError> {
        let n = self.num_objects;
        let ok_obj = |o: usize| (1..=n).contains(&o);
        for &(u, o) in &self.static_unary {
            if u >= domain.num_static_unary() || !ok_obj(o) {
                return Err(StripsError::InvalidInstance(format!("bad unary fact ({u},{o})")));
            }
        }
        for &(b, o, o2) in &self.static_binary {
            if b >= domain.num_static_binary() || !ok_obj(o) || !ok_obj(o2) {
                return Err(StripsError::InvalidInstance(format!(
                    "bad binary fact ({b},{o},{o2})"
                )));
            }
        }
        if let Some(init) = &self.init {
            let k = GroundAtoms::new(domain, n).len();
            if init.len() != k {
                return Err(StripsError::InvalidInstance(format!(
                    "init has {} atoms, universe has {k}",
                    init.len()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundAction {
    pub schema: usize,
    pub binding: Vec<usize>,
}

impl fmt::Display for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}(", self.schema)?;
        for (i, o) in self.binding.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "o{o}")?;
        }
        write!(f, ")")
    }
}

/// Truth values of every ground atom of an instance.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct State {
    len: usize,
    words: Vec<u64>,
}

impl State {
    pub fn new(len: usize) -> Self {
        State {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_true(len: usize, atoms: impl IntoIterator<Item = usize>) -> Self {
        let mut s = State::new(len);
        for k in atoms {
            s.set(k, true);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, k: usize) -> bool {
        assert!(k < self.len, "ground atom {k} out of range {}", self.len);
        self.words[k / 64] >> (k % 64) & 1 == 1
    }

    pub fn set(&mut self, k: usize, value: bool) {
        assert!(k < self.len, "ground atom {k} out of range {}", self.len);
        if value {
            self.words[k / 64] |= 1 << (k % 64);
        } else {
            self.words[k / 64] &= !(1 << (k % 64));
        }
    }

    pub fn true_atoms(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&k| self.get(k))
    }
}
