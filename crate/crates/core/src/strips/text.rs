//! Text form of domains and instances, close to the usual PDDL-like
//! listings:
//!
//! ```text
//! Predicates: atX/1 atY/1
//! Unary:
//! Binary: adjX adjY
//!
//! Action horiz [Horiz] (2):
//!  Static: adjX(x0,x1)
//!  Pre: atX(x0),-atX(x1)
//!  Eff: -atX(x0),atX(x1)
//!
//! Instance 0:
//!  Objects: 7
//!  Init: atX(o1),atY(o5)
//!  Facts: adjX(o1,o2),adjX(o2,o1)
//! ```
//!
//! `Init:` is omitted when an instance has no initial state. Literals are
//! written in sorted order so output is deterministic.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use super::{ActionSchema, AtomSchema, Domain, GroundAtoms, Instance, Predicate, State};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct TextError {
    pub line: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub domain: Domain,
    pub instances: Vec<Instance>,
}

fn args(prefix: char, xs: &[usize]) -> String {
    xs.iter()
        .map(|x| format!("{prefix}{x}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn field(out: &mut String, key: &str, body: &str) {
    if body.is_empty() {
        let _ = writeln!(out, "{key}:");
    } else {
        let _ = writeln!(out, "{key}: {body}");
    }
}

fn atom_text(d: &Domain, a: &AtomSchema) -> String {
    format!("{}({})", d.predicates[a.predicate].name, args('x', &a.args))
}

fn literals(d: &Domain, pos: &BTreeSet<AtomSchema>, neg: &BTreeSet<AtomSchema>) -> String {
    let mut lits: Vec<(&AtomSchema, bool)> = pos
        .iter()
        .map(|a| (a, true))
        .chain(neg.iter().map(|a| (a, false)))
        .collect();
    lits.sort();
    lits.iter()
        .map(|(a, p)| format!("{}{}", if *p { "" } else { "-" }, atom_text(d, a)))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn write_domain(d: &Domain) -> String {
    let mut out = String::new();
    let preds: Vec<String> = d
        .predicates
        .iter()
        .map(|p| format!("{}/{}", p.name, p.arity))
        .collect();
    field(&mut out, "Predicates", &preds.join(" "));
    field(&mut out, "Unary", &d.static_unary.join(" "));
    field(&mut out, "Binary", &d.static_binary.join(" "));
    for s in &d.schemas {
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "Action {} [{}] ({}):",
            s.name,
            s.label.as_deref().unwrap_or(""),
            s.arity
        );
        let mut statics: Vec<String> = s
            .static_unary
            .iter()
            .map(|&(u, nu)| format!("{}(x{nu})", d.static_unary[u]))
            .collect();
        statics.extend(
            s.static_binary
                .iter()
                .map(|&(b, n0, n1)| format!("{}(x{n0},x{n1})", d.static_binary[b])),
        );
        field(&mut out, " Static", &statics.join(","));
        field(&mut out, " Pre", &literals(d, &s.pre_pos, &s.pre_neg));
        field(&mut out, " Eff", &literals(d, &s.eff_pos, &s.eff_neg));
    }
    out
}

pub fn write_instance(d: &Domain, index: usize, inst: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Instance {index}:");
    let _ = writeln!(out, " Objects: {}", inst.num_objects);
    if let Some(init) = &inst.init {
        let atoms = GroundAtoms::new(d, inst.num_objects);
        let facts: Vec<String> = init
            .true_atoms()
            .map(|k| {
                let (p, objs) = atoms.atom(k);
                format!("{}({})", d.predicates[p].name, args('o', &objs))
            })
            .collect();
        field(&mut out, " Init", &facts.join(","));
    }
    let mut facts: Vec<String> = inst
        .static_unary
        .iter()
        .map(|&(u, o)| format!("{}(o{o})", d.static_unary[u]))
        .collect();
    facts.extend(
        inst.static_binary
            .iter()
            .map(|&(b, o, o2)| format!("{}(o{o},o{o2})", d.static_binary[b])),
    );
    field(&mut out, " Facts", &facts.join(","));
    out
}

pub fn write_problem(d: &Domain, instances: &[Instance]) -> String {
    let mut out = write_domain(d);
    for (i, inst) in instances.iter().enumerate() {
        out.push('\n');
        out.push_str(&write_instance(d, i, inst));
    }
    out
}

struct Parser {
    domain: Domain,
    instances: Vec<Instance>,
    preds: HashMap<String, usize>,
    unary: HashMap<String, usize>,
    binary: HashMap<String, usize>,
    pending_init: Vec<Option<Vec<(usize, Vec<usize>)>>>,
}

fn err(line: usize, msg: impl Into<String>) -> TextError {
    TextError {
        line,
        msg: msg.into(),
    }
}

fn is_ident(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_alphanumeric() || c == '_' || c == '-' || c == '*' || c == '.')
        && !s.starts_with('-')
}

/// Splits `a(x),-b(y,z)` into terms, respecting parentheses.
fn split_terms(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    let last = s[start..].trim();
    if !last.is_empty() || !out.is_empty() {
        out.push(last);
    }
    out
}

/// Parses `name(p1,p2)` where every argument is `prefix<number>`.
fn parse_term(line: usize, t: &str, prefix: char) -> Result<(String, Vec<usize>), TextError> {
    let open = t.find('(').ok_or_else(|| err(line, format!("expected `(` in {t:?}")))?;
    if !t.ends_with(')') {
        return Err(err(line, format!("expected `)` in {t:?}")));
    }
    let name = &t[..open];
    if !is_ident(name) {
        return Err(err(line, format!("bad name {name:?}")));
    }
    let inner = &t[open + 1..t.len() - 1];
    let mut out = Vec::new();
    if !inner.trim().is_empty() {
        for a in inner.split(',') {
            let a = a.trim();
            let num = a
                .strip_prefix(prefix)
                .and_then(|n| n.parse::<usize>().ok())
                .ok_or_else(|| err(line, format!("bad argument {a:?}")))?;
            out.push(num);
        }
    }
    Ok((name.to_string(), out))
}

impl Parser {
    fn schema(&mut self, line: usize) -> Result<&mut ActionSchema, TextError> {
        self.domain
            .schemas
            .last_mut()
            .ok_or_else(|| err(line, "entry outside of an action"))
    }

    fn atom(&self, line: usize, t: &str) -> Result<AtomSchema, TextError> {
        let (name, xs) = parse_term(line, t, 'x')?;
        let p = *self
            .preds
            .get(&name)
            .ok_or_else(|| err(line, format!("unknown predicate {name}")))?;
        if xs.len() != self.domain.predicates[p].arity {
            return Err(err(line, format!("{name} has wrong arity")));
        }
        Ok(AtomSchema::new(p, xs))
    }

    fn literal_list(
        &self,
        line: usize,
        body: &str,
    ) -> Result<(BTreeSet<AtomSchema>, BTreeSet<AtomSchema>), TextError> {
        let mut pos = BTreeSet::new();
        let mut neg = BTreeSet::new();
        for t in split_terms(body) {
            if t.is_empty() {
                return Err(err(line, "empty literal"));
            }
            match t.strip_prefix('-') {
                Some(rest) => neg.insert(self.atom(line, rest)?),
                None => pos.insert(self.atom(line, t)?),
            };
        }
        Ok((pos, neg))
    }

    fn names(line: usize, body: &str) -> Result<Vec<String>, TextError> {
        body.split_whitespace()
            .map(|n| {
                if is_ident(n) {
                    Ok(n.to_string())
                } else {
                    Err(err(line, format!("bad name {n:?}")))
                }
            })
            .collect()
    }

    fn declare(&mut self, line: usize, name: &str) -> Result<(), TextError> {
        let taken = self.preds.contains_key(name)
            || self.unary.contains_key(name)
            || self.binary.contains_key(name);
        if taken {
            Err(err(line, format!("duplicate name {name}")))
        } else {
            Ok(())
        }
    }

    fn line(&mut self, line: usize, raw: &str) -> Result<(), TextError> {
        let text = raw.trim();
        let (head, body) = match text.split_once(':') {
            Some((h, b)) if !h.contains('(') || h.starts_with("Action ") => (h.trim(), b.trim()),
            _ => return Err(err(line, format!("expected `Key: ...`, got {text:?}"))),
        };
        let in_instance = !self.instances.is_empty();
        match head {
            "Predicates" => {
                if !self.domain.predicates.is_empty() || !self.domain.schemas.is_empty() {
                    return Err(err(line, "predicates declared twice or late"));
                }
                for tok in body.split_whitespace() {
                    let (name, ar) = tok
                        .split_once('/')
                        .ok_or_else(|| err(line, format!("expected name/arity, got {tok:?}")))?;
                    let arity: usize =
                        ar.parse().map_err(|_| err(line, format!("bad arity {ar:?}")))?;
                    if !is_ident(name) || arity > 8 {
                        return Err(err(line, format!("bad predicate {tok:?}")));
                    }
                    self.declare(line, name)?;
                    self.preds.insert(name.to_string(), self.domain.predicates.len());
                    self.domain.predicates.push(Predicate {
                        name: name.to_string(),
                        arity,
                    });
                }
            }
            "Unary" if !in_instance => {
                for n in Self::names(line, body)? {
                    self.declare(line, &n)?;
                    self.unary.insert(n.clone(), self.domain.static_unary.len());
                    self.domain.static_unary.push(n);
                }
            }
            "Binary" if !in_instance => {
                for n in Self::names(line, body)? {
                    self.declare(line, &n)?;
                    self.binary.insert(n.clone(), self.domain.static_binary.len());
                    self.domain.static_binary.push(n);
                }
            }
            h if h.starts_with("Action ") => {
                if in_instance {
                    return Err(err(line, "action after instances"));
                }
                if !body.is_empty() {
                    return Err(err(line, "unexpected text after action header"));
                }
                let toks: Vec<&str> = h.split_whitespace().collect();
                if toks.len() != 4 {
                    return Err(err(line, "expected `Action <name> [<label>] (<arity>):`"));
                }
                let label = toks[2]
                    .strip_prefix('[')
                    .and_then(|l| l.strip_suffix(']'))
                    .ok_or_else(|| err(line, "label must be bracketed"))?;
                let arity: usize = toks[3]
                    .strip_prefix('(')
                    .and_then(|a| a.strip_suffix(')'))
                    .and_then(|a| a.parse().ok())
                    .filter(|&a| a <= 8)
                    .ok_or_else(|| err(line, "bad arity"))?;
                let label = (!label.is_empty()).then_some(label);
                self.domain
                    .schemas
                    .push(ActionSchema::new(toks[1], label, arity));
            }
            "Static" if !in_instance => {
                let mut unary = BTreeSet::new();
                let mut binary = BTreeSet::new();
                for t in split_terms(body) {
                    let (name, xs) = parse_term(line, t, 'x')?;
                    match (self.unary.get(&name), self.binary.get(&name), xs.as_slice()) {
                        (Some(&u), _, &[nu]) => {
                            unary.insert((u, nu));
                        }
                        (_, Some(&b), &[n0, n1]) => {
                            binary.insert((b, n0, n1));
                        }
                        _ => return Err(err(line, format!("bad static {t:?}"))),
                    }
                }
                let s = self.schema(line)?;
                s.static_unary = unary;
                s.static_binary = binary;
            }
            "Pre" if !in_instance => {
                let (pos, neg) = self.literal_list(line, body)?;
                let s = self.schema(line)?;
                s.pre_pos = pos;
                s.pre_neg = neg;
            }
            "Eff" if !in_instance => {
                let (pos, neg) = self.literal_list(line, body)?;
                let s = self.schema(line)?;
                s.eff_pos = pos;
                s.eff_neg = neg;
            }
            h if h.starts_with("Instance ") => {
                let idx: usize = h["Instance ".len()..]
                    .trim()
                    .parse()
                    .map_err(|_| err(line, "bad instance index"))?;
                if idx != self.instances.len() {
                    return Err(err(line, format!("expected instance {}", self.instances.len())));
                }
                self.instances.push(Instance::default());
                self.pending_init.push(None);
            }
            "Objects" if in_instance => {
                let n: usize = body
                    .parse()
                    .ok()
                    .filter(|&n| n <= 1 << 16)
                    .ok_or_else(|| err(line, "bad object count"))?;
                self.instances.last_mut().unwrap().num_objects = n;
            }
            "Init" if in_instance => {
                let mut facts = Vec::new();
                for t in split_terms(body) {
                    let (name, os) = parse_term(line, t, 'o')?;
                    let p = *self
                        .preds
                        .get(&name)
                        .ok_or_else(|| err(line, format!("unknown predicate {name}")))?;
                    facts.push((p, os));
                }
                *self.pending_init.last_mut().unwrap() = Some(facts);
            }
            "Facts" if in_instance => {
                let inst = self.instances.last_mut().unwrap();
                for t in split_terms(body) {
                    let (name, os) = parse_term(line, t, 'o')?;
                    match (self.unary.get(&name), self.binary.get(&name), os.as_slice()) {
                        (Some(&u), _, &[o]) => {
                            inst.static_unary.insert((u, o));
                        }
                        (_, Some(&b), &[o, o2]) => {
                            inst.static_binary.insert((b, o, o2));
                        }
                        _ => return Err(err(line, format!("bad fact {t:?}"))),
                    }
                }
            }
            _ => return Err(err(line, format!("unexpected {head:?}"))),
        }
        Ok(())
    }

    fn finish(mut self, last_line: usize) -> Result<Problem, TextError> {
        self.domain
            .validate()
            .map_err(|e| err(last_line, e.to_string()))?;
        for (inst, init) in self.instances.iter_mut().zip(self.pending_init) {
            let n = inst.num_objects;
            if let Some(facts) = init {
                let atoms = GroundAtoms::new(&self.domain, n);
                // universe size is bounded before allocating
                let k = self
                    .domain
                    .predicates
                    .iter()
                    .try_fold(0usize, |acc, p| {
                        n.checked_pow(p.arity as u32).and_then(|c| acc.checked_add(c))
                    })
                    .filter(|&k| k <= 1 << 24)
                    .ok_or_else(|| err(last_line, "ground-atom universe too large"))?;
                let mut st = State::new(k);
                for (p, os) in facts {
                    if os.len() != self.domain.predicates[p].arity
                        || os.iter().any(|&o| o == 0 || o > n)
                    {
                        return Err(err(last_line, "init fact out of range"));
                    }
                    st.set(atoms.index(p, &os), true);
                }
                inst.init = Some(st);
            }
            inst.validate(&self.domain)
                .map_err(|e| err(last_line, e.to_string()))?;
        }
        Ok(Problem {
            domain: self.domain,
            instances: self.instances,
        })
    }
}

pub fn parse_problem(text: &str) -> Result<Problem, TextError> {
    let mut p = Parser {
        domain: Domain::default(),
        instances: Vec::new(),
        preds: HashMap::new(),
        unary: HashMap::new(),
        binary: HashMap::new(),
        pending_init: Vec::new(),
    };
    let mut last = 0;
    for (i, raw) in text.lines().enumerate() {
        last = i + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with(';') || t.starts_with('#') {
            continue;
        }
        p.line(i + 1, raw)?;
    }
    p.finish(last)
}
