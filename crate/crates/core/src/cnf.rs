//! Variable registry, clause store, cardinality and lexicographic-order
//! helpers, DIMACS output and solver model parsing.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{self, Write};

use thiserror::Error;

pub type Var = u32;
pub type Lit = i32;

/// Largest group of literals encoded pairwise by [`Cnf::at_most_one`].
pub const PAIRWISE_AMO_MAX: usize = 6;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CnfError {
    #[error("variable {0} already registered")]
    DuplicateTag(Tag),
    #[error("lexicographic vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("solver output has no status line")]
    MissingStatus,
    #[error("literal {lit} out of range 1..={num_vars}")]
    LiteralOutOfRange { lit: i64, num_vars: usize },
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
}

macro_rules! families {
    ($($v:ident => $n:literal, $dom:literal;)*) => {
        /// One family per proposition kind; auxiliary families are last.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Family { $($v),* }

        impl Family {
            pub const ALL: &'static [Family] = &[$(Family::$v),*];

            pub fn name(self) -> &'static str {
                match self { $(Family::$v => $n),* }
            }

            /// Domain-layer families are shared by every instance layer.
            pub fn is_domain(self) -> bool {
                match self { $(Family::$v => $dom),* }
            }

            pub fn from_name(s: &str) -> Option<Family> {
                match s { $($n => Some(Family::$v),)* _ => None }
            }
        }
    };
}

families! {
    P0 => "p0", true;
    P1 => "p1", true;
    E0 => "e0", true;
    E1 => "e1", true;
    Label => "label", true;
    Arity => "arity", true;
    At2 => "at2", true;
    At3 => "at3", true;
    Un => "un", true;
    Bin => "bin", true;
    Use2 => "use2", true;
    Use1 => "use1", true;
    Arg => "arg", true;
    ArgVal => "argval", true;
    Static0 => "static0", true;
    Static1 => "static1", true;
    Mp => "mp", false;
    Mf => "mf", false;
    Phi => "phi", false;
    Gr2 => "gr2", false;
    Gr3 => "gr3", false;
    R => "r", false;
    S => "s", false;
    Gtuple => "gtuple", false;
    Free => "free", false;
    G => "g", false;
    U => "U", false;
    B => "B", false;
    Mt => "mt", false;
    W => "W", false;
    Gt => "G", false;
    Appl => "appl", false;
    Vio0 => "vio0", false;
    Vio1 => "vio1", false;
    Pre0eq => "pre0eq", false;
    Pre1eq => "pre1eq", false;
    Eq => "eq", false;
    Ord => "ord", false;
    AuxAmo => "aux_amo", false;
    AuxLex => "aux_lex", false;
}

impl Family {
    pub fn is_aux(self) -> bool {
        matches!(self, Family::AuxAmo | Family::AuxLex)
    }
}

const MAX_TAG_ARGS: usize = 7;

/// A semantic variable name: a family plus up to seven integer arguments.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tag {
    pub family: Family,
    len: u8,
    args: [u32; MAX_TAG_ARGS],
}

impl Tag {
    pub fn new(family: Family, args: &[usize]) -> Tag {
        assert!(args.len() <= MAX_TAG_ARGS, "too many tag arguments");
        let mut a = [0u32; MAX_TAG_ARGS];
        for (slot, &x) in a.iter_mut().zip(args) {
            *slot = u32::try_from(x).expect("tag argument fits in u32");
        }
        Tag {
            family,
            len: args.len() as u8,
            args: a,
        }
    }

    pub fn args(&self) -> &[u32] {
        &self.args[..self.len as usize]
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.family.name())?;
        for (i, a) in self.args().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Bijection between tags and dense 1-based variable ids.
#[derive(Debug, Clone, Default)]
pub struct VarTable {
    ids: HashMap<Tag, Var>,
    tags: Vec<Tag>,
    aux_counter: usize,
}

impl VarTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    /// Registers a new tag; fails if it is already known.
    pub fn fresh(&mut self, tag: Tag) -> Result<Var, CnfError> {
        if self.ids.contains_key(&tag) {
            return Err(CnfError::DuplicateTag(tag));
        }
        Ok(self.insert(tag))
    }

    fn insert(&mut self, tag: Tag) -> Var {
        self.tags.push(tag);
        let id = Var::try_from(self.tags.len()).expect("variable count fits in u32");
        self.ids.insert(tag, id);
        id
    }

    pub fn get_or_insert(&mut self, tag: Tag) -> Var {
        match self.ids.get(&tag) {
            Some(&v) => v,
            None => self.insert(tag),
        }
    }

    pub fn get(&self, tag: &Tag) -> Option<Var> {
        self.ids.get(tag).copied()
    }

    pub fn tag(&self, v: Var) -> Tag {
        self.tags[v as usize - 1]
    }

    /// A fresh auxiliary variable in one of the reserved families.
    pub fn aux(&mut self, family: Family) -> Var {
        debug_assert!(family.is_aux());
        self.aux_counter += 1;
        self.insert(Tag::new(family, &[self.aux_counter]))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, &Tag)> {
        self.tags.iter().enumerate().map(|(i, t)| (i as Var + 1, t))
    }

    /// One `<id> <family>(<args>)` line per variable.
    pub fn write_map(&self, mut w: impl Write) -> io::Result<()> {
        for (v, t) in self.iter() {
            writeln!(w, "{v} {t}")?;
        }
        Ok(())
    }
}

/// Clauses in a flat buffer, each terminated by 0, plus per-group counts in
/// emission order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClauseSet {
    lits: Vec<Lit>,
    num_clauses: usize,
    groups: Vec<(&'static str, usize)>,
}

impl ClauseSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.num_clauses
    }

    pub fn is_empty(&self) -> bool {
        self.num_clauses == 0
    }

    /// Starts counting subsequent clauses under `name`.
    pub fn begin_group(&mut self, name: &'static str) {
        self.groups.push((name, 0));
    }

    pub fn add(&mut self, clause: &[Lit]) {
        debug_assert!(clause.iter().all(|&l| l != 0));
        self.lits.extend_from_slice(clause);
        self.lits.push(0);
        self.num_clauses += 1;
        if let Some(g) = self.groups.last_mut() {
            g.1 += 1;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &[Lit]> {
        let mut rest: &[Lit] = &self.lits;
        std::iter::from_fn(move || {
            let end = rest.iter().position(|&l| l == 0)?;
            let (c, tail) = rest.split_at(end);
            rest = &tail[1..];
            Some(c)
        })
    }

    /// Groups in emission order, one entry per [`ClauseSet::begin_group`].
    pub fn group_log(&self) -> &[(&'static str, usize)] {
        &self.groups
    }

    /// Clause counts summed by group name.
    pub fn group_counts(&self) -> BTreeMap<&'static str, usize> {
        let mut out = BTreeMap::new();
        for &(n, c) in &self.groups {
            *out.entry(n).or_insert(0) += c;
        }
        out
    }

    pub fn max_var(&self) -> usize {
        self.lits.iter().map(|l| l.unsigned_abs() as usize).max().unwrap_or(0)
    }
}

/// A variable table and clause set built together.
#[derive(Debug, Clone, Default)]
pub struct Cnf {
    pub vars: VarTable,
    pub clauses: ClauseSet,
}

impl Cnf {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn add(&mut self, clause: &[Lit]) {
        self.clauses.add(clause);
    }

    pub fn group(&mut self, name: &'static str) {
        self.clauses.begin_group(name);
    }

    /// Pairwise for up to [`PAIRWISE_AMO_MAX`] literals, sequential counter
    /// above that.
    pub fn at_most_one(&mut self, lits: &[Lit]) {
        let n = lits.len();
        if n <= 1 {
            return;
        }
        if n <= PAIRWISE_AMO_MAX {
            for i in 0..n {
                for j in i + 1..n {
                    self.add(&[-lits[i], -lits[j]]);
                }
            }
            return;
        }
        let s: Vec<Lit> = (0..n - 1)
            .map(|_| self.vars.aux(Family::AuxAmo) as Lit)
            .collect();
        self.add(&[-lits[0], s[0]]);
        for i in 1..n - 1 {
            self.add(&[-lits[i], s[i]]);
            self.add(&[-s[i - 1], s[i]]);
            self.add(&[-lits[i], -s[i - 1]]);
        }
        self.add(&[-lits[n - 1], -s[n - 2]]);
    }

    /// At-most-one plus the covering clause. Over an empty set this adds the
    /// empty clause.
    pub fn exactly_one(&mut self, lits: &[Lit]) {
        self.add(lits);
        self.at_most_one(lits);
    }

    /// `a <lex b`, first element most significant, false < true.
    pub fn strict_lex_less(&mut self, a: &[Lit], b: &[Lit]) -> Result<(), CnfError> {
        self.lex(a, b, true)
    }

    /// `a <=lex b` under the same convention.
    pub fn lex_leq(&mut self, a: &[Lit], b: &[Lit]) -> Result<(), CnfError> {
        self.lex(a, b, false)
    }

    /// Strict order over consecutive vectors.
    pub fn strict_lex_chain(&mut self, vecs: &[Vec<Lit>]) -> Result<(), CnfError> {
        for w in vecs.windows(2) {
            self.strict_lex_less(&w[0], &w[1])?;
        }
        Ok(())
    }

    /// Chain encoding: `x_j` asserts the prefix before position `j` is equal.
    /// `x_0` is constant true; `x_n` is constant false when strict and
    /// constant true otherwise.
    fn lex(&mut self, a: &[Lit], b: &[Lit], strict: bool) -> Result<(), CnfError> {
        if a.len() != b.len() {
            return Err(CnfError::LengthMismatch(a.len(), b.len()));
        }
        let n = a.len();
        if n == 0 {
            if strict {
                self.add(&[]);
            }
            return Ok(());
        }
        let mut x: Option<Lit> = None;
        for j in 0..n {
            let guard: Vec<Lit> = x.map(|v| vec![-v]).unwrap_or_default();
            let mut c = guard.clone();
            c.extend([-a[j], b[j]]);
            self.add(&c);
            let last = j + 1 == n;
            if last && !strict {
                break;
            }
            let next = (!last).then(|| self.vars.aux(Family::AuxLex) as Lit);
            for tie in [[a[j], b[j]], [-a[j], -b[j]]] {
                let mut c = guard.clone();
                c.extend(tie);
                c.extend(next);
                self.add(&c);
            }
            x = next;
        }
        Ok(())
    }

    pub fn write_dimacs(&self, w: impl Write) -> io::Result<()> {
        write_dimacs(self.num_vars(), &self.clauses, w)
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = Vec::new();
        self.write_dimacs(&mut out).expect("writing to memory");
        String::from_utf8(out).expect("dimacs is ascii")
    }
}

pub fn write_dimacs(num_vars: usize, clauses: &ClauseSet, w: impl Write) -> io::Result<()> {
    let mut w = io::BufWriter::new(w);
    writeln!(w, "p cnf {} {}", num_vars, clauses.len())?;
    let mut buf = itoa_buf();
    for c in clauses.iter() {
        for &l in c {
            w.write_all(fmt_lit(&mut buf, l))?;
            w.write_all(b" ")?;
        }
        w.write_all(b"0\n")?;
    }
    w.flush()
}

fn itoa_buf() -> [u8; 12] {
    [0; 12]
}

fn fmt_lit(buf: &mut [u8; 12], l: Lit) -> &[u8] {
    let mut n = l.unsigned_abs();
    let mut i = buf.len();
    loop {
        i -= 1;
        buf[i] = b'0' + (n % 10) as u8;
        n /= 10;
        if n == 0 {
            break;
        }
    }
    if l < 0 {
        i -= 1;
        buf[i] = b'-';
    }
    &buf[i..]
}

/// A parsed DIMACS formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dimacs {
    pub num_vars: usize,
    pub clauses: Vec<Vec<Lit>>,
}

/// Reads `p cnf` formulas. Comment lines start with `c`; clauses may span
/// lines. The declared clause count must match.
pub fn parse_dimacs(text: &str) -> Result<Dimacs, CnfError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut cur = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let syntax = |msg: String| CnfError::Syntax { line: i + 1, msg };
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            let f: Vec<&str> = line.split_whitespace().collect();
            if header.is_some() || f.len() != 4 || f[0] != "p" || f[1] != "cnf" {
                return Err(syntax(format!("bad header {line:?}")));
            }
            let v = f[2].parse().map_err(|_| syntax("bad variable count".into()))?;
            let c = f[3].parse().map_err(|_| syntax("bad clause count".into()))?;
            header = Some((v, c));
            continue;
        }
        let (nv, _) = header.ok_or_else(|| syntax("clause before header".into()))?;
        for tok in line.split_whitespace() {
            let l: i64 = tok
                .parse()
                .map_err(|_| syntax(format!("bad literal {tok:?}")))?;
            if l == 0 {
                clauses.push(std::mem::take(&mut cur));
            } else if l.unsigned_abs() as usize > nv {
                return Err(CnfError::LiteralOutOfRange {
                    lit: l,
                    num_vars: nv,
                });
            } else {
                cur.push(l as Lit);
            }
        }
    }
    let (num_vars, nc) = header.ok_or_else(|| CnfError::Syntax {
        line: 0,
        msg: "missing header".into(),
    })?;
    if !cur.is_empty() {
        clauses.push(cur);
    }
    if clauses.len() != nc {
        return Err(CnfError::Syntax {
            line: 0,
            msg: format!("header declares {nc} clauses, found {}", clauses.len()),
        });
    }
    Ok(Dimacs { num_vars, clauses })
}

/// Total assignment over variables `1..=len`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Assignment(values)
    }

    pub fn all_false(num_vars: usize) -> Self {
        Assignment(vec![false; num_vars])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn value(&self, v: Var) -> bool {
        self.0[v as usize - 1]
    }

    pub fn set(&mut self, v: Var, b: bool) {
        self.0[v as usize - 1] = b;
    }

    pub fn lit(&self, l: Lit) -> bool {
        self.value(l.unsigned_abs()) == (l > 0)
    }

    pub fn satisfies(&self, clauses: &ClauseSet) -> bool {
        clauses
            .iter()
            .all(|c| c.iter().any(|&l| (l.unsigned_abs() as usize) <= self.len() && self.lit(l)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverOutput {
    Sat(Assignment),
    Unsat,
    Unknown,
}

/// Reads SAT-competition output: an `s` status line and, when satisfiable,
/// `v` lines (possibly several) terminated by 0. Variables not mentioned
/// default to false.
pub fn parse_model(stdout: &str, num_vars: usize) -> Result<SolverOutput, CnfError> {
    let mut status = None;
    let mut values = vec![false; num_vars];
    for (i, raw) in stdout.lines().enumerate() {
        let line = raw.trim();
        if let Some(s) = line.strip_prefix("s ") {
            status = Some(match s.trim() {
                "SATISFIABLE" => 10,
                "UNSATISFIABLE" => 20,
                "UNKNOWN" | "INDETERMINATE" => 0,
                other => {
                    return Err(CnfError::Syntax {
                        line: i + 1,
                        msg: format!("unknown status {other:?}"),
                    })
                }
            });
        } else if let Some(v) = line.strip_prefix('v') {
            for tok in v.split_whitespace() {
                let l: i64 = tok.parse().map_err(|_| CnfError::Syntax {
                    line: i + 1,
                    msg: format!("bad literal {tok:?}"),
                })?;
                if l == 0 {
                    continue;
                }
                let var = l.unsigned_abs() as usize;
                if var > num_vars {
                    return Err(CnfError::LiteralOutOfRange { lit: l, num_vars });
                }
                values[var - 1] = l > 0;
            }
        }
    }
    match status {
        Some(10) => Ok(SolverOutput::Sat(Assignment(values))),
        Some(20) => Ok(SolverOutput::Unsat),
        Some(_) => Ok(SolverOutput::Unknown),
        None => Err(CnfError::MissingStatus),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_ids_are_dense() {
        let mut t = VarTable::new();
        assert_eq!(t.fresh(Tag::new(Family::P0, &[0, 0])).unwrap(), 1);
        assert_eq!(t.fresh(Tag::new(Family::P0, &[0, 1])).unwrap(), 2);
        assert_eq!(t.fresh(Tag::new(Family::P1, &[0, 0])).unwrap(), 3);
        assert!(matches!(
            t.fresh(Tag::new(Family::P0, &[0, 1])),
            Err(CnfError::DuplicateTag(_))
        ));
        assert_eq!(t.get_or_insert(Tag::new(Family::P1, &[0, 0])), 3);
        assert_eq!(t.tag(2).to_string(), "p0(0,1)");
    }

    #[test]
    fn pairwise_amo_clause_count() {
        let mut c = Cnf::new();
        c.at_most_one(&[1, 2, 3, 4]);
        assert_eq!(c.clauses.len(), 6);
        assert!(c.clauses.iter().all(|cl| cl.len() == 2));
    }

    #[test]
    fn dimacs_text() {
        let mut c = Cnf::new();
        assert_eq!(c.to_dimacs(), "p cnf 0 0\n");
        c.vars.fresh(Tag::new(Family::Use1, &[0])).unwrap();
        c.add(&[1]);
        assert_eq!(c.to_dimacs(), "p cnf 1 1\n1 0\n");
        c.add(&[-1]);
        let d = parse_dimacs(&c.to_dimacs()).unwrap();
        assert_eq!(d.clauses, vec![vec![1], vec![-1]]);
    }

    #[test]
    fn model_parsing() {
        let out = parse_model("s SATISFIABLE\nv 1 -2 0\n", 2).unwrap();
        assert_eq!(out, SolverOutput::Sat(Assignment(vec![true, false])));
        let split = parse_model("c hi\ns SATISFIABLE\nv 1\nv -2 0\n", 2).unwrap();
        assert_eq!(split, out);
        assert_eq!(parse_model("s UNSATISFIABLE\n", 2).unwrap(), SolverOutput::Unsat);
        assert_eq!(parse_model("v 1 0\n", 2), Err(CnfError::MissingStatus));
        assert!(matches!(
            parse_model("s SATISFIABLE\nv 3 0\n", 2),
            Err(CnfError::LiteralOutOfRange { lit: 3, .. })
        ));
    }

    #[test]
    fn lex_length_mismatch() {
        let mut c = Cnf::new();
        assert_eq!(
            c.strict_lex_less(&[1], &[2, 3]),
            Err(CnfError::LengthMismatch(1, 2))
        );
    }

    #[test]
    fn literal_formatting() {
        let mut b = itoa_buf();
        for l in [1, -1, 10, -2147483647, 907] {
            assert_eq!(fmt_lit(&mut b, l), l.to_string().as_bytes());
        }
    }
}
