use super::{AtomSchema, Domain, GroundAction, Instance, State, StripsError};

/// The ground-atom universe of an instance: every fluent predicate applied to
/// every object tuple (with repetition), ordered by predicate and then
/// lexicographically by tuple. The position in that order is the atom id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundAtoms {
    num_objects: usize,
    arities: Vec<usize>,
    offsets: Vec<usize>,
    len: usize,
}

impl GroundAtoms {
    pub fn new(domain: &Domain, num_objects: usize) -> Self {
        Self::from_arities(domain.predicates.iter().map(|p| p.arity), num_objects)
    }

    pub fn from_arities(arities: impl IntoIterator<Item = usize>, num_objects: usize) -> Self {
        let arities: Vec<usize> = arities.into_iter().collect();
        let mut offsets = Vec::with_capacity(arities.len());
        let mut len = 0;
        for &a in &arities {
            offsets.push(len);
            len += num_objects.pow(a as u32);
        }
        GroundAtoms {
            num_objects,
            arities,
            offsets,
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn num_objects(&self) -> usize {
        self.num_objects
    }

    /// Atom id of `p(objects)`; objects are 1-based.
    pub fn index(&self, predicate: usize, objects: &[usize]) -> usize {
        debug_assert_eq!(objects.len(), self.arities[predicate]);
        let mut idx = 0;
        for &o in objects {
            debug_assert!((1..=self.num_objects).contains(&o));
            idx = idx * self.num_objects + (o - 1);
        }
        self.offsets[predicate] + idx
    }

    pub fn atom(&self, k: usize) -> (usize, Vec<usize>) {
        assert!(k < self.len);
        let p = self.offsets.partition_point(|&off| off <= k) - 1;
        // skip predicates with an empty block (only possible when N = 0)
        let mut rest = k - self.offsets[p];
        let arity = self.arities[p];
        let mut objs = vec![0; arity];
        for i in (0..arity).rev() {
            objs[i] = rest % self.num_objects + 1;
            rest /= self.num_objects;
        }
        (p, objs)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Vec<usize>)> + '_ {
        (0..self.len).map(|k| self.atom(k))
    }

    /// Ground an atom schema under a binding of schema arguments.
    pub fn ground(&self, atom: &AtomSchema, binding: &[usize]) -> usize {
        let objs: Vec<usize> = atom.args.iter().map(|&nu| binding[nu]).collect();
        self.index(atom.predicate, &objs)
    }
}

pub fn ground_atoms(domain: &Domain, instance: &Instance) -> Vec<(usize, Vec<usize>)> {
    GroundAtoms::new(domain, instance.num_objects).iter().collect()
}

/// All bindings of every schema that pass its static filters, ordered by
/// (schema, binding).
pub fn ground_actions(domain: &Domain, instance: &Instance) -> Vec<GroundAction> {
    let n = instance.num_objects;
    let mut out = Vec::new();
    for (si, schema) in domain.schemas.iter().enumerate() {
        for binding in tuples(n, schema.arity) {
            let unary_ok = schema
                .static_unary
                .iter()
                .all(|&(u, nu)| instance.static_unary.contains(&(u, binding[nu])));
            let binary_ok = schema.static_binary.iter().all(|&(b, n0, n1)| {
                instance
                    .static_binary
                    .contains(&(b, binding[n0], binding[n1]))
            });
            if unary_ok && binary_ok {
                out.push(GroundAction {
                    schema: si,
                    binding,
                });
            }
        }
    }
    out
}

/// Every tuple in `{1..n}^len`, lexicographically.
pub(crate) fn tuples(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::with_capacity(len)];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (1..=n).map(move |o| {
                    let mut t = t.clone();
                    t.push(o);
                    t
                })
            })
            .collect();
    }
    out
}

pub fn applicable(domain: &Domain, instance: &Instance, ga: &GroundAction, st: &State) -> bool {
    let atoms = GroundAtoms::new(domain, instance.num_objects);
    applicable_in(&atoms, domain, ga, st)
}

pub(crate) fn applicable_in(
    atoms: &GroundAtoms,
    domain: &Domain,
    ga: &GroundAction,
    st: &State,
) -> bool {
    let s = &domain.schemas[ga.schema];
    s.pre_pos.iter().all(|a| st.get(atoms.ground(a, &ga.binding)))
        && s.pre_neg.iter().all(|a| !st.get(atoms.ground(a, &ga.binding)))
}

pub fn successor(
    domain: &Domain,
    instance: &Instance,
    ga: &GroundAction,
    st: &State,
) -> Result<State, StripsError> {
    let atoms = GroundAtoms::new(domain, instance.num_objects);
    if !applicable_in(&atoms, domain, ga, st) {
        return Err(StripsError::NotApplicable(ga.to_string()));
    }
    Ok(apply(&atoms, domain, ga, st))
}

pub(crate) fn apply(atoms: &GroundAtoms, domain: &Domain, ga: &GroundAction, st: &State) -> State {
    let s = &domain.schemas[ga.schema];
    let mut next = st.clone();
    for a in &s.eff_neg {
        next.set(atoms.ground(a, &ga.binding), false);
    }
    for a in &s.eff_pos {
        next.set(atoms.ground(a, &ga.binding), true);
    }
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strips::{ActionSchema, Predicate};

    fn preds(arities: &[usize]) -> Vec<Predicate> {
        arities
            .iter()
            .enumerate()
            .map(|(i, &arity)| Predicate {
                name: format!("p{i}"),
                arity,
            })
            .collect()
    }

    #[test]
    fn universe_sizes() {
        let count = |ar: &[usize], n: usize| ar.iter().map(|&a| n.pow(a as u32)).sum::<usize>();
        let d = Domain {
            predicates: preds(&[1]),
            ..Default::default()
        };
        let inst = Instance {
            num_objects: 3,
            ..Default::default()
        };
        assert_eq!(
            ground_atoms(&d, &inst),
            vec![(0, vec![1]), (0, vec![2]), (0, vec![3])]
        );
        for (ar, n, expected) in [(&[1, 1][..], 4, 8), (&[1, 2][..], 4, 20)] {
            assert_eq!(count(ar, n), expected);
            assert_eq!(GroundAtoms::from_arities(ar.iter().copied(), n).len(), expected);
        }
    }

    #[test]
    fn index_and_atom_are_inverse() {
        let ga = GroundAtoms::from_arities([2, 0, 1], 3);
        assert_eq!(ga.len(), 9 + 1 + 3);
        for k in 0..ga.len() {
            let (p, objs) = ga.atom(k);
            assert_eq!(ga.index(p, &objs), k);
        }
        assert_eq!(ga.atom(9), (1, vec![]));
    }

    #[test]
    fn nullary_schema_has_one_grounding() {
        let d = Domain {
            predicates: preds(&[0]),
            schemas: vec![ActionSchema::new("a", Some("l"), 0)],
            ..Default::default()
        };
        let inst = Instance {
            num_objects: 2,
            ..Default::default()
        };
        assert_eq!(
            ground_actions(&d, &inst),
            vec![GroundAction {
                schema: 0,
                binding: vec![]
            }]
        );
    }

    #[test]
    fn empty_binary_extension_filters_everything() {
        let d = Domain {
            predicates: preds(&[1]),
            schemas: vec![ActionSchema::new("a", Some("l"), 2).binary(0, 0, 1)],
            static_binary: vec!["b0".into()],
            ..Default::default()
        };
        let inst = Instance {
            num_objects: 3,
            ..Default::default()
        };
        assert!(ground_actions(&d, &inst).is_empty());
    }

    #[test]
    fn empty_preconditions_always_applicable() {
        let d = Domain {
            predicates: preds(&[0]),
            schemas: vec![ActionSchema::new("a", Some("l"), 0)],
            ..Default::default()
        };
        let inst = Instance {
            num_objects: 1,
            ..Default::default()
        };
        let ga = &ground_actions(&d, &inst)[0];
        for bits in [vec![], vec![0]] {
            let st = State::from_true(1, bits);
            assert!(applicable(&d, &inst, ga, &st));
            assert_eq!(successor(&d, &inst, ga, &st).unwrap(), st);
        }
    }
}
