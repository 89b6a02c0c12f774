//! Hyperparameter bounds and the exact parametrizations they admit.

use std::fmt;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::strips::{Domain, Instance};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BoundsError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown bounds key `{0}`")]
    UnknownKey(String),
    #[error("bounds field {field}: min {min} > max {max}")]
    Inverted {
        field: &'static str,
        min: usize,
        max: usize,
    },
}

/// Inclusive ranges for every component of an [`Alpha`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub min_schemas: usize,
    pub max_schemas: usize,
    pub min_schema_arity: usize,
    pub max_schema_arity: usize,
    pub min_predicates: usize,
    pub max_predicates: usize,
    pub min_pred_arity: usize,
    pub max_pred_arity: usize,
    pub min_atom_schemas: usize,
    pub max_atom_schemas: usize,
    pub min_static_unary: usize,
    pub max_static_unary: usize,
    pub min_static_binary: usize,
    pub max_static_binary: usize,
    /// Cap on unary + binary statics together.
    pub max_statics: usize,
    pub min_objects: usize,
    pub max_objects: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds::for_labels(1)
    }
}

/// Keys accepted by [`Bounds::apply_config`], in field order.
pub const BOUNDS_KEYS: [&str; 17] = [
    "min_schemas",
    "max_schemas",
    "min_schema_arity",
    "max_schema_arity",
    "min_predicates",
    "max_predicates",
    "min_pred_arity",
    "max_pred_arity",
    "min_atom_schemas",
    "max_atom_schemas",
    "min_static_unary",
    "max_static_unary",
    "min_static_binary",
    "max_static_binary",
    "max_statics",
    "min_objects",
    "max_objects",
];

impl Bounds {
    /// The default search space for a graph with `num_labels` labels.
    pub fn for_labels(num_labels: usize) -> Self {
        Bounds {
            min_schemas: 1,
            max_schemas: num_labels.max(1),
            min_schema_arity: 1,
            max_schema_arity: 3,
            min_predicates: 1,
            max_predicates: 5,
            min_pred_arity: 1,
            max_pred_arity: 2,
            min_atom_schemas: 1,
            max_atom_schemas: 6,
            min_static_unary: 0,
            max_static_unary: 5,
            min_static_binary: 0,
            max_static_binary: 5,
            max_statics: 5,
            min_objects: 1,
            max_objects: 7,
        }
    }

    fn field_mut(&mut self, key: &str) -> Option<&mut usize> {
        Some(match key {
            "min_schemas" => &mut self.min_schemas,
            "max_schemas" => &mut self.max_schemas,
            "min_schema_arity" => &mut self.min_schema_arity,
            "max_schema_arity" => &mut self.max_schema_arity,
            "min_predicates" => &mut self.min_predicates,
            "max_predicates" => &mut self.max_predicates,
            "min_pred_arity" => &mut self.min_pred_arity,
            "max_pred_arity" => &mut self.max_pred_arity,
            "min_atom_schemas" => &mut self.min_atom_schemas,
            "max_atom_schemas" => &mut self.max_atom_schemas,
            "min_static_unary" => &mut self.min_static_unary,
            "max_static_unary" => &mut self.max_static_unary,
            "min_static_binary" => &mut self.min_static_binary,
            "max_static_binary" => &mut self.max_static_binary,
            "max_statics" => &mut self.max_statics,
            "min_objects" => &mut self.min_objects,
            "max_objects" => &mut self.max_objects,
            _ => return None,
        })
    }

    /// Sets one field by name.
    pub fn set(&mut self, key: &str, value: usize) -> Result<(), BoundsError> {
        let f = self
            .field_mut(key)
            .ok_or_else(|| BoundsError::UnknownKey(key.to_string()))?;
        *f = value;
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`. Blank lines and `#`
    /// comments are skipped; keys outside [`BOUNDS_KEYS`] are rejected.
    pub fn apply_config(&mut self, text: &str) -> Result<(), BoundsError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| BoundsError::Syntax {
                line: i + 1,
                msg: "expected key = value".into(),
            })?;
            let value: usize = v.trim().parse().map_err(|_| BoundsError::Syntax {
                line: i + 1,
                msg: format!("bad number {:?}", v.trim()),
            })?;
            self.set(k.trim(), value)?;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<(), BoundsError> {
        let pairs = [
            ("schemas", self.min_schemas, self.max_schemas),
            ("schema_arity", self.min_schema_arity, self.max_schema_arity),
            ("predicates", self.min_predicates, self.max_predicates),
            ("pred_arity", self.min_pred_arity, self.max_pred_arity),
            ("atom_schemas", self.min_atom_schemas, self.max_atom_schemas),
            ("static_unary", self.min_static_unary, self.max_static_unary),
            ("static_binary", self.min_static_binary, self.max_static_binary),
            ("objects", self.min_objects, self.max_objects),
        ];
        for (field, min, max) in pairs {
            if min > max {
                return Err(BoundsError::Inverted { field, min, max });
            }
        }
        Ok(())
    }
}

/// One exact parametrization: schema and predicate arities (non-increasing),
/// the number of atom schemas, static predicate counts and one object count
/// per input graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Alpha {
    pub schema_arities: Vec<usize>,
    pub pred_arities: Vec<usize>,
    pub num_atom_schemas: usize,
    pub num_static_unary: usize,
    pub num_static_binary: usize,
    pub objects: Vec<usize>,
}

impl Alpha {
    pub fn num_schemas(&self) -> usize {
        self.schema_arities.len()
    }

    pub fn num_predicates(&self) -> usize {
        self.pred_arities.len()
    }

    pub fn max_schema_arity(&self) -> usize {
        self.schema_arities.iter().copied().max().unwrap_or(0)
    }

    pub fn max_pred_arity(&self) -> usize {
        self.pred_arities.iter().copied().max().unwrap_or(0)
    }

    /// Number of ground atoms in a layer with `n` objects.
    pub fn num_ground_atoms(&self, n: usize) -> usize {
        self.pred_arities.iter().map(|&a| n.pow(a as u32)).sum()
    }

    /// Complexity used to order the enumeration: counts plus every arity,
    /// atom, static and object component.
    pub fn size_key(&self) -> usize {
        self.num_schemas()
            + self.schema_arities.iter().sum::<usize>()
            + self.num_predicates()
            + self.pred_arities.iter().sum::<usize>()
            + self.num_atom_schemas
            + self.num_static_unary
            + self.num_static_binary
            + self.objects.iter().sum::<usize>()
    }

    /// Same domain part, different object counts.
    pub fn with_objects(&self, objects: Vec<usize>) -> Alpha {
        Alpha {
            objects,
            ..self.clone()
        }
    }

    pub fn is_canonical(&self) -> bool {
        let desc = |v: &[usize]| v.windows(2).all(|w| w[0] >= w[1]);
        desc(&self.schema_arities) && desc(&self.pred_arities)
    }

    pub fn within(&self, b: &Bounds) -> bool {
        let r = |x: usize, lo: usize, hi: usize| (lo..=hi).contains(&x);
        r(self.num_schemas(), b.min_schemas, b.max_schemas)
            && self
                .schema_arities
                .iter()
                .all(|&a| r(a, b.min_schema_arity, b.max_schema_arity))
            && r(self.num_predicates(), b.min_predicates, b.max_predicates)
            && self
                .pred_arities
                .iter()
                .all(|&a| r(a, b.min_pred_arity, b.max_pred_arity))
            && r(self.num_atom_schemas, b.min_atom_schemas, b.max_atom_schemas)
            && r(self.num_static_unary, b.min_static_unary, b.max_static_unary)
            && r(self.num_static_binary, b.min_static_binary, b.max_static_binary)
            && self.num_static_unary + self.num_static_binary <= b.max_statics
            && self
                .objects
                .iter()
                .all(|&n| r(n, b.min_objects, b.max_objects))
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| {
            v.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(
            f,
            "schemas({}) preds({}) atoms={} unary={} binary={} objects({})",
            join(&self.schema_arities),
            join(&self.pred_arities),
            self.num_atom_schemas,
            self.num_static_unary,
            self.num_static_binary,
            join(&self.objects)
        )
    }
}

/// Non-increasing tuples of length `len` with entries in `lo..=hi`.
fn multisets(len: usize, lo: usize, hi: usize) -> Vec<Vec<usize>> {
    fn rec(len: usize, lo: usize, cap: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for a in (lo..=cap).rev() {
            cur.push(a);
            rec(len, lo, a, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if lo <= hi {
        rec(len, lo, hi, &mut Vec::new(), &mut out);
    }
    out
}

/// Every tuple of length `len` with entries in `lo..=hi`.
fn products(len: usize, lo: usize, hi: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (lo..=hi).map(move |x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

/// Every canonical parametrization inside `bounds` for `num_layers` input
/// graphs, ascending by [`Alpha::size_key`] with ties broken by the derived
/// ordering.
pub fn enumerate_alphas(bounds: &Bounds, num_layers: usize) -> Vec<Alpha> {
    let schema_tuples: Vec<Vec<usize>> = (bounds.min_schemas..=bounds.max_schemas)
        .flat_map(|n| multisets(n, bounds.min_schema_arity, bounds.max_schema_arity))
        .collect();
    let pred_tuples: Vec<Vec<usize>> = (bounds.min_predicates..=bounds.max_predicates)
        .flat_map(|n| multisets(n, bounds.min_pred_arity, bounds.max_pred_arity))
        .collect();
    let statics: Vec<(usize, usize)> = (bounds.min_static_unary..=bounds.max_static_unary)
        .flat_map(|u| (bounds.min_static_binary..=bounds.max_static_binary).map(move |b| (u, b)))
        .filter(|&(u, b)| u + b <= bounds.max_statics)
        .collect();
    let objects = products(num_layers, bounds.min_objects, bounds.max_objects);

    let mut out = Vec::new();
    for s in &schema_tuples {
        for p in &pred_tuples {
            for m in bounds.min_atom_schemas.max(1)..=bounds.max_atom_schemas {
                for &(u, b) in &statics {
                    for o in &objects {
                        out.push(Alpha {
                            schema_arities: s.clone(),
                            pred_arities: p.clone(),
                            num_atom_schemas: m,
                            num_static_unary: u,
                            num_static_binary: b,
                            objects: o.clone(),
                        });
                    }
                }
            }
        }
    }
    out.sort_by(|a, b| a.size_key().cmp(&b.size_key()).then_with(|| a.cmp(b)));
    out
}

/// A seeded subset of [`enumerate_alphas`] of size `round(fraction * total)`
/// (at least one when the space is nonempty), kept in enumeration order.
pub fn sample_alphas(bounds: &Bounds, num_layers: usize, fraction: f64, seed: u64) -> Vec<Alpha> {
    let all = enumerate_alphas(bounds, num_layers);
    sample_from(all, fraction, seed)
}

pub fn sample_from(all: Vec<Alpha>, fraction: f64, seed: u64) -> Vec<Alpha> {
    assert!(fraction > 0.0 && fraction <= 1.0, "fraction must be in (0, 1]");
    let total = all.len();
    if fraction >= 1.0 || total == 0 {
        return all;
    }
    let k = ((fraction * total as f64).round() as usize).clamp(1, total);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, total, k).into_vec();
    picked.sort_unstable();
    let mut keep = vec![false; total];
    for i in picked {
        keep[i] = true;
    }
    all.into_iter()
        .zip(keep)
        .filter_map(|(a, k)| k.then_some(a))
        .collect()
}

/// The parametrization determined by a domain and its instances.
pub fn alpha_of(domain: &Domain, instances: &[Instance]) -> Alpha {
    let mut schema_arities: Vec<usize> = domain.schemas.iter().map(|s| s.arity).collect();
    schema_arities.sort_unstable_by(|a, b| b.cmp(a));
    let mut pred_arities: Vec<usize> = domain.predicates.iter().map(|p| p.arity).collect();
    pred_arities.sort_unstable_by(|a, b| b.cmp(a));
    Alpha {
        schema_arities,
        pred_arities,
        num_atom_schemas: domain.atom_schemas().len(),
        num_static_unary: domain.num_static_unary(),
        num_static_binary: domain.num_static_binary(),
        objects: instances.iter().map(|i| i.num_objects).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn pinned() -> Bounds {
        Bounds {
            min_schemas: 1,
            max_schemas: 1,
            min_schema_arity: 2,
            max_schema_arity: 2,
            min_predicates: 2,
            max_predicates: 2,
            min_pred_arity: 1,
            max_pred_arity: 1,
            min_atom_schemas: 4,
            max_atom_schemas: 4,
            min_static_unary: 0,
            max_static_unary: 0,
            min_static_binary: 1,
            max_static_binary: 1,
            max_statics: 5,
            min_objects: 6,
            max_objects: 6,
        }
    }

    fn small() -> Bounds {
        Bounds {
            min_schema_arity: 0,
            max_schema_arity: 2,
            max_predicates: 1,
            min_pred_arity: 0,
            max_pred_arity: 1,
            max_atom_schemas: 2,
            max_static_unary: 0,
            max_static_binary: 0,
            min_objects: 2,
            max_objects: 3,
            ..Bounds::for_labels(1)
        }
    }

    #[test]
    fn pinned_bounds_give_one_alpha() {
        assert_eq!(enumerate_alphas(&pinned(), 1).len(), 1);
    }

    #[test]
    fn small_space_count_matches_nested_loops() {
        let b = small();
        let mut expected = 0;
        for _sa in 0..=2 {
            for _pa in 0..=1 {
                for _m in 1..=2 {
                    for _n in 2..=3 {
                        expected += 1;
                    }
                }
            }
        }
        assert_eq!(enumerate_alphas(&b, 1).len(), expected);
    }

    #[test]
    fn arity_tuples_are_multisets() {
        let b = Bounds {
            min_schemas: 2,
            max_schemas: 2,
            min_schema_arity: 0,
            max_schema_arity: 1,
            ..pinned()
        };
        let tuples: BTreeSet<Vec<usize>> = enumerate_alphas(&b, 1)
            .into_iter()
            .map(|a| a.schema_arities)
            .collect();
        // brute force over ordered pairs, then sort each
        let mut brute = BTreeSet::new();
        for x in 0..=1 {
            for y in 0..=1 {
                let mut v = vec![x, y];
                v.sort_unstable_by(|a, b| b.cmp(a));
                brute.insert(v);
            }
        }
        assert_eq!(tuples, brute);
        assert_eq!(tuples.len(), 3);
    }

    #[test]
    fn ordered_by_size_then_lexicographic() {
        let all = enumerate_alphas(&small(), 1);
        for w in all.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            assert!(a.size_key() < b.size_key() || (a.size_key() == b.size_key() && a < b));
        }
    }

    #[test]
    fn sampling_is_reproducible_and_sized() {
        let b = small();
        assert_eq!(sample_alphas(&b, 1, 1.0, 7), enumerate_alphas(&b, 1));
        let s1 = sample_alphas(&b, 1, 0.5, 42);
        let s2 = sample_alphas(&b, 1, 0.5, 42);
        assert_eq!(s1.len(), 12);
        assert_eq!(s1, s2);
        let all = enumerate_alphas(&b, 1);
        let mut pos = s1.iter().map(|a| all.iter().position(|x| x == a).unwrap());
        let mut last = pos.next().unwrap();
        for p in pos {
            assert!(p > last);
            last = p;
        }
    }

    #[test]
    fn config_overrides_and_rejects() {
        let mut b = Bounds::for_labels(2);
        b.apply_config("# grid\nmax_objects = 4\nmin_objects=3\n").unwrap();
        assert_eq!((b.min_objects, b.max_objects), (3, 4));
        assert_eq!(
            b.apply_config("nope = 1").unwrap_err(),
            BoundsError::UnknownKey("nope".into())
        );
        assert!(matches!(
            Bounds::for_labels(1).apply_config("min_objects = 9"),
            Err(BoundsError::Inverted { .. })
        ));
        assert!(matches!(
            b.apply_config("max_objects"),
            Err(BoundsError::Syntax { line: 1, .. })
        ));
    }

    #[test]
    fn statics_split_respects_combined_cap() {
        let b = Bounds {
            max_statics: 2,
            max_static_unary: 2,
            max_static_binary: 2,
            ..pinned()
        };
        let b = Bounds {
            min_static_binary: 0,
            ..b
        };
        let splits: BTreeSet<(usize, usize)> = enumerate_alphas(&b, 1)
            .into_iter()
            .map(|a| (a.num_static_unary, a.num_static_binary))
            .collect();
        assert_eq!(splits.len(), 6);
    }
}
