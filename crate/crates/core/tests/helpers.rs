//! Cardinality and lexicographic helpers against brute-force enumeration.
//! Auxiliary variables are projected away: an assignment to the original
//! variables counts when some auxiliary extension satisfies every clause.

use proptest::prelude::*;
use strips_learn::cnf::{Cnf, Family, Lit, Tag};

const MAX_ORIGINAL: usize = 12;

fn fresh(n: usize) -> (Cnf, Vec<Lit>) {
    let mut c = Cnf::new();
    let lits = (0..n)
        .map(|i| c.vars.fresh(Tag::new(Family::Use1, &[i])).unwrap() as Lit)
        .collect();
    (c, lits)
}

fn holds(asg: &[Option<bool>], l: Lit) -> Option<bool> {
    asg[l.unsigned_abs() as usize - 1].map(|b| b == (l > 0))
}

/// Depth-first search over auxiliaries, pruning on falsified clauses.
fn extends(cnf: &Cnf, asg: &mut Vec<Option<bool>>, next: usize) -> bool {
    let falsified = cnf
        .clauses
        .iter()
        .any(|cl| cl.iter().all(|&l| holds(asg, l) == Some(false)));
    if falsified {
        return false;
    }
    if next == asg.len() {
        return true;
    }
    for b in [false, true] {
        asg[next] = Some(b);
        if extends(cnf, asg, next + 1) {
            asg[next] = None;
            return true;
        }
    }
    asg[next] = None;
    false
}

/// Checks the projection pointwise against `pred` and returns the count.
fn projected_count(cnf: &Cnf, original: usize, pred: impl Fn(&[bool]) -> bool) -> usize {
    assert!(original <= MAX_ORIGINAL);
    let mut count = 0;
    for bits in 0u32..(1 << original) {
        let x: Vec<bool> = (0..original).map(|i| bits >> i & 1 == 1).collect();
        let mut asg: Vec<Option<bool>> = vec![None; cnf.num_vars()];
        for (slot, &b) in asg.iter_mut().zip(&x) {
            *slot = Some(b);
        }
        let sat = extends(cnf, &mut asg, original);
        assert_eq!(sat, pred(&x), "assignment {x:?}");
        count += sat as usize;
    }
    count
}

fn value(x: &[bool], l: Lit) -> bool {
    x[l.unsigned_abs() as usize - 1] == (l > 0)
}

/// Vectors compared as binary numbers, first element most significant.
fn number(x: &[bool], v: &[Lit]) -> u32 {
    v.iter().fold(0, |acc, &l| acc << 1 | value(x, l) as u32)
}

fn binom(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[test]
fn cardinality_exhaustive() {
    for n in 0..=MAX_ORIGINAL {
        let (mut c, lits) = fresh(n);
        c.at_most_one(&lits);
        let amo = projected_count(&c, n, |x| x.iter().filter(|&&b| b).count() <= 1);
        assert_eq!(amo, n + 1, "amo {n}");

        let (mut c, lits) = fresh(n);
        c.exactly_one(&lits);
        let eo = projected_count(&c, n, |x| x.iter().filter(|&&b| b).count() == 1);
        assert_eq!(eo, n, "eo {n}");
    }
}

#[test]
fn lex_exhaustive() {
    for k in 0..=MAX_ORIGINAL / 2 {
        for strict in [false, true] {
            let (mut c, lits) = fresh(2 * k);
            let (a, b) = lits.split_at(k);
            if strict {
                c.strict_lex_less(a, b).unwrap();
            } else {
                c.lex_leq(a, b).unwrap();
            }
            let got = projected_count(&c, 2 * k, |x| {
                let (na, nb) = (number(x, a), number(x, b));
                if strict { na < nb } else { na <= nb }
            });
            let pairs = 1u64 << k;
            let want = binom(pairs, 2) + if strict { 0 } else { pairs };
            assert_eq!(got as u64, want, "k {k} strict {strict}");
        }
    }
}

#[test]
fn lex_chain_exhaustive() {
    for m in 2..=4 {
        for k in 1..=MAX_ORIGINAL / m {
            let (mut c, lits) = fresh(m * k);
            let vecs: Vec<Vec<Lit>> = lits.chunks(k).map(<[Lit]>::to_vec).collect();
            c.strict_lex_chain(&vecs).unwrap();
            let got = projected_count(&c, m * k, |x| {
                vecs.windows(2).all(|w| number(x, &w[0]) < number(x, &w[1]))
            });
            assert_eq!(got as u64, binom(1 << k, m as u64), "{m} vectors of {k} bits");
        }
    }
}

#[test]
fn small_cases() {
    let (mut c, l) = fresh(3);
    c.exactly_one(&l);
    assert_eq!(projected_count(&c, 3, |x| x.iter().filter(|&&b| b).count() == 1), 3);

    let (mut c, l) = fresh(4);
    c.strict_lex_less(&l[..2], &l[2..]).unwrap();
    assert_eq!(projected_count(&c, 4, |x| number(x, &l[..2]) < number(x, &l[2..])), 6);
}

fn signed(lits: &[Lit], neg: &[bool]) -> Vec<Lit> {
    lits.iter().zip(neg).map(|(&l, &n)| if n { -l } else { l }).collect()
}

proptest! {
    #[test]
    fn mixed_polarity_amo(neg in prop::collection::vec(any::<bool>(), 0..=9)) {
        let n = neg.len();
        let (mut c, lits) = fresh(n);
        let lits = signed(&lits, &neg);
        c.at_most_one(&lits);
        projected_count(&c, n, |x| lits.iter().filter(|&&l| value(x, l)).count() <= 1);
    }

    #[test]
    fn mixed_polarity_lex(neg in prop::collection::vec(any::<bool>(), 1..=5), strict in any::<bool>()) {
        let k = neg.len();
        let (mut c, lits) = fresh(2 * k);
        let a = signed(&lits[..k], &neg);
        let b = signed(&lits[k..], &neg);
        if strict {
            c.strict_lex_less(&a, &b).unwrap();
        } else {
            c.lex_leq(&a, &b).unwrap();
        }
        projected_count(&c, 2 * k, |x| {
            let (na, nb) = (number(x, &a), number(x, &b));
            if strict { na < nb } else { na <= nb }
        });
    }
}
