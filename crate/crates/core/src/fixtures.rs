//! Ground-truth models of the benchmark domains and a generator of small
//! random problems. Graphs are produced by expanding the models.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::LabeledGraph;
use crate::strips::{
    encoding_class_violation, expand, ActionSchema, AtomSchema, Domain, Expansion, GroundAtoms,
    Instance, Predicate, State, StripsError,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FixtureError {
    #[error("unknown fixture `{0}`")]
    Unknown(String),
    #[error("{name}: parameter {param} = {value} outside {range}")]
    OutOfRange {
        name: &'static str,
        param: &'static str,
        value: usize,
        range: &'static str,
    },
    #[error("{name} expects {expected} parameters, got {got}")]
    Arity {
        name: &'static str,
        expected: usize,
        got: usize,
    },
    #[error(transparent)]
    Strips(#[from] StripsError),
}

/// A ground-truth problem and its state graph.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub domain: Domain,
    pub instance: Instance,
    pub expansion: Expansion,
}

impl Fixture {
    fn build(name: String, domain: Domain, instance: Instance) -> Result<Self, FixtureError> {
        domain.validate()?;
        instance.validate(&domain)?;
        let init = instance.init.clone().expect("fixtures have an initial state");
        let mut expansion = expand(&domain, &instance, &init, crate::strips::DEFAULT_STATE_CAP)?;
        expansion.graph = expansion.graph.renamed(name);
        Ok(Fixture {
            domain,
            instance,
            expansion,
        })
    }

    pub fn graph(&self) -> &LabeledGraph {
        &self.expansion.graph
    }
}

fn check(name: &'static str, param: &'static str, value: usize, lo: usize, hi: usize, range: &'static str) -> Result<(), FixtureError> {
    if (lo..=hi).contains(&value) {
        Ok(())
    } else {
        Err(FixtureError::OutOfRange {
            name,
            param,
            value,
            range,
        })
    }
}

fn pred(name: &str, arity: usize) -> Predicate {
    Predicate {
        name: name.into(),
        arity,
    }
}

fn at(p: usize, args: &[usize]) -> AtomSchema {
    AtomSchema::new(p, args.to_vec())
}

/// Dispatches on a fixture name with positional parameters.
pub fn gen_fixture(name: &str, params: &[usize]) -> Result<Fixture, FixtureError> {
    let want = |n: &'static str, k: usize| {
        if params.len() == k {
            Ok(())
        } else {
            Err(FixtureError::Arity {
                name: n,
                expected: k,
                got: params.len(),
            })
        }
    };
    match name {
        "hanoi" => {
            want("hanoi", 2)?;
            hanoi(params[0], params[1])
        }
        "gripper" => {
            want("gripper", 3)?;
            gripper(params[0], params[1], params[2])
        }
        "blocks3" => {
            want("blocks3", 1)?;
            blocks3(params[0])
        }
        "grid" => {
            want("grid", 3)?;
            grid(params[0], params[1], params[2])
        }
        other => Err(FixtureError::Unknown(other.into())),
    }
}

/// Towers of Hanoi. Objects: disks `1..=disks` (1 smallest), then pegs. All
/// disks start on the first peg. One label, `Move`.
pub fn hanoi(disks: usize, pegs: usize) -> Result<Fixture, FixtureError> {
    check("hanoi", "disks", disks, 1, 8, "1..=8")?;
    check("hanoi", "pegs", pegs, 3, 5, "3..=5")?;
    let (clear, on) = (0, 1);
    let move_ = ActionSchema::new("move", Some("Move"), 3)
        .pre(true, at(clear, &[0]))
        .pre(true, at(on, &[0, 1]))
        .pre(true, at(clear, &[2]))
        .eff(false, at(on, &[0, 1]))
        .eff(true, at(on, &[0, 2]))
        .eff(true, at(clear, &[1]))
        .eff(false, at(clear, &[2]))
        .binary(0, 0, 1)
        .binary(0, 0, 2)
        .binary(1, 1, 2);
    let domain = Domain {
        predicates: vec![pred("clear", 1), pred("on", 2)],
        schemas: vec![move_],
        static_unary: vec![],
        static_binary: vec!["smaller".into(), "distinct".into()],
    };
    let n = disks + pegs;
    let atoms = GroundAtoms::new(&domain, n);
    let mut init = State::new(atoms.len());
    for d in 1..=disks {
        let below = if d < disks { d + 1 } else { disks + 1 };
        init.set(atoms.index(on, &[d, below]), true);
    }
    init.set(atoms.index(clear, &[1]), true);
    for p in disks + 2..=n {
        init.set(atoms.index(clear, &[p]), true);
    }
    let mut instance = Instance {
        num_objects: n,
        init: Some(init),
        ..Default::default()
    };
    for d in 1..=disks {
        for x in d + 1..=n {
            instance.static_binary.insert((0, d, x));
        }
    }
    for x in 1..=n {
        for y in 1..=n {
            if x != y {
                instance.static_binary.insert((1, x, y));
            }
        }
    }
    Fixture::build(format!("hanoi_{disks}x{pegs}"), domain, instance)
}

/// Gripper. Objects: rooms, balls, grippers in that order. The robot starts
/// in the first room with every ball there. Labels `move`, `pick`, `drop`.
pub fn gripper(rooms: usize, balls: usize, grippers: usize) -> Result<Fixture, FixtureError> {
    check("gripper", "rooms", rooms, 2, 4, "2..=4")?;
    check("gripper", "balls", balls, 1, 6, "1..=6")?;
    check("gripper", "grippers", grippers, 1, 3, "1..=3")?;
    let (robby, at_, free, carry) = (0, 1, 2, 3);
    let (room, ball, grip) = (0, 1, 2);
    let mv = ActionSchema::new("move", Some("move"), 2)
        .pre(true, at(robby, &[0]))
        .pre(false, at(robby, &[1]))
        .eff(false, at(robby, &[0]))
        .eff(true, at(robby, &[1]))
        .unary(room, 0)
        .unary(room, 1)
        .binary(0, 0, 1);
    let pick = ActionSchema::new("pick", Some("pick"), 3)
        .pre(true, at(at_, &[0, 1]))
        .pre(true, at(robby, &[1]))
        .pre(true, at(free, &[2]))
        .eff(false, at(at_, &[0, 1]))
        .eff(false, at(free, &[2]))
        .eff(true, at(carry, &[0, 2]))
        .unary(ball, 0)
        .unary(room, 1)
        .unary(grip, 2);
    let drop = ActionSchema::new("drop", Some("drop"), 3)
        .pre(true, at(carry, &[0, 2]))
        .pre(true, at(robby, &[1]))
        .eff(true, at(at_, &[0, 1]))
        .eff(true, at(free, &[2]))
        .eff(false, at(carry, &[0, 2]))
        .unary(ball, 0)
        .unary(room, 1)
        .unary(grip, 2);
    let domain = Domain {
        predicates: vec![pred("at-robby", 1), pred("at", 2), pred("free", 1), pred("carry", 2)],
        schemas: vec![mv, pick, drop],
        static_unary: vec!["room".into(), "ball".into(), "gripper".into()],
        static_binary: vec!["distinct".into()],
    };
    let n = rooms + balls + grippers;
    let atoms = GroundAtoms::new(&domain, n);
    let mut init = State::new(atoms.len());
    init.set(atoms.index(robby, &[1]), true);
    let mut instance = Instance {
        num_objects: n,
        ..Default::default()
    };
    for r in 1..=rooms {
        instance.static_unary.insert((room, r));
        for r2 in (1..=rooms).filter(|&r2| r2 != r) {
            instance.static_binary.insert((0, r, r2));
        }
    }
    for b in rooms + 1..=rooms + balls {
        instance.static_unary.insert((ball, b));
        init.set(atoms.index(at_, &[b, 1]), true);
    }
    for g in rooms + balls + 1..=n {
        instance.static_unary.insert((grip, g));
        init.set(atoms.index(free, &[g]), true);
    }
    instance.init = Some(init);
    Fixture::build(format!("gripper_{rooms}_{balls}_{grippers}"), domain, instance)
}

/// Blocksworld with three labels: moves to the table, moves from the table,
/// and moves between blocks. All blocks start on the table.
pub fn blocks3(blocks: usize) -> Result<Fixture, FixtureError> {
    check("blocks3", "blocks", blocks, 1, 6, "1..=6")?;
    let (on, ontable, clear) = (0, 1, 2);
    let to_table = ActionSchema::new("move-to-table", Some("MoveToTable"), 2)
        .pre(true, at(clear, &[0]))
        .pre(true, at(on, &[0, 1]))
        .eff(false, at(on, &[0, 1]))
        .eff(true, at(ontable, &[0]))
        .eff(true, at(clear, &[1]))
        .binary(0, 0, 1);
    let from_table = ActionSchema::new("move-from-table", Some("MoveFromTable"), 2)
        .pre(true, at(clear, &[0]))
        .pre(true, at(ontable, &[0]))
        .pre(true, at(clear, &[1]))
        .eff(false, at(ontable, &[0]))
        .eff(true, at(on, &[0, 1]))
        .eff(false, at(clear, &[1]))
        .binary(0, 0, 1);
    let between = ActionSchema::new("move", Some("Move"), 3)
        .pre(true, at(clear, &[0]))
        .pre(true, at(on, &[0, 1]))
        .pre(true, at(clear, &[2]))
        .eff(false, at(on, &[0, 1]))
        .eff(true, at(on, &[0, 2]))
        .eff(true, at(clear, &[1]))
        .eff(false, at(clear, &[2]))
        .binary(0, 0, 1)
        .binary(0, 0, 2)
        .binary(0, 1, 2);
    let domain = Domain {
        predicates: vec![pred("on", 2), pred("ontable", 1), pred("clear", 1)],
        schemas: vec![to_table, from_table, between],
        static_unary: vec![],
        static_binary: vec!["distinct".into()],
    };
    let atoms = GroundAtoms::new(&domain, blocks);
    let mut init = State::new(atoms.len());
    let mut instance = Instance {
        num_objects: blocks,
        ..Default::default()
    };
    for b in 1..=blocks {
        init.set(atoms.index(ontable, &[b]), true);
        init.set(atoms.index(clear, &[b]), true);
        for c in 1..=blocks {
            if b != c {
                instance.static_binary.insert((0, b, c));
            }
        }
    }
    instance.init = Some(init);
    Fixture::build(format!("blocks3_{blocks}"), domain, instance)
}

/// A `width` x `height` grid walked by one agent starting in a corner.
/// Objects: x coordinates `1..=width`, then y coordinates. `labels` selects
/// the action vocabulary: 4 (`Up`, `Right`, `Down`, `Left`), 2 (`Horiz`,
/// `Vert`) or 1 (`Move`).
pub fn grid(width: usize, height: usize, labels: usize) -> Result<Fixture, FixtureError> {
    check("grid", "width", width, 1, 12, "1..=12")?;
    check("grid", "height", height, 1, 12, "1..=12")?;
    if ![1, 2, 4].contains(&labels) {
        return Err(FixtureError::OutOfRange {
            name: "grid",
            param: "labels",
            value: labels,
            range: "{1, 2, 4}",
        });
    }
    let (atx, aty) = (0, 1);
    let step = |name: &str, label: &str, p: usize, b: usize| {
        ActionSchema::new(name, Some(label), 2)
            .pre(true, at(p, &[0]))
            .pre(false, at(p, &[1]))
            .eff(false, at(p, &[0]))
            .eff(true, at(p, &[1]))
            .binary(b, 0, 1)
    };
    // 4 labels: successor relations per axis and direction; otherwise one
    // symmetric adjacency per axis
    let (schemas, statics) = match labels {
        4 => (
            vec![
                step("up", "Up", aty, 0),
                step("right", "Right", atx, 1),
                step("down", "Down", aty, 2),
                step("left", "Left", atx, 3),
            ],
            vec!["succ-y", "succ-x", "pred-y", "pred-x"],
        ),
        2 => (
            vec![step("horiz", "Horiz", atx, 0), step("vert", "Vert", aty, 1)],
            vec!["adj-x", "adj-y"],
        ),
        _ => (
            vec![step("move-x", "Move", atx, 0), step("move-y", "Move", aty, 1)],
            vec!["adj-x", "adj-y"],
        ),
    };
    let domain = Domain {
        predicates: vec![pred("at-x", 1), pred("at-y", 1)],
        schemas,
        static_unary: vec![],
        static_binary: statics.into_iter().map(String::from).collect(),
    };
    let n = width + height;
    let atoms = GroundAtoms::new(&domain, n);
    let init = State::from_true(atoms.len(), [atoms.index(atx, &[1]), atoms.index(aty, &[width + 1])]);
    let mut instance = Instance {
        num_objects: n,
        init: Some(init),
        ..Default::default()
    };
    let xs: Vec<(usize, usize)> = (1..width).map(|x| (x, x + 1)).collect();
    let ys: Vec<(usize, usize)> = (1..height).map(|y| (width + y, width + y + 1)).collect();
    let mut add = |b: usize, pairs: &[(usize, usize)], fwd: bool, back: bool| {
        for &(a, c) in pairs {
            if fwd {
                instance.static_binary.insert((b, a, c));
            }
            if back {
                instance.static_binary.insert((b, c, a));
            }
        }
    };
    if labels == 4 {
        add(0, &ys, true, false);
        add(1, &xs, true, false);
        add(2, &ys, false, true);
        add(3, &xs, false, true);
    } else {
        add(0, &xs, true, true);
        add(1, &ys, true, true);
    }
    Fixture::build(format!("grid_{width}x{height}_{labels}"), domain, instance)
}

/// Largest state space accepted by [`random_tiny`].
pub const TINY_MAX_STATES: usize = 8;

/// A random problem whose expansion has between 3 and [`TINY_MAX_STATES`]
/// states, within the class of instances the encoding
/// can represent. Rejection sampling; deterministic in `seed`.
pub fn random_tiny(seed: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        if let Some(f) = try_tiny(&mut rng) {
            return f;
        }
    }
}

fn try_tiny(rng: &mut ChaCha8Rng) -> Option<Fixture> {
    let np = rng.gen_range(1..=2);
    let predicates: Vec<Predicate> = (0..np)
        .map(|p| pred(&format!("q{p}"), if rng.gen_bool(0.15) { 2 } else { rng.gen_range(0..=1) }))
        .collect();
    let ns = rng.gen_range(1..=2);
    let labels = ["x", "y"];
    let with_unary = rng.gen_bool(0.3);
    let with_binary = rng.gen_bool(0.2);
    let mut schemas = Vec::new();
    for a in 0..ns {
        let arity = rng.gen_range(0..=2);
        let mut s = ActionSchema::new(format!("s{a}"), Some(labels[rng.gen_range(0..2)]), arity);
        for _ in 0..rng.gen_range(1..=3) {
            let p = rng.gen_range(0..np);
            if predicates[p].arity > 0 && arity == 0 {
                continue;
            }
            let args: Vec<usize> = (0..predicates[p].arity).map(|_| rng.gen_range(0..arity)).collect();
            let atom = at(p, &args);
            if s.used_atoms().contains(&atom) {
                continue;
            }
            s = match rng.gen_range(0..6) {
                0 => s.pre(true, atom.clone()).eff(false, atom),
                1 => s.pre(false, atom.clone()).eff(true, atom),
                2 => s.pre(true, atom),
                3 => s.pre(false, atom),
                4 => s.eff(true, atom),
                _ => s.eff(false, atom),
            };
        }
        if with_unary && arity > 0 {
            s = s.unary(0, 0);
        }
        if with_binary && arity == 2 {
            s = s.binary(0, 0, 1);
        }
        schemas.push(s);
    }
    let domain = Domain {
        predicates,
        schemas,
        static_unary: if with_unary { vec!["r0".into()] } else { vec![] },
        static_binary: if with_binary { vec!["t0".into()] } else { vec![] },
    };
    domain.validate().ok()?;
    let n = rng.gen_range(1..=3);
    let k = GroundAtoms::new(&domain, n).len();
    if k > 9 {
        return None;
    }
    let mut instance = Instance {
        num_objects: n,
        ..Default::default()
    };
    let objs: Vec<usize> = (1..=n).collect();
    if with_unary {
        for &o in &objs {
            if rng.gen_bool(0.6) {
                instance.static_unary.insert((0, o));
            }
        }
    }
    if with_binary {
        for &o in &objs {
            for &o2 in &objs {
                if rng.gen_bool(0.5) {
                    instance.static_binary.insert((0, o, o2));
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.shuffle(rng);
    let init = State::from_true(k, order.into_iter().filter(|_| rng.gen_bool(0.5)));
    instance.init = Some(init.clone());
    let ex = expand(&domain, &instance, &init, TINY_MAX_STATES).ok()?;
    if ex.states.len() < 3 || encoding_class_violation(&domain, &instance, &ex).is_some() {
        return None;
    }
    let mut f = Fixture {
        domain,
        instance,
        expansion: ex,
    };
    f.expansion.graph = f.expansion.graph.renamed("tiny");
    Some(f)
}
