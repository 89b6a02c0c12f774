//! Checked-in fuzz seeds stay valid inputs.

use std::fs;
use std::path::PathBuf;

use strips_learn::cnf::{parse_dimacs, parse_model};
use strips_learn::graph::parse_graph;
use strips_learn::hyperspace::Bounds;
use strips_learn::strips::text::parse_problem;

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            let bytes = fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

fn text(b: &[u8]) -> &str {
    std::str::from_utf8(b).unwrap()
}

#[test]
fn seeds_parse() {
    for (p, b) in seeds("parse_graph") {
        parse_graph(text(&b)).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
    for (p, b) in seeds("parse_problem") {
        parse_problem(text(&b)).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
    for (p, b) in seeds("parse_dimacs") {
        parse_dimacs(text(&b)).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
    for (p, b) in seeds("parse_model") {
        parse_model(text(&b[1..]), b[0] as usize).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
    for (p, b) in seeds("bounds_config") {
        Bounds::default()
            .apply_config(text(&b))
            .unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
}
