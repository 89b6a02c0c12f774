//! Minimal SAT-competition front end for CaDiCaL: reads a DIMACS file,
//! prints `s ...` and `v ...` lines, exits 10 (SAT), 20 (UNSAT) or 0.

use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use strips_learn::cnf::parse_dimacs;

fn main() -> ExitCode {
    let Some(path) = std::env::args().nth(1) else {
        eprintln!("usage: dimacs-cadical <file.cnf>");
        return ExitCode::from(1);
    };
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{path}: {e}");
            return ExitCode::from(1);
        }
    };
    let cnf = match parse_dimacs(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{path}: {e}");
            return ExitCode::from(1);
        }
    };
    let mut solver: cadical::Solver = cadical::Solver::new();
    for cl in &cnf.clauses {
        solver.add_clause(cl.iter().copied());
    }
    let out = io::stdout();
    let mut w = BufWriter::new(out.lock());
    let code = match solver.solve() {
        Some(true) => {
            let _ = writeln!(w, "s SATISFIABLE");
            let mut line = String::from("v");
            for v in 1..=cnf.num_vars as i32 {
                let lit = if solver.value(v) == Some(true) { v } else { -v };
                line.push_str(&format!(" {lit}"));
                if line.len() > 70 {
                    let _ = writeln!(w, "{line}");
                    line = String::from("v");
                }
            }
            let _ = writeln!(w, "{line} 0");
            10
        }
        Some(false) => {
            let _ = writeln!(w, "s UNSATISFIABLE");
            20
        }
        None => {
            let _ = writeln!(w, "s UNKNOWN");
            0
        }
    };
    let _ = w.flush();
    ExitCode::from(code)
}
