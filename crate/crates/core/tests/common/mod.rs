#![allow(dead_code)]

use std::time::Instant;

use strips_learn::cnf::{Assignment, Cnf};
use strips_learn::sat::{SatError, SatSolver, SatVerdict, SolveResult};

/// In-process CaDiCaL, for tests that should not depend on an external
/// solver binary.
pub struct Cadical;

impl SatSolver for Cadical {
    fn solve(&self, cnf: &Cnf) -> Result<SolveResult, SatError> {
        let start = Instant::now();
        let mut s: cadical::Solver = cadical::Solver::new();
        for cl in cnf.clauses.iter() {
            s.add_clause(cl.iter().copied());
        }
        let n = cnf.num_vars();
        let (verdict, assignment) = match s.solve() {
            Some(true) => {
                let vals = (1..=n).map(|v| s.value(v as i32) == Some(true)).collect();
                (SatVerdict::Sat, Some(Assignment::new(vals)))
            }
            Some(false) => (SatVerdict::Unsat, None),
            None => (SatVerdict::Indet, None),
        };
        Ok(SolveResult {
            verdict,
            assignment,
            wall_secs: start.elapsed().as_secs_f64(),
            peak_mem_bytes: 0,
            detail: "in-process".into(),
        })
    }
}
