#![no_main]

use libfuzzer_sys::fuzz_target;
use strips_learn::cnf::parse_dimacs;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(d) = parse_dimacs(text) {
        for cl in &d.clauses {
            assert!(cl.iter().all(|&l| l != 0 && l.unsigned_abs() as usize <= d.num_vars));
        }
    }
});
