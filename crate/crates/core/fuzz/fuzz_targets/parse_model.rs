#![no_main]

use libfuzzer_sys::fuzz_target;
use strips_learn::cnf::{parse_model, SolverOutput};

// first byte picks the variable count
fuzz_target!(|data: &[u8]| {
    let Some((&n, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    if let Ok(SolverOutput::Sat(a)) = parse_model(text, n as usize) {
        assert_eq!(a.len(), n as usize);
    }
});
