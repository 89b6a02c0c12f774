#![no_main]

use libfuzzer_sys::fuzz_target;
use strips_learn::strips::text::{parse_problem, write_problem};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = parse_problem(text) {
        let again = parse_problem(&write_problem(&p.domain, &p.instances)).expect("written problems parse");
        assert_eq!(again.domain, p.domain);
        assert_eq!(again.instances, p.instances);
    }
});
