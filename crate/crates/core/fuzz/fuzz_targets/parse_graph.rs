#![no_main]

use libfuzzer_sys::fuzz_target;
use strips_learn::graph::{parse_graph, write_graph};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = parse_graph(text) {
        let back = parse_graph(&write_graph(&g)).expect("written graphs parse");
        assert_eq!(back.digest(), g.digest());
    }
});
