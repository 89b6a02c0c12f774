#![no_main]

use libfuzzer_sys::fuzz_target;
use strips_learn::hyperspace::Bounds;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let mut b = Bounds::default();
    if b.apply_config(text).is_ok() {
        b.validate().expect("accepted bounds are valid");
    }
});
