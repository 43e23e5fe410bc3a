#![no_main]

use dirac_core::{parse_expression, PhaseSpace};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let ps = PhaseSpace::with_parameters(3, ["r", "k"]).unwrap();
    let _ = parse_expression(text, &ps);
});
